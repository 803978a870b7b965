//! Finite abstract simplicial complexes: interned vertices, a downward-closed
//! simplex set, open stars and nerves.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

/// Index of a vertex within one complex. Ids are dense, starting at 0, in the
/// canonical construction order of the complex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

/// Shared handle to an immutable complex.
pub type ComplexRef = Arc<SimplicialComplex>;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("generator references unknown vertex `{0}`")]
    InvalidGenerator(String),
    #[error("unknown vertex `{0}`")]
    InvalidVertex(String),
    #[error("unknown simplex `{0}`")]
    InvalidSimplex(String),
    #[error("duplicate vertex label `{0}`")]
    DuplicateVertex(String),
    #[error("simplex set is not downward closed at `{0}`")]
    NotDownwardClosed(String),
    #[error("empty simplex")]
    EmptySimplex,
}

/// A nonempty, strictly increasing set of vertex ids.
///
/// Ordering is by size first, then lexicographic, which fixes the canonical
/// enumeration order of every complex.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Simplex(Vec<VertexId>);

impl Simplex {
    pub fn new(mut verts: Vec<VertexId>) -> Self {
        verts.sort_unstable();
        verts.dedup();
        assert!(!verts.is_empty(), "simplex must be nonempty");
        Simplex(verts)
    }

    pub fn singleton(v: VertexId) -> Self {
        Simplex(vec![v])
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        self.0.iter().all(|v| other.contains(*v))
    }

    /// The (dim-1)-faces, one per omitted vertex. Empty for a vertex.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.0.len();
        (0..n).filter(move |_| n > 1).map(move |skip| {
            let verts = self
                .0
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, v)| *v)
                .collect();
            Simplex(verts)
        })
    }

    /// All nonempty subsets, including the simplex itself.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        let mut out = Vec::with_capacity((1usize << n) - 1);
        for mask in 1u32..(1 << n) {
            let verts: Vec<VertexId> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| self.0[i])
                .collect();
            out.push(Simplex(verts));
        }
        out
    }

    pub fn union(&self, other: &Simplex) -> Simplex {
        let mut verts = self.0.clone();
        verts.extend_from_slice(&other.0);
        Simplex::new(verts)
    }

    pub fn intersects(&self, other: &Simplex) -> bool {
        self.0.iter().any(|v| other.contains(*v))
    }
}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// A finite abstract simplicial complex.
///
/// Invariants, checked by every public constructor:
/// - the simplex set is downward closed;
/// - every vertex occurs as a singleton simplex and every simplex only uses
///   known vertices;
/// - `dim` is the maximum simplex size minus one.
///
/// Complexes are immutable after construction.
#[derive(Debug)]
pub struct SimplicialComplex {
    labels: Vec<Arc<str>>,
    index: HashMap<Arc<str>, VertexId>,
    simplices: BTreeSet<Simplex>,
    adjacency: Vec<Vec<VertexId>>,
    dim: Option<usize>,
}

impl SimplicialComplex {
    /// Downward closure of `generators` plus all singletons.
    pub fn from_generators<S: AsRef<str>>(
        vertices: &[S],
        generators: &[Vec<S>],
    ) -> Result<ComplexRef, ComplexError> {
        let labels = intern_labels(vertices)?;
        let index: HashMap<Arc<str>, VertexId> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), VertexId(i as u32)))
            .collect();

        let mut simplices = BTreeSet::new();
        for v in 0..labels.len() {
            simplices.insert(Simplex::singleton(VertexId(v as u32)));
        }
        for gen in generators {
            if gen.is_empty() {
                return Err(ComplexError::EmptySimplex);
            }
            let mut verts = Vec::with_capacity(gen.len());
            for l in gen {
                let id = index
                    .get(l.as_ref())
                    .ok_or_else(|| ComplexError::InvalidGenerator(l.as_ref().to_string()))?;
                verts.push(*id);
            }
            let top = Simplex::new(verts);
            for face in top.faces() {
                simplices.insert(face);
            }
        }
        Ok(Arc::new(Self::assemble(labels, index, simplices)))
    }

    /// Builds from an already downward-closed simplex set; validates closure.
    pub fn from_closed_simplices(
        labels: Vec<Arc<str>>,
        simplices: BTreeSet<Simplex>,
    ) -> Result<ComplexRef, ComplexError> {
        let index: HashMap<Arc<str>, VertexId> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), VertexId(i as u32)))
            .collect();
        if index.len() != labels.len() {
            let dup = labels
                .iter()
                .find(|l| labels.iter().filter(|m| m == l).count() > 1)
                .unwrap();
            return Err(ComplexError::DuplicateVertex(dup.to_string()));
        }
        for (v, label) in labels.iter().enumerate() {
            if !simplices.contains(&Simplex::singleton(VertexId(v as u32))) {
                return Err(ComplexError::NotDownwardClosed(label.to_string()));
            }
        }
        for s in &simplices {
            if let Some(v) = s.vertices().iter().find(|v| v.0 as usize >= labels.len()) {
                return Err(ComplexError::InvalidVertex(format!("#{}", v.0)));
            }
            for facet in s.facets() {
                if !simplices.contains(&facet) {
                    return Err(ComplexError::NotDownwardClosed(format!(
                        "{:?}",
                        s.vertices()
                    )));
                }
            }
        }
        Ok(Arc::new(Self::assemble(labels, index, simplices)))
    }

    fn assemble(
        labels: Vec<Arc<str>>,
        index: HashMap<Arc<str>, VertexId>,
        simplices: BTreeSet<Simplex>,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); labels.len()];
        for s in &simplices {
            if s.len() == 2 {
                let (a, b) = (s.vertices()[0], s.vertices()[1]);
                adjacency[a.0 as usize].push(b);
                adjacency[b.0 as usize].push(a);
            }
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let dim = simplices.iter().map(|s| s.dim()).max();
        SimplicialComplex {
            labels,
            index,
            simplices,
            adjacency,
            dim,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn simplex_count(&self) -> usize {
        self.simplices.len()
    }

    /// Number of simplices of each dimension, indexed by dimension.
    pub fn census(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.dim.map_or(0, |d| d + 1)];
        for s in &self.simplices {
            counts[s.dim()] += 1;
        }
        counts
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v.0 as usize]
    }

    pub fn label_arc(&self, v: VertexId) -> Arc<str> {
        self.labels[v.0 as usize].clone()
    }

    pub fn vertex_id(&self, label: &str) -> Option<VertexId> {
        self.index.get(label).copied()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.labels.len() as u32).map(VertexId)
    }

    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter()
    }

    pub fn contains_simplex(&self, s: &Simplex) -> bool {
        self.simplices.contains(s)
    }

    /// True iff the vertex set spans a simplex (complexes are downward closed,
    /// so this is plain membership).
    pub fn spans(&self, verts: &[VertexId]) -> bool {
        self.simplices.contains(&Simplex::new(verts.to_vec()))
    }

    pub fn edges(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(|s| s.len() == 2)
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.0 as usize]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v.0 as usize].len()
    }

    /// Closed star of `v`, as a vertex set (`v` plus its neighbours).
    pub fn closed_star_vertices(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        out.extend_from_slice(self.neighbors(v));
        out.sort_unstable();
        out
    }

    /// Maximal faces, in canonical order.
    pub fn maximal_faces(&self) -> Vec<&Simplex> {
        let mut has_coface: std::collections::HashSet<&Simplex> = std::collections::HashSet::new();
        let mut facet_buf = Vec::new();
        for s in &self.simplices {
            facet_buf.clear();
            facet_buf.extend(s.facets());
            for f in &facet_buf {
                if let Some(stored) = self.simplices.get(f) {
                    has_coface.insert(stored);
                }
            }
        }
        self.simplices
            .iter()
            .filter(|s| !has_coface.contains(*s))
            .collect()
    }

    /// Subcomplex induced on a vertex subset. Vertices are re-indexed densely
    /// but keep their labels.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> ComplexRef {
        let labels: Vec<Arc<str>> = keep.iter().map(|v| self.label_arc(*v)).collect();
        let remap: HashMap<VertexId, VertexId> = keep
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, VertexId(i as u32)))
            .collect();
        let simplices: BTreeSet<Simplex> = self
            .simplices
            .iter()
            .filter(|s| s.vertices().iter().all(|v| keep.contains(v)))
            .map(|s| Simplex::new(s.vertices().iter().map(|v| remap[v]).collect()))
            .collect();
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), VertexId(i as u32)))
            .collect();
        Arc::new(Self::assemble(labels, index, simplices))
    }

    /// Validation hook used by tests: re-checks downward closure exhaustively.
    pub fn is_downward_closed(&self) -> bool {
        self.simplices
            .iter()
            .all(|s| s.facets().all(|f| self.simplices.contains(&f)))
            && self
                .vertex_ids()
                .all(|v| self.simplices.contains(&Simplex::singleton(v)))
    }

    /// Human-readable name of a simplex: sorted vertex labels.
    pub fn simplex_name(&self, s: &Simplex) -> String {
        let mut labels: Vec<&str> = s.vertices().iter().map(|v| self.label(*v)).collect();
        labels.sort_unstable();
        format!("{{{}}}", labels.join("."))
    }

    /// Canonical text form, independent of construction order: sorted vertex
    /// labels, then maximal faces by sorted label lists. Used for digests.
    pub fn canonical_text(&self) -> String {
        let mut verts: Vec<&str> = self.labels.iter().map(|l| l.as_ref()).collect();
        verts.sort_unstable();
        let mut faces: Vec<Vec<&str>> = self
            .maximal_faces()
            .into_iter()
            .map(|s| {
                let mut ls: Vec<&str> = s.vertices().iter().map(|v| self.label(*v)).collect();
                ls.sort_unstable();
                ls
            })
            .collect();
        faces.sort();
        let mut out = String::new();
        for v in verts {
            out.push_str("v ");
            out.push_str(v);
            out.push('\n');
        }
        for f in faces {
            out.push_str("s ");
            out.push_str(&f.join(" "));
            out.push('\n');
        }
        out
    }

    /// Structural equality: same labels, same simplices under the label map.
    pub fn same_complex(&self, other: &SimplicialComplex) -> bool {
        self.canonical_text() == other.canonical_text()
    }
}

fn intern_labels<S: AsRef<str>>(labels: &[S]) -> Result<Vec<Arc<str>>, ComplexError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(labels.len());
    for l in labels {
        let l = l.as_ref();
        if !seen.insert(l.to_string()) {
            return Err(ComplexError::DuplicateVertex(l.to_string()));
        }
        out.push(Arc::from(l));
    }
    Ok(out)
}

/// Open star of a vertex set, held intensionally: the simplices containing a
/// center are never materialised as point sets. For a single vertex `v` this
/// is `ost v = {sigma : v in sigma}`; the general vertex-set form covers the
/// subcomplex case.
#[derive(Clone, Debug)]
pub struct StarSet {
    complex: ComplexRef,
    centers: Vec<VertexId>,
}

impl StarSet {
    pub fn centers(&self) -> &[VertexId] {
        &self.centers
    }

    pub fn complex(&self) -> &ComplexRef {
        &self.complex
    }

    /// The combinatorial star: every simplex meeting the center set.
    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.complex
            .simplices()
            .filter(move |s| self.centers.iter().any(|c| s.contains(*c)))
    }

    /// Two open stars intersect iff some simplex contains a center of each.
    pub fn intersects(&self, other: &StarSet) -> bool {
        debug_assert!(Arc::ptr_eq(&self.complex, &other.complex));
        self.complex.simplices().any(|s| {
            self.centers.iter().any(|c| s.contains(*c))
                && other.centers.iter().any(|c| s.contains(*c))
        })
    }

    /// Whether the closed cell of a subdivision simplex lies inside this open
    /// star. `chain` must be the strictly increasing carrier chain of the
    /// cell; the test is on its minimal element.
    pub fn contains_closed_chain(&self, chain: &[&Simplex]) -> bool {
        let min = chain[0];
        self.centers.iter().any(|c| min.contains(*c))
    }

    /// Whether the closed cell of a subdivision simplex meets this open star;
    /// the test is on the maximal chain element.
    pub fn meets_closed_chain(&self, chain: &[&Simplex]) -> bool {
        let max = chain[chain.len() - 1];
        self.centers.iter().any(|c| max.contains(*c))
    }
}

/// Open star of one vertex.
pub fn open_star(complex: &ComplexRef, v: VertexId) -> Result<StarSet, ComplexError> {
    if (v.0 as usize) >= complex.vertex_count() {
        return Err(ComplexError::InvalidVertex(format!("#{}", v.0)));
    }
    Ok(StarSet {
        complex: complex.clone(),
        centers: vec![v],
    })
}

/// Open star of a vertex set (the subcomplex case; only the vertex case is
/// exercised downstream).
pub fn open_star_set(
    complex: &ComplexRef,
    centers: &BTreeSet<VertexId>,
) -> Result<StarSet, ComplexError> {
    for v in centers {
        if (v.0 as usize) >= complex.vertex_count() {
            return Err(ComplexError::InvalidVertex(format!("#{}", v.0)));
        }
    }
    Ok(StarSet {
        complex: complex.clone(),
        centers: centers.iter().copied().collect(),
    })
}

/// Nerve of an indexed family of sets over opaque elements: indices span a
/// simplex iff the sets share an element. Runs in time linear in the total
/// element count: the index family of each element is a face of the nerve and
/// every nerve simplex arises that way.
pub fn nerve_of_sets<T: Ord + Clone, S: AsRef<str>>(
    names: &[S],
    sets: &[BTreeSet<T>],
) -> Result<ComplexRef, ComplexError> {
    assert_eq!(names.len(), sets.len());
    let mut elements: BTreeSet<T> = BTreeSet::new();
    for s in sets {
        elements.extend(s.iter().cloned());
    }
    let mut simplices = BTreeSet::new();
    for i in 0..names.len() {
        simplices.insert(Simplex::singleton(VertexId(i as u32)));
    }
    for e in &elements {
        let supporting: Vec<VertexId> = (0..sets.len() as u32)
            .map(VertexId)
            .filter(|i| sets[i.0 as usize].contains(e))
            .collect();
        if !supporting.is_empty() {
            for face in Simplex::new(supporting).faces() {
                simplices.insert(face);
            }
        }
    }
    let labels = intern_labels(names)?;
    SimplicialComplex::from_closed_simplices(labels, simplices)
}

/// Nerve of the open-star family of `centers` in `complex`: a center set
/// spans iff the stars share a point, which happens exactly when the centers
/// span a simplex of the complex.
pub fn nerve_of_stars(
    complex: &ComplexRef,
    centers: &[VertexId],
) -> Result<ComplexRef, ComplexError> {
    let names: Vec<Arc<str>> = centers.iter().map(|v| complex.label_arc(*v)).collect();
    let sets: Vec<BTreeSet<Simplex>> = centers
        .iter()
        .map(|c| {
            complex
                .simplices()
                .filter(|s| s.contains(*c))
                .cloned()
                .collect()
        })
        .collect();
    nerve_of_sets(&names, &sets)
}
