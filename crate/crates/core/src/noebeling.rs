//! The one-step construction: kappa labelled copies of every barycentre of
//! `K`, carrying the maximal `n`-dimensional simplicial structure for which
//! the copy-forgetting projection is simplicial into the subdivision.

use std::collections::BTreeSet;
use std::sync::Arc;

use itertools::Itertools;
use thiserror::Error;

use crate::complex::{ComplexRef, Simplex, SimplicialComplex, VertexId};
use crate::maps::{check_map, MapMode, MapViolation, VertexMap};
use crate::subdivision::{barycentric, Subdivision};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum NoebelingError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("stage budget exceeded: estimated {estimate} simplices, budget {budget}")]
    BudgetExceeded { estimate: u128, budget: u128 },
    #[error("stage {stage} out of range, tower depth {depth}")]
    InvalidStage { stage: usize, depth: usize },
    #[error("unknown simplex {0}")]
    InvalidSimplex(String),
    #[error("map is not quasi-simplicial: {0}")]
    NotQuasiSimplicial(MapViolation),
    #[error("fiber mismatch: {0}")]
    FiberMismatch(String),
}

/// One application of the construction to a complex `K`.
///
/// Vertices of `result` are pairs (barycentre of `K`, copy index); a vertex
/// set spans a simplex iff it has at most `n + 1` elements and its base set
/// spans a simplex of the subdivision, i.e. the bases form an inclusion
/// chain. The projection `pi` forgets the copy index.
#[derive(Debug, Clone)]
pub struct NoebelingStep {
    source: ComplexRef,
    subdivision: Subdivision,
    n: usize,
    kappa: u32,
    result: ComplexRef,
    base_of: Vec<VertexId>,
    copy_of: Vec<u32>,
}

impl NoebelingStep {
    pub fn source(&self) -> &ComplexRef {
        &self.source
    }

    pub fn subdivision(&self) -> &Subdivision {
        &self.subdivision
    }

    pub fn result(&self) -> &ComplexRef {
        &self.result
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    /// Base barycentre of a result vertex.
    pub fn base_of(&self, v: VertexId) -> VertexId {
        self.base_of[v.0 as usize]
    }

    pub fn copy_of(&self, v: VertexId) -> u32 {
        self.copy_of[v.0 as usize]
    }

    /// The projection as a simplicial map into the subdivision complex;
    /// reading the subdivision back into `K` makes it quasi-simplicial.
    pub fn pi(&self) -> VertexMap {
        VertexMap::new(
            self.result.clone(),
            self.subdivision.complex().clone(),
            self.base_of.clone(),
        )
    }

    /// Vertices over one barycentre, sorted by copy index.
    pub fn fiber_vertices(&self, base: VertexId) -> Vec<VertexId> {
        let mut verts: Vec<VertexId> = self
            .result
            .vertex_ids()
            .filter(|v| self.base_of(*v) == base)
            .collect();
        verts.sort_by_key(|v| self.copy_of(*v));
        verts
    }

    /// Full preimage of a subdivision simplex, as a complex of its own.
    pub fn fiber(&self, delta: &Simplex) -> Result<ComplexRef, NoebelingError> {
        if !self.subdivision.complex().contains_simplex(delta) {
            return Err(NoebelingError::InvalidSimplex(
                self.subdivision.complex().simplex_name(delta),
            ));
        }
        let keep: BTreeSet<VertexId> = self
            .result
            .vertex_ids()
            .filter(|v| delta.contains(self.base_of(*v)))
            .collect();
        Ok(self.result.induced(&keep))
    }

    /// Same step with the copy indexing permuted fiberwise. The simplex
    /// structure only sees bases, so the result is isomorphic; labels and the
    /// copy bookkeeping change.
    pub fn relabel_copies(&self, perms: &[Vec<u32>]) -> NoebelingStep {
        assert_eq!(perms.len(), self.subdivision.complex().vertex_count());
        for p in perms {
            let mut sorted = p.clone();
            sorted.sort_unstable();
            assert_eq!(
                sorted,
                (0..self.kappa).collect::<Vec<_>>(),
                "each fiber relabeling must be a permutation of the copies"
            );
        }
        let copy_of: Vec<u32> = self
            .result
            .vertex_ids()
            .map(|v| perms[self.base_of(v).0 as usize][self.copy_of(v) as usize])
            .collect();
        let labels: Vec<Arc<str>> = self
            .result
            .vertex_ids()
            .map(|v| {
                let base_label = self.subdivision.complex().label(self.base_of(v));
                Arc::from(format!("{}#{}", base_label, copy_of[v.0 as usize]).as_str())
            })
            .collect();
        let simplices: BTreeSet<Simplex> = self.result.simplices().cloned().collect();
        let result = SimplicialComplex::from_closed_simplices(labels, simplices)
            .expect("structure unchanged");
        NoebelingStep {
            source: self.source.clone(),
            subdivision: self.subdivision.clone(),
            n: self.n,
            kappa: self.kappa,
            result,
            base_of: self.base_of.clone(),
            copy_of,
        }
    }
}

/// Predicted simplex census of a step, by result dimension, from the chain
/// census of the subdivision. Over a chain of length `j` the number of copy
/// distributions of total size `d` is the coefficient of `x^d` in
/// `((1+x)^kappa - 1)^j`.
pub fn predicted_census(beta_census_by_dim: &[usize], n: usize, kappa: u32) -> Vec<u128> {
    let top = n + 1;
    // (1+x)^kappa - 1, truncated past x^top
    let mut base = vec![0u128; top + 1];
    for (d, slot) in base.iter_mut().enumerate().skip(1) {
        *slot = binomial(kappa as u128, d as u128);
    }
    let mut out = vec![0u128; top];
    for (dim, &count) in beta_census_by_dim.iter().enumerate() {
        let j = dim + 1;
        if count == 0 {
            continue;
        }
        let mut poly = vec![0u128; top + 1];
        poly[0] = 1;
        for _ in 0..j {
            poly = poly_mul(&poly, &base, top);
        }
        for d in j..=top {
            out[d - 1] += count as u128 * poly[d];
        }
    }
    out
}

fn poly_mul(a: &[u128], b: &[u128], top: usize) -> Vec<u128> {
    let mut out = vec![0u128; top + 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if i + j <= top && y != 0 {
                out[i + j] += x * y;
            }
        }
    }
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut out = 1u128;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

/// Builds one step. `budget` caps the total simplex count, checked against
/// the closed-form estimate before anything is allocated.
pub fn noebeling_step(
    source: &ComplexRef,
    n: usize,
    kappa: u32,
    budget: u128,
) -> Result<NoebelingStep, NoebelingError> {
    if kappa < 2 {
        return Err(NoebelingError::InvalidParameter(format!(
            "kappa must be at least 2, got {kappa}"
        )));
    }
    if n < 1 {
        return Err(NoebelingError::InvalidParameter(format!(
            "n must be at least 1, got {n}"
        )));
    }
    let subdivision = barycentric(source);
    let beta = subdivision.complex().clone();

    let estimate: u128 = predicted_census(&beta.census(), n, kappa).iter().sum();
    if estimate > budget {
        return Err(NoebelingError::BudgetExceeded { estimate, budget });
    }

    let beta_vertices = beta.vertex_count() as u32;
    let kappa_usize = kappa as usize;

    let mut labels: Vec<Arc<str>> = Vec::with_capacity((beta_vertices as usize) * kappa_usize);
    let mut base_of: Vec<VertexId> = Vec::with_capacity(labels.capacity());
    let mut copy_of: Vec<u32> = Vec::with_capacity(labels.capacity());
    for b in 0..beta_vertices {
        for c in 0..kappa {
            labels.push(Arc::from(
                format!("{}#{}", beta.label(VertexId(b)), c).as_str(),
            ));
            base_of.push(VertexId(b));
            copy_of.push(c);
        }
    }
    let vertex_at = |b: VertexId, c: u32| VertexId(b.0 * kappa + c);

    // subsets of the copy index range, grouped by size
    let copy_subsets: Vec<Vec<Vec<u32>>> = (0..=n + 1)
        .map(|size| {
            if size == 0 || size > kappa_usize {
                Vec::new()
            } else {
                (0..kappa).combinations(size).collect()
            }
        })
        .collect();

    let mut simplices: BTreeSet<Simplex> = BTreeSet::new();
    let mut assignment: Vec<&[u32]> = Vec::new();
    for delta in beta.simplices() {
        let chain = delta.vertices();
        if chain.len() > n + 1 {
            continue;
        }
        distribute_copies(
            chain,
            0,
            n + 1,
            &copy_subsets,
            &mut assignment,
            &mut |assignment| {
                let mut verts = Vec::new();
                for (slot, copies) in assignment.iter().enumerate() {
                    for &c in copies.iter() {
                        verts.push(vertex_at(chain[slot], c));
                    }
                }
                simplices.insert(Simplex::new(verts));
            },
        );
    }

    let result = SimplicialComplex::from_closed_simplices(labels, simplices)
        .expect("construction is downward closed");
    debug_assert_eq!(
        result.vertex_count(),
        kappa_usize * source.simplex_count(),
        "one fiber of kappa copies per barycentre"
    );
    Ok(NoebelingStep {
        source: source.clone(),
        subdivision,
        n,
        kappa,
        result,
        base_of,
        copy_of,
    })
}

fn distribute_copies<'a>(
    chain: &[VertexId],
    slot: usize,
    remaining: usize,
    copy_subsets: &'a [Vec<Vec<u32>>],
    assignment: &mut Vec<&'a [u32]>,
    emit: &mut impl FnMut(&[&'a [u32]]),
) {
    if slot == chain.len() {
        emit(assignment);
        return;
    }
    let slots_left = chain.len() - slot;
    let max_here = remaining.saturating_sub(slots_left - 1);
    for size in 1..=max_here.min(copy_subsets.len() - 1) {
        for subset in &copy_subsets[size] {
            assignment.push(subset);
            distribute_copies(chain, slot + 1, remaining - size, copy_subsets, assignment, emit);
            assignment.pop();
        }
    }
}

/// Whether a complex is the full simplex structure of dimension at most `n`
/// on its vertex set: nonempty, every vertex subset of size at most `n + 1`
/// spans, and nothing bigger does.
pub fn is_full_complex(c: &SimplicialComplex, n: usize) -> bool {
    let verts: Vec<VertexId> = c.vertex_ids().collect();
    if verts.is_empty() {
        return false;
    }
    if c.dim().is_none_or(|d| d > n) {
        return false;
    }
    for size in 1..=(n + 1).min(verts.len()) {
        for subset in verts.iter().copied().combinations(size) {
            if !c.spans(&subset) {
                return false;
            }
        }
    }
    true
}

/// Fiber-fullness over every simplex of a subdivision, for a map given as a
/// simplicial map into the subdivision complex (the strict chain-valued
/// presentation of a quasi-simplicial map). This is the decidable form of
/// `n`-regularity: full simplices have vanishing homotopy groups in every
/// dimension below their own.
pub fn is_n_regular_into_subdivision(
    p: &VertexMap,
    sub: &Subdivision,
    n: usize,
) -> Result<bool, NoebelingError> {
    if let Err(v) = p.verify(MapMode::Simplicial) {
        return Err(NoebelingError::NotQuasiSimplicial(v));
    }
    let beta = sub.complex();
    let domain = p.domain();

    let mut preimages: Vec<Vec<VertexId>> = vec![Vec::new(); beta.vertex_count()];
    for v in domain.vertex_ids() {
        preimages[p.apply(v).0 as usize].push(v);
    }
    // simplices too big to fit in an n-dimensional full fiber
    let oversized: Vec<&Simplex> = domain.simplices().filter(|s| s.len() > n + 1).collect();

    for delta in beta.simplices() {
        let mut fiber: Vec<VertexId> = Vec::new();
        for b in delta.vertices() {
            fiber.extend_from_slice(&preimages[b.0 as usize]);
        }
        if fiber.is_empty() {
            return Ok(false);
        }
        for size in 2..=(n + 1).min(fiber.len()) {
            for subset in fiber.iter().copied().combinations(size) {
                if !domain.spans(&subset) {
                    return Ok(false);
                }
            }
        }
        for big in &oversized {
            if big.vertices().iter().all(|v| fiber.contains(v)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `n`-regularity of a plain vertex map `p : A -> C`: fibers are taken over
/// the simplices of the subdivision of `C`, with vertices of `C` read as the
/// barycentres of their singletons. The precondition is the quasi-simplicial
/// check; failing it is an error rather than a negative verdict.
pub fn is_n_regular(p: &VertexMap, n: usize) -> Result<bool, NoebelingError> {
    if let Err(v) = check_map(p, MapMode::QuasiSimplicial) {
        return Err(NoebelingError::NotQuasiSimplicial(v));
    }
    let sub = barycentric(p.codomain());
    let assignment: Vec<VertexId> = p
        .assignment()
        .iter()
        .map(|w| {
            sub.vertex_of(&Simplex::singleton(*w))
                .expect("every vertex has a singleton barycentre")
        })
        .collect();
    let coerced = VertexMap::new(p.domain().clone(), sub.complex().clone(), assignment);
    // the coerced map need not be simplicial into the subdivision; fibers are
    // still well defined, so run the fiber check directly
    let beta = sub.complex();
    let domain = coerced.domain().clone();
    let mut preimages: Vec<Vec<VertexId>> = vec![Vec::new(); beta.vertex_count()];
    for v in domain.vertex_ids() {
        preimages[coerced.apply(v).0 as usize].push(v);
    }
    let oversized: Vec<&Simplex> = domain.simplices().filter(|s| s.len() > n + 1).collect();
    for delta in beta.simplices() {
        let mut fiber: Vec<VertexId> = Vec::new();
        for b in delta.vertices() {
            fiber.extend_from_slice(&preimages[b.0 as usize]);
        }
        if fiber.is_empty() {
            return Ok(false);
        }
        for size in 2..=(n + 1).min(fiber.len()) {
            for subset in fiber.iter().copied().combinations(size) {
                if !domain.spans(&subset) {
                    return Ok(false);
                }
            }
        }
        for big in &oversized {
            if big.vertices().iter().all(|v| fiber.contains(v)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `n`-regularity of a step's projection (always true by construction; kept
/// as an executable check).
pub fn is_n_regular_step(step: &NoebelingStep) -> Result<bool, NoebelingError> {
    is_n_regular_into_subdivision(&step.pi(), step.subdivision(), step.n())
}
