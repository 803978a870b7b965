//! First barycentric subdivision with carrier bookkeeping.
//!
//! Vertices of the subdivision are canonically the simplices of the base
//! complex; a vertex set spans a subdivision simplex iff the underlying base
//! simplices form a strict inclusion chain.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::complex::{ComplexRef, Simplex, SimplicialComplex, VertexId};

/// A complex together with its realisation as the first barycentric
/// subdivision of a base complex. `carrier` sends each subdivision vertex to
/// the base simplex it is the barycentre of.
#[derive(Debug, Clone)]
pub struct Subdivision {
    base: ComplexRef,
    complex: ComplexRef,
    carrier: Vec<Simplex>,
    lookup: HashMap<Simplex, VertexId>,
}

impl Subdivision {
    pub fn base(&self) -> &ComplexRef {
        &self.base
    }

    pub fn complex(&self) -> &ComplexRef {
        &self.complex
    }

    /// Base simplex a subdivision vertex is the barycentre of.
    pub fn carrier(&self, v: VertexId) -> &Simplex {
        &self.carrier[v.0 as usize]
    }

    /// Subdivision vertex sitting at the barycentre of a base simplex.
    pub fn vertex_of(&self, s: &Simplex) -> Option<VertexId> {
        self.lookup.get(s).copied()
    }

    /// The carrier chain of a subdivision simplex, sorted by inclusion.
    pub fn chain_of(&self, s: &Simplex) -> Vec<&Simplex> {
        let mut chain: Vec<&Simplex> = s.vertices().iter().map(|v| self.carrier(*v)).collect();
        chain.sort_by_key(|c| c.len());
        chain
    }

    /// Minimal element of the carrier chain.
    pub fn chain_min(&self, s: &Simplex) -> &Simplex {
        s.vertices()
            .iter()
            .map(|v| self.carrier(*v))
            .min_by_key(|c| c.len())
            .unwrap()
    }

    /// Maximal element of the carrier chain.
    pub fn chain_max(&self, s: &Simplex) -> &Simplex {
        s.vertices()
            .iter()
            .map(|v| self.carrier(*v))
            .max_by_key(|c| c.len())
            .unwrap()
    }
}

/// Builds the first barycentric subdivision of `base`.
pub fn barycentric(base: &ComplexRef) -> Subdivision {
    let simplices: Vec<&Simplex> = base.simplices().collect();
    let count = simplices.len();

    let mut labels: Vec<Arc<str>> = Vec::with_capacity(count);
    let mut carrier: Vec<Simplex> = Vec::with_capacity(count);
    let mut lookup: HashMap<Simplex, VertexId> = HashMap::with_capacity(count);
    for (i, s) in simplices.iter().enumerate() {
        labels.push(Arc::from(base.simplex_name(s).as_str()));
        carrier.push((*s).clone());
        lookup.insert((*s).clone(), VertexId(i as u32));
    }

    // Strict superset lists, restricted to containment; chains may skip
    // intermediate faces, so this is full inclusion, not the cover relation.
    // Candidates come from the sparsest vertex star rather than a full scan.
    let mut star: Vec<Vec<u32>> = vec![Vec::new(); base.vertex_count()];
    for (i, s) in simplices.iter().enumerate() {
        for v in s.vertices() {
            star[v.0 as usize].push(i as u32);
        }
    }
    let mut supersets: Vec<Vec<u32>> = vec![Vec::new(); count];
    for (i, s) in simplices.iter().enumerate() {
        let sparsest = s
            .vertices()
            .iter()
            .min_by_key(|v| star[v.0 as usize].len())
            .unwrap();
        for &j in &star[sparsest.0 as usize] {
            let t = simplices[j as usize];
            if s.len() < t.len() && s.is_face_of(t) {
                supersets[i].push(j);
            }
        }
        supersets[i].sort_unstable();
    }

    let mut chains: BTreeSet<Simplex> = BTreeSet::new();
    let mut stack: Vec<VertexId> = Vec::new();
    for start in 0..count {
        extend_chain(start as u32, &supersets, &mut stack, &mut chains);
    }

    let complex = SimplicialComplex::from_closed_simplices(labels, chains)
        .expect("chains are downward closed by construction");
    Subdivision {
        base: base.clone(),
        complex,
        carrier,
        lookup,
    }
}

fn extend_chain(
    at: u32,
    supersets: &[Vec<u32>],
    stack: &mut Vec<VertexId>,
    chains: &mut BTreeSet<Simplex>,
) {
    stack.push(VertexId(at));
    chains.insert(Simplex::new(stack.to_vec()));
    for &next in &supersets[at as usize] {
        extend_chain(next, supersets, stack, chains);
    }
    stack.pop();
}
