//! Vertex maps between complexes and their simpliciality checks.

use thiserror::Error;

use crate::complex::{ComplexRef, Simplex, VertexId};
use crate::subdivision::{barycentric, Subdivision};

/// Which structure a map is checked against.
///
/// `Simplicial`: the image vertex set of every domain simplex spans a simplex
/// of the codomain.
///
/// `QuasiSimplicial`: the map induces a simplicial map between the first
/// barycentric subdivisions (each domain simplex's image must span in the
/// codomain so that the subdivision functor is defined). A map whose codomain
/// is itself a subdivision complex and which is simplicial there is the
/// strict chain-valued form used by tower projections.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MapMode {
    Simplicial,
    QuasiSimplicial,
}

/// Witness against simpliciality: the offending domain simplex and its image
/// vertex set.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("simplex {domain_simplex:?} maps to non-spanning set {image:?}")]
pub struct MapViolation {
    pub domain_simplex: Simplex,
    pub image: Vec<VertexId>,
}

/// A total assignment of codomain vertices to domain vertices.
#[derive(Clone, Debug)]
pub struct VertexMap {
    domain: ComplexRef,
    codomain: ComplexRef,
    assignment: Vec<VertexId>,
}

impl VertexMap {
    pub fn new(domain: ComplexRef, codomain: ComplexRef, assignment: Vec<VertexId>) -> Self {
        assert_eq!(
            assignment.len(),
            domain.vertex_count(),
            "assignment must be total on domain vertices"
        );
        for v in &assignment {
            assert!((v.0 as usize) < codomain.vertex_count(), "image out of range");
        }
        VertexMap {
            domain,
            codomain,
            assignment,
        }
    }

    pub fn identity(complex: &ComplexRef) -> Self {
        VertexMap {
            domain: complex.clone(),
            codomain: complex.clone(),
            assignment: complex.vertex_ids().collect(),
        }
    }

    pub fn constant(domain: ComplexRef, codomain: ComplexRef, value: VertexId) -> Self {
        let n = domain.vertex_count();
        VertexMap::new(domain, codomain, vec![value; n])
    }

    pub fn domain(&self) -> &ComplexRef {
        &self.domain
    }

    pub fn codomain(&self) -> &ComplexRef {
        &self.codomain
    }

    pub fn apply(&self, v: VertexId) -> VertexId {
        self.assignment[v.0 as usize]
    }

    pub fn assignment(&self) -> &[VertexId] {
        &self.assignment
    }

    /// Image vertex set of a domain simplex (duplicates collapsed).
    pub fn image_simplex(&self, s: &Simplex) -> Simplex {
        Simplex::new(s.vertices().iter().map(|v| self.apply(*v)).collect())
    }

    /// Checks the map against `mode`; on failure returns the first offending
    /// simplex in canonical order.
    pub fn verify(&self, mode: MapMode) -> Result<(), MapViolation> {
        for s in self.domain.simplices() {
            let image = self.image_simplex(s);
            let ok = match mode {
                MapMode::Simplicial | MapMode::QuasiSimplicial => {
                    self.codomain.contains_simplex(&image)
                }
            };
            if !ok {
                return Err(MapViolation {
                    domain_simplex: s.clone(),
                    image: image.vertices().to_vec(),
                });
            }
        }
        Ok(())
    }

    pub fn is_simplicial(&self) -> bool {
        self.verify(MapMode::Simplicial).is_ok()
    }

    /// Injectivity on vertices.
    pub fn is_injective(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        self.assignment.iter().all(|v| seen.insert(*v))
    }

    /// Composition `other . self` (apply self first).
    pub fn then(&self, other: &VertexMap) -> VertexMap {
        assert!(std::sync::Arc::ptr_eq(&self.codomain, other.domain()));
        VertexMap {
            domain: self.domain.clone(),
            codomain: other.codomain().clone(),
            assignment: self.assignment.iter().map(|v| other.apply(*v)).collect(),
        }
    }
}

/// `check_map` of the toolkit: simpliciality of a vertex map in either mode.
pub fn check_map(f: &VertexMap, mode: MapMode) -> Result<(), MapViolation> {
    f.verify(mode)
}

/// The subdivision functor on maps: a simplicial `f : A -> C` induces the
/// simplicial map `beta f : beta A -> beta C` sending the barycentre of a
/// simplex to the barycentre of its image.
///
/// Defined exactly when `f` is quasi-simplicial (every image spans), which
/// gives the equivalence used by the checks: `f` is quasi-simplicial iff its
/// subdivision representative exists and is simplicial.
pub fn beta_map(
    f: &VertexMap,
    dom_sub: &Subdivision,
    cod_sub: &Subdivision,
) -> Result<VertexMap, MapViolation> {
    debug_assert!(std::sync::Arc::ptr_eq(dom_sub.base(), f.domain()));
    debug_assert!(std::sync::Arc::ptr_eq(cod_sub.base(), f.codomain()));
    let mut assignment = Vec::with_capacity(dom_sub.complex().vertex_count());
    for v in dom_sub.complex().vertex_ids() {
        let carrier = dom_sub.carrier(v);
        let image = f.image_simplex(carrier);
        match cod_sub.vertex_of(&image) {
            Some(w) => assignment.push(w),
            None => {
                return Err(MapViolation {
                    domain_simplex: carrier.clone(),
                    image: image.vertices().to_vec(),
                })
            }
        }
    }
    Ok(VertexMap::new(
        dom_sub.complex().clone(),
        cod_sub.complex().clone(),
        assignment,
    ))
}

/// Simplicial retraction `beta M -> M` picking the least vertex of each
/// carrier. Used to bring an iterated subdivision image back down one level.
pub fn vertex_pick_map(sub: &Subdivision) -> VertexMap {
    let assignment: Vec<VertexId> = sub
        .complex()
        .vertex_ids()
        .map(|v| sub.carrier(v).vertices()[0])
        .collect();
    VertexMap::new(sub.complex().clone(), sub.base().clone(), assignment)
}

/// Convenience: checks the quasi-simplicial invariant by materialising the
/// subdivision representative.
pub fn quasi_via_beta(f: &VertexMap) -> Result<VertexMap, MapViolation> {
    let dom_sub = barycentric(f.domain());
    let cod_sub = barycentric(f.codomain());
    beta_map(f, &dom_sub, &cod_sub)
}
