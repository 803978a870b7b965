//! The lifting property of step projections: solving commuting squares with
//! fresh copies, and the uniqueness isomorphism between steps over one base.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::complex::{ComplexRef, VertexId};
use crate::maps::{MapMode, MapViolation, VertexMap};
use crate::noebeling::NoebelingStep;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("fiber over {0} exhausted: kappa copies insufficient")]
    InsufficientCopies(String),
    #[error("square does not commute at vertex {0}")]
    NotCommuting(String),
    #[error("domain has dimension {dim}, bound is {bound}")]
    DimensionTooHigh { dim: usize, bound: usize },
    #[error("subcomplex is not downward closed in its parent")]
    BadSubcomplex,
    #[error("map is not quasi-simplicial: {0}")]
    NotQuasiSimplicial(MapViolation),
    #[error("lift is not simplicial: {0}")]
    NotSimplicial(MapViolation),
    #[error("fiber mismatch over {0}: {1} vs {2} copies")]
    FiberMismatch(String, usize, usize),
    #[error("steps are over different bases")]
    BaseMismatch,
}

/// A commuting square to be lifted: a simplicial `g` on a subcomplex `B` of
/// `A` and a quasi-simplicial `G` on all of `A` (given in its chain-valued
/// form, i.e. simplicial into the subdivision the step projects onto), with
/// `pi . g = G` on `B`.
#[derive(Clone, Debug)]
pub struct LiftProblem<'a> {
    pub step: &'a NoebelingStep,
    /// Domain complex `A`, of dimension at most the step's `n`.
    pub a: ComplexRef,
    /// Vertices of the subcomplex `B` on which `g` is prescribed.
    pub b_vertices: BTreeSet<VertexId>,
    /// Prescribed values on `B`: vertex of `A` -> vertex of the step result.
    pub g: BTreeMap<VertexId, VertexId>,
    /// The quasi-simplicial leg: vertex of `A` -> vertex of the subdivision.
    pub big_g: VertexMap,
}

impl<'a> LiftProblem<'a> {
    fn validate(&self) -> Result<(), LiftError> {
        let n = self.step.n();
        if let Some(dim) = self.a.dim() {
            if dim > n {
                return Err(LiftError::DimensionTooHigh { dim, bound: n });
            }
        }
        if let Err(v) = self.big_g.verify(MapMode::Simplicial) {
            return Err(LiftError::NotQuasiSimplicial(v));
        }
        if self.g.len() != self.b_vertices.len()
            || !self.b_vertices.iter().all(|v| self.g.contains_key(v))
        {
            return Err(LiftError::BadSubcomplex);
        }
        for (v, image) in &self.g {
            if self.step.base_of(*image) != self.big_g.apply(*v) {
                return Err(LiftError::NotCommuting(self.a.label(*v).to_string()));
            }
        }
        Ok(())
    }
}

/// Solves the lifting square: extends `g` to a simplicial map `A -> K` over
/// `G`, injective off `B` with images avoiding the used copies.
///
/// Vertices of `A \ B` are processed in canonical order; each receives the
/// least copy over its `G`-image not already used by `g` or by an earlier
/// assignment. Simpliciality of the output is automatic from fiber fullness
/// (any `<= n+1` images whose bases span a subdivision simplex span a result
/// simplex) and is re-verified exhaustively before returning.
pub fn solve_lift(prob: &LiftProblem<'_>) -> Result<VertexMap, LiftError> {
    prob.validate()?;
    let step = prob.step;
    let kappa = step.kappa();

    // copies already taken over each subdivision vertex
    let mut used: BTreeMap<VertexId, BTreeSet<u32>> = BTreeMap::new();
    for image in prob.g.values() {
        used.entry(step.base_of(*image))
            .or_default()
            .insert(step.copy_of(*image));
    }

    let fiber_lookup: BTreeMap<(VertexId, u32), VertexId> = step
        .result()
        .vertex_ids()
        .map(|v| ((step.base_of(v), step.copy_of(v)), v))
        .collect();

    let mut assignment: Vec<VertexId> = Vec::with_capacity(prob.a.vertex_count());
    for v in prob.a.vertex_ids() {
        if let Some(image) = prob.g.get(&v) {
            assignment.push(*image);
            continue;
        }
        let base = prob.big_g.apply(v);
        let taken = used.entry(base).or_default();
        let fresh = (0..kappa).find(|c| !taken.contains(c));
        match fresh {
            Some(c) => {
                taken.insert(c);
                assignment.push(fiber_lookup[&(base, c)]);
            }
            None => {
                return Err(LiftError::InsufficientCopies(
                    step.subdivision().complex().label(base).to_string(),
                ))
            }
        }
    }

    let lift = VertexMap::new(prob.a.clone(), step.result().clone(), assignment);
    lift.verify(MapMode::Simplicial)
        .map_err(LiftError::NotSimplicial)?;
    debug_assert!(lift_clauses_hold(prob, &lift));
    Ok(lift)
}

/// The three clauses of the lifting property, checkable exactly: the square
/// commutes everywhere, the lift restricts to `g` on `B`, and it is injective
/// off `B` with images disjoint from `g(B)`.
pub fn lift_clauses_hold(prob: &LiftProblem<'_>, lift: &VertexMap) -> bool {
    let step = prob.step;
    let commutes = prob
        .a
        .vertex_ids()
        .all(|v| step.base_of(lift.apply(v)) == prob.big_g.apply(v));
    let restricts = prob
        .b_vertices
        .iter()
        .all(|v| lift.apply(*v) == prob.g[v]);
    let g_images: BTreeSet<VertexId> = prob.g.values().copied().collect();
    let mut fresh_seen = BTreeSet::new();
    let fresh_ok = prob
        .a
        .vertex_ids()
        .filter(|v| !prob.b_vertices.contains(v))
        .all(|v| {
            let image = lift.apply(v);
            !g_images.contains(&image) && fresh_seen.insert(image)
        });
    commutes && restricts && fresh_ok
}

/// The uniqueness isomorphism between two steps over the same base: matches
/// the `k`-th copy of each fiber of `p1` with the `k`-th copy of the same
/// fiber of `p2`. Any such fiberwise bijection extends to a simplicial
/// isomorphism because fibers are full; both directions are re-verified
/// exhaustively.
pub fn canonical_iso(p1: &NoebelingStep, p2: &NoebelingStep) -> Result<VertexMap, LiftError> {
    if !p1
        .subdivision()
        .complex()
        .same_complex(p2.subdivision().complex())
    {
        return Err(LiftError::BaseMismatch);
    }
    let beta = p1.subdivision().complex();
    let mut assignment = vec![VertexId(0); p1.result().vertex_count()];
    for b in beta.vertex_ids() {
        let f1 = p1.fiber_vertices(b);
        let f2 = p2.fiber_vertices(b);
        if f1.len() != f2.len() {
            return Err(LiftError::FiberMismatch(
                beta.label(b).to_string(),
                f1.len(),
                f2.len(),
            ));
        }
        for (v1, v2) in f1.iter().zip(f2.iter()) {
            assignment[v1.0 as usize] = *v2;
        }
    }
    let h = VertexMap::new(p1.result().clone(), p2.result().clone(), assignment);
    h.verify(MapMode::Simplicial)
        .map_err(LiftError::NotSimplicial)?;
    // p2 . h = p1 on every vertex
    for v in p1.result().vertex_ids() {
        if p2.base_of(h.apply(v)) != p1.base_of(v) {
            return Err(LiftError::NotCommuting(p1.result().label(v).to_string()));
        }
    }
    // simplicial the other way round as well
    let mut inverse = vec![VertexId(0); p2.result().vertex_count()];
    for v in p1.result().vertex_ids() {
        inverse[h.apply(v).0 as usize] = v;
    }
    let h_inv = VertexMap::new(p2.result().clone(), p1.result().clone(), inverse);
    h_inv
        .verify(MapMode::Simplicial)
        .map_err(LiftError::NotSimplicial)?;
    Ok(h)
}
