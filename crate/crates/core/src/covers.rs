//! Stage covers by pulled-back open stars: membership, mesh, the refinement
//! relation, and the small-steps containment check.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::complex::{ComplexRef, Simplex, VertexId};
use crate::metric::{QuadExt, ScaledPathMetric};
use crate::noebeling::NoebelingError;
use crate::tower::{project_point, FiniteStagePoint, Tower};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CoverError {
    #[error("no refinement witness for pair ({0}, {1})")]
    RefinementFailure(String, String),
    #[error("small-steps precondition fails at index {0}")]
    PreconditionFailed(usize),
    #[error(transparent)]
    Stage(#[from] NoebelingError),
}

/// The stage-`i` cover: one element per vertex `v` of `K_i`, denoting the set
/// of threads whose stage-`i` coordinate lies in the open star of `v`.
/// Elements are membership predicates; they are never materialised.
#[derive(Clone, Debug)]
pub struct StarCover {
    stage: usize,
    complex: ComplexRef,
    metric: ScaledPathMetric,
}

impl StarCover {
    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn complex(&self) -> &ComplexRef {
        &self.complex
    }

    pub fn metric(&self) -> &ScaledPathMetric {
        &self.metric
    }

    pub fn element_count(&self) -> usize {
        self.complex.vertex_count()
    }

    /// Membership of a finite-stage point (at stage >= this cover's stage) in
    /// the element of center `v`: the projected carrier must contain `v`.
    pub fn contains(&self, tower: &Tower, x: &FiniteStagePoint, v: VertexId) -> bool {
        assert!(x.stage >= self.stage);
        let projected = project_point(tower, x, self.stage);
        projected.simplex.contains(v)
    }

    /// Centers of all elements containing `x`: the projected carrier.
    pub fn elements_containing(&self, tower: &Tower, x: &FiniteStagePoint) -> Vec<VertexId> {
        assert!(x.stage >= self.stage);
        let projected = project_point(tower, x, self.stage);
        projected.simplex.vertices().to_vec()
    }

    /// Two elements intersect iff their centers are joined by a simplex.
    pub fn elements_intersect(&self, v: VertexId, w: VertexId) -> bool {
        v == w || self.complex.spans(&[v, w])
    }

    /// Max path-metric diameter of a closed combinatorial star, at this
    /// stage's scale. An upper bound for every open star's diameter, and
    /// never more than two edges.
    pub fn mesh(&self) -> QuadExt {
        self.metric.scale().scale_int(self.mesh_hops())
    }

    /// The mesh as a multiple of the scale `2^{-i/2}`.
    pub fn mesh_hops(&self) -> u64 {
        mesh_hops_of(&self.complex)
    }
}

/// Hop diameter of the worst closed star of a complex, capped at two: a
/// closed star has diameter at most two edges through its center.
pub fn mesh_hops_of(complex: &ComplexRef) -> u64 {
    let mut best = 0u64;
    for v in complex.vertex_ids() {
        let star = complex.closed_star_vertices(v);
        for (i, &u) in star.iter().enumerate() {
            for &w in &star[i + 1..] {
                if complex.spans(&[u, w]) {
                    best = best.max(1);
                } else {
                    return 2;
                }
            }
        }
    }
    best
}

/// Builds the cover of stage `i`, carrying the geodesic scale `2^{-i/2}`.
pub fn star_cover(tower: &Tower, stage: usize) -> Result<StarCover, CoverError> {
    tower.check_stage(stage)?;
    let complex = tower.stage(stage).clone();
    let metric = ScaledPathMetric::for_stage(complex.clone(), stage as u32);
    Ok(StarCover {
        stage,
        complex,
        metric,
    })
}

/// Witnesses that the stage-(i+1) cover refines the stage-i cover in the
/// squared sense: every intersecting pair of elements lies jointly inside a
/// single coarser element.
#[derive(Clone, Debug)]
pub struct RefinementCertificate {
    pub fine_stage: usize,
    /// `(v, w, z)` per intersecting pair of fine centers, `v <= w`; the
    /// union of their stars is contained in the pullback of the star of `z`.
    pub entries: Vec<(VertexId, VertexId, VertexId)>,
}

impl RefinementCertificate {
    /// Text lines `v w -> z`, suitable for golden-file diffing.
    pub fn dump_lines(&self, fine: &ComplexRef, coarse: &ComplexRef) -> String {
        let mut out = String::new();
        for (v, w, z) in &self.entries {
            out.push_str(&format!(
                "{} {} -> {}\n",
                fine.label(*v),
                fine.label(*w),
                coarse.label(*z)
            ));
        }
        out
    }
}

/// Produces and exhaustively verifies the refinement certificate for
/// `O_{i+1} < O_i`.
///
/// For an intersecting pair `v, w` the bases are nested, so any vertex of the
/// smaller base works as the witness `z`: every simplex containing `v` or `w`
/// maps to a chain whose maximal element contains `z`, hence both open stars
/// land inside the pullback of `ost z`.
pub fn refines_squared(tower: &Tower, stage: usize) -> Result<RefinementCertificate, CoverError> {
    tower.check_stage(stage + 1)?;
    let step = tower.step(stage);
    let base_of: Vec<VertexId> = tower
        .stage(stage + 1)
        .vertex_ids()
        .map(|v| step.base_of(v))
        .collect();
    refinement_certificate_over(tower.stage(stage + 1), &base_of, step.subdivision(), stage + 1)
}

/// Worker form of [`refines_squared`] operating on a fine complex, the
/// barycentre of each of its vertices, and the subdivision of the coarser
/// stage. Used directly on towers loaded from disk.
pub fn refinement_certificate_over(
    fine: &ComplexRef,
    base_of: &[VertexId],
    sub: &crate::subdivision::Subdivision,
    fine_stage: usize,
) -> Result<RefinementCertificate, CoverError> {
    // incidence: simplices containing each fine vertex
    let mut incident: Vec<Vec<&Simplex>> = vec![Vec::new(); fine.vertex_count()];
    for s in fine.simplices() {
        for v in s.vertices() {
            incident[v.0 as usize].push(s);
        }
    }

    let verify = |center: VertexId, z: VertexId| -> bool {
        incident[center.0 as usize].iter().all(|s| {
            let bases = Simplex::new(
                s.vertices()
                    .iter()
                    .map(|u| base_of[u.0 as usize])
                    .collect(),
            );
            sub.chain_max(&bases).contains(z)
        })
    };

    let mut entries = Vec::new();
    let mut pairs: Vec<(VertexId, VertexId)> =
        fine.vertex_ids().map(|v| (v, v)).collect();
    for e in fine.edges() {
        pairs.push((e.vertices()[0], e.vertices()[1]));
    }
    pairs.sort();

    for (v, w) in pairs {
        let base_v = sub.carrier(base_of[v.0 as usize]);
        let base_w = sub.carrier(base_of[w.0 as usize]);
        let small = if base_v.len() <= base_w.len() {
            base_v
        } else {
            base_w
        };
        let mut found = None;
        for z in small.vertices() {
            if verify(v, *z) && verify(w, *z) {
                found = Some(*z);
                break;
            }
        }
        match found {
            Some(z) => entries.push((v, w, z)),
            None => {
                return Err(CoverError::RefinementFailure(
                    fine.label(v).to_string(),
                    fine.label(w).to_string(),
                ))
            }
        }
    }
    Ok(RefinementCertificate {
        fine_stage,
        entries,
    })
}

/// Iterated star of a point with respect to a cover: for `k = 1` the
/// elements containing the point, for `k > 1` every element intersecting an
/// element of the previous iterate.
pub fn star_of_point(
    cover: &StarCover,
    tower: &Tower,
    x: &FiniteStagePoint,
    k: usize,
) -> BTreeSet<VertexId> {
    assert!(k >= 1);
    let mut current: BTreeSet<VertexId> = cover
        .elements_containing(tower, x)
        .into_iter()
        .collect();
    // elements intersect iff their centers are joined by a simplex, i.e.
    // adjacent in the 1-skeleton
    for _ in 1..k {
        let mut next = current.clone();
        for v in &current {
            next.extend(cover.complex.neighbors(*v).iter().copied());
        }
        current = next;
    }
    current
}

/// Small-steps check: given points `x_1 ... x_m` and covers `O_1 ... O_m`
/// with each consecutive pair sharing an element of the earlier cover,
/// verifies that every later point stays within the double star of every
/// earlier point.
///
/// The precondition (`x_{j+1}` in the star of `x_j` under `O_j`) is verified
/// first; its first violation is reported as an error.
pub fn small_steps_check(
    tower: &Tower,
    points: &[FiniteStagePoint],
    covers: &[StarCover],
) -> Result<bool, CoverError> {
    assert_eq!(points.len(), covers.len());
    for j in 0..points.len().saturating_sub(1) {
        let shared = covers[j]
            .elements_containing(tower, &points[j])
            .into_iter()
            .any(|v| covers[j].contains(tower, &points[j + 1], v));
        if !shared {
            return Err(CoverError::PreconditionFailed(j));
        }
    }
    for k in 0..points.len() {
        for i in k..points.len() {
            let st2 = star_of_point(&covers[k], tower, &points[k], 2);
            let inside = st2
                .iter()
                .any(|v| covers[k].contains(tower, &points[i], *v));
            if !inside {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::SimplicialComplex;
    use crate::tower::build_tower;

    const BUDGET: u128 = 10_000_000;

    fn edge_tower(depth: usize) -> Tower {
        let k = SimplicialComplex::from_generators(&["a", "b"], &[vec!["a", "b"]]).unwrap();
        build_tower(&k, 1, 3, depth, BUDGET).unwrap()
    }

    #[test]
    fn edge_cover_element_counts() {
        let t = edge_tower(1);
        assert_eq!(star_cover(&t, 0).unwrap().element_count(), 2);
        assert_eq!(star_cover(&t, 1).unwrap().element_count(), 9);
    }

    #[test]
    fn point_cover_is_single_element() {
        let k = SimplicialComplex::from_generators(&["a"], &[]).unwrap();
        let t = build_tower(&k, 1, 3, 0, BUDGET).unwrap();
        let c = star_cover(&t, 0).unwrap();
        assert_eq!(c.element_count(), 1);
        let a = t.stage(0).vertex_id("a").unwrap();
        assert!(c.contains(&t, &FiniteStagePoint::vertex(0, a), a));
    }

    #[test]
    fn stage_out_of_range() {
        let t = edge_tower(1);
        assert!(matches!(
            star_cover(&t, 5),
            Err(CoverError::Stage(NoebelingError::InvalidStage { .. }))
        ));
    }

    #[test]
    fn edge_interior_in_both_elements() {
        let t = edge_tower(1);
        let c = star_cover(&t, 0).unwrap();
        let k0 = t.stage(0);
        let a = k0.vertex_id("a").unwrap();
        let b = k0.vertex_id("b").unwrap();
        let mid = FiniteStagePoint::barycentre(0, Simplex::new(vec![a, b]));
        assert!(c.contains(&t, &mid, a));
        assert!(c.contains(&t, &mid, b));
    }

    #[test]
    fn mesh_of_edge_stage_zero() {
        let t = edge_tower(1);
        let c = star_cover(&t, 0).unwrap();
        assert_eq!(c.mesh_hops(), 1);
        assert_eq!(c.mesh(), QuadExt::one());
    }

    #[test]
    fn mesh_bound_all_stages() {
        let t = edge_tower(2);
        for i in 0..=2 {
            let c = star_cover(&t, i).unwrap();
            let bound = QuadExt::inv_sqrt2_pow(i as u32).scale_int(2);
            assert!(c.mesh() <= bound);
        }
    }

    #[test]
    fn mesh_partial_sums_below_geometric_bound() {
        // sum of 2 * 2^{-i/2} over all i is 4 + 2 sqrt(2)
        let t = edge_tower(2);
        let bound = QuadExt::from_ints(4, 2);
        let mut total = QuadExt::zero();
        let mut prev = QuadExt::zero();
        for i in 0..=2 {
            let c = star_cover(&t, i).unwrap();
            total = total + c.mesh();
            assert!(total > prev);
            prev = total.clone();
        }
        assert!(total < bound);
    }

    #[test]
    fn refinement_certificate_edge_tower() {
        let t = edge_tower(2);
        for i in 0..2 {
            let cert = refines_squared(&t, i).unwrap();
            assert!(!cert.entries.is_empty());
        }
    }

    #[test]
    fn refinement_witness_for_same_base_pair() {
        // two copies over base {a}: witness must be a, the only vertex of
        // the minimal base
        let t = edge_tower(1);
        let cert = refines_squared(&t, 0).unwrap();
        let k1 = t.stage(1);
        let v = k1.vertex_id("{a}#0").unwrap();
        let w = k1.vertex_id("{a}#1").unwrap();
        let entry = cert
            .entries
            .iter()
            .find(|(x, y, _)| (*x, *y) == (v, w) || (*x, *y) == (w, v))
            .unwrap();
        assert_eq!(t.stage(0).label(entry.2), "a");
    }

    #[test]
    fn refinement_witness_for_nested_bases() {
        let t = edge_tower(1);
        let cert = refines_squared(&t, 0).unwrap();
        let k1 = t.stage(1);
        let v = k1.vertex_id("{a}#0").unwrap();
        let w = k1.vertex_id("{a.b}#0").unwrap();
        let entry = cert
            .entries
            .iter()
            .find(|(x, y, _)| (*x, *y) == (v, w) || (*x, *y) == (w, v))
            .unwrap();
        assert_eq!(t.stage(0).label(entry.2), "a");
    }

    #[test]
    fn star_of_point_iterates() {
        let t = edge_tower(1);
        let c = star_cover(&t, 0).unwrap();
        let k0 = t.stage(0);
        let a = k0.vertex_id("a").unwrap();
        let b = k0.vertex_id("b").unwrap();
        let xa = FiniteStagePoint::vertex(0, a);
        // a vertex lies only in its own open star
        assert_eq!(
            star_of_point(&c, &t, &xa, 1),
            [a].into_iter().collect::<BTreeSet<_>>()
        );
        // the double star reaches the other endpoint through the open edge
        assert_eq!(
            star_of_point(&c, &t, &xa, 2),
            [a, b].into_iter().collect::<BTreeSet<_>>()
        );
        let mid = FiniteStagePoint::barycentre(0, Simplex::new(vec![a, b]));
        assert_eq!(
            star_of_point(&c, &t, &mid, 1),
            [a, b].into_iter().collect::<BTreeSet<_>>()
        );
    }

    #[test]
    fn small_steps_constant_sequence() {
        let t = edge_tower(2);
        let k2 = t.stage(2);
        let x = FiniteStagePoint::vertex(2, VertexId(0));
        let _ = k2;
        let covers = vec![star_cover(&t, 1).unwrap(), star_cover(&t, 2).unwrap()];
        let points = vec![x.clone(), x];
        assert_eq!(small_steps_check(&t, &points, &covers), Ok(true));
    }

    #[test]
    fn small_steps_detects_disjoint_jump() {
        let t = edge_tower(1);
        let k0 = t.stage(0);
        let a = k0.vertex_id("a").unwrap();
        let b = k0.vertex_id("b").unwrap();
        // vertices a and b lie in disjoint open stars at stage 0
        let covers = vec![star_cover(&t, 0).unwrap(), star_cover(&t, 0).unwrap()];
        let points = vec![
            FiniteStagePoint::vertex(0, a),
            FiniteStagePoint::vertex(0, b),
        ];
        assert_eq!(
            small_steps_check(&t, &points, &covers),
            Err(CoverError::PreconditionFailed(0))
        );
    }

    #[test]
    fn membership_stable_under_projection() {
        let t = edge_tower(2);
        let c = star_cover(&t, 1).unwrap();
        let k2 = t.stage(2);
        for (i, s) in k2.simplices().enumerate() {
            if i % 53 != 0 {
                continue;
            }
            let deep = FiniteStagePoint::barycentre(2, s.clone());
            let shallow = project_point(&t, &deep, 1);
            for v in t.stage(1).vertex_ids() {
                assert_eq!(
                    c.contains(&t, &deep, v),
                    c.contains(&t, &shallow, v)
                );
            }
        }
    }
}
