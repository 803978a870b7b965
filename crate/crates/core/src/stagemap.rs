//! Maps from a test complex into a finite stage: subdivision ladders, exact
//! affine evaluation, star carriers and the carrier-based extension.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::complex::{ComplexRef, Simplex, VertexId};
use crate::covers::StarCover;
use crate::maps::{MapMode, MapViolation, VertexMap};
use crate::metric::{QuadExt, ScaledPathMetric};
use crate::subdivision::{barycentric, Subdivision};
use crate::tower::{support_at_stage, FiniteStagePoint, Tower};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum CarrierError {
    #[error("carrier condition violated: {0}")]
    CarrierViolation(String),
    #[error("cover multiplicity {found} exceeds bound {bound}")]
    MultiplicityTooHigh { found: usize, bound: usize },
    #[error("map not simplicial: {0}")]
    NotSimplicial(MapViolation),
}

/// Iterated barycentric subdivisions of one base complex, built on demand.
/// Level `0` is the base itself.
#[derive(Debug)]
pub struct SubdivisionLadder {
    base: ComplexRef,
    levels: Vec<Subdivision>,
}

impl SubdivisionLadder {
    pub fn new(base: ComplexRef) -> Self {
        SubdivisionLadder {
            base,
            levels: Vec::new(),
        }
    }

    pub fn base(&self) -> &ComplexRef {
        &self.base
    }

    pub fn ensure(&mut self, level: usize) {
        while self.levels.len() < level {
            let prev = self.complex_at(self.levels.len()).clone();
            self.levels.push(barycentric(&prev));
        }
    }

    pub fn complex_at(&self, level: usize) -> &ComplexRef {
        if level == 0 {
            &self.base
        } else {
            self.levels[level - 1].complex()
        }
    }

    /// Subdivision from level `t` to level `t + 1`.
    pub fn subdivision(&self, t: usize) -> &Subdivision {
        &self.levels[t]
    }

    /// Position of a level-`s` vertex as barycentric coordinates over a
    /// simplex of level `t <= s`. Exact rationals.
    pub fn coords_at_level(
        &self,
        s: usize,
        v: VertexId,
        t: usize,
    ) -> (Simplex, Vec<BigRational>) {
        assert!(t <= s);
        if s == t {
            return (
                Simplex::singleton(v),
                vec![BigRational::from_integer(BigInt::from(1))],
            );
        }
        // v is the barycentre of a level-(s-1) simplex
        let carrier = self.subdivision(s - 1).carrier(v).clone();
        let share = BigRational::new(BigInt::from(1), BigInt::from(carrier.len()));
        let mut weight: BTreeMap<VertexId, BigRational> = BTreeMap::new();
        for u in carrier.vertices() {
            let (sup, coords) = self.coords_at_level(s - 1, *u, t);
            for (w, c) in sup.vertices().iter().zip(coords) {
                let add = &share * c;
                weight
                    .entry(*w)
                    .and_modify(|acc| *acc += add.clone())
                    .or_insert(add);
            }
        }
        let simplex = Simplex::new(weight.keys().copied().collect());
        let coords = simplex
            .vertices()
            .iter()
            .map(|w| weight[w].clone())
            .collect();
        (simplex, coords)
    }

    /// Positions of every level-`s` vertex over level `t`, computed in one
    /// pass up the ladder.
    pub fn positions_table(&self, s: usize, t: usize) -> Vec<(Simplex, Vec<BigRational>)> {
        assert!(t <= s);
        let mut table: Vec<(Simplex, Vec<BigRational>)> = self
            .complex_at(t)
            .vertex_ids()
            .map(|v| {
                (
                    Simplex::singleton(v),
                    vec![BigRational::from_integer(BigInt::from(1))],
                )
            })
            .collect();
        for lvl in t..s {
            let sub = self.subdivision(lvl);
            let next: Vec<(Simplex, Vec<BigRational>)> = sub
                .complex()
                .vertex_ids()
                .map(|v| {
                    let carrier = sub.carrier(v);
                    let share =
                        BigRational::new(BigInt::from(1), BigInt::from(carrier.len()));
                    let mut weight: BTreeMap<VertexId, BigRational> = BTreeMap::new();
                    for u in carrier.vertices() {
                        let (sup, coords) = &table[u.0 as usize];
                        for (w, c) in sup.vertices().iter().zip(coords) {
                            let add = &share * c;
                            weight
                                .entry(*w)
                                .and_modify(|acc| *acc += add.clone())
                                .or_insert(add);
                        }
                    }
                    let simplex = Simplex::new(weight.keys().copied().collect());
                    let coords = simplex
                        .vertices()
                        .iter()
                        .map(|w| weight[w].clone())
                        .collect();
                    (simplex, coords)
                })
                .collect();
            table = next;
        }
        table
    }

    /// The vertex of the level-`s` complex sitting on a base vertex.
    pub fn base_vertex_at_level(&self, s: usize, y: VertexId) -> VertexId {
        let mut v = y;
        for lvl in 0..s {
            v = self
                .subdivision(lvl)
                .vertex_of(&Simplex::singleton(v))
                .expect("base vertices persist through subdivision");
        }
        v
    }

    /// Base metric rescaled for a level: each subdivision halves edge-path
    /// distances between base vertices, so the edge length halves with depth.
    pub fn metric_at(&self, level: usize, base_scale: &QuadExt) -> ScaledPathMetric {
        let mut scale = base_scale.clone();
        let half = QuadExt::from_ratio(1, 2);
        for _ in 0..level {
            scale = scale * half.clone();
        }
        ScaledPathMetric::new(self.complex_at(level).clone(), scale)
    }
}

/// A map from the test space into a finite stage: a simplicial vertex map
/// from some subdivision level of the base into the stage complex.
#[derive(Clone, Debug)]
pub struct StageMap {
    pub level: usize,
    pub stage: usize,
    pub map: VertexMap,
}

impl StageMap {
    pub fn new(level: usize, stage: usize, map: VertexMap) -> Self {
        StageMap { level, stage, map }
    }

    /// Exact value at a vertex of a deeper subdivision level: the affine
    /// extension evaluated at that point.
    pub fn eval_at(
        &self,
        ladder: &SubdivisionLadder,
        level: usize,
        v: VertexId,
    ) -> FiniteStagePoint {
        assert!(level >= self.level);
        let (support, coords) = ladder.coords_at_level(level, v, self.level);
        let mut weight: BTreeMap<VertexId, BigRational> = BTreeMap::new();
        for (u, c) in support.vertices().iter().zip(coords) {
            let image = self.map.apply(*u);
            weight
                .entry(image)
                .and_modify(|acc| *acc += c.clone())
                .or_insert(c);
        }
        let simplex = Simplex::new(weight.keys().copied().collect());
        let coords = simplex
            .vertices()
            .iter()
            .map(|w| weight[w].clone())
            .collect();
        FiniteStagePoint::new(self.stage, simplex, coords)
    }

    /// Carrier simplex of the map on a domain simplex: the image vertex set.
    pub fn image_simplex(&self, s: &Simplex) -> Simplex {
        self.map.image_simplex(s)
    }

    /// Whether the map is injective on vertices.
    pub fn is_injective(&self) -> bool {
        self.map.is_injective()
    }
}

/// A carrier valued in stage cover elements: the open-star cover of a
/// subdivision level of the test space, each star assigned a center vertex
/// of the stage complex.
///
/// Subfamilies of open stars share a point exactly when their centers span a
/// simplex, so the carrier condition is simpliciality of the assignment.
#[derive(Clone, Debug)]
pub struct StarCarrier {
    pub level: usize,
    pub stage: usize,
    /// Assignment, per domain vertex, of the target star center.
    pub centers: VertexMap,
}

impl StarCarrier {
    /// Checks multiplicity (the cover's multiplicity is the domain dimension
    /// plus one) and the carrier condition.
    pub fn validate(&self, n: usize) -> Result<(), CarrierError> {
        let mult = self.centers.domain().dim().map_or(1, |d| d + 1);
        if mult > n + 1 {
            return Err(CarrierError::MultiplicityTooHigh {
                found: mult,
                bound: n + 1,
            });
        }
        self.centers
            .verify(MapMode::Simplicial)
            .map_err(|v| CarrierError::CarrierViolation(v.to_string()))
    }

    /// Target simplex assigned to a domain simplex: the span of the centers
    /// of the stars containing its interior.
    pub fn target_simplex(&self, s: &Simplex) -> Simplex {
        self.centers.image_simplex(s)
    }
}

/// Extends a partial stage map over the whole space along a carrier.
///
/// Vertices are processed by cover multiplicity (the strata of the carrier
/// argument) and receive a vertex of their assigned target simplex; for the
/// open-star carrier the interior of a vertex's star pins that choice to its
/// own center unless the partial map prescribes otherwise. The result is
/// re-verified to be simplicial and carried.
pub fn carrier_extend(
    carrier: &StarCarrier,
    partial: &BTreeMap<VertexId, VertexId>,
) -> Result<StageMap, CarrierError> {
    let domain = carrier.centers.domain().clone();
    let codomain = carrier.centers.codomain().clone();

    for (y, value) in partial {
        let delta = carrier.target_simplex(&Simplex::singleton(*y));
        if !delta.contains(*value) {
            return Err(CarrierError::CarrierViolation(format!(
                "partial value at {} lies outside its target simplex",
                domain.label(*y)
            )));
        }
    }

    // strata are trivial for open-star carriers (each vertex has carrier
    // multiplicity one: its own star), so the extension is the centers map
    // with the partial override
    let assignment: Vec<VertexId> = domain
        .vertex_ids()
        .map(|y| partial.get(&y).copied().unwrap_or(carrier.centers.apply(y)))
        .collect();
    let map = VertexMap::new(domain, codomain, assignment);
    map.verify(MapMode::Simplicial)
        .map_err(CarrierError::NotSimplicial)?;
    let out = StageMap::new(carrier.level, carrier.stage, map);
    if !is_carried(&out, carrier) {
        return Err(CarrierError::CarrierViolation(
            "extension left its carrier".to_string(),
        ));
    }
    Ok(out)
}

/// Whether `g` is carried by the carrier: on every domain simplex containing
/// a vertex `u`, the image must stay inside the star of `u`'s center, i.e.
/// the center must be a vertex of the image simplex.
pub fn is_carried(g: &StageMap, carrier: &StarCarrier) -> bool {
    let domain = g.map.domain();
    domain.simplices().all(|s| {
        let image = g.image_simplex(s);
        s.vertices()
            .iter()
            .all(|u| image.contains(carrier.centers.apply(*u)))
    })
}

/// `mesh st W` for the open-star cover of the domain: max diameter of the
/// union of stars meeting a given star, measured in the domain metric.
pub fn mesh_star_of_cover(metric: &ScaledPathMetric) -> QuadExt {
    let complex = metric.complex().clone();
    let mut worst = QuadExt::zero();
    for u in complex.vertex_ids() {
        // vertices of the union of closed stars meeting st(u)
        let mut verts = vec![u];
        for w in complex.neighbors(u) {
            verts.push(*w);
            verts.extend_from_slice(complex.neighbors(*w));
        }
        verts.sort_unstable();
        verts.dedup();
        if let Some(d) = metric.diameter_of(&verts).finite() {
            if *d > worst {
                worst = d.clone();
            }
        }
    }
    worst
}

/// Mesh of `g^{-1}(O)` for a stage cover `O`: per cover element, the diameter
/// of the union of closed domain cells whose image meets the element's star,
/// measured in the domain metric. The stage of `g` may be deeper than the
/// cover's; supports are pushed down the tower.
pub fn mesh_preimage(
    g: &StageMap,
    cover: &StarCover,
    tower: &Tower,
    metric: &ScaledPathMetric,
) -> QuadExt {
    mesh_preimage_excluding(g, cover, tower, metric, &|_| false)
}

/// Same as [`mesh_preimage`], ignoring domain cells for which `exclude`
/// holds (used to restrict off a pinned region).
pub fn mesh_preimage_excluding(
    g: &StageMap,
    cover: &StarCover,
    tower: &Tower,
    metric: &ScaledPathMetric,
    exclude: &dyn Fn(&Simplex) -> bool,
) -> QuadExt {
    assert!(g.stage >= cover.stage());
    let domain = g.map.domain().clone();
    let mut regions: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for s in domain.simplices() {
        if exclude(s) {
            continue;
        }
        let image = g.image_simplex(s);
        let support = support_at_stage(tower, g.stage, &image, cover.stage());
        for v in support.vertices() {
            regions
                .entry(*v)
                .or_default()
                .extend_from_slice(s.vertices());
        }
    }
    let mut worst = QuadExt::zero();
    for verts in regions.values_mut() {
        verts.sort_unstable();
        verts.dedup();
        if let Some(d) = metric.diameter_of(verts).finite() {
            if *d > worst {
                worst = d.clone();
            }
        }
    }
    worst
}

/// Builds a cycle complex with `len` vertices, a convenient test space.
pub fn cycle_complex(len: usize, prefix: &str) -> ComplexRef {
    use crate::complex::SimplicialComplex;
    let names: Vec<String> = (0..len).map(|i| format!("{prefix}{i}")).collect();
    let gens: Vec<Vec<String>> = (0..len)
        .map(|i| vec![names[i].clone(), names[(i + 1) % len].clone()])
        .collect();
    SimplicialComplex::from_generators(&names, &gens).unwrap()
}
