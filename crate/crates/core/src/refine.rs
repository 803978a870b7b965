//! Stage-to-stage refinement of maps into the tower, the finite-stage
//! strong-universality driver, and the embedding certificate.
//!
//! One refinement takes a simplicial map `f` into stage `i`, subdivides its
//! domain, picks for every new vertex a barycentre of the coarser stage
//! compatible with `f`'s carriers, and lifts the result to stage `i + 1`
//! with round-robin copy assignment. Candidate maps are built by a fixed
//! ladder of strategies (the subdivision thread of `f`, then carrier-local
//! reassignment aiming for injectivity, at growing subdivision depth) and
//! the first candidate passing every exact check wins.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::complex::{ComplexRef, Simplex, VertexId};
use crate::covers::{small_steps_check, star_cover, star_of_point, CoverError, StarCover};
use crate::maps::{MapMode, VertexMap};
use crate::metric::{QuadExt, ScaledPathMetric};
use crate::noebeling::NoebelingError;
use crate::stagemap::{mesh_preimage_excluding, StageMap, SubdivisionLadder};
use crate::tower::{support_at_stage, FiniteStagePoint, Tower};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum RefineError {
    #[error("no refinement strategy within the subdivision budget:\n{0}")]
    SubdivisionBudgetExceeded(String),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Stage(#[from] NoebelingError),
}

/// Pinning data for one refinement: the subcomplex on which the map must be
/// reproduced exactly, and a neighbourhood of it absorbing the transition
/// band. Both are downward-closed sets of base simplices.
#[derive(Clone, Debug, Default)]
pub struct PinRegion {
    pub pins: BTreeSet<Simplex>,
    pub hood: BTreeSet<Simplex>,
}

impl PinRegion {
    pub fn empty() -> Self {
        PinRegion::default()
    }

    pub fn everything(base: &ComplexRef) -> Self {
        let all: BTreeSet<Simplex> = base.simplices().cloned().collect();
        PinRegion {
            pins: all.clone(),
            hood: all,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.pins.is_empty()
    }

    pub fn base_vertex_count(&self) -> usize {
        let mut verts = BTreeSet::new();
        for s in &self.pins {
            verts.extend(s.vertices().iter().copied());
        }
        verts.len()
    }
}

/// What one refinement verified, for the diagnostics report.
#[derive(Clone, Debug)]
pub struct RefineReport {
    pub strategy: &'static str,
    pub level: usize,
    pub pinned_vertices: usize,
    pub closeness_ok: bool,
    /// mesh of the preimage of the target-stage cover off the neighbourhood
    pub fine_mesh_off_hood: QuadExt,
}

#[derive(Clone, Copy, Debug)]
enum Strategy {
    Subordinate(usize),
    Injective(usize),
}

impl Strategy {
    fn level(&self) -> usize {
        match self {
            Strategy::Subordinate(s) | Strategy::Injective(s) => *s,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Strategy::Subordinate(_) => "subordinate",
            Strategy::Injective(_) => "injective",
        }
    }
}

/// Extra acceptance predicate a candidate must satisfy; receives the grown
/// ladder alongside the candidate.
pub type AcceptFn<'a> = dyn Fn(&SubdivisionLadder, &StageMap) -> bool + 'a;

/// Refines `f` (a map into stage `i`) to a map into stage `i + 1` such that
/// on the pinned region the projection of the new map reproduces `f`
/// pointwise, the new map is stage-`i`-cover-close to `f` at every vertex,
/// and off the neighbourhood the preimages of the finer cover have mesh at
/// most `epsilon` in the domain metric.
#[allow(clippy::too_many_arguments)]
pub fn refine_map(
    tower: &Tower,
    ladder: &mut SubdivisionLadder,
    f: &StageMap,
    region: &PinRegion,
    epsilon: &QuadExt,
    base_scale: &QuadExt,
    extra_levels: usize,
    accept: &AcceptFn<'_>,
) -> Result<(StageMap, RefineReport), RefineError> {
    let stage = f.stage;
    tower.check_stage(stage + 1)?;
    let t = f.level;

    let strategies: Vec<Strategy> = if region.is_empty() {
        let mut v = vec![Strategy::Subordinate(t + 1), Strategy::Injective(t + 1)];
        for extra in 1..=extra_levels {
            v.push(Strategy::Injective(t + 1 + extra));
        }
        v
    } else {
        // exact pinning only matches the once-subdivided thread
        vec![Strategy::Subordinate(t + 1), Strategy::Injective(t + 1)]
    };

    let mut failures = String::new();
    for strat in strategies {
        match try_strategy(tower, ladder, f, region, epsilon, base_scale, strat, accept) {
            Ok(pair) => return Ok(pair),
            Err(reason) => {
                let _ = writeln!(
                    failures,
                    "{} at level {}: {}",
                    strat.name(),
                    strat.level(),
                    reason
                );
            }
        }
    }
    Err(RefineError::SubdivisionBudgetExceeded(failures))
}

#[allow(clippy::too_many_arguments)]
fn try_strategy(
    tower: &Tower,
    ladder: &mut SubdivisionLadder,
    f: &StageMap,
    region: &PinRegion,
    epsilon: &QuadExt,
    base_scale: &QuadExt,
    strat: Strategy,
    accept: &AcceptFn<'_>,
) -> Result<(StageMap, RefineReport), String> {
    let stage = f.stage;
    let s = strat.level();
    ladder.ensure(s);
    let domain = ladder.complex_at(s).clone();
    let step = tower.step(stage);
    let beta_sub = step.subdivision();
    let k_next = step.result().clone();

    // positions of the refined vertices over the base and over f's level
    let base_pos = ladder.positions_table(s, 0);
    let f_pos = ladder.positions_table(s, f.level);

    // carrier anchor of f at each refined vertex, and the subordinate value:
    // the barycentre of that anchor
    let mut anchors: Vec<Simplex> = Vec::with_capacity(domain.vertex_count());
    let mut values: Vec<VertexId> = Vec::with_capacity(domain.vertex_count());
    let mut pinned: Vec<bool> = Vec::with_capacity(domain.vertex_count());
    for u in domain.vertex_ids() {
        let anchor = f.map.image_simplex(&f_pos[u.0 as usize].0);
        let value = beta_sub
            .vertex_of(&anchor)
            .expect("image of a simplicial map is a barycentre");
        anchors.push(anchor);
        values.push(value);
        pinned.push(region.pins.contains(&base_pos[u.0 as usize].0));
    }

    // the transition band around the pinned region must stay inside the hood
    if !region.is_empty() {
        for cell in domain.simplices() {
            if cell.vertices().iter().any(|u| pinned[u.0 as usize]) {
                for u in cell.vertices() {
                    let supp = &base_pos[u.0 as usize].0;
                    if !region.hood.contains(supp) {
                        return Err(format!(
                            "star of the pinned region reaches {} outside the neighbourhood",
                            ladder.base().simplex_name(supp)
                        ));
                    }
                }
            }
        }
    }

    if let Strategy::Injective(_) = strat {
        reassign_injectively(&domain, beta_sub, &anchors, &pinned, &mut values)?;
    }

    // copy assignment per fiber: occurrences of one barycentre are blocked
    // along a skeleton walk, so when a fiber is oversubscribed the copy
    // reuse stays domain-local instead of pairing far-apart regions
    let fiber_lookup: BTreeMap<(VertexId, u32), VertexId> = k_next
        .vertex_ids()
        .map(|v| ((step.base_of(v), step.copy_of(v)), v))
        .collect();
    let kappa = step.kappa() as usize;
    let mut per_base: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for u in dfs_order(&domain) {
        per_base
            .entry(values[u.0 as usize])
            .or_default()
            .push(u.0 as usize);
    }
    let mut copy_at: Vec<u32> = vec![0; domain.vertex_count()];
    for occurrences in per_base.values() {
        let m = occurrences.len();
        for (k, idx) in occurrences.iter().enumerate() {
            copy_at[*idx] = if m <= kappa {
                k as u32
            } else {
                (k * kappa / m) as u32
            };
        }
    }
    let assignment: Vec<VertexId> = (0..domain.vertex_count())
        .map(|i| fiber_lookup[&(values[i], copy_at[i])])
        .collect();
    let map = VertexMap::new(domain.clone(), k_next, assignment);
    if let Err(v) = map.verify(MapMode::Simplicial) {
        return Err(format!("lift not simplicial: {v}"));
    }
    let g = StageMap::new(s, stage + 1, map);

    // (1) exact equality over the pinned region: the projected value must be
    // the point f assigns
    for u in domain.vertex_ids() {
        if !pinned[u.0 as usize] {
            continue;
        }
        let projected = FiniteStagePoint::barycentre(stage, anchors[u.0 as usize].clone());
        let expected = f.eval_at(ladder, s, u);
        if projected != expected {
            return Err(format!(
                "cannot pin vertex {} exactly (collapsing map?)",
                domain.label(u)
            ));
        }
    }

    // (2) cover-closeness at every vertex: the projected carrier must share
    // a stage-i star with f's carrier
    let closeness_ok = domain.vertex_ids().all(|u| {
        let new_carrier = beta_sub.carrier(values[u.0 as usize]);
        new_carrier.intersects(&anchors[u.0 as usize])
    });
    if !closeness_ok {
        return Err("candidate not cover-close to the source map".to_string());
    }

    // (3) fine mesh off the neighbourhood
    let fine_cover = star_cover(tower, stage + 1).map_err(|e| e.to_string())?;
    let metric = ladder.metric_at(s, base_scale);
    let exclude = |cell: &Simplex| -> bool {
        let supp = cell
            .vertices()
            .iter()
            .map(|u| &base_pos[u.0 as usize].0)
            .max_by_key(|s| s.len())
            .unwrap();
        region.hood.contains(supp)
    };
    let fine_mesh = mesh_preimage_excluding(&g, &fine_cover, tower, &metric, &exclude);
    if fine_mesh > *epsilon {
        return Err(format!(
            "fine mesh {fine_mesh} exceeds epsilon {epsilon} off the neighbourhood"
        ));
    }

    if !accept(ladder, &g) {
        return Err("extra acceptance predicate rejected the candidate".to_string());
    }

    let pinned_vertices = pinned.iter().filter(|p| **p).count();
    Ok((
        g,
        RefineReport {
            strategy: strat.name(),
            level: s,
            pinned_vertices,
            closeness_ok,
            fine_mesh_off_hood: fine_mesh,
        },
    ))
}

/// Depth-first walk of the 1-skeleton, component by component, neighbours in
/// canonical order. On a cycle this is the cyclic order, which is what makes
/// blocked copy assignment group nearby vertices.
fn dfs_order(domain: &ComplexRef) -> Vec<VertexId> {
    let mut order = Vec::with_capacity(domain.vertex_count());
    let mut seen = vec![false; domain.vertex_count()];
    for start in domain.vertex_ids() {
        if seen[start.0 as usize] {
            continue;
        }
        let mut stack = vec![start];
        seen[start.0 as usize] = true;
        while let Some(u) = stack.pop() {
            order.push(u);
            for w in domain.neighbors(u).iter().rev() {
                if !seen[w.0 as usize] {
                    seen[w.0 as usize] = true;
                    stack.push(*w);
                }
            }
        }
    }
    order
}

/// Greedy carrier-local reassignment towards vertex-injectivity: every free
/// vertex gets a barycentre whose carrier meets its anchor (preserving
/// closeness) and nests with the values of its already-assigned neighbours
/// (preserving simpliciality), preferring barycentres not yet used.
fn reassign_injectively(
    domain: &ComplexRef,
    beta_sub: &crate::subdivision::Subdivision,
    anchors: &[Simplex],
    pinned: &[bool],
    values: &mut [VertexId],
) -> Result<(), String> {
    let source = beta_sub.base().clone();
    let mut star_index: Vec<Vec<&Simplex>> = vec![Vec::new(); source.vertex_count()];
    for simplex in source.simplices() {
        for v in simplex.vertices() {
            star_index[v.0 as usize].push(simplex);
        }
    }
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    let mut assigned = vec![false; domain.vertex_count()];
    for (u, is_pinned) in pinned.iter().enumerate() {
        if *is_pinned {
            used.insert(values[u]);
            assigned[u] = true;
        }
    }
    // walk the 1-skeleton so each vertex faces at most one committed
    // neighbour until a cycle closes; blockwise id order corners itself
    let mut order: Vec<VertexId> = Vec::with_capacity(domain.vertex_count());
    let mut enqueued = assigned.clone();
    for start in domain.vertex_ids() {
        if enqueued[start.0 as usize] {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start]);
        enqueued[start.0 as usize] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for w in domain.neighbors(u) {
                if !enqueued[w.0 as usize] {
                    enqueued[w.0 as usize] = true;
                    queue.push_back(*w);
                }
            }
        }
    }
    for u in order {
        if assigned[u.0 as usize] {
            continue;
        }
        let anchor = &anchors[u.0 as usize];
        let mut candidates: Vec<&Simplex> = Vec::new();
        for z in anchor.vertices() {
            candidates.extend_from_slice(&star_index[z.0 as usize]);
        }
        candidates.sort();
        candidates.dedup();
        let neighbour_values: Vec<&Simplex> = domain
            .neighbors(u)
            .iter()
            .filter(|w| assigned[w.0 as usize])
            .map(|w| beta_sub.carrier(values[w.0 as usize]))
            .collect();
        let compatible = |c: &&&Simplex| {
            neighbour_values
                .iter()
                .all(|nv| c.is_face_of(nv) || nv.is_face_of(c))
        };
        let fresh = candidates
            .iter()
            .filter(compatible)
            .find(|c| !used.contains(&beta_sub.vertex_of(c).unwrap()));
        let choice = match fresh {
            Some(c) => *c,
            None => match candidates.iter().find(compatible) {
                Some(c) => *c,
                None => {
                    return Err(format!(
                        "no carrier-compatible value for vertex {}",
                        domain.label(u)
                    ))
                }
            },
        };
        let v = beta_sub.vertex_of(choice).unwrap();
        used.insert(v);
        values[u.0 as usize] = v;
        assigned[u.0 as usize] = true;
    }
    Ok(())
}

/// Per-stage diagnostics of a universality run.
#[derive(Clone, Debug)]
pub struct StageDiag {
    pub stage: usize,
    pub level: usize,
    pub strategy: &'static str,
    /// mesh of the coarser-cover preimage off the pinned region
    pub mesh_off_pins: QuadExt,
    /// same mesh without the restriction, for the decay trend
    pub global_mesh: QuadExt,
    pub pinned_base_vertices: usize,
    pub closeness_ok: bool,
}

/// Result of the finite-stage strong-universality loop.
pub struct UniversalityRun {
    pub maps: Vec<StageMap>,
    pub ladder: SubdivisionLadder,
    pub diags: Vec<StageDiag>,
    pub base_scale: QuadExt,
    pub small_steps_ok: bool,
}

impl UniversalityRun {
    pub fn final_map(&self) -> &StageMap {
        self.maps.last().unwrap()
    }

    /// Report lines, one per stage:
    /// `stage i: mesh=<rational> closeness=ok R_i=<vertex count>`.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for d in &self.diags {
            let mesh = if d.mesh_off_pins.is_rational() {
                format!("{}", d.mesh_off_pins.rational_part())
            } else {
                format!("{}", d.mesh_off_pins)
            };
            let _ = writeln!(
                out,
                "stage {}: mesh={} closeness={} R_{}={}",
                d.stage,
                mesh,
                if d.closeness_ok { "ok" } else { "FAIL" },
                d.stage,
                d.pinned_base_vertices
            );
        }
        let _ = writeln!(
            out,
            "small steps: {}",
            if self.small_steps_ok { "ok" } else { "FAIL" }
        );
        out
    }
}

/// Measures the mesh of the coarser-cover preimage of `g`, excluding cells
/// inside the `pins` region when given.
fn coarse_mesh(
    tower: &Tower,
    ladder: &SubdivisionLadder,
    g: &StageMap,
    cover: &StarCover,
    base_scale: &QuadExt,
    pins: Option<&BTreeSet<Simplex>>,
) -> QuadExt {
    let metric = ladder.metric_at(g.level, base_scale);
    let base_pos = ladder.positions_table(g.level, 0);
    let exclude = |cell: &Simplex| -> bool {
        match pins {
            None => false,
            Some(p) => {
                let supp = cell
                    .vertices()
                    .iter()
                    .map(|u| &base_pos[u.0 as usize].0)
                    .max_by_key(|s| s.len())
                    .unwrap();
                p.contains(supp)
            }
        }
    };
    mesh_preimage_excluding(g, cover, tower, &metric, &exclude)
}

/// Iterates refinement up the tower, reproducing the proof schedule: the
/// whole space is pinned at the first stage, later stages pin the closure of
/// the region where the double star of the current image is not yet inside a
/// single element of the target cover, and the mesh budget at stage `i` is
/// `1/i`, measured off the pinned region against the stage-`(i-1)` cover.
///
/// The domain metric is normalised to diameter one half, making the budgets
/// scale-free statements about the test space. The final stage must in
/// addition be injective on vertices.
pub fn universality_run(
    tower: &Tower,
    f0: StageMap,
    target_cover_stage: usize,
    depth: usize,
) -> Result<UniversalityRun, RefineError> {
    assert_eq!(f0.stage, 0, "the run starts from a stage-0 map");
    tower.check_stage(depth)?;
    let base = f0.map.domain().clone();
    let mut ladder = SubdivisionLadder::new(base.clone());

    let base_metric = ScaledPathMetric::new(base.clone(), QuadExt::one());
    let hop_diam = base_metric.hop_diameter().unwrap_or(0).max(1);
    let base_scale = QuadExt::from_ratio(1, 2 * hop_diam as i64);

    let target_cover = star_cover(tower, target_cover_stage)?;
    let mut maps: Vec<StageMap> = vec![f0];
    let mut diags: Vec<StageDiag> = Vec::new();

    for i in 1..=depth {
        let f = maps.last().unwrap().clone();
        let region = if i == 1 {
            PinRegion::everything(&base)
        } else {
            pin_region(tower, &ladder, &f, &target_cover, i - 1)?
        };
        let epsilon = QuadExt::from_ratio(1, i as i64);
        let coarse_cover = star_cover(tower, i - 1)?;

        let pins = region.pins.clone();
        let want_injective = i == depth;
        let eps = epsilon.clone();
        let scale = base_scale.clone();
        let cover_for_accept = coarse_cover.clone();
        let accept = move |ladder: &SubdivisionLadder, g: &StageMap| -> bool {
            let off_pins =
                coarse_mesh(tower, ladder, g, &cover_for_accept, &scale, Some(&pins));
            if off_pins > eps {
                return false;
            }
            !(want_injective && !g.is_injective())
        };

        let (g, report) = refine_map(
            tower,
            &mut ladder,
            &f,
            &region,
            &epsilon,
            &base_scale,
            4,
            &accept,
        )?;

        let mesh_off_pins = coarse_mesh(
            tower,
            &ladder,
            &g,
            &coarse_cover,
            &base_scale,
            Some(&region.pins),
        );
        let global_mesh = coarse_mesh(tower, &ladder, &g, &coarse_cover, &base_scale, None);
        diags.push(StageDiag {
            stage: i,
            level: report.level,
            strategy: report.strategy,
            mesh_off_pins,
            global_mesh,
            pinned_base_vertices: region.base_vertex_count(),
            closeness_ok: report.closeness_ok,
        });
        maps.push(g);
    }

    let small_steps_ok = check_vertex_trajectories(tower, &ladder, &maps)?;
    Ok(UniversalityRun {
        maps,
        ladder,
        diags,
        base_scale,
        small_steps_ok,
    })
}

/// The pinned region for the next refinement: closure of the base cells
/// whose current image has a double star not inside any single element of
/// the target cover.
fn pin_region(
    tower: &Tower,
    ladder: &SubdivisionLadder,
    f: &StageMap,
    target_cover: &StarCover,
    cover_stage: usize,
) -> Result<PinRegion, RefineError> {
    let cover = star_cover(tower, cover_stage)?;
    let domain = f.map.domain().clone();
    let base_pos = ladder.positions_table(f.level, 0);

    // per stage vertex v: target centers z whose star element swallows the
    // whole element of v
    let stage_complex = tower.stage(cover_stage).clone();
    let mut star_index: Vec<Vec<&Simplex>> = vec![Vec::new(); stage_complex.vertex_count()];
    for s in stage_complex.simplices() {
        for v in s.vertices() {
            star_index[v.0 as usize].push(s);
        }
    }
    let mut safe: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();

    let mut pins: BTreeSet<Simplex> = BTreeSet::new();
    for u in domain.vertex_ids() {
        let point = f.eval_at(ladder, f.level, u);
        let st2 = star_of_point(&cover, tower, &point, 2);
        let mut common: Option<BTreeSet<VertexId>> = None;
        for v in &st2 {
            let z_set = safe.entry(*v).or_insert_with(|| {
                let mut acc: Option<BTreeSet<VertexId>> = None;
                for s in &star_index[v.0 as usize] {
                    let supp =
                        support_at_stage(tower, cover_stage, s, target_cover.stage());
                    let verts: BTreeSet<VertexId> =
                        supp.vertices().iter().copied().collect();
                    acc = Some(match acc {
                        None => verts,
                        Some(a) => a.intersection(&verts).copied().collect(),
                    });
                }
                acc.unwrap_or_default()
            });
            common = Some(match common {
                None => z_set.clone(),
                Some(acc) => acc.intersection(z_set).copied().collect(),
            });
        }
        if common.is_none_or(|c| c.is_empty()) {
            for face in base_pos[u.0 as usize].0.faces() {
                pins.insert(face);
            }
        }
    }
    let mut hood = pins.clone();
    let base = ladder.base().clone();
    for s in base.simplices() {
        if pins
            .iter()
            .any(|p| p.vertices().iter().any(|v| s.contains(*v)))
        {
            for face in s.faces() {
                hood.insert(face);
            }
        }
    }
    Ok(PinRegion { pins, hood })
}

/// Trajectory check: at each original vertex of the test space, the images
/// under the successive maps form a small-steps sequence for the covers of
/// their stages.
fn check_vertex_trajectories(
    tower: &Tower,
    ladder: &SubdivisionLadder,
    maps: &[StageMap],
) -> Result<bool, RefineError> {
    if maps.len() <= 1 {
        return Ok(true);
    }
    let base = ladder.base().clone();
    let mut covers = Vec::new();
    for f in &maps[1..] {
        covers.push(star_cover(tower, f.stage)?);
    }
    for y in base.vertex_ids() {
        let mut points = Vec::new();
        for f in &maps[1..] {
            let u = ladder.base_vertex_at_level(f.level, y);
            points.push(f.eval_at(ladder, f.level, u));
        }
        match small_steps_check(tower, &points, &covers) {
            Ok(true) => {}
            Ok(false) => return Ok(false),
            Err(CoverError::PreconditionFailed(_)) => return Ok(false),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(true)
}

/// The closed-embedding certificate: ball-preimage diameters at the sampled
/// radii for every vertex of the target stage, the monotone-decrease check,
/// and the per-stage triple-star bound `diam g_i^{-1}(st^3 y) <= 5/i`.
pub struct CertificateReport {
    pub monotone_ok: bool,
    /// at the smallest radius the worst preimage diameter is strictly below
    /// the diameter of the test space
    pub separation_ok: bool,
    pub st3_ok: bool,
    pub pass: bool,
    pub table: String,
}

pub fn embedding_certificate(
    tower: &Tower,
    run: &UniversalityRun,
    radii: &[QuadExt],
) -> Result<CertificateReport, RefineError> {
    let g = run.final_map();
    let stage_metric =
        ScaledPathMetric::for_stage(tower.stage(g.stage).clone(), g.stage as u32);
    let domain_metric = run.ladder.metric_at(g.level, &run.base_scale);
    let domain = g.map.domain().clone();
    let target = tower.stage(g.stage).clone();

    let diam_y = {
        let verts: Vec<VertexId> = domain.vertex_ids().collect();
        domain_metric.diameter_of(&verts).unwrap_finite()
    };

    let mut radii_sorted: Vec<QuadExt> = radii.to_vec();
    radii_sorted.sort_by(|a, b| b.cmp(a));

    // reverse index: target vertex -> domain cells whose image contains it
    let cells: Vec<&Simplex> = domain.simplices().collect();
    let mut touching: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for (ci, cell) in cells.iter().enumerate() {
        for w in g.image_simplex(cell).vertices() {
            touching.entry(*w).or_default().push(ci);
        }
    }

    let mut table = String::new();
    let mut monotone_ok = true;
    let mut worst_at_min_radius = QuadExt::zero();
    for y in target.vertex_ids() {
        let mut prev: Option<QuadExt> = None;
        for r in &radii_sorted {
            let ball = stage_metric.ball(y, r);
            let mut verts: Vec<VertexId> = Vec::new();
            for w in &ball {
                if let Some(cs) = touching.get(w) {
                    for ci in cs {
                        verts.extend_from_slice(cells[*ci].vertices());
                    }
                }
            }
            verts.sort_unstable();
            verts.dedup();
            let diam = if verts.is_empty() {
                QuadExt::zero()
            } else {
                domain_metric.diameter_of(&verts).unwrap_finite()
            };
            let _ = writeln!(table, "y={} r={} diam={}", target.label(y), r, diam);
            if let Some(p) = &prev {
                if diam > *p {
                    monotone_ok = false;
                }
            }
            prev = Some(diam);
        }
        if let Some(d) = prev {
            if d > worst_at_min_radius {
                worst_at_min_radius = d;
            }
        }
    }
    // a degenerate test space is embedded by any map
    let separation_ok = diam_y.is_zero() || worst_at_min_radius < diam_y;

    // per-stage triple-star bound
    let mut st3_ok = true;
    for (i, f) in run.maps.iter().enumerate().skip(1) {
        let cover = star_cover(tower, f.stage)?;
        let stage_complex = tower.stage(f.stage).clone();
        let f_domain = f.map.domain().clone();
        let f_metric = run.ladder.metric_at(f.level, &run.base_scale);
        let f_cells: Vec<&Simplex> = f_domain.simplices().collect();
        let mut f_touching: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
        for (ci, cell) in f_cells.iter().enumerate() {
            for w in f.image_simplex(cell).vertices() {
                f_touching.entry(*w).or_default().push(ci);
            }
        }
        let bound = QuadExt::from_ratio(5, i as i64);
        let mut worst = QuadExt::zero();
        for y in stage_complex.vertex_ids() {
            let point = FiniteStagePoint::vertex(f.stage, y);
            let st3 = star_of_point(&cover, tower, &point, 3);
            let mut verts: Vec<VertexId> = Vec::new();
            for v in &st3 {
                if let Some(cs) = f_touching.get(v) {
                    for ci in cs {
                        verts.extend_from_slice(f_cells[*ci].vertices());
                    }
                }
            }
            verts.sort_unstable();
            verts.dedup();
            if verts.is_empty() {
                continue;
            }
            let diam = f_metric.diameter_of(&verts).unwrap_finite();
            if diam > worst {
                worst = diam;
            }
        }
        let ok = worst <= bound;
        st3_ok &= ok;
        let _ = writeln!(
            table,
            "stage {i}: st3 worst={} bound={} {}",
            worst,
            bound,
            if ok { "ok" } else { "FAIL" }
        );
    }

    let pass = monotone_ok && separation_ok && st3_ok;
    let _ = writeln!(
        table,
        "certificate: monotone={monotone_ok} separation={separation_ok} st3={st3_ok} => {}",
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(CertificateReport {
        monotone_ok,
        separation_ok,
        st3_ok,
        pass,
        table,
    })
}
