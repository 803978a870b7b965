//! Finite towers `K_0 <- K_1 <- ...` of iterated construction steps, and
//! exact point projection down the bonding maps.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::complex::{ComplexRef, Simplex, VertexId};
use crate::noebeling::{noebeling_step, NoebelingError, NoebelingStep};

/// A finite inverse sequence of stages. `steps[i]` produces `stages[i + 1]`
/// out of `stages[i]`; its projection is the bonding map, simplicial into the
/// subdivision of the coarser stage.
#[derive(Debug)]
pub struct Tower {
    n: usize,
    kappa: u32,
    stages: Vec<ComplexRef>,
    steps: Vec<NoebelingStep>,
}

impl Tower {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    pub fn depth(&self) -> usize {
        self.steps.len()
    }

    pub fn stage(&self, i: usize) -> &ComplexRef {
        &self.stages[i]
    }

    pub fn stages(&self) -> &[ComplexRef] {
        &self.stages
    }

    /// Step producing stage `i + 1` from stage `i`.
    pub fn step(&self, i: usize) -> &NoebelingStep {
        &self.steps[i]
    }

    pub fn steps(&self) -> &[NoebelingStep] {
        &self.steps
    }

    pub fn check_stage(&self, i: usize) -> Result<(), NoebelingError> {
        if i >= self.stages.len() {
            Err(NoebelingError::InvalidStage {
                stage: i,
                depth: self.depth(),
            })
        } else {
            Ok(())
        }
    }
}

/// Iterates the construction `depth` times. Every stage is guarded by the
/// closed-form size estimate before it is materialised.
pub fn build_tower(
    seed: &ComplexRef,
    n: usize,
    kappa: u32,
    depth: usize,
    budget: u128,
) -> Result<Tower, NoebelingError> {
    let mut stages = vec![seed.clone()];
    let mut steps = Vec::with_capacity(depth);
    for _ in 0..depth {
        let step = noebeling_step(stages.last().unwrap(), n, kappa, budget)?;
        stages.push(step.result().clone());
        steps.push(step);
    }
    Ok(Tower {
        n,
        kappa,
        stages,
        steps,
    })
}

/// A point of a finite stage: a carrier simplex and strictly positive
/// rational barycentric coordinates summing to one. This is the truncation of
/// a thread of the inverse limit at that stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteStagePoint {
    pub stage: usize,
    pub simplex: Simplex,
    pub coords: Vec<BigRational>,
}

impl FiniteStagePoint {
    pub fn new(stage: usize, simplex: Simplex, coords: Vec<BigRational>) -> Self {
        assert_eq!(simplex.len(), coords.len());
        assert!(coords.iter().all(|c| c > &BigRational::zero()));
        let total: BigRational = coords.iter().sum();
        assert!(total.is_one(), "coordinates must sum to 1");
        FiniteStagePoint {
            stage,
            simplex,
            coords,
        }
    }

    pub fn vertex(stage: usize, v: VertexId) -> Self {
        FiniteStagePoint {
            stage,
            simplex: Simplex::singleton(v),
            coords: vec![BigRational::one()],
        }
    }

    /// Uniform barycentre of a simplex.
    pub fn barycentre(stage: usize, simplex: Simplex) -> Self {
        let k = simplex.len();
        let w = BigRational::new(BigInt::one(), BigInt::from(k));
        FiniteStagePoint {
            stage,
            simplex,
            coords: vec![w; k],
        }
    }

    pub fn coordinate_of(&self, v: VertexId) -> BigRational {
        match self.simplex.vertices().iter().position(|w| *w == v) {
            Some(i) => self.coords[i].clone(),
            None => BigRational::zero(),
        }
    }
}

/// Applies one bonding map affinely: a copy vertex lands on the barycentre of
/// its base chain element, i.e. the uniform average of that simplex's
/// vertices in the coarser stage. The support is re-normalised onto the
/// carrier of the image, which is the maximal chain element.
fn project_one(tower: &Tower, point: &FiniteStagePoint) -> FiniteStagePoint {
    let stage = point.stage;
    assert!(stage >= 1);
    let step = tower.step(stage - 1);
    let sub = step.subdivision();

    // weights over vertices of the coarser stage
    let mut support: Vec<VertexId> = Vec::new();
    let mut weight: std::collections::BTreeMap<VertexId, BigRational> =
        std::collections::BTreeMap::new();
    for (i, v) in point.simplex.vertices().iter().enumerate() {
        let carrier = sub.carrier(step.base_of(*v));
        let share = &point.coords[i] / BigRational::from_integer(BigInt::from(carrier.len()));
        for w in carrier.vertices() {
            weight
                .entry(*w)
                .and_modify(|acc| *acc += share.clone())
                .or_insert_with(|| share.clone());
        }
    }
    for w in weight.keys() {
        support.push(*w);
    }
    let simplex = Simplex::new(support.clone());
    debug_assert!(
        tower.stage(stage - 1).contains_simplex(&simplex),
        "projected support must be a simplex of the coarser stage"
    );
    let coords: Vec<BigRational> = simplex
        .vertices()
        .iter()
        .map(|w| weight.remove(w).unwrap())
        .collect();
    FiniteStagePoint::new(stage - 1, simplex, coords)
}

/// Short projection `pi^k_i` applied to a point: composes bonding maps from
/// the point's stage down to `target`.
pub fn project_point(
    tower: &Tower,
    point: &FiniteStagePoint,
    target: usize,
) -> FiniteStagePoint {
    assert!(target <= point.stage, "can only project to coarser stages");
    let mut current = point.clone();
    while current.stage > target {
        current = project_one(tower, &current);
    }
    current
}

/// Stage-0 support of a simplex of stage `i`: pushes the maximal carrier
/// chain element down the tower. The relative interior of the simplex
/// projects into the relative interior of this support at every stage.
pub fn support_at_stage(
    tower: &Tower,
    stage: usize,
    simplex: &Simplex,
    target: usize,
) -> Simplex {
    assert!(target <= stage);
    let mut current = simplex.clone();
    let mut at = stage;
    while at > target {
        let step = tower.step(at - 1);
        let sub = step.subdivision();
        let bases = Simplex::new(
            current
                .vertices()
                .iter()
                .map(|v| step.base_of(*v))
                .collect(),
        );
        current = sub.chain_max(&bases).clone();
        at -= 1;
    }
    current
}
