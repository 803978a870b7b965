//! Finite-depth Noebeling towers over simplicial complexes.
//!
//! The library builds the complexes `N^n_kappa(K)` (kappa labelled copies of
//! every barycentre of `K`, with the maximal `n`-dimensional structure that
//! keeps the projection simplicial into the first barycentric subdivision),
//! iterates them into towers, and machine-checks the combinatorial facts the
//! construction rests on: fullness of projection fibers, uniqueness of the
//! lifting structure, star-cover refinement and mesh decay, carrier-based
//! extension, and a finite-stage strong-universality refinement loop.
//!
//! Everything is exact: path metrics live in `Q[sqrt(2)]`, barycentric
//! coordinates are rationals, and all checks are equalities or exact
//! comparisons.

pub mod complex;
pub mod covers;
pub mod io;
pub mod lift;
pub mod maps;
pub mod metric;
pub mod noebeling;
pub mod refine;
pub mod stagemap;
pub mod subdivision;
pub mod tower;

pub use complex::{ComplexError, ComplexRef, Simplex, SimplicialComplex, StarSet, VertexId};
pub use covers::{RefinementCertificate, StarCover};
pub use lift::{LiftError, LiftProblem};
pub use maps::{MapMode, MapViolation, VertexMap};
pub use metric::{Dist, QuadExt, ScaledPathMetric};
pub use noebeling::{NoebelingError, NoebelingStep};
pub use stagemap::{StageMap, StarCarrier};
pub use subdivision::Subdivision;
pub use tower::{FiniteStagePoint, Tower};
