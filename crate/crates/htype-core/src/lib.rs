//! Numerical laboratory for truncated Hilbertian H-type groups with weak
//! graded metrics.
//!
//! The crate builds finite truncations `M_N = v^N ⊕ w` of an H-type product
//! group, equips them with weak Riemannian or block p-norm Finsler metrics,
//! and provides the machinery to study their degeneration phenomena:
//! shrinking horizontal curves with vanishing sub-Finsler length, B-adjoint
//! vectors and Arnold sectional curvatures with blow-up plane sequences, the
//! Levi-Civita obstruction diagnostic, and an independent constrained
//! length optimizer.

pub mod algebra;
pub mod curvature;
pub mod curves;
pub mod error;
pub mod group;
pub mod metrics;
pub mod optimize;

pub use algebra::{AxiomReport, HTypeAlgebra};
pub use curvature::{
    arnold_curvature, b_adjoint, blowup_planes, levi_civita_obstruction, BAdjointResult,
    BlowupResult, Plane,
};
pub use curves::{
    finsler_lower_bound, shrinking_pair, uniform_grid, Curve, LengthMode, LiftRule, ShrinkingPair,
    DEFAULT_NODES,
};
pub use error::{Error, Result};
pub use group::{Ambient, GroupPoint, TangentVector};
pub use metrics::{CenterMatrix, FinslerSpec, MetricSpec, RiemannianSpec, Strictness, WeightLaw};
pub use optimize::{
    degeneration_sweep, gradient_check, minimize_length, GradientCheckReport, OptProblem,
    OptResult, SweepRow,
};
