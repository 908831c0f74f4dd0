//! Parameter-elimination reduction for homogeneous variational problems.
//!
//! A problem is a triple of homogeneous functionals `N`, `A`, `B` with the
//! energy `Phi_mu(u) = I1(u) - mu I2(u)`. Fixing the energy `c` and
//! eliminating `mu` yields `mu(c, u) = (I1(u) - c) / I2(u)`; restricting it to
//! rays gives the fibering maps, whose extremal values define the
//! 0-homogeneous reduced functionals `Lambda(c, u)`. This crate evaluates
//! those objects, finds their critical points on the unit sphere, estimates
//! min-max levels over subspace spheres and traces the energy curves
//! `c -> mu_{n,c}`.
//!
//! ```
//! use fibering::{make_plap1d, minimize_reduced, Branch, OptimizerConfig};
//!
//! let triple = make_plap1d(2.0, 2.0, 4.0, 15).unwrap();
//! let pair = minimize_reduced(&triple, 1e-6, Branch::Minus, &OptimizerConfig::default()).unwrap();
//! assert!((pair.mu - 9.8).abs() < 0.1);
//! ```

// `!(x > 0.0)` rejects NaN as well; keep that form.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod class;
pub mod error;
pub mod families;
pub mod fiber;
pub mod linalg;
pub mod minmax;
mod optim;
pub mod reduced;
pub mod sphere;
pub mod tracer;
pub mod triple;

pub use class::{BSign, Branch, ClassTag, ClassVariant, Direction, Family, Regime};
pub use error::{Error, Result};
pub use families::{
    coercivity_probe, estimate_n_lower_constant, make_diag, make_plap1d, make_plap1d_signed, make_sp_surrogate,
    plap1d_class, Diagonal, PLap1D, SpSurrogate,
};
pub use fiber::{Fiber, FiberDiagnosis, MERGE_TOL};
pub use minmax::{
    estimate_cstar, estimate_cstar_with_direction, estimate_level, estimate_level_from, estimate_levels,
    nodal_level_1d, quotient_level, reciprocal_level, BoundKind, MinMaxSpec,
};
pub use optim::Armijo;
pub use reduced::{two_term_closed_form, CriticalPair, ReducedEval, VerifyTol};
pub use sphere::{descend_reduced, minimize_reduced, minimize_reduced_from, refine_critical, OptimizerConfig, SphereRun};
pub use tracer::{admissible_grid, fixed_mu_slice, trace_curve, CurveSample, EnergyCurve, TraceConfig};
pub use triple::{AssumptionFlags, EulerResiduals, FunctionalTriple, TermGradients, TermValues, Terms};
