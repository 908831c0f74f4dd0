use thiserror::Error;

use crate::class::{Branch, Regime};
use crate::tracer::EnergyCurve;

/// Errors raised by the reduction, optimizer, estimator and tracer layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero denominator: |I2(u)| = {0:e} is below the machine floor")]
    ZeroDenominator(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bad exponents: {0}")]
    BadExponents(String),

    #[error("degenerate fiber at c = {c}: critical scales merge near t = {t}")]
    DegenerateFiber { c: f64, t: f64 },

    #[error("branch {branch} unavailable at c = {c} (fiber regime {regime})")]
    BranchUnavailable { branch: Branch, c: f64, regime: Regime },

    #[error("operation not defined for class {0}")]
    UnsupportedClass(String),

    #[error("pair rejected: residual_grad = {residual_grad:e}, residual_energy = {residual_energy:e}")]
    RejectedPair { residual_grad: f64, residual_energy: f64 },

    #[error("no convergence: best residual {best_residual:e}")]
    NoConvergence { best_residual: f64 },

    #[error("branch lost at c = {c}; curve truncated after {} samples", curve.samples.len())]
    BoundaryCrossed { c: f64, curve: Box<EnergyCurve> },

    #[error("no traced curve brackets mu = {mu}")]
    NoCrossing { mu: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
