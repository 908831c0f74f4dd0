use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::class::ClassTag;
use crate::families::PLap1D;
use crate::linalg::{dot, norm};

/// Values of the three homogeneous terms at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TermValues {
    pub n: f64,
    pub a: f64,
    pub b: f64,
}

/// Gradients of the three homogeneous terms at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct TermGradients {
    pub n: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Evaluators of `N`, `A`, `B` on coefficient vectors.
///
/// Implementations only compute values; degrees and sign conventions come
/// from the [`ClassTag`] of the owning [`FunctionalTriple`].
pub trait Terms: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn values(&self, u: &[f64]) -> TermValues;
    fn gradients(&self, u: &[f64]) -> TermGradients;

    /// Downcast hook for the 1D mesh instance.
    fn as_plap1d(&self) -> Option<&PLap1D> {
        None
    }
}

/// Assumption checks recorded when an instance is built.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AssumptionFlags {
    /// Outcome of the empirical coercivity probe (SP-like surrogate only).
    pub coercive: Option<bool>,
    /// Whether `A` is a power of `N` (SP-like surrogate with `a_i` proportional to `n_i`).
    pub a_power_of_n: Option<bool>,
}

/// A class tag together with evaluators for `N`, `A` and `B`.
#[derive(Clone)]
pub struct FunctionalTriple {
    class: ClassTag,
    terms: Arc<dyn Terms>,
    flags: AssumptionFlags,
}

impl fmt::Debug for FunctionalTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionalTriple")
            .field("class", &self.class)
            .field("terms", &self.terms)
            .field("flags", &self.flags)
            .finish()
    }
}

/// Relative Euler-identity residuals `|<grad X(u), u> - deg X * X(u)| / scale`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerResiduals {
    pub n: f64,
    pub a: f64,
    pub b: f64,
}

impl EulerResiduals {
    pub fn max(&self) -> f64 {
        self.n.max(self.a).max(self.b)
    }
}

impl FunctionalTriple {
    /// Pairs evaluators with a class tag without cross-checking degrees.
    /// Use [`FunctionalTriple::euler_residuals`] to detect a mismatch.
    pub fn from_parts(class: ClassTag, terms: Arc<dyn Terms>) -> Self {
        FunctionalTriple { class, terms, flags: AssumptionFlags::default() }
    }

    pub fn with_flags(mut self, flags: AssumptionFlags) -> Self {
        self.flags = flags;
        self
    }

    pub fn class(&self) -> ClassTag {
        self.class
    }

    pub fn flags(&self) -> &AssumptionFlags {
        &self.flags
    }

    pub fn dim(&self) -> usize {
        self.terms.dim()
    }

    pub fn terms(&self) -> &dyn Terms {
        self.terms.as_ref()
    }

    pub fn values(&self, u: &[f64]) -> TermValues {
        self.terms.values(u)
    }

    pub fn gradients(&self, u: &[f64]) -> TermGradients {
        self.terms.gradients(u)
    }

    pub fn is_1d_mesh(&self) -> bool {
        self.terms.as_plap1d().is_some()
    }

    /// `I1(u) = N/eta - B/beta`.
    pub fn i1(&self, v: &TermValues) -> f64 {
        v.n / self.class.eta() - v.b / self.class.beta()
    }

    /// `I2(u) = s A / deg(A)`.
    pub fn i2(&self, v: &TermValues) -> f64 {
        self.class.i2_sign() * v.a / self.class.deg_a()
    }

    /// Euler identity residuals at `u`, each relative to `deg * |X(u)| + |grad X| |u|`.
    pub fn euler_residuals(&self, u: &[f64]) -> EulerResiduals {
        let v = self.values(u);
        let g = self.gradients(u);
        let nu = norm(u);
        let rel = |grad: &[f64], deg: f64, val: f64| {
            let lhs = dot(grad, u);
            let scale = (deg * val.abs()).max(norm(grad) * nu).max(f64::MIN_POSITIVE);
            (lhs - deg * val).abs() / scale
        };
        EulerResiduals {
            n: rel(&g.n, self.class.eta(), v.n),
            a: rel(&g.a, self.class.deg_a(), v.a),
            b: rel(&g.b, self.class.beta(), v.b),
        }
    }
}
