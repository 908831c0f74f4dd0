//! Structural classes of homogeneous triples `(N, A, B)` and the sign
//! conventions that go with them.
//!
//! Every class uses `I1 = N/eta - B/beta`. The second term is
//! `I2 = s * A / deg(A)` with `s = -1` only for [`ClassVariant::SpLike`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent data of a class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassVariant {
    /// `1 < eta < beta`, `A` of degree `eta`.
    TwoTermSuper { eta: f64, beta: f64 },
    /// `1 < beta < eta`, `A` of degree `eta`.
    TwoTermSub { eta: f64, beta: f64 },
    /// `1 < alpha < eta < beta`, `A` of degree `alpha`.
    ConcaveConvex { alpha: f64, eta: f64, beta: f64 },
    /// `1 < eta < beta < alpha`, `A` of degree `alpha`, `I2 = -A/alpha`.
    SpLike { eta: f64, beta: f64, alpha: f64 },
}

/// Sign of `B` away from the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BSign {
    Positive,
    Negative,
}

impl BSign {
    pub fn factor(self) -> f64 {
        match self {
            BSign::Positive => 1.0,
            BSign::Negative => -1.0,
        }
    }
}

/// Coarse grouping used for dispatch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    TwoTerm,
    ConcaveConvex,
    SpLike,
}

/// Fiber critical point selected by a reduced functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Local minimizer `t+` of the fiber.
    Plus,
    /// Local maximizer `t-` of the fiber.
    Minus,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        })
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(Error::InvalidInput(format!("unknown branch `{other}`"))),
        }
    }
}

/// Shape of the one-dimensional fiber `t -> psi(t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SingleMin,
    SingleMax,
    TwoCritical,
    Inflection,
    NoCritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Order of the min-max characterization of the levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    InfSup,
    SupInf,
}

impl Direction {
    /// `+1` when levels are infima (objective minimized), `-1` otherwise.
    pub fn sign(self) -> f64 {
        match self {
            Direction::InfSup => 1.0,
            Direction::SupInf => -1.0,
        }
    }
}

/// Class tag attached to every [`crate::FunctionalTriple`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassTag {
    pub variant: ClassVariant,
    pub b_sign: BSign,
}

impl ClassTag {
    /// Two-term class; super- or subhomogeneous is picked from the ordering.
    pub fn two_term(eta: f64, beta: f64, b_sign: BSign) -> Result<Self> {
        let variant = if eta < beta {
            ClassVariant::TwoTermSuper { eta, beta }
        } else {
            ClassVariant::TwoTermSub { eta, beta }
        };
        Self::new(variant, b_sign)
    }

    pub fn concave_convex(alpha: f64, eta: f64, beta: f64) -> Result<Self> {
        Self::new(ClassVariant::ConcaveConvex { alpha, eta, beta }, BSign::Positive)
    }

    pub fn sp_like(eta: f64, beta: f64, alpha: f64) -> Result<Self> {
        Self::new(ClassVariant::SpLike { eta, beta, alpha }, BSign::Positive)
    }

    pub fn new(variant: ClassVariant, b_sign: BSign) -> Result<Self> {
        let tag = ClassTag { variant, b_sign };
        tag.validate()?;
        Ok(tag)
    }

    /// Checks the strict exponent orderings and the sign restrictions.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadExponents(msg));
        let all_finite = self.exponents().iter().all(|e| e.is_finite() && *e > 1.0);
        if !all_finite {
            return bad(format!("all exponents must be finite and > 1, got {:?}", self.variant));
        }
        match self.variant {
            ClassVariant::TwoTermSuper { eta, beta } if !(eta < beta) => {
                bad(format!("superhomogeneous two-term class needs eta < beta, got eta={eta}, beta={beta}"))
            }
            ClassVariant::TwoTermSub { eta, beta } if !(beta < eta) => {
                bad(format!("subhomogeneous two-term class needs beta < eta, got eta={eta}, beta={beta}"))
            }
            ClassVariant::ConcaveConvex { alpha, eta, beta } if !(alpha < eta && eta < beta) => bad(format!(
                "concave-convex class needs alpha < eta < beta, got ({alpha}, {eta}, {beta})"
            )),
            ClassVariant::SpLike { eta, beta, alpha } if !(eta < beta && beta < alpha) => bad(format!(
                "SP-like class needs eta < beta < alpha, got ({eta}, {beta}, {alpha})"
            )),
            ClassVariant::ConcaveConvex { .. } | ClassVariant::SpLike { .. }
                if self.b_sign == BSign::Negative =>
            {
                bad("negative B is only supported for two-term classes".into())
            }
            _ => Ok(()),
        }
    }

    fn exponents(&self) -> Vec<f64> {
        match self.variant {
            ClassVariant::TwoTermSuper { eta, beta } | ClassVariant::TwoTermSub { eta, beta } => vec![eta, beta],
            ClassVariant::ConcaveConvex { alpha, eta, beta } | ClassVariant::SpLike { eta, beta, alpha } => {
                vec![alpha, eta, beta]
            }
        }
    }

    pub fn family(&self) -> Family {
        match self.variant {
            ClassVariant::TwoTermSuper { .. } | ClassVariant::TwoTermSub { .. } => Family::TwoTerm,
            ClassVariant::ConcaveConvex { .. } => Family::ConcaveConvex,
            ClassVariant::SpLike { .. } => Family::SpLike,
        }
    }

    /// Degree of `N`.
    pub fn eta(&self) -> f64 {
        match self.variant {
            ClassVariant::TwoTermSuper { eta, .. }
            | ClassVariant::TwoTermSub { eta, .. }
            | ClassVariant::ConcaveConvex { eta, .. }
            | ClassVariant::SpLike { eta, .. } => eta,
        }
    }

    /// Degree of `B`.
    pub fn beta(&self) -> f64 {
        match self.variant {
            ClassVariant::TwoTermSuper { beta, .. }
            | ClassVariant::TwoTermSub { beta, .. }
            | ClassVariant::ConcaveConvex { beta, .. }
            | ClassVariant::SpLike { beta, .. } => beta,
        }
    }

    /// Degree of `A`: `eta` for two-term classes, `alpha` otherwise.
    pub fn deg_a(&self) -> f64 {
        match self.variant {
            ClassVariant::TwoTermSuper { eta, .. } | ClassVariant::TwoTermSub { eta, .. } => eta,
            ClassVariant::ConcaveConvex { alpha, .. } | ClassVariant::SpLike { alpha, .. } => alpha,
        }
    }

    /// Largest homogeneity degree among `N`, `A`, `B`.
    pub fn top_degree(&self) -> f64 {
        self.eta().max(self.beta()).max(self.deg_a())
    }

    /// Sign `s` in `I2 = s * A / deg(A)`.
    pub fn i2_sign(&self) -> f64 {
        match self.family() {
            Family::SpLike => -1.0,
            _ => 1.0,
        }
    }

    /// Natural min-max direction of the levels.
    pub fn direction(&self) -> Direction {
        match self.family() {
            Family::SpLike => Direction::SupInf,
            _ => Direction::InfSup,
        }
    }

    /// Sign of `d mu_{n,c} / dc` predicted for the energy curves.
    pub fn curve_slope_sign(&self) -> f64 {
        match self.family() {
            Family::SpLike => 1.0,
            _ => -1.0,
        }
    }

    /// Snake-case label used in reports.
    pub fn name(&self) -> &'static str {
        match self.variant {
            ClassVariant::TwoTermSuper { .. } => "two_term_super",
            ClassVariant::TwoTermSub { .. } => "two_term_sub",
            ClassVariant::ConcaveConvex { .. } => "concave_convex",
            ClassVariant::SpLike { .. } => "sp_like",
        }
    }

    /// The only branch a two-term fiber can carry at `c`: the maximizer for
    /// `c > 0`, the minimizer for `c < 0`.
    pub fn two_term_branch(c: f64) -> Branch {
        if c > 0.0 {
            Branch::Minus
        } else {
            Branch::Plus
        }
    }

    /// Open interval of energies on which `branch` exists for every direction.
    ///
    /// `cstar` is required for the concave-convex and SP-like classes and
    /// ignored otherwise. Returns `None` when the branch never exists.
    pub fn admissible_interval(&self, branch: Branch, cstar: Option<f64>) -> Option<(f64, f64)> {
        let inf = f64::INFINITY;
        match self.family() {
            Family::TwoTerm => {
                // A critical scale exists iff c / B and beta - eta share a sign.
                let s = self.b_sign.factor() * (self.beta() - self.eta()).signum();
                let (lo, hi) = if s > 0.0 { (0.0, inf) } else { (-inf, 0.0) };
                let natural = Self::two_term_branch(if s > 0.0 { 1.0 } else { -1.0 });
                (natural == branch).then_some((lo, hi))
            }
            Family::ConcaveConvex => {
                let cs = cstar?;
                Some(match branch {
                    Branch::Plus => (cs, 0.0),
                    Branch::Minus => (cs, inf),
                })
            }
            Family::SpLike => {
                let cs = cstar?;
                Some(match branch {
                    Branch::Plus => (0.0, cs),
                    Branch::Minus => (-inf, cs),
                })
            }
        }
    }
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
