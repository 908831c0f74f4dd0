//! The fibering map `psi(t) = mu(c, t u)` and its critical scales.
//!
//! Along a ray only the three numbers `N(u)`, `A(u)`, `B(u)` matter, so all
//! work happens on a [`Fiber`] built from them.
//!
//! With `a = deg(A)` and `s` the sign of `I2`,
//! `psi(t) = a/(s A) * (N t^(eta-a)/eta - B t^(beta-a)/beta - c t^(-a))`.
//! Hence `psi'(t) = a/(s A t^(a+1)) * h(t)` with
//! `h(t) = P t^eta - Q t^beta + a c`, `P = (eta-a) N/eta`, `Q = (beta-a) B/beta`.

use serde::{Deserialize, Serialize};

use crate::class::{Branch, ClassTag, Family, Regime};
use crate::error::{Error, Result};
use crate::linalg::norm;
use crate::triple::{FunctionalTriple, TermValues};

/// Roots closer than this (relative to the separator) count as merged.
pub const MERGE_TOL: f64 = 1e-6;

/// Classification of one fiber.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberDiagnosis {
    pub regime: Regime,
    pub t_plus: Option<f64>,
    pub t_minus: Option<f64>,
    pub t_inflection: Option<f64>,
    /// Degeneracy energy `c(u)` (concave-convex and SP-like classes).
    pub c_local: Option<f64>,
    /// `(t, psi(t))` at every reported critical scale.
    pub psi_at: Vec<(f64, f64)>,
}

impl FiberDiagnosis {
    pub fn scale(&self, branch: Branch) -> Option<f64> {
        match branch {
            Branch::Plus => self.t_plus,
            Branch::Minus => self.t_minus,
        }
    }
}

/// The fiber through `u` at energy `c`, reduced to scalar data.
#[derive(Clone, Copy, Debug)]
pub struct Fiber {
    pub class: ClassTag,
    pub values: TermValues,
    pub c: f64,
}

/// Degree-normalized quantity `N^(beta/(beta-eta)) / B^(eta/(beta-eta))`.
/// Together with [`c_local_constant`] it gives `c(u)`.
pub fn degeneracy_ratio(class: &ClassTag, v: &TermValues) -> f64 {
    let (eta, beta) = (class.eta(), class.beta());
    let d = beta - eta;
    (v.n.ln() * beta / d - v.b.ln() * eta / d).exp()
}

/// Constant `K` with `c(u) = K * degeneracy_ratio(u)`; negative for the
/// concave-convex class and positive for the SP-like class.
pub fn c_local_constant(class: &ClassTag) -> Option<f64> {
    let (eta, beta, alpha) = (class.eta(), class.beta(), class.deg_a());
    let d = beta - eta;
    match class.family() {
        Family::ConcaveConvex => {
            Some(-((eta - alpha) * d / (eta * beta * alpha)) * ((eta - alpha) / (beta - alpha)).powf(eta / d))
        }
        Family::SpLike => {
            Some(((alpha - eta) * d / (eta * beta * alpha)) * ((alpha - eta) / (alpha - beta)).powf(eta / d))
        }
        Family::TwoTerm => None,
    }
}

impl Fiber {
    pub fn new(class: ClassTag, values: TermValues, c: f64) -> Result<Self> {
        let i2 = values.a / class.deg_a();
        if !(i2.abs() > 1e-300) || !i2.is_finite() {
            return Err(Error::ZeroDenominator(i2.abs()));
        }
        if !c.is_finite() {
            return Err(Error::InvalidInput(format!("energy must be finite, got {c}")));
        }
        Ok(Fiber { class, values, c })
    }

    fn coefficients(&self) -> [(f64, f64); 3] {
        let cl = &self.class;
        let (eta, beta, a) = (cl.eta(), cl.beta(), cl.deg_a());
        let k = a / (cl.i2_sign() * self.values.a);
        [
            (k * self.values.n / eta, eta - a),
            (-k * self.values.b / beta, beta - a),
            (-k * self.c, -a),
        ]
    }

    /// `psi`, `psi'` or `psi''` at `t > 0`.
    pub fn psi(&self, t: f64, order: u8) -> f64 {
        self.coefficients()
            .iter()
            .map(|&(k, e)| match order {
                0 => k * t.powf(e),
                1 => k * e * t.powf(e - 1.0),
                _ => k * e * (e - 1.0) * t.powf(e - 2.0),
            })
            .sum()
    }

    fn pq(&self) -> (f64, f64) {
        let cl = &self.class;
        let (eta, beta, a) = (cl.eta(), cl.beta(), cl.deg_a());
        ((eta - a) * self.values.n / eta, (beta - a) * self.values.b / beta)
    }

    /// `c(u)` for the classes that have it.
    pub fn c_local(&self) -> Option<f64> {
        c_local_constant(&self.class).map(|k| k * degeneracy_ratio(&self.class, &self.values))
    }

    pub fn classify(&self) -> FiberDiagnosis {
        match self.class.family() {
            Family::TwoTerm => self.classify_two_term(),
            _ => self.classify_three_term(),
        }
    }

    fn diagnosis(&self, regime: Regime, t_plus: Option<f64>, t_minus: Option<f64>, t_infl: Option<f64>) -> FiberDiagnosis {
        let psi_at = [t_plus, t_minus, t_infl].into_iter().flatten().map(|t| (t, self.psi(t, 0))).collect();
        FiberDiagnosis { regime, t_plus, t_minus, t_inflection: t_infl, c_local: self.c_local(), psi_at }
    }

    /// Closed-form critical scale of a two-term fiber,
    /// `t^beta = eta beta c / ((beta - eta) B)` when positive.
    pub fn two_term_scale(&self) -> Option<f64> {
        let (eta, beta) = (self.class.eta(), self.class.beta());
        let tb = eta * beta * self.c / ((beta - eta) * self.values.b);
        (tb > 0.0 && tb.is_finite()).then(|| tb.powf(1.0 / beta))
    }

    fn classify_two_term(&self) -> FiberDiagnosis {
        match self.two_term_scale() {
            None => self.diagnosis(Regime::NoCritical, None, None, None),
            Some(t) if self.psi(t, 2) > 0.0 => self.diagnosis(Regime::SingleMin, Some(t), None, None),
            Some(t) => self.diagnosis(Regime::SingleMax, None, Some(t), None),
        }
    }

    fn classify_three_term(&self) -> FiberDiagnosis {
        let (eta, beta, a) = (self.class.eta(), self.class.beta(), self.class.deg_a());
        let (p, q) = self.pq();
        // g(t) = sigma (P t^eta - Q t^beta) rises then falls; roots of psi' solve g = kappa.
        let sigma = p.signum();
        let (pp, qq) = (p.abs(), q.abs());
        let kappa = -sigma * a * self.c;
        let d = beta - eta;
        let g = |t: f64| pp * t.powf(eta) - qq * t.powf(beta);
        let dg = |t: f64| eta * pp * t.powf(eta - 1.0) - beta * qq * t.powf(beta - 1.0);
        let f = |t: f64| g(t) - kappa;
        let t_sep = (eta * pp / (beta * qq)).powf(1.0 / d);
        let t_zero = (pp / qq).powf(1.0 / d);

        if kappa <= 0.0 {
            let t = if kappa == 0.0 {
                t_zero
            } else {
                let hi = 1.01 * (2.0 * pp / qq).powf(1.0 / d).max((2.0 * kappa.abs() / qq).powf(1.0 / beta));
                bracketed_root(f, dg, t_zero, hi)
            };
            return self.diagnosis(Regime::SingleMax, None, Some(t), None);
        }

        let g_max = pp * t_sep.powf(eta) * d / beta;
        let gap = g_max - kappa;
        let floor = 64.0 * f64::EPSILON * (g_max + kappa);
        if gap < -floor {
            return self.diagnosis(Regime::NoCritical, None, None, None);
        }
        if gap <= floor {
            return self.diagnosis(Regime::Inflection, None, None, Some(t_sep));
        }
        let lo = (kappa / pp).powf(1.0 / eta);
        let bound = (kappa * beta / (d * pp)).powf(1.0 / eta);
        let hi = if bound < t_sep && f(bound) >= 0.0 { bound } else { t_sep };
        let t_plus = bracketed_root(f, dg, lo.min(hi), hi);
        let t_minus = bracketed_root(f, dg, t_sep, t_zero);
        if (t_minus - t_plus) / t_sep < MERGE_TOL {
            return self.diagnosis(Regime::Inflection, None, None, Some(t_sep));
        }
        self.diagnosis(Regime::TwoCritical, Some(t_plus), Some(t_minus), None)
    }

    /// Critical scale carried by `branch`.
    pub fn scale(&self, branch: Branch) -> Result<f64> {
        let diag = self.classify();
        if diag.regime == Regime::Inflection {
            return Err(Error::DegenerateFiber { c: self.c, t: diag.t_inflection.unwrap_or(f64::NAN) });
        }
        diag.scale(branch).ok_or(Error::BranchUnavailable { branch, c: self.c, regime: diag.regime })
    }
}

/// Root of `f` on `[lo, hi]` where `f(lo) <= 0 <= f(hi)` or the reverse:
/// bisection to relative width `1e-3`, then safeguarded Newton to `1e-12`.
pub(crate) fn bracketed_root(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    let rising = f_lo < 0.0;
    let step = |x: f64, lo: &mut f64, hi: &mut f64| {
        let fx = f(x);
        if (fx < 0.0) == rising {
            *lo = x;
        } else {
            *hi = x;
        }
        fx
    };
    for _ in 0..200 {
        if hi - lo <= 1e-3 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        step(mid, &mut lo, &mut hi);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let fx = step(x, &mut lo, &mut hi);
        if fx == 0.0 {
            return x;
        }
        let mut next = x - fx / df(x);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 1e-12 * next;
        x = next;
        if done || hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    x
}

fn check_point(u: &[f64]) -> Result<()> {
    let n = norm(u);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::InvalidInput("u must be a nonzero finite vector".into()));
    }
    Ok(())
}

impl FunctionalTriple {
    /// Fiber through `u` at energy `c`.
    pub fn fiber(&self, c: f64, u: &[f64]) -> Result<Fiber> {
        check_point(u)?;
        Fiber::new(self.class(), self.values(u), c)
    }

    /// `mu(c, u) = (I1(u) - c) / I2(u)`.
    pub fn eval_mu(&self, c: f64, u: &[f64]) -> Result<f64> {
        check_point(u)?;
        let v = self.values(u);
        let i2 = self.i2(&v);
        if !(i2.abs() > 1e-300) {
            return Err(Error::ZeroDenominator(i2.abs()));
        }
        Ok((self.i1(&v) - c) / i2)
    }

    /// `psi_{c,u}` or one of its first two derivatives at `t > 0`.
    pub fn eval_psi(&self, c: f64, u: &[f64], t: f64, order: u8) -> Result<f64> {
        if !(t > 0.0) || order > 2 {
            return Err(Error::InvalidInput(format!("need t > 0 and order <= 2, got t={t}, order={order}")));
        }
        Ok(self.fiber(c, u)?.psi(t, order))
    }

    pub fn classify_fiber(&self, c: f64, u: &[f64]) -> Result<FiberDiagnosis> {
        Ok(self.fiber(c, u)?.classify())
    }

    /// Critical scale `t_branch(c, u)`.
    pub fn solve_scale(&self, c: f64, u: &[f64], branch: Branch) -> Result<f64> {
        self.fiber(c, u)?.scale(branch)
    }
}
