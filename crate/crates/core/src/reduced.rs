//! Reduced functionals `Lambda(c, u) = psi_{c,u}(t(c, u))`, their
//! derivatives, and the verification contract for critical pairs.

use serde::{Deserialize, Serialize};

use crate::class::{Branch, ClassTag, Family};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sign_changes};
use crate::triple::{FunctionalTriple, TermValues};

/// Acceptance thresholds for [`FunctionalTriple::verify_pair`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyTol {
    /// Bound on `|Phi'_mu(u)| / max(1, |u|^(deg-1))`.
    pub grad: f64,
    /// Bound on `|Phi_mu(u) - c| / (1 + |c|)`.
    pub energy: f64,
}

impl Default for VerifyTol {
    fn default() -> Self {
        VerifyTol { grad: 1e-6, energy: 1e-8 }
    }
}

/// Value and derivatives of a reduced functional at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedEval {
    pub branch: Branch,
    /// Critical scale `t(c, u)`.
    pub t: f64,
    pub lambda: f64,
    pub dlambda_dc: f64,
    /// `dt/dc` from the implicit-function identity.
    pub dt_dc: f64,
    /// Full gradient of `u -> Lambda(c, u)`.
    pub grad: Vec<f64>,
    /// `grad` with its component along `u` removed.
    pub grad_tangential: Vec<f64>,
    /// `<grad, u>`, zero up to rounding by 0-homogeneity.
    pub radial_component: f64,
    /// Normalization with `|grad_tangential| / residual_scale` bounding the
    /// gradient residual of the reconstructed pair, both in the verification
    /// metric and relative to the size of the individual terms.
    pub residual_scale: f64,
    /// Estimated absolute rounding error in `lambda`: the size of the
    /// cancelling terms of `(I1(t u) - c) / I2(t u)` times a few ulps.
    pub value_noise: f64,
}

impl ReducedEval {
    /// Stationarity measure used as the optimizers' stopping test.
    pub fn stationarity(&self) -> f64 {
        norm(&self.grad_tangential) / self.residual_scale
    }
}

/// A verified solution of `Phi'_mu(u) = 0`, `Phi_mu(u) = c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    pub mu: f64,
    pub c: f64,
    pub u: Vec<f64>,
    pub branch: Option<Branch>,
    pub level: Option<usize>,
    pub residual_grad: f64,
    pub residual_energy: f64,
    pub sign_changes: Option<usize>,
}

impl CriticalPair {
    /// Critical scale of the pair, `|u|` for a unit direction.
    pub fn norm(&self) -> f64 {
        norm(&self.u)
    }
}

/// Closed form of the two-term reduced functional,
/// `(N - sign(k c) D_c |B|^(eta/beta)) / A` with `k = eta beta/(beta - eta)`
/// and `D_c = (beta eta |c| / |beta - eta|)^((beta - eta)/beta)`.
pub fn two_term_closed_form(class: &ClassTag, v: &TermValues, c: f64) -> Option<f64> {
    if class.family() != Family::TwoTerm {
        return None;
    }
    let (eta, beta) = (class.eta(), class.beta());
    let k = eta * beta / (beta - eta);
    let dc = (beta * eta * c.abs() / (beta - eta).abs()).powf((beta - eta) / beta);
    Some((v.n - (k * c).signum() * dc * v.b.abs().powf(eta / beta)) / v.a)
}

impl FunctionalTriple {
    /// `Lambda_branch(c, u)` with its derivatives in `c` and `u`.
    pub fn eval_lambda(&self, c: f64, u: &[f64], branch: Branch) -> Result<ReducedEval> {
        let fiber = self.fiber(c, u)?;
        let t = fiber.scale(branch)?;
        let lambda = fiber.psi(t, 0);
        let class = self.class();
        let (eta, beta, a, s) = (class.eta(), class.beta(), class.deg_a(), class.i2_sign());
        let g = self.gradients(u);
        let (tn, tb, ta) = (t.powf(eta - 1.0), t.powf(beta - 1.0), t.powf(a - 1.0));
        let i2_w = s * t.powf(a) * fiber.values.a / a;
        // Phi'_lambda at w = t u, using homogeneity of the gradients.
        let phi_grad: Vec<f64> = (0..u.len())
            .map(|i| tn * g.n[i] / eta - tb * g.b[i] / beta - lambda * s * ta * g.a[i] / a)
            .collect();
        let grad: Vec<f64> = phi_grad.iter().map(|x| t * x / i2_w).collect();
        let nu = norm(u);
        let radial = dot(&grad, u);
        let mut grad_tangential = grad.clone();
        let along = radial / (nu * nu);
        for (gt, ui) in grad_tangential.iter_mut().zip(u) {
            *gt -= along * ui;
        }
        let i2_prime_u = s * ta * dot(&g.a, u) / a;
        let dt_dc = -i2_prime_u / (i2_w * i2_w * fiber.psi(t, 2));
        let term_scale = tn * norm(&g.n) / eta + tb * norm(&g.b) / beta + lambda.abs() * ta * norm(&g.a) / a;
        let metric_scale = (t * nu).powf(class.top_degree() - 1.0).max(1.0);
        let residual_scale = (t * term_scale.min(metric_scale) / i2_w.abs()).max(f64::MIN_POSITIVE);
        let v = &fiber.values;
        let value_noise = 8.0 * f64::EPSILON * (t.powf(eta) * v.n.abs() / eta + t.powf(beta) * v.b.abs() / beta + c.abs())
            / i2_w.abs();
        Ok(ReducedEval {
            branch,
            t,
            lambda,
            dlambda_dc: -1.0 / i2_w,
            dt_dc,
            grad,
            grad_tangential,
            radial_component: radial,
            residual_scale,
            value_noise,
        })
    }

    /// Value of `Lambda_branch(c, u)` without derivatives.
    pub fn lambda_value(&self, c: f64, u: &[f64], branch: Branch) -> Result<f64> {
        let fiber = self.fiber(c, u)?;
        Ok(fiber.psi(fiber.scale(branch)?, 0))
    }

    /// Residuals of the pair `(mu, u)` at energy `c`, without acceptance.
    pub fn pair_residuals(&self, mu: f64, c: f64, u: &[f64]) -> (f64, f64) {
        let class = self.class();
        let (eta, beta, a, s) = (class.eta(), class.beta(), class.deg_a(), class.i2_sign());
        let v = self.values(u);
        let g = self.gradients(u);
        let phi = self.i1(&v) - mu * self.i2(&v);
        let grad_sq: f64 = (0..u.len())
            .map(|i| {
                let x = g.n[i] / eta - g.b[i] / beta - mu * s * g.a[i] / a;
                x * x
            })
            .sum();
        let denom = norm(u).powf(class.top_degree() - 1.0).max(1.0);
        (grad_sq.sqrt() / denom, (phi - c).abs())
    }

    /// Checks `Phi'_mu(u) = 0` and `Phi_mu(u) = c` within `tol`.
    pub fn verify_pair(&self, mu: f64, c: f64, u: &[f64], tol: &VerifyTol) -> Result<CriticalPair> {
        if !(norm(u) > 0.0) {
            return Err(Error::InvalidInput("u must be nonzero".into()));
        }
        let (residual_grad, residual_energy) = self.pair_residuals(mu, c, u);
        let ok = residual_grad <= tol.grad && residual_energy <= tol.energy * (1.0 + c.abs());
        if !ok {
            return Err(Error::RejectedPair { residual_grad, residual_energy });
        }
        Ok(CriticalPair {
            mu,
            c,
            u: u.to_vec(),
            branch: None,
            level: None,
            residual_grad,
            residual_energy,
            sign_changes: self.is_1d_mesh().then(|| sign_changes(u)),
        })
    }

    /// Pair `(Lambda(c, w), t(c, w) w)` built from a direction and verified.
    pub fn pair_from_direction(&self, c: f64, w: &[f64], branch: Branch, tol: &VerifyTol) -> Result<CriticalPair> {
        let fiber = self.fiber(c, w)?;
        let t = fiber.scale(branch)?;
        let mu = fiber.psi(t, 0);
        let u: Vec<f64> = w.iter().map(|x| t * x).collect();
        let mut pair = self.verify_pair(mu, c, &u, tol)?;
        pair.branch = Some(branch);
        Ok(pair)
    }

    /// `|Phi_mu(u) - (beta - eta)/(beta eta) B(u)|` for two-term classes.
    pub fn energy_identity_residual(&self, pair: &CriticalPair) -> Option<f64> {
        let class = self.class();
        if class.family() != Family::TwoTerm {
            return None;
        }
        let (eta, beta) = (class.eta(), class.beta());
        let v = self.values(&pair.u);
        let phi = self.i1(&v) - pair.mu * self.i2(&v);
        Some((phi - (beta - eta) / (beta * eta) * v.b).abs())
    }
}
