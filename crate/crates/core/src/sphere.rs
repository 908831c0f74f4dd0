//! Critical points of `u -> Lambda(c, u)` on the unit sphere.
//!
//! The sphere is a natural constraint for a 0-homogeneous functional, so a
//! tangentially stationary direction `w` yields the unconstrained critical
//! pair `(Lambda(c, w), t(c, w) w)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::class::Branch;
use crate::error::{Error, Result};
use crate::families::random_unit;
use crate::linalg::{norm, normalized};
use crate::optim::{minimize, Armijo, EngineConfig, ObjEval, Sphere};
use crate::reduced::{CriticalPair, VerifyTol};
use crate::triple::FunctionalTriple;

/// Settings shared by the sphere optimizer, the level estimator and the tracer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Iteration cap per local run.
    pub max_iters: usize,
    /// Stationarity target for local runs.
    pub grad_tol: f64,
    /// Number of stored curvature pairs.
    pub memory: usize,
    pub armijo: Armijo,
    /// Random starts per solve.
    pub multistart: usize,
    /// Coordinate axes (ranked by objective value) added to the start pool.
    pub axis_starts: usize,
    pub seed: u64,
    pub verify: VerifyTol,
    /// Iteration cap for the outer subspace update.
    pub outer_max_iters: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iters: 5000,
            grad_tol: 1e-9,
            memory: 10,
            armijo: Armijo::default(),
            multistart: 4,
            axis_starts: 4,
            seed: 42,
            verify: VerifyTol::default(),
            outer_max_iters: 400,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol >= 1e3 * f64::EPSILON) {
            return Err(Error::InvalidInput(format!(
                "grad_tol must be at least 1e3 * machine epsilon, got {:e}",
                self.grad_tol
            )));
        }
        if self.multistart < 1 {
            return Err(Error::InvalidInput("multistart must be at least 1".into()));
        }
        let a = &self.armijo;
        if !(a.initial_step > 0.0 && a.factor > 0.0 && a.factor < 1.0 && a.slope > 0.0 && a.slope < 1.0) {
            return Err(Error::InvalidInput(format!("invalid backtracking parameters {a:?}")));
        }
        Ok(())
    }

    pub(crate) fn engine(&self, tol: f64, max_iters: usize) -> EngineConfig {
        EngineConfig { max_iters, tol, memory: self.memory, armijo: self.armijo }
    }
}

/// Objective on the unit sphere of the coefficient space.
pub(crate) trait SphereObjective: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, w: &[f64]) -> Result<ObjEval>;
    fn value(&self, w: &[f64]) -> Result<f64> {
        Ok(self.eval(w)?.value)
    }
}

/// `sign * Lambda_branch(c, .)`; `sign = -1` turns maximization into minimization.
pub(crate) struct ReducedObjective<'a> {
    pub triple: &'a FunctionalTriple,
    pub c: f64,
    pub branch: Branch,
    pub sign: f64,
}

impl<'a> ReducedObjective<'a> {
    pub fn natural(triple: &'a FunctionalTriple, c: f64, branch: Branch) -> Self {
        ReducedObjective { triple, c, branch, sign: triple.class().direction().sign() }
    }
}

impl SphereObjective for ReducedObjective<'_> {
    fn dim(&self) -> usize {
        self.triple.dim()
    }

    fn eval(&self, w: &[f64]) -> Result<ObjEval> {
        let r = self.triple.eval_lambda(self.c, w, self.branch)?;
        Ok(ObjEval {
            value: self.sign * r.lambda,
            grad: r.grad.iter().map(|g| self.sign * g).collect(),
            scale: r.residual_scale,
            noise: r.value_noise,
        })
    }

    fn value(&self, w: &[f64]) -> Result<f64> {
        Ok(self.sign * self.triple.lambda_value(self.c, w, self.branch)?)
    }
}

/// `sign * N/A`, the zero-energy limit of the two-term reduced functional.
pub(crate) struct QuotientObjective<'a> {
    pub triple: &'a FunctionalTriple,
    pub sign: f64,
}

impl SphereObjective for QuotientObjective<'_> {
    fn dim(&self) -> usize {
        self.triple.dim()
    }

    fn eval(&self, w: &[f64]) -> Result<ObjEval> {
        let v = self.triple.values(w);
        if !(v.a > 0.0) {
            return Err(Error::ZeroDenominator(v.a));
        }
        let g = self.triple.gradients(w);
        let q = v.n / v.a;
        let grad = g.n.iter().zip(&g.a).map(|(gn, ga)| self.sign * (gn - q * ga) / v.a).collect();
        let scale = ((norm(&g.n) + q.abs() * norm(&g.a)) / v.a).max(f64::MIN_POSITIVE);
        Ok(ObjEval { value: self.sign * q, grad, scale, noise: 4.0 * f64::EPSILON * q.abs() })
    }
}

/// Best-first start pool: warm starts, the uniform direction, the best
/// coordinate axes, then random points.
pub(crate) fn start_pool(obj: &dyn SphereObjective, warm: &[Vec<f64>], cfg: &OptimizerConfig) -> Vec<Vec<f64>> {
    let d = obj.dim();
    let mut pool: Vec<Vec<f64>> = warm.iter().filter_map(|w| normalized(w)).collect();
    if d > 1 {
        pool.push(vec![1.0 / (d as f64).sqrt(); d]);
    }
    let mut axes: Vec<(f64, usize)> = (0..d)
        .filter_map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            obj.value(&e).ok().map(|v| (v, i))
        })
        .collect();
    axes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for &(_, i) in axes.iter().take(cfg.axis_starts.max(usize::from(d == 1))) {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        pool.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.multistart {
        pool.push(random_unit(d, &mut rng));
    }
    pool
}

/// Result of one local run.
#[derive(Clone, Debug)]
pub struct SphereRun {
    pub direction: Vec<f64>,
    /// `Lambda` at `direction`.
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stationarity: f64,
    /// `Lambda` after each accepted step (non-increasing when minimizing,
    /// non-decreasing when maximizing, up to rounding).
    pub history: Vec<f64>,
}

/// Local descent (ascent for sup-inf classes) of `Lambda_branch(c, .)` from `u0`.
pub fn descend_reduced(
    triple: &FunctionalTriple,
    c: f64,
    u0: &[f64],
    branch: Branch,
    cfg: &OptimizerConfig,
) -> Result<SphereRun> {
    cfg.validate()?;
    let x0 = normalized(u0).ok_or_else(|| Error::InvalidInput("start must be nonzero".into()))?;
    let obj = ReducedObjective::natural(triple, c, branch);
    let sign = obj.sign;
    let out = minimize(&Sphere { fixed: &[] }, x0, &mut |w| obj.eval(w), &cfg.engine(cfg.grad_tol, cfg.max_iters))?;
    Ok(SphereRun {
        value: sign * out.eval.value,
        history: out.history.iter().map(|v| sign * v).collect(),
        direction: out.x,
        iterations: out.iterations,
        converged: out.converged,
        stationarity: out.stationarity,
    })
}

/// Verified pair reached by local descent from `u0`.
pub fn refine_critical(
    triple: &FunctionalTriple,
    c: f64,
    u0: &[f64],
    branch: Branch,
    cfg: &OptimizerConfig,
) -> Result<CriticalPair> {
    let run = descend_reduced(triple, c, u0, branch, cfg)?;
    triple
        .pair_from_direction(c, &run.direction, branch, &cfg.verify)
        .map_err(|_| Error::NoConvergence { best_residual: run.stationarity })
}

/// Ground-level pair: the best verified result over the start pool.
pub fn minimize_reduced(
    triple: &FunctionalTriple,
    c: f64,
    branch: Branch,
    cfg: &OptimizerConfig,
) -> Result<CriticalPair> {
    minimize_reduced_from(triple, c, branch, cfg, &[]).map(|(p, _)| p)
}

/// As [`minimize_reduced`] with extra warm starts; also returns the total
/// iteration count.
pub fn minimize_reduced_from(
    triple: &FunctionalTriple,
    c: f64,
    branch: Branch,
    cfg: &OptimizerConfig,
    warm: &[Vec<f64>],
) -> Result<(CriticalPair, usize)> {
    cfg.validate()?;
    let obj = ReducedObjective::natural(triple, c, branch);
    let engine = cfg.engine(cfg.grad_tol, cfg.max_iters);
    let mut best: Option<(f64, CriticalPair)> = None;
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0;
    for x0 in start_pool(&obj, warm, cfg) {
        if obj.value(&x0).is_err() {
            continue;
        }
        let out = minimize(&Sphere { fixed: &[] }, x0, &mut |w| obj.eval(w), &engine)?;
        iterations += out.iterations;
        best_residual = best_residual.min(out.stationarity);
        let Ok(mut pair) = triple.pair_from_direction(c, &out.x, branch, &cfg.verify) else { continue };
        pair.level = Some(1);
        let key = obj.sign * pair.mu;
        let better = match &best {
            None => true,
            Some((k, p)) => key < *k || (key == *k && pair.residual_grad < p.residual_grad),
        };
        if better {
            best = Some((key, pair));
        }
    }
    match best {
        Some((_, pair)) => Ok((pair, iterations)),
        None => Err(Error::NoConvergence { best_residual }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::{BSign, ClassTag};
    use crate::families::make_diag;

    #[test]
    fn config_validation() {
        let mut cfg = OptimizerConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.grad_tol = 1e-16;
        assert!(cfg.validate().is_err());
        let cfg = OptimizerConfig { multistart: 0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn one_dimensional_sphere_is_exact() {
        let class = ClassTag::two_term(2.0, 4.0, BSign::Positive).unwrap();
        let t = make_diag(class, &[1.0], &[1.0], &[1.0]).unwrap();
        let pair = minimize_reduced(&t, 1.0, Branch::Minus, &OptimizerConfig::default()).unwrap();
        assert!((pair.mu + 1.0).abs() < 1e-14);
    }
}
