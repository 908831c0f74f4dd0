//! Energy curves `c -> mu_{n,c}` traced over energy grids, and fixed-`mu`
//! slices through a bank of traced curves.

use serde::{Deserialize, Serialize};

use crate::class::{Branch, Direction, Family, Regime};
use crate::error::{Error, Result};
use crate::minmax::{estimate_cstar, estimate_level_from, BoundKind, MinMaxSpec};
use crate::reduced::CriticalPair;
use crate::sphere::OptimizerConfig;
use crate::triple::FunctionalTriple;

/// One verified point of an energy curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub c: f64,
    pub mu: f64,
    /// Norm of the witness pair, i.e. its critical scale.
    pub t: f64,
    pub residual_grad: f64,
    pub residual_energy: f64,
    pub iterations: usize,
    pub sign_changes: Option<usize>,
    pub pair: CriticalPair,
    /// Witness subspace of the level estimate.
    pub frame: Vec<Vec<f64>>,
}

/// A traced curve with its structural diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyCurve {
    pub class: String,
    pub n: usize,
    pub branch: Branch,
    pub direction: Direction,
    pub kind: BoundKind,
    /// Sorted by `c`; every sample carries a verified pair.
    pub samples: Vec<CurveSample>,
    /// Strict monotonicity in the class-predicted direction.
    pub monotonic: bool,
    /// Largest finite-difference slope `|d mu / d c|`.
    pub lipschitz_est: f64,
    /// Degeneracy threshold `c*` bounding the admissible interval, if any.
    pub boundary: Option<f64>,
}

impl EnergyCurve {
    fn new(triple: &FunctionalTriple, n: usize, branch: Branch, boundary: Option<f64>) -> Self {
        let class = triple.class();
        EnergyCurve {
            class: class.name().into(),
            n,
            branch,
            direction: class.direction(),
            kind: BoundKind::Subspace,
            samples: Vec::new(),
            monotonic: true,
            lipschitz_est: 0.0,
            boundary,
        }
    }

    fn slope_sign(&self) -> f64 {
        if self.class == "sp_like" {
            1.0
        } else {
            -1.0
        }
    }

    /// Consecutive pairs moving against the predicted direction by more than `tol`.
    pub fn monotonicity_violations(&self, tol: f64) -> usize {
        let s = self.slope_sign();
        self.samples.windows(2).filter(|w| s * (w[1].mu - w[0].mu) < -tol).count()
    }

    fn update_diagnostics(&mut self) {
        let s = self.slope_sign();
        self.monotonic = self.samples.windows(2).all(|w| s * (w[1].mu - w[0].mu) > 0.0);
        self.lipschitz_est = self
            .samples
            .windows(2)
            .map(|w| ((w[1].mu - w[0].mu) / (w[1].c - w[0].c)).abs())
            .fold(0.0, f64::max);
    }

    pub fn mus(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.mu).collect()
    }

    pub fn cs(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.c).collect()
    }
}

/// Tracer settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub optimizer: OptimizerConfig,
    /// Rounds of midpoint insertion.
    pub refine_rounds: usize,
    /// An interval is split when its `|d mu|` exceeds this fraction of the
    /// curve's range of `mu`.
    pub refine_budget: f64,
    /// Grid points closer than `cstar_margin * |c*|` to `c*` are dropped.
    pub cstar_margin: f64,
    /// Restrict the grid to the admissible interval. When off, the grid is
    /// used as given and a lost branch ends the trace.
    pub clip: bool,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig { optimizer: OptimizerConfig::default(), refine_rounds: 0, refine_budget: 0.25, cstar_margin: 1e-3, clip: true }
    }
}

/// Grid restricted to the open interval where `branch` exists in every
/// direction, sorted ascending without duplicates, with `c*` if applicable.
pub fn admissible_grid(
    triple: &FunctionalTriple,
    branch: Branch,
    grid: &[f64],
    cfg: &TraceConfig,
) -> Result<(Vec<f64>, Option<f64>)> {
    let class = triple.class();
    let cstar = match class.family() {
        Family::TwoTerm => None,
        _ => Some(estimate_cstar(triple, &cfg.optimizer)?),
    };
    if !cfg.clip {
        let mut out: Vec<f64> = grid.iter().copied().filter(|c| c.is_finite()).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        if out.is_empty() {
            return Err(Error::InvalidInput("empty energy grid".into()));
        }
        return Ok((out, cstar));
    }
    let first = grid.first().copied().unwrap_or(0.0);
    let (mut lo, mut hi) = class.admissible_interval(branch, cstar).ok_or(Error::BranchUnavailable {
        branch,
        c: first,
        regime: Regime::NoCritical,
    })?;
    if let Some(cs) = cstar {
        let margin = cfg.cstar_margin * cs.abs();
        if lo == cs {
            lo += margin;
        }
        if hi == cs {
            hi -= margin;
        }
    }
    let mut out: Vec<f64> = grid.iter().copied().filter(|c| c.is_finite() && *c > lo && *c < hi).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidInput(format!("no grid point lies in the admissible interval ({lo}, {hi})")));
    }
    Ok((out, cstar))
}

fn sample_at(
    triple: &FunctionalTriple,
    c: f64,
    n: usize,
    branch: Branch,
    cfg: &OptimizerConfig,
    warm: Option<&[Vec<f64>]>,
) -> Result<(CurveSample, BoundKind)> {
    let MinMaxSpec { pair, witness, outer_iterations, kind, inner_certificates, .. } =
        estimate_level_from(triple, c, n, branch, cfg, warm)?;
    let pair = match pair {
        Some(p) => p,
        None => {
            let w = &inner_certificates[0];
            let (residual_grad, _) = triple.pair_residuals(triple.lambda_value(c, w, branch)?, c, w);
            return Err(Error::NoConvergence { best_residual: residual_grad });
        }
    };
    Ok((
        CurveSample {
            c,
            mu: pair.mu,
            t: pair.norm(),
            residual_grad: pair.residual_grad,
            residual_energy: pair.residual_energy,
            iterations: outer_iterations,
            sign_changes: pair.sign_changes,
            pair,
            frame: witness,
        },
        kind,
    ))
}

/// Traces level `n` on `branch` over the admissible part of `grid`.
///
/// Samples are computed in ascending `c`, each warm-started from the
/// previous witness. Losing the branch mid-grid returns
/// [`Error::BoundaryCrossed`] carrying the samples computed so far.
pub fn trace_curve(
    triple: &FunctionalTriple,
    n: usize,
    branch: Branch,
    grid: &[f64],
    cfg: &TraceConfig,
) -> Result<EnergyCurve> {
    cfg.optimizer.validate()?;
    if !(cfg.refine_budget > 0.0) || !(cfg.cstar_margin >= 0.0) {
        return Err(Error::InvalidInput("refine_budget must be positive and cstar_margin nonnegative".into()));
    }
    let (grid, cstar) = admissible_grid(triple, branch, grid, cfg)?;
    let mut curve = EnergyCurve::new(triple, n, branch, cstar);
    let crossed = |curve: &mut EnergyCurve, c: f64| {
        curve.update_diagnostics();
        Error::BoundaryCrossed { c, curve: Box::new(curve.clone()) }
    };
    for &c in &grid {
        let warm = curve.samples.last().map(|s| s.frame.clone());
        let probe = match &warm {
            Some(f) => f[0].clone(),
            None => vec![1.0 / (triple.dim() as f64).sqrt(); triple.dim()],
        };
        if triple.classify_fiber(c, &probe)?.scale(branch).is_none() {
            return Err(crossed(&mut curve, c));
        }
        match sample_at(triple, c, n, branch, &cfg.optimizer, warm.as_deref()) {
            Ok((s, kind)) => {
                curve.kind = kind;
                curve.samples.push(s);
            }
            Err(Error::BranchUnavailable { .. } | Error::DegenerateFiber { .. }) => return Err(crossed(&mut curve, c)),
            Err(e) => return Err(e),
        }
    }
    for _ in 0..cfg.refine_rounds {
        let mus = curve.mus();
        let range = mus.iter().copied().fold(f64::NEG_INFINITY, f64::max) - mus.iter().copied().fold(f64::INFINITY, f64::min);
        let budget = cfg.refine_budget * range;
        let mut inserted = Vec::new();
        for w in curve.samples.windows(2) {
            let mid = 0.5 * (w[0].c + w[1].c);
            if (w[1].mu - w[0].mu).abs() > budget && mid > w[0].c && mid < w[1].c {
                match sample_at(triple, mid, n, branch, &cfg.optimizer, Some(&w[0].frame)) {
                    Ok((s, _)) => inserted.push(s),
                    Err(Error::BranchUnavailable { .. } | Error::DegenerateFiber { .. }) => {
                        return Err(crossed(&mut curve, mid))
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        if inserted.is_empty() {
            break;
        }
        curve.samples.extend(inserted);
        curve.samples.sort_by(|a, b| a.c.total_cmp(&b.c));
    }
    curve.update_diagnostics();
    Ok(curve)
}

/// Verified pairs with `mu_{n,c} = mu`, one per curve of `bank` whose
/// samples bracket `mu`, located by Illinois regula falsi in `c`.
pub fn fixed_mu_slice(
    mu: f64,
    triple: &FunctionalTriple,
    bank: &[EnergyCurve],
    cfg: &TraceConfig,
) -> Result<Vec<CriticalPair>> {
    let opt = &cfg.optimizer;
    let mut out = Vec::new();
    for curve in bank {
        let Some(k) = curve.samples.windows(2).position(|w| (w[0].mu - mu) * (w[1].mu - mu) <= 0.0) else { continue };
        let (left, right) = (&curve.samples[k], &curve.samples[k + 1]);
        let (n, branch) = (curve.n, curve.branch);
        let (mut a, mut fa, mut wa) = (left.c, left.mu - mu, left.frame.clone());
        let (mut b, mut fb, mut wb) = (right.c, right.mu - mu, right.frame.clone());
        let mut best = if fa.abs() <= fb.abs() { left.clone() } else { right.clone() };
        let mut side = 0i8;
        for _ in 0..60 {
            if (best.mu - mu).abs() <= 1e-10 * (1.0 + mu.abs()) || (b - a).abs() <= 1e-12 * a.abs().max(b.abs()) {
                break;
            }
            let c = if fa == fb { 0.5 * (a + b) } else { (a * fb - b * fa) / (fb - fa) };
            let c = if c > a.min(b) && c < a.max(b) { c } else { 0.5 * (a + b) };
            let warm = if (c - a).abs() <= (b - c).abs() { wa.clone() } else { wb.clone() };
            let (s, _) = sample_at(triple, c, n, branch, opt, Some(&warm))?;
            let fc = s.mu - mu;
            if fc.abs() < (best.mu - mu).abs() {
                best = s.clone();
            }
            if fc * fb < 0.0 {
                (a, fa, wa) = (b, fb, wb);
                side = 0;
            } else {
                // Illinois: halve the retained endpoint's value on repeats.
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
            (b, fb, wb) = (c, fc, s.frame);
        }
        let mut pair = triple.verify_pair(mu, best.c, &best.pair.u, &opt.verify)?;
        pair.branch = Some(branch);
        pair.level = Some(n);
        out.push(pair);
    }
    if out.is_empty() {
        return Err(Error::NoCrossing { mu });
    }
    Ok(out)
}
