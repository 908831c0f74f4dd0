//! One-sided estimates of the min-max levels `mu_{n,c}` over
//! `n`-dimensional subspace spheres.
//!
//! A subspace sphere is a compact symmetric set of genus `n`, so for the
//! inf-sup direction `max_{S_V} Lambda` is an upper bound on the level for
//! every frame `V`, and for the sup-inf direction `min_{S_V} Lambda` is a
//! lower bound. The estimator alternates an inner extremization over `S_V`
//! with an outer descent on `V` using the envelope gradient
//! `grad Lambda(w*) y*^T`.

use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::class::{Branch, Direction, Family};
use crate::error::{Error, Result};
use crate::families::random_unit;
use crate::fiber::{c_local_constant, degeneracy_ratio};
use crate::linalg::{combine, dot, norm, normalized, orthonormalize};
use crate::optim::{minimize, Frames, ObjEval, Sphere};
use crate::reduced::CriticalPair;
use crate::sphere::{
    minimize_reduced_from, start_pool, OptimizerConfig, QuotientObjective, ReducedObjective, SphereObjective,
};
use crate::triple::FunctionalTriple;

/// How the witness set of a [`MinMaxSpec`] was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Optimized general subspace.
    Subspace,
    /// Span of disjoint sign-alternating blocks on a 1D mesh.
    Nodal,
}

/// A level estimate with its witness subspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxSpec {
    pub n: usize,
    pub branch: Branch,
    pub direction: Direction,
    pub kind: BoundKind,
    /// Orthonormal basis of the witness subspace.
    pub witness: Vec<Vec<f64>>,
    /// Upper bound (inf-sup) or lower bound (sup-inf) on the level.
    pub value: f64,
    /// Extremizers of `Lambda` on the witness sphere.
    pub inner_certificates: Vec<Vec<f64>>,
    /// Verified pair at the inner extremizer, when it is critical.
    pub pair: Option<CriticalPair>,
    /// Set when the value matches the previous level within tolerance.
    pub collapse: bool,
    pub converged: bool,
    pub outer_iterations: usize,
}

struct Inner {
    y: Vec<f64>,
    w: Vec<f64>,
    eval: ObjEval,
}

/// Maximizes the objective over the sphere of `span(frame)`.
fn inner_max(obj: &dyn SphereObjective, frame: &[Vec<f64>], warm: Option<&[f64]>, cfg: &OptimizerConfig) -> Result<Inner> {
    let n = frame.len();
    let at = |y: &[f64]| -> Result<(Vec<f64>, ObjEval)> {
        let w = normalized(&combine(frame, y)).ok_or_else(|| Error::InvalidInput("degenerate frame".into()))?;
        let ev = obj.eval(&w)?;
        Ok((w, ev))
    };
    if n == 1 {
        let (w, eval) = at(&[1.0])?;
        return Ok(Inner { y: vec![1.0], w, eval });
    }
    let mut starts: Vec<Vec<f64>> = warm.map(|y| vec![y.to_vec()]).unwrap_or_default();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        starts.push(e);
    }
    if n == 2 {
        // Coarse angle scan; the best angle joins the pool.
        let best = (0..24)
            .map(|k| {
                let th = std::f64::consts::PI * k as f64 / 24.0;
                vec![th.cos(), th.sin()]
            })
            .filter_map(|y| obj.value(&combine(frame, &y)).ok().map(|v| (v, y)))
            .max_by(|a, b| a.0.total_cmp(&b.0));
        starts.extend(best.map(|(_, y)| y));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
    starts.extend((0..2).map(|_| random_unit(n, &mut rng)));

    let engine = cfg.engine(0.1 * cfg.grad_tol, cfg.max_iters);
    let mut f = |y: &[f64]| -> Result<ObjEval> {
        let (_, ev) = at(y)?;
        let grad = frame.iter().map(|col| -dot(col, &ev.grad)).collect();
        Ok(ObjEval { value: -ev.value, grad, scale: ev.scale, noise: ev.noise })
    };
    let mut best: Option<Inner> = None;
    for y0 in starts {
        let Some(y0) = normalized(&y0) else { continue };
        let out = minimize(&Sphere { fixed: &[] }, y0, &mut f, &engine)?;
        let value = -out.eval.value;
        if best.as_ref().is_none_or(|b| value > b.eval.value) {
            let (w, eval) = at(&out.x)?;
            best = Some(Inner { y: out.x, w, eval });
        }
    }
    best.ok_or_else(|| Error::InvalidInput("empty inner start pool".into()))
}

/// Minimizer over the unit sphere of the complement of `fixed`.
fn deflated_min(obj: &dyn SphereObjective, fixed: &[Vec<f64>], cfg: &OptimizerConfig) -> Result<Vec<f64>> {
    let engine = cfg.engine(cfg.grad_tol, cfg.max_iters);
    let manifold = Sphere { fixed };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mut x0 in start_pool(obj, &[], cfg) {
        for q in fixed {
            let s = dot(q, &x0);
            x0.iter_mut().zip(q).for_each(|(x, qi)| *x -= s * qi);
        }
        let Some(x0) = normalized(&x0) else { continue };
        if norm(&x0) < 0.5 || obj.value(&x0).is_err() {
            continue;
        }
        let out = minimize(&manifold, x0, &mut |w| obj.eval(w), &engine)?;
        if best.as_ref().is_none_or(|b| out.eval.value < b.0) {
            best = Some((out.eval.value, out.x));
        }
    }
    best.map(|b| b.1).ok_or(Error::NoConvergence { best_residual: f64::INFINITY })
}

struct SubspaceResult {
    frame: Vec<Vec<f64>>,
    inner: Inner,
    converged: bool,
    iterations: usize,
}

/// Completes `base` to `n` columns by successive deflated minimization.
fn extend_frame(obj: &dyn SphereObjective, base: &[Vec<f64>], n: usize, cfg: &OptimizerConfig) -> Result<Vec<Vec<f64>>> {
    let mut frame = base.to_vec();
    while frame.len() < n {
        let next = deflated_min(obj, &frame, cfg)?;
        frame.push(next);
        if !orthonormalize(&mut frame) {
            return Err(Error::InvalidInput("deflation produced a dependent direction".into()));
        }
    }
    Ok(frame)
}

fn coordinate_frame(obj: &dyn SphereObjective, n: usize) -> Option<Vec<Vec<f64>>> {
    let d = obj.dim();
    let unit = |i: usize| {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        e
    };
    let mut axes: Vec<(f64, usize)> = (0..d).filter_map(|i| obj.value(&unit(i)).ok().map(|v| (v, i))).collect();
    if axes.len() < n {
        return None;
    }
    axes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Some(axes.iter().take(n).map(|&(_, i)| unit(i)).collect())
}

/// Inf over frames of the max over the frame sphere, for `n >= 2`.
fn subspace_level(
    obj: &dyn SphereObjective,
    n: usize,
    warm: Option<&[Vec<f64>]>,
    cfg: &OptimizerConfig,
) -> Result<SubspaceResult> {
    let mut candidates: Vec<Vec<Vec<f64>>> = Vec::new();
    match warm {
        Some(w) if !w.is_empty() => {
            let mut base: Vec<Vec<f64>> = w.iter().take(n).cloned().collect();
            if orthonormalize(&mut base) {
                candidates.push(extend_frame(obj, &base, n, cfg)?);
            }
        }
        _ => candidates.push(extend_frame(obj, &[], n, cfg)?),
    }
    candidates.extend(coordinate_frame(obj, n));

    let mut start: Option<(Vec<Vec<f64>>, Inner)> = None;
    for frame in candidates {
        let Ok(inner) = inner_max(obj, &frame, None, cfg) else { continue };
        if start.as_ref().is_none_or(|(_, b)| inner.eval.value < b.eval.value) {
            start = Some((frame, inner));
        }
    }
    let (frame0, inner0) = start.ok_or(Error::NoConvergence { best_residual: f64::INFINITY })?;

    let d = obj.dim();
    let frames = Frames { d, n };
    let mut last_y = inner0.y.clone();
    let mut f = |x: &[f64]| -> Result<ObjEval> {
        let cols = frames.split(x);
        let inner = inner_max(obj, &cols, Some(&last_y), cfg)?;
        last_y = inner.y.clone();
        let mut grad = vec![0.0; d * n];
        for (j, yj) in inner.y.iter().enumerate() {
            for (g, gw) in grad[j * d..(j + 1) * d].iter_mut().zip(&inner.eval.grad) {
                *g = yj * gw;
            }
        }
        Ok(ObjEval { value: inner.eval.value, grad, scale: inner.eval.scale, noise: inner.eval.noise })
    };
    let engine = cfg.engine(cfg.grad_tol, cfg.outer_max_iters);
    let out = minimize(&frames, Frames::join(&frame0), &mut f, &engine)?;
    let frame = frames.split(&out.x);
    let inner = inner_max(obj, &frame, Some(&last_y), cfg)?;
    Ok(SubspaceResult { frame, inner, converged: out.converged, iterations: out.iterations })
}

fn check_level(triple: &FunctionalTriple, n: usize) -> Result<()> {
    if n == 0 || n > triple.dim() {
        return Err(Error::InvalidInput(format!("level n = {n} must lie in 1..={}", triple.dim())));
    }
    Ok(())
}

/// Estimate of `mu_{n,c}` on `branch` in the class direction.
pub fn estimate_level(
    triple: &FunctionalTriple,
    c: f64,
    n: usize,
    branch: Branch,
    cfg: &OptimizerConfig,
) -> Result<MinMaxSpec> {
    estimate_level_from(triple, c, n, branch, cfg, None)
}

/// As [`estimate_level`], warm-started from a previous witness frame (of
/// any size up to `n`; missing columns are added by deflation).
pub fn estimate_level_from(
    triple: &FunctionalTriple,
    c: f64,
    n: usize,
    branch: Branch,
    cfg: &OptimizerConfig,
    warm: Option<&[Vec<f64>]>,
) -> Result<MinMaxSpec> {
    cfg.validate()?;
    check_level(triple, n)?;
    let direction = triple.class().direction();
    if n == 1 {
        let warm_dirs: Vec<Vec<f64>> = warm.map(|w| w.iter().take(1).cloned().collect()).unwrap_or_default();
        let (pair, iterations) = minimize_reduced_from(triple, c, branch, cfg, &warm_dirs)?;
        let w = normalized(&pair.u).expect("verified pairs are nonzero");
        return Ok(MinMaxSpec {
            n,
            branch,
            direction,
            kind: BoundKind::Subspace,
            witness: vec![w.clone()],
            value: pair.mu,
            inner_certificates: vec![w],
            pair: Some(pair),
            collapse: false,
            converged: true,
            outer_iterations: iterations,
        });
    }
    let obj = ReducedObjective::natural(triple, c, branch);
    let res = subspace_level(&obj, n, warm, cfg)?;
    let pair = triple.pair_from_direction(c, &res.inner.w, branch, &cfg.verify).ok().map(|mut p| {
        p.level = Some(n);
        p
    });
    Ok(MinMaxSpec {
        n,
        branch,
        direction,
        kind: BoundKind::Subspace,
        witness: res.frame,
        value: obj.sign * res.inner.eval.value,
        inner_certificates: vec![res.inner.w],
        converged: res.converged && pair.is_some(),
        pair,
        collapse: false,
        outer_iterations: res.iterations,
    })
}

/// Levels `1..=n_max` with nested warm starts; flags collapsed neighbours.
pub fn estimate_levels(
    triple: &FunctionalTriple,
    c: f64,
    n_max: usize,
    branch: Branch,
    cfg: &OptimizerConfig,
) -> Result<Vec<MinMaxSpec>> {
    let mut out: Vec<MinMaxSpec> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let warm = out.last().map(|s| s.witness.clone());
        let mut spec = estimate_level_from(triple, c, n, branch, cfg, warm.as_deref())?;
        if let Some(prev) = out.last() {
            spec.collapse = (spec.value - prev.value).abs() <= cfg.verify.grad * (1.0 + spec.value.abs());
        }
        out.push(spec);
    }
    Ok(out)
}

/// Level `n` of the zero-energy quotient `N/A` (two-term classes), the
/// limit of the energy curves as `c -> 0`.
pub fn quotient_level(triple: &FunctionalTriple, n: usize, cfg: &OptimizerConfig) -> Result<f64> {
    cfg.validate()?;
    check_level(triple, n)?;
    if triple.class().family() != Family::TwoTerm {
        return Err(Error::UnsupportedClass(triple.class().name().into()));
    }
    let obj = QuotientObjective { triple, sign: 1.0 };
    if n == 1 {
        let engine = cfg.engine(cfg.grad_tol, cfg.max_iters);
        let mut best = f64::INFINITY;
        for x0 in start_pool(&obj, &[], cfg) {
            let out = minimize(&Sphere { fixed: &[] }, x0, &mut |w| obj.eval(w), &engine)?;
            best = best.min(out.eval.value);
        }
        return Ok(best);
    }
    Ok(subspace_level(&obj, n, None, cfg)?.inner.eval.value)
}

/// `1 / Lambda`, defined where the reduced functional is positive.
struct ReciprocalObjective<'a>(ReducedObjective<'a>);

impl SphereObjective for ReciprocalObjective<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, w: &[f64]) -> Result<ObjEval> {
        let ev = self.0.eval(w)?;
        if !(ev.value > 0.0) {
            return Err(Error::InvalidInput("reciprocal form needs a positive reduced functional".into()));
        }
        let inv = 1.0 / ev.value;
        Ok(ObjEval {
            value: inv,
            grad: ev.grad.iter().map(|g| -g * inv * inv).collect(),
            scale: ev.scale * inv * inv,
            noise: ev.noise * inv * inv,
        })
    }
}

/// Sup-inf level recomputed as `1 / inf_V max_{S_V} (1/Lambda)`.
///
/// Cross-check for SP-like classes where `Lambda > 0` (for instance the minus
/// branch at `c <= 0`).
pub fn reciprocal_level(
    triple: &FunctionalTriple,
    c: f64,
    n: usize,
    branch: Branch,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_level(triple, n)?;
    if triple.class().family() != Family::SpLike {
        return Err(Error::UnsupportedClass(triple.class().name().into()));
    }
    let obj = ReciprocalObjective(ReducedObjective { triple, c, branch, sign: 1.0 });
    if n == 1 {
        let engine = cfg.engine(cfg.grad_tol, cfg.max_iters);
        let mut best = f64::INFINITY;
        for x0 in start_pool(&obj, &[], cfg) {
            if obj.value(&x0).is_err() {
                continue;
            }
            let out = minimize(&Sphere { fixed: &[] }, x0, &mut |w| obj.eval(w), &engine)?;
            best = best.min(out.eval.value);
        }
        return Ok(1.0 / best);
    }
    Ok(1.0 / subspace_level(&obj, n, None, cfg)?.inner.eval.value)
}

/// Upper bound from `n` disjoint sign-alternating blocks separated by zero
/// nodes, with breakpoints chosen by integer coordinate search.
///
/// Each block carries the ground state of the same problem restricted to
/// the block, so its shape depends only on the block length.
pub fn nodal_level_1d(
    triple: &FunctionalTriple,
    c: f64,
    n: usize,
    branch: Branch,
    cfg: &OptimizerConfig,
) -> Result<MinMaxSpec> {
    cfg.validate()?;
    let mesh = triple
        .terms()
        .as_plap1d()
        .ok_or_else(|| Error::UnsupportedClass("nodal bounds need a 1D mesh instance".into()))?
        .clone();
    let m = mesh.m;
    if n == 0 || m + 1 < 2 * n {
        return Err(Error::InvalidInput(format!("n = {n} blocks do not fit on m = {m} nodes")));
    }
    let class = triple.class();
    let obj = ReducedObjective::natural(triple, c, branch);
    let mut shapes: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut shape = |len: usize| -> Result<Vec<f64>> {
        if let Some(s) = shapes.get(&len) {
            return Ok(s.clone());
        }
        let block = FunctionalTriple::from_parts(class, Arc::new(mesh.block(len)));
        let (pair, _) = minimize_reduced_from(&block, c, branch, cfg, &[])?;
        let mut s = normalized(&pair.u).expect("verified pairs are nonzero");
        if s.iter().sum::<f64>() < 0.0 {
            s.iter_mut().for_each(|v| *v = -*v);
        }
        shapes.insert(len, s.clone());
        Ok(s)
    };
    // Breakpoints are zero nodes; block j spans the nodes strictly between them.
    let mut frame_of = |bps: &[usize]| -> Result<Vec<Vec<f64>>> {
        let mut edges = vec![0usize];
        edges.extend(bps.iter().map(|b| b + 1));
        let mut ends: Vec<usize> = bps.to_vec();
        ends.push(m);
        let mut frame = Vec::with_capacity(n);
        for (j, (&lo, &hi)) in edges.iter().zip(&ends).enumerate() {
            let s = shape(hi - lo)?;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let mut col = vec![0.0; m];
            col[lo..hi].iter_mut().zip(&s).for_each(|(x, v)| *x = sign * v);
            frame.push(col);
        }
        Ok(frame)
    };
    let valid = |bps: &[usize]| {
        let mut prev: isize = -1;
        for &b in bps {
            if (b as isize) - prev < 2 {
                return false;
            }
            prev = b as isize;
        }
        (m as isize) - prev >= 2
    };
    let mut bps: Vec<usize> = (1..n).map(|j| ((j * (m + 1)) as f64 / n as f64).round() as usize - 1).collect();
    let mut frame = frame_of(&bps)?;
    let mut inner = inner_max(&obj, &frame, None, cfg)?;
    let mut step = (m / (4 * n)).max(1);
    let mut evaluations = 1;
    loop {
        let mut improved = false;
        for j in 0..bps.len() {
            for delta in [-(step as isize), step as isize] {
                let mut cand = bps.clone();
                let moved = cand[j] as isize + delta;
                if moved < 0 {
                    continue;
                }
                cand[j] = moved as usize;
                if !valid(&cand) {
                    continue;
                }
                let f = frame_of(&cand)?;
                let Ok(inn) = inner_max(&obj, &f, Some(&inner.y), cfg) else { continue };
                evaluations += 1;
                if inn.eval.value < inner.eval.value - 1e-14 * inner.eval.value.abs() {
                    bps = cand;
                    frame = f;
                    inner = inn;
                    improved = true;
                }
            }
        }
        if !improved {
            if step == 1 {
                break;
            }
            step /= 2;
        }
    }
    let pair = triple.pair_from_direction(c, &inner.w, branch, &cfg.verify).ok().map(|mut p| {
        p.level = Some(n);
        p
    });
    Ok(MinMaxSpec {
        n,
        branch,
        direction: class.direction(),
        kind: BoundKind::Nodal,
        witness: frame,
        value: obj.sign * inner.eval.value,
        inner_certificates: vec![inner.w],
        pair,
        collapse: false,
        converged: true,
        outer_iterations: evaluations,
    })
}

/// `log N^(beta/(beta-eta)) - log B^(eta/(beta-eta))`, minimized to find `c*`.
struct DegeneracyObjective<'a> {
    triple: &'a FunctionalTriple,
}

impl SphereObjective for DegeneracyObjective<'_> {
    fn dim(&self) -> usize {
        self.triple.dim()
    }

    fn eval(&self, w: &[f64]) -> Result<ObjEval> {
        let class = self.triple.class();
        let (eta, beta) = (class.eta(), class.beta());
        let (kn, kb) = (beta / (beta - eta), eta / (beta - eta));
        let v = self.triple.values(w);
        let g = self.triple.gradients(w);
        let value = degeneracy_ratio(&class, &v).ln();
        let grad = g.n.iter().zip(&g.b).map(|(gn, gb)| kn * gn / v.n - kb * gb / v.b).collect();
        let scale = (kn * norm(&g.n) / v.n + kb * norm(&g.b) / v.b).max(f64::MIN_POSITIVE);
        let noise = 4.0 * f64::EPSILON * (kn * v.n.ln().abs() + kb * v.b.ln().abs());
        Ok(ObjEval { value, grad, scale, noise })
    }
}

/// Extremal degeneracy energy with its extremizing direction:
/// `sup c(u) < 0` (concave-convex) or `inf c(u) > 0` (SP-like).
pub fn estimate_cstar_with_direction(triple: &FunctionalTriple, cfg: &OptimizerConfig) -> Result<(f64, Vec<f64>)> {
    cfg.validate()?;
    let class = triple.class();
    let k = c_local_constant(&class).ok_or_else(|| Error::UnsupportedClass(class.name().into()))?;
    // c(u) = K R(u) with R > 0, so both extrema come from the minimum of R.
    let obj = DegeneracyObjective { triple };
    let wide = OptimizerConfig { axis_starts: cfg.axis_starts.max(triple.dim().min(64)), ..cfg.clone() };
    let engine = cfg.engine(cfg.grad_tol, cfg.max_iters);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for x0 in start_pool(&obj, &[], &wide) {
        let out = minimize(&Sphere { fixed: &[] }, x0, &mut |w| obj.eval(w), &engine)?;
        if best.as_ref().is_none_or(|b| out.eval.value < b.0) {
            best = Some((out.eval.value, out.x));
        }
    }
    let (log_r, w) = best.ok_or(Error::NoConvergence { best_residual: f64::INFINITY })?;
    Ok((k * log_r.exp(), w))
}

/// See [`estimate_cstar_with_direction`].
pub fn estimate_cstar(triple: &FunctionalTriple, cfg: &OptimizerConfig) -> Result<f64> {
    estimate_cstar_with_direction(triple, cfg).map(|(c, _)| c)
}
