//! Limited-memory quasi-Newton descent on the unit sphere and on
//! orthonormal frames, with Armijo backtracking and retraction by
//! normalization.

use std::collections::VecDeque;

use crate::error::Result;
use crate::linalg::{axpy, dot, norm, normalized, orthonormalize};

/// Value, Euclidean gradient and stationarity normalization of an objective.
#[derive(Clone, Debug)]
pub(crate) struct ObjEval {
    pub value: f64,
    pub grad: Vec<f64>,
    /// `|projected grad| / scale` is the stationarity measure.
    pub scale: f64,
    /// Estimated absolute rounding error in `value`.
    pub noise: f64,
}

/// Backtracking line-search parameters.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Armijo {
    pub initial_step: f64,
    pub factor: f64,
    pub slope: f64,
    pub max_backtracks: usize,
}

impl Default for Armijo {
    fn default() -> Self {
        Armijo { initial_step: 1.0, factor: 0.5, slope: 1e-4, max_backtracks: 60 }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct EngineConfig {
    pub max_iters: usize,
    pub tol: f64,
    pub memory: usize,
    pub armijo: Armijo,
}

pub(crate) trait Manifold {
    fn project(&self, x: &[f64], v: &mut [f64]);
    fn retract(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>>;
}

/// Unit sphere, optionally intersected with the orthogonal complement of a
/// fixed orthonormal set.
pub(crate) struct Sphere<'a> {
    pub fixed: &'a [Vec<f64>],
}

impl Sphere<'_> {
    fn remove_fixed(&self, v: &mut [f64]) {
        for q in self.fixed {
            let s = dot(q, v);
            axpy(-s, q, v);
        }
    }
}

impl Manifold for Sphere<'_> {
    fn project(&self, x: &[f64], v: &mut [f64]) {
        self.remove_fixed(v);
        let s = dot(x, v);
        axpy(-s, x, v);
    }

    fn retract(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let mut y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
        self.remove_fixed(&mut y);
        normalized(&y)
    }
}

/// Orthonormal `d x n` frames stored column by column.
pub(crate) struct Frames {
    pub d: usize,
    pub n: usize,
}

impl Frames {
    pub fn split(&self, x: &[f64]) -> Vec<Vec<f64>> {
        x.chunks(self.d).map(<[f64]>::to_vec).collect()
    }

    pub fn join(cols: &[Vec<f64>]) -> Vec<f64> {
        cols.concat()
    }
}

impl Manifold for Frames {
    fn project(&self, x: &[f64], v: &mut [f64]) {
        let cols = self.split(x);
        // v <- v - X (X^T v), column by column.
        for j in 0..self.n {
            let vj = &mut v[j * self.d..(j + 1) * self.d];
            for c in &cols {
                let s = dot(c, vj);
                axpy(-s, c, vj);
            }
        }
    }

    fn retract(&self, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
        let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
        let mut cols = self.split(&y);
        orthonormalize(&mut cols).then(|| Frames::join(&cols))
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub eval: ObjEval,
    pub stationarity: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after every accepted step, starting point included.
    pub history: Vec<f64>,
}

fn two_loop(g: &[f64], mem: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        axpy(-a, y, &mut q);
        alphas.push(a);
    }
    if let Some((s, y, _)) = mem.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        axpy(a - b, s, &mut q);
    }
    q
}

const STALL_LIMIT: usize = 10;

/// Minimizes `f` on the manifold from `x0`, which must lie on it.
///
/// A step is accepted on the Armijo condition, or when the value is flat to
/// rounding and the stationarity measure improves. Trial points where `f`
/// fails are treated as infeasible and shrink the step. The run stops early
/// once several consecutive steps make no progress beyond rounding.
pub(crate) fn minimize<M: Manifold>(
    m: &M,
    x0: Vec<f64>,
    f: &mut dyn FnMut(&[f64]) -> Result<ObjEval>,
    cfg: &EngineConfig,
) -> Result<Outcome> {
    let mut x = x0;
    let mut cur = f(&x)?;
    let mut g = cur.grad.clone();
    m.project(&x, &mut g);
    let mut stat = norm(&g) / cur.scale;
    let mut history = vec![cur.value];
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut converged = false;
    // Consecutive steps whose decrease is lost in rounding.
    let mut stalled = 0;
    let mut stat_ref = stat;
    loop {
        if stat <= cfg.tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iters {
            break;
        }
        iterations += 1;
        let mut d = two_loop(&g, &mem);
        d.iter_mut().for_each(|v| *v = -*v);
        m.project(&x, &mut d);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) || !slope.is_finite() {
            mem.clear();
            let gn = norm(&g);
            let cap = (0.5 / gn).min(1.0);
            d = g.iter().map(|v| -cap * v).collect();
            slope = -cap * gn * gn;
        } else if mem.is_empty() {
            let dn = norm(&d);
            if dn > 0.5 {
                d.iter_mut().for_each(|v| *v *= 0.5 / dn);
                slope *= 0.5 / dn;
            }
        }
        let mut step = cfg.armijo.initial_step;
        let mut accepted = None;
        let flat = (1e2 * f64::EPSILON * cur.value.abs()).max(10.0 * cur.noise).max(f64::MIN_POSITIVE);
        for _ in 0..cfg.armijo.max_backtracks {
            let scaled: Vec<f64> = d.iter().map(|v| step * v).collect();
            if let Some(xt) = m.retract(&x, &scaled) {
                if let Ok(ev) = f(&xt) {
                    if ev.value.is_finite() {
                        let mut gt = ev.grad.clone();
                        m.project(&xt, &mut gt);
                        let st = norm(&gt) / ev.scale;
                        let armijo = ev.value <= cur.value + cfg.armijo.slope * step * slope;
                        let flat_ok = ev.value <= cur.value + flat && st < stat;
                        if armijo || flat_ok {
                            accepted = Some((xt, ev, gt, st));
                            break;
                        }
                    }
                }
            }
            step *= cfg.armijo.factor;
        }
        let Some((xn, evn, gn, stn)) = accepted else { break };
        if cur.value - evn.value > flat || stn < 0.5 * stat_ref {
            stalled = 0;
            stat_ref = stn;
        } else {
            stalled += 1;
        }
        let mut s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        m.project(&xn, &mut s);
        let mut g_old = g;
        m.project(&xn, &mut g_old);
        let y: Vec<f64> = gn.iter().zip(&g_old).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            mem.push_back((s, y, 1.0 / sy));
            if mem.len() > cfg.memory {
                mem.pop_front();
            }
        }
        x = xn;
        cur = evn;
        g = gn;
        stat = stn;
        history.push(cur.value);
        if stalled >= STALL_LIMIT && stat > cfg.tol {
            break;
        }
    }
    Ok(Outcome { x, eval: cur, stationarity: stat, iterations, converged, history })
}
