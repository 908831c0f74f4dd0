//! Built-in invariant suite. Each check prints as one pass/fail record.
//!
//! `selftest_corrupt = true` adds an instance whose evaluators use a
//! different exponent than its class tag declares; the Euler check must
//! then fail.

use std::sync::Arc;
use std::time::Instant;

use fibering::{
    estimate_cstar, estimate_level, Diagonal, estimate_levels, make_diag, make_plap1d, two_term_closed_form, Branch, ClassTag,
    Family, FunctionalTriple, OptimizerConfig, TermValues,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::trace_bank;
use crate::config::RunConfig;
use crate::demos;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type CheckFn = fn(&RunConfig) -> Result<String, String>;

pub fn run(cfg: &RunConfig) -> Vec<Check> {
    let checks: [(&'static str, CheckFn); 8] = [
        ("euler_identities", euler_identities),
        ("closed_form_scale", closed_form_scale),
        ("reduced_gradients", reduced_gradients),
        ("eigenvalue_anchor", eigenvalue_anchor),
        ("branch_ordering", branch_ordering),
        ("cstar_signs_and_grid", cstar_signs_and_grid),
        ("demo_curves_monotone", demo_curves_monotone),
        ("demo_pairs_verify", demo_pairs_verify),
    ];
    checks
        .iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let res = std::panic::catch_unwind(|| f(cfg)).unwrap_or_else(|_| Err("check panicked".into()));
            let (passed, detail) = match res {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            Check { name, passed, detail, seconds: start.elapsed().as_secs_f64() }
        })
        .collect()
}

fn rng(cfg: &RunConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.optimizer().seed ^ salt)
}

fn random_point(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if u.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
            return u;
        }
    }
}

fn build(cfg: RunConfig) -> FunctionalTriple {
    cfg.build().expect("demo instances are valid")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn euler_identities(cfg: &RunConfig) -> Result<String, String> {
    let m = cfg.selftest_mesh;
    let err = |e: fibering::Error| e.to_string();
    let mut bank = vec![
        make_plap1d(2.0, 2.0, 4.0, m).map_err(err)?,
        make_plap1d(2.5, 1.5, 3.5, m).map_err(err)?,
        build(demos::concave_convex()),
        build(demos::sp_like()),
    ];
    if cfg.selftest_corrupt {
        let class = ClassTag::concave_convex(2.0, 3.0, 4.0).map_err(err)?;
        let terms = Diagonal {
            eta: 1.05 * class.eta(),
            deg_a: class.deg_a(),
            beta: class.beta(),
            n: vec![1.0, 2.0],
            a: vec![1.0, 1.0],
            b: vec![1.0, 1.5],
            b_factor: 1.0,
        };
        bank.push(FunctionalTriple::from_parts(class, Arc::new(terms)));
    }
    let mut rng = rng(cfg, 1);
    let mut worst: f64 = 0.0;
    for triple in &bank {
        for _ in 0..50 {
            let r = triple.euler_residuals(&random_point(triple.dim(), &mut rng)).max();
            ensure(r < 1e-10, || format!("{}: Euler residual {r:e} exceeds 1e-10", triple.class()))?;
            worst = worst.max(r);
        }
    }
    Ok(format!("{} instances, max residual {worst:.1e}", bank.len()))
}

/// Zero of `t F'(t) / a - F(t)` by log-grid scan and bisection, with `F` the
/// fiber numerator.
fn bisection_scale(class: &ClassTag, v: &TermValues, c: f64) -> Option<f64> {
    let (eta, beta, a) = (class.eta(), class.beta(), class.deg_a());
    let f = |t: f64| v.n * t.powf(eta) * (1.0 / a - 1.0 / eta) - v.b * t.powf(beta) * (1.0 / a - 1.0 / beta) + c;
    let grid: Vec<f64> = (0..=800).map(|k| 1e-8 * 1e16f64.powf(k as f64 / 800.0)).collect();
    let w = grid.windows(2).find(|w| f(w[0]) * f(w[1]) <= 0.0)?;
    let (mut lo, mut hi) = (w[0], w[1]);
    let flo = f(lo);
    while hi - lo > 2.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == (flo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn closed_form_scale(cfg: &RunConfig) -> Result<String, String> {
    let m = cfg.selftest_mesh;
    let cases = [
        (make_plap1d(2.0, 2.0, 4.0, m).map_err(|e| e.to_string())?, 1.0),
        (
            make_diag(ClassTag::two_term(3.0, 2.0, fibering::BSign::Positive).unwrap(), &[1.0, 3.0], &[2.0, 1.0], &[1.0, 0.5])
                .map_err(|e| e.to_string())?,
            -1.0,
        ),
    ];
    let mut rng = rng(cfg, 2);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let (triple, sign) = &cases[k % 2];
        let u = random_point(triple.dim(), &mut rng);
        let c = sign * 10f64.powf(rng.gen_range(-3.0..2.0));
        let branch = ClassTag::two_term_branch(c);
        let t = triple.solve_scale(c, &u, branch).map_err(|e| e.to_string())?;
        let class = triple.class();
        let v = triple.values(&u);
        let reference = bisection_scale(&class, &v, c).ok_or("oracle found no root")?;
        let rel = (t - reference).abs() / reference;
        ensure(rel <= 1e-10, || format!("{class} at c = {c:e}: scale {t} vs {reference}"))?;
        let value = triple.lambda_value(c, &u, branch).map_err(|e| e.to_string())?;
        let closed = two_term_closed_form(&class, &v, c).ok_or("closed form unavailable")?;
        ensure((value - closed).abs() <= 1e-9 * (1.0 + closed.abs()), || format!("{class}: value {value} vs {closed}"))?;
        worst = worst.max(rel);
    }
    Ok(format!("100 points, max relative scale error {worst:.1e}"))
}

fn reduced_gradients(cfg: &RunConfig) -> Result<String, String> {
    let cc = build(demos::concave_convex());
    let sp = build(demos::sp_like());
    let tt = make_plap1d(2.0, 2.0, 4.0, cfg.selftest_mesh.min(16)).map_err(|e| e.to_string())?;
    let cases = [(&tt, Branch::Minus), (&cc, Branch::Plus), (&cc, Branch::Minus), (&sp, Branch::Plus), (&sp, Branch::Minus)];
    let mut rng = rng(cfg, 3);
    let mut worst: f64 = 0.0;
    for (triple, branch) in cases {
        for _ in 0..20 {
            let u = random_point(triple.dim(), &mut rng);
            let c = match triple.class().family() {
                Family::TwoTerm => 10f64.powf(rng.gen_range(-2.0..1.0)),
                _ => {
                    let cl = triple.classify_fiber(0.0, &u).map_err(|e| e.to_string())?.c_local.ok_or("no c_local")?;
                    rng.gen_range(0.1..0.9) * cl
                }
            };
            let r = triple.eval_lambda(c, &u, branch).map_err(|e| e.to_string())?;
            let h = 1e-6;
            let (mut num, mut den) = (0.0f64, 0.0f64);
            for i in 0..u.len() {
                let (mut up, mut um) = (u.clone(), u.clone());
                up[i] += h;
                um[i] -= h;
                let fd = (triple.lambda_value(c, &up, branch).map_err(|e| e.to_string())?
                    - triple.lambda_value(c, &um, branch).map_err(|e| e.to_string())?)
                    / (2.0 * h);
                num += (fd - r.grad[i]).powi(2);
                den += fd * fd;
            }
            let rel = (num / den.max(1e-300)).sqrt();
            ensure(rel < 1e-5, || format!("{} {branch}: gradient mismatch {rel:e}", triple.class()))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("100 points, max relative gradient error {worst:.1e}"))
}

/// `(4 / h^2) sin^2(k pi h / 2)`: exact eigenvalues of the three-point Laplacian.
pub fn discrete_dirichlet_eigenvalue(m: usize, k: usize) -> f64 {
    let h = 1.0 / (m as f64 + 1.0);
    (4.0 / (h * h)) * (k as f64 * std::f64::consts::PI * h / 2.0).sin().powi(2)
}

fn eigenvalue_anchor(cfg: &RunConfig) -> Result<String, String> {
    let m = cfg.selftest_mesh;
    let tol = if m >= 63 { 1e-3 } else { 1e-2 };
    let triple = make_plap1d(2.0, 2.0, 4.0, m).map_err(|e| e.to_string())?;
    let levels = estimate_levels(&triple, 1e-6, 3.min(m), Branch::Minus, cfg.optimizer()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for spec in &levels {
        let ev = discrete_dirichlet_eigenvalue(m, spec.n);
        let rel = (spec.value - ev).abs() / ev;
        ensure(rel < tol, || format!("n = {}: level {} vs eigenvalue {ev}", spec.n, spec.value))?;
        let pair = spec.pair.as_ref().ok_or_else(|| format!("n = {}: no verified pair", spec.n))?;
        let v = triple.values(&pair.u);
        let id = triple.energy_identity_residual(pair).ok_or("energy identity unavailable")?;
        ensure(id <= 1e-8 * (1.0 + v.b.abs()), || format!("n = {}: energy identity residual {id:e}", spec.n))?;
        worst = worst.max(rel);
    }
    Ok(format!("m = {m}, {} levels, max relative error {worst:.1e} (tolerance {tol:e})", levels.len()))
}

fn branch_ordering(cfg: &RunConfig) -> Result<String, String> {
    let opt = cfg.optimizer();
    let gap = 10.0 * opt.verify.grad;
    let mut count = 0;
    for triple in [build(demos::concave_convex()), build(demos::sp_like())] {
        let cs = estimate_cstar(&triple, opt).map_err(|e| e.to_string())?;
        for frac in [0.9, 0.5, 0.1] {
            for n in 1..=2 {
                let p = estimate_level(&triple, frac * cs, n, Branch::Plus, opt).map_err(|e| e.to_string())?;
                let q = estimate_level(&triple, frac * cs, n, Branch::Minus, opt).map_err(|e| e.to_string())?;
                ensure(p.value + gap < q.value, || {
                    format!("{} n = {n} c = {:e}: {} vs {}", triple.class(), frac * cs, p.value, q.value)
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} level pairs separated by more than {gap:.0e}"))
}

fn cstar_signs_and_grid(cfg: &RunConfig) -> Result<String, String> {
    let mut parts = Vec::new();
    for triple in [build(demos::concave_convex()), build(demos::sp_like())] {
        let cs = estimate_cstar(&triple, cfg.optimizer()).map_err(|e| e.to_string())?;
        let cc = triple.class().family() == Family::ConcaveConvex;
        ensure(if cc { cs < 0.0 } else { cs > 0.0 }, || format!("{}: c* = {cs} has the wrong sign", triple.class()))?;
        let points = 10_000;
        let mut best = if cc { f64::NEG_INFINITY } else { f64::INFINITY };
        for k in 0..points {
            let th = std::f64::consts::PI * k as f64 / points as f64;
            let cl = triple.classify_fiber(0.0, &[th.cos(), th.sin()]).map_err(|e| e.to_string())?.c_local.ok_or("no c_local")?;
            best = if cc { best.max(cl) } else { best.min(cl) };
        }
        let rel = (cs - best).abs() / best.abs();
        ensure(rel <= 1e-6, || format!("{}: c* = {cs} vs grid {best}", triple.class()))?;
        parts.push(format!("{} c* = {cs:.6e}", triple.class()));
    }
    Ok(parts.join(", "))
}

fn demo_banks(cfg: &RunConfig) -> Result<Vec<(FunctionalTriple, Vec<fibering::EnergyCurve>)>, String> {
    demos::NAMES
        .iter()
        .map(|name| {
            let mut demo = demos::by_name(name).expect("known demo");
            demo.trace.optimizer = OptimizerConfig { seed: cfg.optimizer().seed, ..demo.trace.optimizer };
            let triple = build(demo.clone());
            let (curves, _) = trace_bank(&triple, &demo).map_err(|e| format!("{name}: {e}"))?;
            Ok((triple, curves))
        })
        .collect()
}

fn demo_curves_monotone(cfg: &RunConfig) -> Result<String, String> {
    let mut count = 0;
    for (triple, curves) in demo_banks(cfg)? {
        for curve in &curves {
            ensure(curve.monotonic && curve.samples.len() >= 2, || {
                format!("{} n = {} {}: not monotone over {} samples", triple.class(), curve.n, curve.branch, curve.samples.len())
            })?;
            count += 1;
        }
    }
    Ok(format!("{count} curves strictly monotone"))
}

fn demo_pairs_verify(cfg: &RunConfig) -> Result<String, String> {
    let mut count = 0;
    for (triple, curves) in demo_banks(cfg)? {
        for s in curves.iter().flat_map(|c| &c.samples) {
            triple
                .verify_pair(s.mu, s.c, &s.pair.u, &cfg.optimizer().verify)
                .map_err(|e| format!("{} at c = {:e}: {e}", triple.class(), s.c))?;
            count += 1;
        }
    }
    Ok(format!("{count} pairs verified"))
}
