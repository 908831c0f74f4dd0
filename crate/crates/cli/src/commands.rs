//! Subcommand implementations. Each returns a JSON summary plus the files it
//! wrote; the binary prints the summary and warnings.

use std::path::PathBuf;

use fibering::{
    estimate_cstar, estimate_cstar_with_direction, estimate_levels, fixed_mu_slice, minimize_reduced, nodal_level_1d,
    trace_curve, Branch, EnergyCurve, Error, Family, FunctionalTriple,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{GridUnits, RunConfig};
use crate::error::{CliError, CliResult};
use crate::report::{self, curve_records, PairRecord};

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub summary: Value,
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

fn require<T: Copy>(v: Option<T>, key: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::MissingKey(key.to_string()))
}

/// `c*` for classes that have one.
fn cstar_of(triple: &FunctionalTriple, cfg: &RunConfig) -> CliResult<Option<f64>> {
    if triple.class().family() == Family::TwoTerm {
        Ok(None)
    } else {
        Ok(Some(estimate_cstar(triple, cfg.optimizer())?))
    }
}

fn scale_energies(values: &[f64], triple: &FunctionalTriple, cfg: &RunConfig) -> CliResult<Vec<f64>> {
    match cfg.grid_units {
        GridUnits::Absolute => Ok(values.to_vec()),
        GridUnits::Cstar => {
            let cs = cstar_of(triple, cfg)?.ok_or_else(|| CliError::Invalid {
                key: "grid_units".into(),
                msg: "two-term classes have no c*, use grid_units = absolute".into(),
            })?;
            Ok(values.iter().map(|v| v * cs).collect())
        }
    }
}

fn single_energy(triple: &FunctionalTriple, cfg: &RunConfig) -> CliResult<f64> {
    let c = require(cfg.c, "c")?;
    Ok(scale_energies(&[c], triple, cfg)?[0])
}

pub fn classify(cfg: &RunConfig) -> CliResult<Outcome> {
    let triple = cfg.build()?;
    let u = cfg.point.clone().unwrap_or_else(|| vec![1.0; triple.dim()]);
    let c = single_energy(&triple, cfg)?;
    let diag = triple.classify_fiber(c, &u)?;
    Ok(Outcome {
        summary: json!({
            "class": triple.class().name(),
            "direction": triple.class().direction(),
            "flags": triple.flags(),
            "c": c,
            "mu_at_unit_scale": triple.eval_mu(c, &u)?,
            "diagnosis": diag,
        }),
        ..Outcome::default()
    })
}

pub fn solve(cfg: &RunConfig) -> CliResult<Outcome> {
    let triple = cfg.build()?;
    let c = single_energy(&triple, cfg)?;
    let class = triple.class().name();
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for branch in cfg.branches(&triple) {
        match minimize_reduced(&triple, c, branch, cfg.optimizer()) {
            Ok(pair) => records.push(PairRecord::from_pair(class, 1, branch, 0, &pair)),
            Err(e) => warnings.push(format!("branch {branch}: {e}")),
        }
    }
    if records.is_empty() {
        return Err(CliError::Core(Error::NoConvergence { best_residual: f64::NAN }));
    }
    let files = vec![report::write_file(&cfg.out_dir.join("pairs.json"), &serde_json::to_string_pretty(&records)?)?];
    let summary = json!(records.iter().map(|r| json!({"branch": r.branch, "c": r.c, "mu": r.mu, "t": r.t,
        "residual_grad": r.residual_grad, "residual_energy": r.residual_energy})).collect::<Vec<_>>());
    Ok(Outcome { summary, files, warnings })
}

pub fn minmax(cfg: &RunConfig) -> CliResult<Outcome> {
    let triple = cfg.build()?;
    let c = single_energy(&triple, cfg)?;
    let class = triple.class().name();
    let branches = cfg.branches(&triple);
    let results: Vec<_> = branches
        .par_iter()
        .map(|&branch| {
            let levels = estimate_levels(&triple, c, cfg.levels, branch, cfg.optimizer());
            let nodal = if cfg.nodal {
                Some((1..=cfg.levels).map(|n| nodal_level_1d(&triple, c, n, branch, cfg.optimizer())).collect::<Vec<_>>())
            } else {
                None
            };
            (branch, levels, nodal)
        })
        .collect();
    let (mut rows, mut records, mut warnings) = (Vec::new(), Vec::new(), Vec::new());
    for (branch, levels, nodal) in results {
        let specs = match levels {
            Ok(s) => s,
            Err(e) => {
                warnings.push(format!("branch {branch}: {e}"));
                continue;
            }
        };
        for spec in specs.iter().chain(nodal.iter().flatten().filter_map(|r| r.as_ref().ok())) {
            if spec.pair.is_none() {
                warnings.push(format!("branch {branch}, n = {}: no verified pair at the bound", spec.n));
            }
            if let Some(p) = &spec.pair {
                records.push(PairRecord::from_pair(class, spec.n, branch, spec.outer_iterations, p));
            }
            rows.push(json!({"n": spec.n, "branch": branch, "kind": spec.kind, "direction": spec.direction,
                "value": spec.value, "converged": spec.converged, "collapse": spec.collapse,
                "verified": spec.pair.is_some()}));
        }
        for e in nodal.iter().flatten().filter_map(|r| r.as_ref().err()) {
            warnings.push(format!("branch {branch}, nodal bound: {e}"));
        }
    }
    if rows.is_empty() {
        return Err(CliError::Core(Error::NoConvergence { best_residual: f64::NAN }));
    }
    let files = vec![report::write_file(&cfg.out_dir.join("pairs.json"), &serde_json::to_string_pretty(&records)?)?];
    Ok(Outcome { summary: json!({"c": c, "bounds": rows}), files, warnings })
}

pub fn cstar(cfg: &RunConfig) -> CliResult<Outcome> {
    let triple = cfg.build()?;
    let (cs, w) = estimate_cstar_with_direction(&triple, cfg.optimizer())?;
    Ok(Outcome {
        summary: json!({"class": triple.class().name(), "cstar": cs, "direction": w}),
        ..Outcome::default()
    })
}

/// Traces every `(n, branch)` curve of the configuration in parallel.
/// Curves truncated at a branch boundary are kept with a warning.
pub fn trace_bank(triple: &FunctionalTriple, cfg: &RunConfig) -> CliResult<(Vec<EnergyCurve>, Vec<String>)> {
    if cfg.c_grid.is_empty() {
        return Err(CliError::MissingKey("c_grid".into()));
    }
    let grid = scale_energies(&cfg.c_grid, triple, cfg)?;
    let jobs: Vec<(Branch, usize)> =
        cfg.branches(triple).into_iter().flat_map(|b| (1..=cfg.levels).map(move |n| (b, n))).collect();
    let results: Vec<_> =
        jobs.par_iter().map(|&(branch, n)| (branch, n, trace_curve(triple, n, branch, &grid, &cfg.trace))).collect();
    let (mut curves, mut warnings) = (Vec::new(), Vec::new());
    for (branch, n, res) in results {
        match res {
            Ok(curve) => curves.push(curve),
            Err(Error::BoundaryCrossed { c, curve }) => {
                warnings.push(format!("n = {n}, branch {branch}: branch lost at c = {c:e}, curve truncated"));
                curves.push(*curve);
            }
            Err(e) => warnings.push(format!("n = {n}, branch {branch}: {e}")),
        }
    }
    if curves.is_empty() {
        return Err(CliError::Core(Error::NoConvergence { best_residual: f64::NAN }));
    }
    for curve in &curves {
        if !curve.monotonic {
            warnings.push(format!("n = {}, branch {}: curve is not strictly monotone", curve.n, curve.branch));
        }
    }
    Ok((curves, warnings))
}

fn curve_summary(curves: &[EnergyCurve]) -> Value {
    json!(curves
        .iter()
        .map(|c| json!({"class": c.class, "n": c.n, "branch": c.branch, "kind": c.kind, "samples": c.samples.len(),
            "monotonic": c.monotonic, "lipschitz_est": c.lipschitz_est, "boundary": c.boundary}))
        .collect::<Vec<_>>())
}

pub fn trace(cfg: &RunConfig) -> CliResult<Outcome> {
    let triple = cfg.build()?;
    let (curves, warnings) = trace_bank(&triple, cfg)?;
    let mut files = report::write_records(&cfg.out_dir, "curves", &curve_records(&curves))?;
    files.push(report::write_file(&cfg.out_dir.join("curves.svg"), &report::curves_svg(&curves))?);
    Ok(Outcome { summary: curve_summary(&curves), files, warnings })
}

pub fn slice(cfg: &RunConfig) -> CliResult<Outcome> {
    let triple = cfg.build()?;
    let mu = require(cfg.mu, "mu")?;
    let (curves, warnings) = trace_bank(&triple, cfg)?;
    let pairs = fixed_mu_slice(mu, &triple, &curves, &cfg.trace)?;
    let class = triple.class().name();
    let records: Vec<PairRecord> = pairs
        .iter()
        .map(|p| PairRecord::from_pair(class, p.level.unwrap_or(1), p.branch.unwrap_or(Branch::Minus), 0, p))
        .collect();
    let files = report::write_records(&cfg.out_dir, "slice", &records)?;
    let summary = json!({"mu": mu, "pairs": records.iter().map(|r| json!({"n": r.n, "branch": r.branch, "c": r.c,
        "t": r.t, "residual_grad": r.residual_grad})).collect::<Vec<_>>()});
    Ok(Outcome { summary, files, warnings })
}
