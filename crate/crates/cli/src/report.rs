//! CSV, JSON and SVG output for traced curves and critical pairs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use fibering::{Branch, CriticalPair, EnergyCurve};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CSV_HEADER: &str = "class,n,branch,c,mu,t,residual_grad,residual_energy,iters,sign_changes";

/// One output row: a verified pair with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub class: String,
    pub n: usize,
    pub branch: Branch,
    pub c: f64,
    pub mu: f64,
    pub t: f64,
    pub residual_grad: f64,
    pub residual_energy: f64,
    pub iters: usize,
    pub sign_changes: Option<usize>,
    pub u: Vec<f64>,
}

impl PairRecord {
    pub fn from_pair(class: &str, n: usize, branch: Branch, iters: usize, pair: &CriticalPair) -> Self {
        PairRecord {
            class: class.to_string(),
            n,
            branch,
            c: pair.c,
            mu: pair.mu,
            t: pair.norm(),
            residual_grad: pair.residual_grad,
            residual_energy: pair.residual_energy,
            iters,
            sign_changes: pair.sign_changes,
            u: pair.u.clone(),
        }
    }
}

/// Rows of all curves, curve by curve in sample order.
pub fn curve_records(curves: &[EnergyCurve]) -> Vec<PairRecord> {
    curves
        .iter()
        .flat_map(|curve| {
            curve.samples.iter().map(|s| PairRecord {
                t: s.t,
                iters: s.iterations,
                ..PairRecord::from_pair(&curve.class, curve.n, curve.branch, s.iterations, &s.pair)
            })
        })
        .collect()
}

pub fn to_csv(records: &[PairRecord]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in records {
        let sc = r.sign_changes.map(|k| k.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{:?},{:?},{:?},{:?},{:?},{},{}",
            r.class, r.n, r.branch, r.c, r.mu, r.t, r.residual_grad, r.residual_energy, r.iters, sc
        );
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<PathBuf> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(path.to_path_buf())
}

/// Writes `<stem>.csv` and `pairs.json` with identical row order.
pub fn write_records(dir: &Path, stem: &str, records: &[PairRecord]) -> CliResult<Vec<PathBuf>> {
    Ok(vec![
        write_file(&dir.join(format!("{stem}.csv")), &to_csv(records))?,
        write_file(&dir.join("pairs.json"), &serde_json::to_string_pretty(records)?)?,
    ])
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Compact tick label.
fn tick_label(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if (1e-3..1e5).contains(&x.abs()) {
        let s = format!("{x:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.2e}")
    }
}

/// Round tick positions (steps of 1, 2 or 5 times a power of ten) inside `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|k| k * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// Line plot of the curves with `mu` on the horizontal axis and `c` on the
/// vertical axis. Plus branches are solid, minus branches dashed.
pub fn curves_svg(curves: &[EnergyCurve]) -> String {
    let (w, h, left, right, top, bottom) = (720.0, 480.0, 80.0, 120.0, 24.0, 50.0);
    let pts: Vec<(f64, f64)> = curves.iter().flat_map(|c| c.samples.iter().map(|s| (s.mu, s.c))).collect();
    let span = |vals: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo <= 1e-300 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.04 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = span(&mut pts.iter().map(|p| p.0));
    let (y0, y1) = span(&mut pts.iter().map(|p| p.1));
    let (pw, ph) = (w - left - right, h - top - bottom);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for xv in nice_ticks(x0, x1) {
        let px = sx(xv);
        let _ = writeln!(s, r#"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/>"#, top + ph, top + ph + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, top + ph + 18.0, tick_label(xv));
    }
    for yv in nice_ticks(y0, y1) {
        let py = sy(yv);
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{py:.1}" x2="{left}" y2="{py:.1}" stroke="black"/>"#, left - 5.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, left - 8.0, py + 4.0, tick_label(yv));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="14" text-anchor="middle">{}</text>"#, left + pw / 2.0, curves.first().map_or("", |c| c.class.as_str()));
    if x0 < 0.0 && x1 > 0.0 {
        let _ = writeln!(s, r##"<line x1="{0:.1}" y1="{top}" x2="{0:.1}" y2="{1:.1}" stroke="#bbb"/>"##, sx(0.0), top + ph);
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(s, r##"<line x1="{left}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="#bbb"/>"##, sy(0.0), left + pw);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">mu</text>"#, left + pw / 2.0, h - 8.0);
    let _ = writeln!(s, r#"<text x="16" y="{:.1}" transform="rotate(-90 16 {:.1})" text-anchor="middle">c</text>"#, top + ph / 2.0, top + ph / 2.0);

    for (i, curve) in curves.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let dash = if curve.branch == Branch::Minus { r#" stroke-dasharray="6 3""# } else { "" };
        let path: Vec<String> = curve.samples.iter().map(|p| format!("{:.2},{:.2}", sx(p.mu), sy(p.c))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, path.join(" "));
        for p in &curve.samples {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(p.mu), sy(p.c));
        }
        let ly = top + 14.0 + 16.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="1.5"{dash}/>"#, lx + 24.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">n={} {}</text>"#, lx + 30.0, ly + 4.0, curve.n, curve.branch);
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_labels_are_compact() {
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(2.5), "2.5");
        assert_eq!(tick_label(-10.0), "-10");
        assert_eq!(tick_label(1e-6), "1.00e-6");
    }

    #[test]
    fn ticks_are_round_and_inside() {
        assert_eq!(nice_ticks(-0.3, 1.1), vec![0.0, 0.5, 1.0]);
        let t = nice_ticks(-43.0, 93.7);
        assert!(t.iter().all(|x| *x >= -43.0 && *x <= 93.7 && x % 50.0 == 0.0));
    }

    #[test]
    fn empty_plot_is_well_formed() {
        let svg = curves_svg(&[]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(!svg.contains("NaN"));
    }
}
