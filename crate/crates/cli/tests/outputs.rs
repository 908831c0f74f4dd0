use std::process::Command;

use fibering_cli::commands;
use fibering_cli::demos;
use fibering_cli::report::{PairRecord, CSV_HEADER};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fibering"))
}

#[test]
fn trace_writes_matching_csv_json_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = demos::concave_convex();
    cfg.out_dir = dir.path().to_path_buf();
    let out = commands::trace(&cfg).unwrap();
    assert_eq!(out.files.len(), 3);

    let csv = std::fs::read_to_string(dir.path().join("curves.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let pairs: Vec<PairRecord> =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pairs.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), pairs.len());
    for (row, pair) in rows.iter().zip(&pairs) {
        assert_eq!(row.len(), 10);
        assert_eq!(row[0], pair.class);
        assert_eq!(row[1].parse::<usize>().unwrap(), pair.n);
        assert_eq!(row[2], pair.branch.to_string());
        assert_eq!(row[3].parse::<f64>().unwrap(), pair.c);
        assert_eq!(row[4].parse::<f64>().unwrap(), pair.mu);
    }

    let svg = std::fs::read_to_string(dir.path().join("curves.svg")).unwrap();
    let curves = out.summary.as_array().unwrap().len();
    assert_eq!(svg.matches("<polyline").count(), curves);
    assert!(svg.trim_end().ends_with("</svg>"));
}

#[test]
fn outputs_are_deterministic_across_thread_counts() {
    let run = |jobs: &str| {
        let dir = tempfile::tempdir().unwrap();
        let status = bin()
            .args(["--demo", "sp_like", "--jobs", jobs, "--seed", "7", "--out"])
            .arg(dir.path())
            .arg("trace")
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        (
            std::fs::read(dir.path().join("pairs.json")).unwrap(),
            std::fs::read(dir.path().join("curves.csv")).unwrap(),
        )
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn config_file_errors_are_reported_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "instance = plap1d\np = 2\nq = 2\nr = four\nm = 9\n").unwrap();
    let out = bin().arg("--config").arg(&path).arg("solve").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    std::fs::write(&path, "instance = plap1d\np = 2\nq = 2\nm = 9\n").unwrap();
    let out = bin().arg("--config").arg(&path).arg("solve").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`r`"));
}

#[test]
fn corrupted_exponent_fails_the_selftest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("corrupt.conf");
    let mut cfg = demos::two_term();
    cfg.selftest_mesh = 9;
    cfg.selftest_corrupt = true;
    std::fs::write(&path, cfg.to_text()).unwrap();
    let out = bin().arg("--config").arg(&path).arg("selftest").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("FAIL euler_identities")), "{stdout}");
}

#[test]
fn reduced_mesh_selftest_passes() {
    let mut cfg = demos::two_term();
    cfg.selftest_mesh = 9;
    let checks = fibering_cli::selftest::run(&cfg);
    for c in &checks {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
}

#[test]
fn solve_minmax_and_slice_write_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = demos::two_term();
    cfg.out_dir = dir.path().to_path_buf();
    let read = || -> Vec<PairRecord> {
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pairs.json")).unwrap()).unwrap()
    };
    commands::solve(&cfg).unwrap();
    assert_eq!(read().len(), 1);
    cfg.nodal = true;
    let out = commands::minmax(&cfg).unwrap();
    assert_eq!(out.summary["bounds"].as_array().unwrap().len(), 6);
    commands::slice(&cfg).unwrap();
    let pairs = read();
    assert!(!pairs.is_empty() && pairs.iter().all(|p| p.mu == 0.0));
    assert!(commands::cstar(&cfg).is_err());
}

#[test]
fn classify_reports_two_critical_points_inside_the_window() {
    let cfg = demos::concave_convex();
    let out = commands::classify(&cfg).unwrap();
    assert_eq!(out.summary["diagnosis"]["regime"], "TwoCritical");
}
