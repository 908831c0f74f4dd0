use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fibering_cli::commands::{self, Outcome};
use fibering_cli::{demos, selftest, CliError, CliResult, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "fibering", version, about = "Fibering-method reduction, min-max levels and energy curves")]
struct Cli {
    /// Run configuration (`key = value` lines). Selftest runs without one.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Use a built-in demo configuration instead of a file.
    #[arg(long, global = true, conflicts_with = "config")]
    demo: Option<String>,
    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Random seed; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Optimizer stationarity tolerance; overrides `grad_tol`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads for independent curves and branches.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Fiber shape and critical scales at one point.
    Classify,
    /// Ground-state critical pair at energy `c`.
    Solve,
    /// Min-max levels `1..=levels` at energy `c`.
    Minmax,
    /// Extremal degeneracy energy.
    Cstar,
    /// Energy curves over `c_grid`; writes curves.csv, pairs.json, curves.svg.
    Trace,
    /// Pairs at fixed `mu` from traced curves; writes slice.csv, pairs.json.
    Slice,
    /// Built-in invariant suite.
    Selftest,
}

fn load(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match (&cli.config, &cli.demo) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            RunConfig::parse(&text)?
        }
        (None, Some(name)) => demos::by_name(name).ok_or_else(|| CliError::Invalid {
            key: "demo".into(),
            msg: format!("unknown demo `{name}`, expected one of {}", demos::NAMES.join(", ")),
        })?,
        (None, None) if matches!(cli.command, Command::Selftest) => demos::two_term(),
        (None, None) => return Err(CliError::MissingKey("--config".into())),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.trace.optimizer.seed = seed;
    }
    if let Some(tol) = cli.tol {
        cfg.trace.optimizer.grad_tol = tol;
    }
    cfg.trace.optimizer.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> CliResult<Outcome> {
    let cfg = load(cli)?;
    match cli.command {
        Command::Classify => commands::classify(&cfg),
        Command::Solve => commands::solve(&cfg),
        Command::Minmax => commands::minmax(&cfg),
        Command::Cstar => commands::cstar(&cfg),
        Command::Trace => commands::trace(&cfg),
        Command::Slice => commands::slice(&cfg),
        Command::Selftest => {
            let checks = selftest::run(&cfg);
            for c in &checks {
                println!("{} {:<22} {:>8.3}s  {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.seconds, c.detail);
            }
            match checks.iter().filter(|c| !c.passed).count() {
                0 => Ok(Outcome::default()),
                k => Err(CliError::SelftestFailed(k)),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("warning: {e}");
        }
    }
    match run(&cli) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if !outcome.summary.is_null() {
                println!("{}", serde_json::to_string_pretty(&outcome.summary).unwrap_or_default());
            }
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::SelftestFailed(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
