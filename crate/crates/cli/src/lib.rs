//! Command-line front end for the innovation search solver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure,
//! 4 enumeration budget exceeded.

pub mod commands;
pub mod config;
pub mod svg;
pub mod table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: Box<dyn std::error::Error + Send + Sync>,
    },
}

impl CliError {
    pub fn io(path: &Path, source: impl Into<Box<dyn std::error::Error + Send + Sync>>) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source: source.into(),
        }
    }

    /// An unwritable output location is treated as a configuration problem.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "innosearch", version, about = "Solve, simulate and verify optimal sequential search for an innovation")]
pub struct Cli {
    /// Worker threads for parallel sweeps and enumeration (default: all cores).
    #[arg(long, global = true, env = "INNOSEARCH_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value function, policy and frontier path.
    Solve(Common),
    /// Monte Carlo replay of the optimal frontier path.
    Simulate(Common),
    /// Exhaustive search over slot schedules of the discretized instance.
    Oracle(OracleArgs),
    /// Solve a family of instances varying one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// reciprocal or logarithmic
    #[arg(long)]
    pub cost_family: Option<String>,
    #[arg(long)]
    pub c0: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub grid_size: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub runs: Option<u64>,
    /// Path length (solve), censoring horizon (simulate) or periods (oracle).
    #[arg(long)]
    pub horizon: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of equal-width project slots.
    #[arg(long)]
    pub slots: Option<usize>,
    /// Maximum number of schedules to enumerate.
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// p, v, delta, c0, k, or scale (multiplies v, c0 and k together).
    #[arg(long)]
    pub param: String,
    /// Explicit values, comma-separated.
    #[arg(long, conflicts_with = "range")]
    pub values: Option<String>,
    /// Inclusive linear grid `start,stop,count`.
    #[arg(long)]
    pub range: Option<String>,
}

impl Common {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let overrides: [(&str, Option<String>); 13] = [
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("format", self.format.clone()),
            ("seed", self.seed.map(|x| x.to_string())),
            ("p", self.p.map(|x| x.to_string())),
            ("v", self.v.map(|x| x.to_string())),
            ("delta", self.delta.map(|x| x.to_string())),
            ("cost_family", self.cost_family.clone()),
            ("c0", self.c0.map(|x| x.to_string())),
            ("k", self.k.map(|x| x.to_string())),
            ("grid_size", self.grid_size.map(|x| x.to_string())),
            ("tol", self.tol.map(|x| x.to_string())),
            ("runs", self.runs.map(|x| x.to_string())),
            ("horizon", self.horizon.map(|x| x.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(value) = value {
                s.set(key, value);
            }
        }
        Ok(s)
    }
}

fn execute(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Solve(c) => {
            let cfg = RunConfig::from_settings(&c.settings()?)?;
            let report = commands::solve(&cfg, &cfg.out)?;
            if report.searched {
                println!(
                    "W(0) = {:.10}, first boundary {:.10}, frontier after the horizon {:.10}",
                    report.value_at_origin, report.first_boundary, report.limit
                );
            } else {
                println!("{}", commands::NO_SEARCH);
            }
            Ok(())
        }
        Command::Simulate(c) => {
            let cfg = RunConfig::from_settings(&c.settings()?)?;
            commands::simulate(&cfg, &cfg.out)
        }
        Command::Oracle(a) => {
            let mut s = a.common.settings()?;
            if let Some(n) = a.slots {
                s.set("slots", n);
            }
            if let Some(b) = a.budget {
                s.set("budget", b);
            }
            let cfg = RunConfig::from_settings(&s)?;
            commands::oracle(&cfg, &cfg.out)
        }
        Command::Sweep(a) => {
            let cfg = RunConfig::from_settings(&a.common.settings()?)?;
            let spec = commands::SweepSpec::parse(&a.param, a.values.as_deref(), a.range.as_deref())?;
            commands::sweep(&cfg, &spec, &cfg.out)
        }
    }
}

/// Parses `args` and runs the selected subcommand; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    match cli.workers {
        Some(0) => {
            eprintln!("configuration error: workers: must be at least 1");
            return 2;
        }
        Some(n) => pool = pool.num_threads(n),
        None => {}
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("configuration error: workers: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
