//! Command-line surface for the hard-copying graph process.
//!
//! Exit codes: 0 success, 1 usage error, 2 invalid or out-of-regime
//! parameters, 3 I/O failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

use config::{CheckpointSpec, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn invalid(key: &str, message: impl Into<String>) -> Self {
        Self::Invalid { key: key.to_string(), message: message.into() }
    }

    pub fn missing(key: &str) -> Self {
        Self::Usage(format!(
            "missing required setting `{key}` (pass --{} or set it in --config)",
            key.replace('_', "-")
        ))
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Invalid { .. } => 2,
            Self::Io { .. } => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hardcopy", version, about = "Scale-free random graph process with hard copying")]
pub struct Cli {
    /// JSON file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single run; writes summary.json, degrees.csv, trajectory.csv and optionally edges.txt.
    Simulate(SimulateArgs),
    /// Replicated runs; writes ensemble.json and dk_empirical CSV files.
    Ensemble(EnsembleArgs),
    /// Limit degree sequence and expected edge counts.
    Analytic(AnalyticArgs),
    /// Exact expectations by full enumeration (T <= 6, m <= 2).
    Oracle(OracleArgs),
    /// Discrete power-law fit of a degrees.csv file.
    Fit(FitArgs),
    /// Ensemble (or a dk_empirical.csv file) against the limit sequence.
    Compare(CompareArgs),
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Final time T.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model_args: ModelArgs,
    /// `hard-copy` (default) or `kumar`.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `geometric` or a comma-separated list of times.
    #[arg(long, value_parser = CheckpointSpec::parse_flag)]
    pub checkpoints: Option<CheckpointSpec>,
    /// Also write edges.txt.
    #[arg(long)]
    pub edges: bool,
    /// Stop cleanly once the edge count would exceed this.
    #[arg(long)]
    pub max_edges: Option<u64>,
    /// Kumar model: probability of a uniform destination per out-link.
    #[arg(long)]
    pub copy_factor: Option<f64>,
    /// Kumar model: out-links per vertex.
    #[arg(long)]
    pub out_degree: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[command(flatten)]
    pub model_args: ModelArgs,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_parser = CheckpointSpec::parse_flag)]
    pub checkpoints: Option<CheckpointSpec>,
    #[arg(long)]
    pub max_edges: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Largest degree in dk_theory.csv (default 1000).
    #[arg(long)]
    pub k_max: Option<u64>,
    /// Last time in edges_expected.csv (default 1000).
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// A degrees.csv file (`k,count,fraction`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Lower cutoff of the fitted tail (default 10).
    #[arg(long)]
    pub k_min: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub model_args: ModelArgs,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Compare degrees m..=k_max (default 20).
    #[arg(long)]
    pub k_max: Option<u64>,
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Use this dk_empirical.csv (at time --steps) instead of running an ensemble.
    #[arg(long)]
    pub empirical: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ModelArgs {
    fn settings(&self) -> Settings {
        Settings { alpha: self.alpha, m: self.m, steps: self.steps, seed: self.seed, ..Default::default() }
    }
}

impl Command {
    fn settings(&self) -> Settings {
        match self {
            Self::Simulate(a) => Settings {
                model: a.model.clone(),
                out: a.out.clone(),
                checkpoints: a.checkpoints.clone(),
                edges: a.edges.then_some(true),
                max_edges: a.max_edges,
                copy_factor: a.copy_factor,
                out_degree: a.out_degree,
                ..a.model_args.settings()
            },
            Self::Ensemble(a) => Settings {
                replicas: a.replicas,
                threads: a.threads,
                checkpoints: a.checkpoints.clone(),
                max_edges: a.max_edges,
                out: a.out.clone(),
                ..a.model_args.settings()
            },
            Self::Analytic(a) => Settings {
                alpha: a.alpha,
                m: a.m,
                k_max: a.k_max,
                steps: a.steps,
                eps0: a.eps0,
                out: a.out.clone(),
                ..Default::default()
            },
            Self::Oracle(a) => {
                Settings { alpha: a.alpha, m: a.m, steps: a.steps, out: a.out.clone(), ..Default::default() }
            }
            Self::Fit(a) => Settings { input: a.input.clone(), k_min: a.k_min, ..Default::default() },
            Self::Compare(a) => Settings {
                replicas: a.replicas,
                threads: a.threads,
                k_max: a.k_max,
                eps0: a.eps0,
                empirical: a.empirical.clone(),
                out: a.out.clone(),
                ..a.model_args.settings()
            },
        }
    }
}

/// Parses `args` (program name first) and runs the command. Data goes to
/// files and standard output; diagnostics go to standard error.
pub fn run_from_args<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };
    run(cli)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let settings = file.overlay(cli.command.settings());
    match cli.command {
        Command::Simulate(_) => commands::simulate(&settings),
        Command::Ensemble(_) => commands::ensemble(&settings),
        Command::Analytic(_) => commands::analytic(&settings),
        Command::Oracle(_) => commands::oracle(&settings),
        Command::Fit(_) => commands::fit(&settings),
        Command::Compare(_) => commands::compare(&settings),
    }
}
