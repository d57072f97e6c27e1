//! `chaospi` command-line front end.
//!
//! Exit codes: 0 on success, 1 for configuration or domain errors (including a
//! missing input file), 2 when reading or writing the filesystem fails.

pub mod commands;
pub mod config;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use chaospi_core::io::IoError;
use chaospi_core::pipeline::PipelineError;
use chaospi_core::ModelKind;

pub use config::{RunConfig, SeedSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Domain(Box<dyn std::error::Error + Send + Sync>),
    #[error("{failed} of {total} seeds failed; see {}", manifest.display())]
    SeedFailures {
        failed: usize,
        total: usize,
        manifest: PathBuf,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(e) if e.is_system() => 2,
            _ => 1,
        }
    }

    pub(crate) fn read(path: &Path, e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::Io(IoError::MissingFile(path.to_path_buf()))
        } else {
            CliError::Io(IoError::Io {
                path: path.to_path_buf(),
                source: e,
            })
        }
    }

    pub(crate) fn write(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(IoError::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "chaospi",
    version,
    about = "Prediction intervals via chaos-aware AR models and NSGA-II"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate delay, embedding dimension and the largest Lyapunov exponent.
    Analyze(RunArgs),
    /// Fit the selected model once (first seed) and write test intervals.
    Intervals(RunArgs),
    /// Run the selected model for every seed and summarize.
    Experiment(RunArgs),
    /// Recompute attainment surfaces from saved per-seed fronts.
    Eaf(EafArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Series CSV (`date,value` or a single value column).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON run configuration; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// two_stage, three_stage_single or three_stage_dual.
    #[arg(long)]
    pub model: Option<String>,
    /// `1,2,3`, `1..21` or `1..=20`.
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub tau: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub test_horizon: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Value column name when the CSV has several.
    #[arg(long)]
    pub column: Option<String>,
    /// Run on a single thread.
    #[arg(long)]
    pub serial: bool,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.input {
            c.input = Some(v.clone());
        }
        if let Some(v) = &self.column {
            c.column = Some(v.clone());
        }
        if let Some(v) = &self.model {
            c.model = v.parse::<ModelKind>()?;
        }
        if let Some(v) = &self.seeds {
            c.seeds = SeedSpec::parse(v)?;
        }
        if self.tau.is_some() {
            c.tau = self.tau;
        }
        if self.m.is_some() {
            c.m = self.m;
        }
        if let Some(v) = self.test_horizon {
            c.test_horizon = v;
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if self.serial {
            c.parallel = false;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct EafArgs {
    /// Directory of `seed_<s>.csv` files.
    #[arg(long)]
    pub fronts: PathBuf,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(a) => commands::analyze(&a.resolve()?),
        Command::Intervals(a) => commands::intervals(&a.resolve()?),
        Command::Experiment(a) => commands::experiment(&a.resolve()?),
        Command::Eaf(a) => commands::eaf(&a.fronts, &a.out),
    }
}
