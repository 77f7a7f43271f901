//! `hmflow` command-line front end.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::error::Error;
pub use config::{ConfigError, FlowInit, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] Error),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(String),
    /// One or more invariant checks failed; outputs were still written.
    #[error("failed checks: {}", .0.join(", "))]
    Validation(Vec<String>),
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Solver(Error::InvalidParameter(_)) => EXIT_CONFIG,
            CliError::Solver(Error::BoundaryAngleMismatch { .. } | Error::FarFieldMismatch { .. }) => EXIT_VALIDATION,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Solver(_) | CliError::Input(_) | CliError::Io(_) => EXIT_SOLVER,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hmflow", version, about = "Equivariant harmonic map expanders: shooting, flows, diagnostics")]
pub struct Cli {
    /// Config file (`[section]` headers, `key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `run.out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `section.key=value`, applied after the config file.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shoot one profile from slope `a`.
    Shoot {
        /// Shorthand for `--override shoot.a=A`.
        #[arg(short, long, allow_negative_numbers = true)]
        a: Option<f64>,
    },
    /// Boundary angle against slope, solution sets and kernel crossings.
    Sweep,
    /// Run the rescaled flow and record entropy, dissipation and obstruction.
    Flow {
        /// Shorthand for `--override flow.alpha=ALPHA`.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Entropy, frequency and decay diagnostics of stored profiles.
    Diagnose {
        #[arg(required = true, num_args = 1..=2)]
        profiles: Vec<PathBuf>,
    },
    /// Jacobi eigenpairs of a stored or freshly shot profile.
    Spectrum {
        #[arg(long)]
        profile: Option<PathBuf>,
    },
}

fn configure(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut overrides = cli.overrides.clone();
    match &cli.command {
        Command::Shoot { a: Some(a) } => overrides.push(format!("shoot.a={a:?}")),
        Command::Flow { alpha: Some(x) } => overrides.push(format!("flow.alpha={x:?}")),
        _ => {}
    }
    let mut cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    if let Some(out) = &cli.out {
        cfg.set_out(out.clone());
    }
    Ok(cfg)
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let result = configure(&cli).and_then(|cfg| match &cli.command {
        Command::Shoot { .. } => commands::shoot(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Flow { .. } => commands::flow(&cfg),
        Command::Diagnose { profiles } => commands::diagnose(&cfg, profiles),
        Command::Spectrum { profile } => commands::spectrum_cmd(&cfg, profile.as_deref()),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hmflow: {e}");
            e.exit_code()
        }
    }
}
