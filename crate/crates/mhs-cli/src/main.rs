//! `mhs`: configuration-driven front end for the equilibrium solver and its
//! verification suites.
//!
//! Exit codes: 0 ok, 1 config/compatibility error, 2 non-convergence,
//! 3 verification failure.

mod artifact;
mod commands;
mod config;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mhs_core::MhsError;
use thiserror::Error;

use artifact::ArtifactSink;
use config::{load_config, LoadedConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] MhsError),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(e) => match e {
                MhsError::Config(_) | MhsError::Geometry(_) | MhsError::Degeneracy(_) => 1,
                MhsError::Transport(_)
                | MhsError::Linear(_)
                | MhsError::NonConvergence(_)
                | MhsError::NonContraction(_) => 2,
            },
            CliError::Verification(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "mhs", version, about = "Magnetohydrostatic equilibrium solver")]
struct Cli {
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// cap on worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// artifact output directory (default: current directory)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the 2D fixed-point problem (annulus or mapped domain)
    Solve2d,
    /// Run the linearized spherical-shell sweep
    Shell3d,
    /// Run a verification suite
    Verify {
        /// multipliers2d | symbol2d | kernels | multipliers3d | symbol3d | mapped2d
        suite: String,
    },
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let loaded: Option<LoadedConfig> = match &cli.config {
        Some(path) => Some(load_config(path)?),
        None => None,
    };
    let require_config = |what: &str| -> Result<&LoadedConfig, CliError> {
        loaded
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{what} requires --config")))
    };
    match &cli.command {
        Command::Solve2d => {
            let cfg = require_config("solve2d")?;
            let sink = ArtifactSink::new(cli.out.as_deref(), &cfg.raw)?;
            commands::cmd_solve2d(cfg, &sink)
        }
        Command::Shell3d => {
            let cfg = require_config("shell3d")?;
            let sink = ArtifactSink::new(cli.out.as_deref(), &cfg.raw)?;
            commands::cmd_shell3d(cfg, &sink)
        }
        Command::Verify { suite } => {
            // suites run with built-in defaults when no config is given;
            // the header then hashes the suite name
            let raw: Vec<u8> = loaded
                .as_ref()
                .map(|c| c.raw.clone())
                .unwrap_or_else(|| format!("builtin:{suite}").into_bytes());
            let sink = ArtifactSink::new(cli.out.as_deref(), &raw)?;
            suites::cmd_verify(suite, loaded.as_ref(), &sink)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
