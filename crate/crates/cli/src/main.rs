//! `lattice-lab <command> --config <file> [--out <dir>] [--threads <n>]`

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use thiserror::Error;

mod commands;
mod config;
mod run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Derived constants and diffusion regime.
    Params,
    /// Stationary density sampled on the grid.
    Stationary,
    /// Time evolution with trajectory observers.
    Evolve,
    /// Orbits of the generalized-scaling flow.
    Flow,
    /// Extracted vs closed-form determining-equation coefficients.
    Residuals,
    /// Large-|p| decay of the coefficients along a profile.
    Scan,
    /// Parameter and σ sweep.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Stationary => "stationary",
            Command::Evolve => "evolve",
            Command::Flow => "flow",
            Command::Residuals => "residuals",
            Command::Scan => "scan",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lattice-lab",
    version,
    about = "Optical-lattice Fokker-Planck laboratory"
)]
struct Cli {
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Parent directory for run directories (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, env = "LATTICE_LAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) | CliError::Io(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::execute(cli.command, &cli.config, cli.out.as_deref(), cli.threads) {
        Ok(dir) => {
            eprintln!("run directory: {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = match e {
                CliError::Validation(_) => "validation error",
                CliError::Numerical(_) => "numerical failure",
                CliError::Io(_) => "output failure",
            };
            eprintln!("lattice-lab {}: {kind}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
