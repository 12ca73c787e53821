//! `cfmimo` batch runner.
//!
//! Exit status: 0 on success, 2 for invalid input (arguments or scenario file),
//! 3 when an artifact cannot be written.

mod experiments;
mod manifest;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use cfmimo::correlation::FrequencySelector;
use clap::{Parser, ValueEnum};

use crate::sweep::Sweep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Per-subcarrier channel tensors (CSV + binary).
    Channel,
    /// Micro and macro virtual-angle spectra with peak tracking.
    Squint,
    /// Minimum cyclic-prefix report.
    Cp,
    /// Residual EVM of the time-domain OFDM link over the configured CP lengths.
    IsiSweep,
    /// Monte-Carlo spatial correlation matrices.
    Correlation,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::Channel => "channel",
            Self::Squint => "squint",
            Self::Cp => "cp",
            Self::IsiSweep => "isi-sweep",
            Self::Correlation => "correlation",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cfmimo",
    version,
    about = "Spatial-wideband cell-free massive MIMO experiments"
)]
pub struct Args {
    /// Scenario description (TOML).
    #[arg(long)]
    pub scenario: PathBuf,

    #[arg(long, value_enum)]
    pub experiment: Experiment,

    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,

    /// Overrides `paths.seed` from the scenario.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Parameter sweep `<bandwidth_hz|num_antennas|num_aps>=<v1,v2,...>`.
    #[arg(long, value_parser = sweep::parse_sweep)]
    pub sweep: Option<Sweep>,

    /// Correlation frequency: a subcarrier index or `avg`.
    #[arg(long)]
    pub frequency: Option<FrequencySelector>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Input(_) => 2,
            Self::Output(_) => 3,
        }
    }
}

impl From<cfmimo::Error> for CliError {
    fn from(e: cfmimo::Error) -> Self {
        match e {
            cfmimo::Error::Io(_) => Self::Output(e.to_string()),
            other => Self::Input(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match experiments::run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cfmimo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
