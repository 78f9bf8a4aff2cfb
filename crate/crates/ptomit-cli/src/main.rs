//! Command-line front end for the `ptomit` library: transmission spectra,
//! group-delay and gain sweeps, supermode classification, a time-domain
//! cross-check of the closed-form response, and canned dataset bundles
//! with fixed grids and filenames.
//!
//! Every run writes its artifacts plus a `run_manifest.json` into the
//! output directory; the manifest carries a content hash of the resolved
//! parameters so identical hashes guarantee byte-identical data files.

mod commands;
mod config;
mod output;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Errors surfaced to the user, each mapped to a stable exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, an invalid config file, or an otherwise malformed
    /// request. Exit code 2, matching clap's own usage failures.
    Usage(String),
    /// Every requested point failed to compute. Exit code 3.
    AllPointsFailed(String),
    /// I/O trouble or an internal inconsistency (including a `--verify`
    /// mismatch). Exit code 1.
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(message) => write!(f, "usage error: {message}"),
            CliError::AllPointsFailed(message) => write!(f, "computation failed: {message}"),
            CliError::Internal(message) => write!(f, "internal error: {message}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Internal(format!("i/o failure: {err}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Internal(format!("serialization failure: {err}"))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::AllPointsFailed(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON file overriding preset parameters (SI units, same field names
    /// as the serialized parameter structs).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Named parameter preset to start from.
    #[arg(long, global = true, default_value = "paper", value_name = "NAME")]
    pub preset: String,

    /// Directory for CSV/JSON artifacts and the run manifest.
    #[arg(long, global = true, default_value = "out", value_name = "DIR")]
    pub out: PathBuf,

    /// Worker threads for sweeps; defaults to the number of CPUs.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,

    /// Recompute every response row a second time and fail on any
    /// relative disagreement above 1e-12.
    #[arg(long, global = true)]
    pub verify: bool,
}

/// Probe transmission, group delay, and mode analysis of a resonator pair
/// with tunable gain/loss contrast.
#[derive(Debug, Parser)]
#[command(name = "ptomit", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probe transmission spectra over a detuning grid.
    Spectrum(commands::spectrum::SpectrumArgs),
    /// On-resonance group delay against pump power on a log grid.
    DelaySweep(commands::delay::DelayArgs),
    /// Response and steady state against the gain-to-loss ratio.
    GainSweep(commands::gain::GainArgs),
    /// Supermode eigenvalues and phase label of the optical pair.
    PtModes(commands::pt_modes::PtModesArgs),
    /// Time-domain integration cross-checked against the closed form.
    OracleCheck(commands::oracle::OracleArgs),
    /// Canned dataset bundles with fixed grids and filenames.
    Reproduce(commands::reproduce::ReproduceArgs),
    /// Steady state at a single operating point, as JSON.
    SteadyState(commands::steady::SteadyArgs),
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Spectrum(args) => commands::spectrum::run(&cli.global, args),
        Command::DelaySweep(args) => commands::delay::run(&cli.global, args),
        Command::GainSweep(args) => commands::gain::run(&cli.global, args),
        Command::PtModes(args) => commands::pt_modes::run(&cli.global, args),
        Command::OracleCheck(args) => commands::oracle::run(&cli.global, args),
        Command::Reproduce(args) => commands::reproduce::run(&cli.global, args),
        Command::SteadyState(args) => commands::steady::run(&cli.global, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}
