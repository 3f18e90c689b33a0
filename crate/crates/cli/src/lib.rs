//! Command-line front end: `detect`, `calibrate`, `sweep` and `chernoff`.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod table;

pub use config::{Preset, Settings};
pub use error::{CliError, Result};
pub use table::{Cell, ResultsTable};

#[derive(Debug, Parser)]
#[command(
    name = "mimdetect",
    version,
    about = "Bayes and MIM detectors for minor-probability events"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the observations in a CSV file with both detectors.
    Detect(DetectArgs),
    /// Calibrate the magnifier coefficient s0 from training data.
    Calibrate(CalibrateArgs),
    /// Sweep the prior ratio or the mean separation and tabulate error rates.
    Sweep(SweepArgs),
    /// Chernoff exponent of the two hypothesis densities.
    Chernoff(ChernoffArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    #[command(flatten)]
    pub settings: Settings,
    /// TOML file whose keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with column `x` and optional column `label` (A or B).
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Training CSV with column `x`; without it `--n` points are drawn from p_A.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also write an SVG chart next to the table.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ChernoffArgs {
    #[command(flatten)]
    pub common: Common,
}

/// Runs one parsed command line, writing reports to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Detect(a) => commands::detect(&a, stdout),
        Command::Calibrate(a) => commands::calibrate(&a, stdout),
        Command::Sweep(a) => commands::sweep(&a, stdout),
        Command::Chernoff(a) => commands::chernoff(&a, stdout),
    }
}
