use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// CSV sweeps for heralded cat-state generation with a beam-splitter hub.
///
/// Every option can also be given in a key=value file passed with
/// --config, using the long option name without dashes as the key
/// (for example `beta-step = 0.1` or `N = 10,20`). Flags win over the file.
#[derive(Debug, Parser)]
#[command(name = "cathub", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal y and fidelity for each (N, beta).
    FidelitySweep(SweepArgs),
    /// Two-detector success probabilities over all splits of N.
    ProbSweep(ProbArgs),
    /// Mean photon number of the optimal heralded state against beta^2.
    MeanphotonSweep(SweepArgs),
    /// Detector-efficiency reduction factors, multipliers and trade-offs.
    DetectorReport(DetectorArgs),
    /// Brute-force Fock-space check of the closed forms.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for grid evaluation.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Significant digits of floating-point fields [default: 12].
    #[arg(long)]
    pub precision: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BetaGrid {
    /// Explicit beta values; overrides the range options.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    #[arg(long)]
    pub beta_min: Option<f64>,
    #[arg(long)]
    pub beta_max: Option<f64>,
    #[arg(long)]
    pub beta_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// even or odd [default: even].
    #[arg(long)]
    pub parity: Option<String>,
    /// Heralded photon numbers, all of the chosen parity
    /// [default: 10,20,40,90 or 11,21,41,91].
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Vec<u64>,
    /// beta grid [default: 0.5 to 7 in steps of 0.05].
    #[command(flatten)]
    pub beta: BetaGrid,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    #[command(flatten)]
    pub common: Common,
    /// Splitter transmittance, the same for both splitters [default: 0.8,0.77].
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Total photon number registered by the two detectors [default: 20].
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// beta grid [default: 2.2 to 3 in steps of 0.05].
    #[command(flatten)]
    pub beta: BetaGrid,
}

#[derive(Debug, Args)]
pub struct DetectorArgs {
    #[command(flatten)]
    pub common: Common,
    /// Transmittance of each splitter [default: 0.9,0.95,0.98].
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Number of identical splitters [default: 1,2].
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Detector efficiency [default: 0.98].
    #[arg(long)]
    pub eta: Option<f64>,
    /// Mean photon number used for the reduction-factor columns [default: 35].
    #[arg(long)]
    pub mean_n: Option<f64>,
    /// Heralded photon number for the state-specific columns [default: 20].
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// Cat amplitude for the state-specific columns [default: 3].
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest number of splitters [default: 3].
    #[arg(long)]
    pub k: Option<usize>,
    /// Largest total photon count [default: 6].
    #[arg(long = "N")]
    pub n: Option<u64>,
    /// Transmittances combined over all splitters [default: 0.7,0.8,0.9].
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Squeezing amplitudes [default: 0.3,0.6,1].
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<f64>,
    /// Minimum Fock cutoff in storage-index units [default: 40].
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Largest accepted state fidelity deficit [default: 1e-9].
    #[arg(long)]
    pub fidelity_tol: Option<f64>,
    /// Largest accepted relative probability error [default: 1e-9].
    #[arg(long)]
    pub prob_tol: Option<f64>,
}
