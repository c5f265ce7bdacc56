use std::path::PathBuf;

use beeid_core::DecoderKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "beeid", version, about = "Bee identification over a permuting, deleting BSC")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores). Never
    /// changes output values.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo estimate of the bee-identification error.
    Simulate(SimulateArgs),
    /// Exact error probabilities on tiny instances.
    Exact(ExactArgs),
    /// Lower and upper bounds on the bee-identification exponent.
    Bounds(BoundsArgs),
    /// Lower and upper bounds on the bee-identification capacity.
    Capacity(CapacityArgs),
    /// Writes fig3.csv through fig6.csv.
    Figures(FiguresArgs),
    /// Runs the built-in inequality suites.
    Verify(VerifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Exact(_) => "exact",
            Command::Bounds(_) => "bounds",
            Command::Capacity(_) => "capacity",
            Command::Figures(_) => "figures",
            Command::Verify(_) => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderArg {
    Independent,
    Joint,
}

impl From<DecoderArg> for DecoderKind {
    fn from(d: DecoderArg) -> Self {
        match d {
            DecoderArg::Independent => DecoderKind::Independent,
            DecoderArg::Joint => DecoderKind::Joint,
        }
    }
}

/// Options every subcommand accepts.
#[derive(Debug, Args, Serialize)]
pub struct ConfigArg {
    /// JSON file of flag values (keys as flag names). Flags given on the
    /// command line take precedence. A run manifest is accepted too.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    /// Blocklength.
    #[arg(long, required_unless_present = "codebook")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Rate; the codebook has ceil(2^(n*rate)) rows.
    #[arg(long, required_unless_present = "codebook")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// Fraction of absent rows; k = floor(alpha*m).
    #[arg(long)]
    pub alpha: f64,
    /// Crossover probability.
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_enum)]
    pub decoder: DecoderArg,
    #[arg(long)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Codebook file, one row of 0/1 characters per line.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codebook: Option<PathBuf>,
    /// Sweep one parameter: n=LIST, p=LIST or rate=LIST.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
    /// Draw a new random codebook for every trial.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub fresh_codebook: bool,
    /// Largest allowed codebook size.
    #[arg(long, default_value_t = beeid_core::montecarlo::DEFAULT_MAX_M)]
    pub max_m: usize,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub config: ConfigArg,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct ExactArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Absent rows. Without a codebook this selects the optimal
    /// bee-identification error; without it, the best block error.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long)]
    pub p: f64,
    /// Decoder for a fixed codebook.
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoder: Option<DecoderArg>,
    /// Codebook file, one row per line.
    #[arg(long, conflicts_with = "rows")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub codebook: Option<PathBuf>,
    /// Inline codebook rows, e.g. 000,011,101.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<String>,
    /// Maximum number of elementary evaluations.
    #[arg(long, default_value_t = beeid_core::oracle::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Visit only codebooks with sorted rows (same minimum, less work).
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub canonical: bool,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub config: ConfigArg,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct BoundsArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rmin: f64,
    #[arg(long, default_value_t = 0.5)]
    pub rmax: f64,
    /// Number of grid points, both ends included.
    #[arg(long, default_value_t = 501)]
    pub steps: usize,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub config: ConfigArg,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct CapacityArgs {
    #[arg(long, default_value_t = 0.005)]
    pub pmin: f64,
    #[arg(long, default_value_t = 0.495)]
    pub pmax: f64,
    /// Number of grid points, both ends included.
    #[arg(long, default_value_t = 99)]
    pub steps: usize,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub config: ConfigArg,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct FiguresArgs {
    /// Directory for the CSV files and manifest.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Crossover probability of the exponent figure.
    #[arg(long, default_value_t = 0.05)]
    pub p: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub config: ConfigArg,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// Print a JSON report.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub json: bool,
    /// Seed for the random instances.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = beeid_core::oracle::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Adds a sign-flipped bound that must fail (harness self-test).
    #[arg(long, hide = true)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub inject_failure: bool,
    #[command(flatten)]
    #[serde(skip)]
    pub config: ConfigArg,
}
