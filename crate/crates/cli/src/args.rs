use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use euclid_core::enumeration::{PairKind, Reference};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Clone)]
#[command(name = "euclid", version, about = "Digit-cost statistics of the Euclidean algorithm")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    /// Digit cost as inline JSON, e.g. '{"table":[1,0],"tail":0}', or a path
    /// to a file holding it. Defaults to one unit per division step.
    #[arg(long, global = true)]
    pub cost: Option<String>,
    /// Taylor basis size.
    #[arg(long = "M", global = true)]
    pub basis_order: Option<usize>,
    /// Digits summed explicitly before the tail correction.
    #[arg(long, global = true)]
    pub nmax: Option<u64>,
    /// Radius of the sampling circle around 2/3.
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed for the Monte-Carlo diagnostic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum CommandArgs {
    /// Mean, entropy, variance and spectral constants of the cost.
    Constants,
    /// Standardized moments and normal distance over a grid of n.
    Moments(MomentsArgs),
    /// Check one of the operator identities against enumeration.
    Verify(VerifyArgs),
    /// Leading eigenvalues over a grid of (s, ω).
    Spectrum(SpectrumArgs),
    /// Raw centred power sums over a grid of n.
    Census(CensusArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// A single bound n.
    #[arg(long, conflicts_with = "grid")]
    pub n: Option<u64>,
    /// Comma-separated bounds (default 300,1000,3000,10000,30000).
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<u64>>,
    #[arg(long, value_enum, default_value_t = Kind::Reduced)]
    pub kind: Kind,
    /// Highest moment order.
    #[arg(long, default_value_t = 4)]
    pub pmax: u32,
}

#[derive(Args, Debug, Clone)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CensusArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum, default_value_t = RefArg::LogN)]
    pub reference: RefArg,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub identity: Identity,
    /// Complex s such as 1.5 or 1.2+0.3i (default 1.2 for depth, 1.5 otherwise).
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<String>,
    /// Complex ω (default 0.1 for depth, 0 otherwise).
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub depth: u32,
    /// Largest digit in the depth identity.
    #[arg(long, default_value_t = 10)]
    pub digit_bound: u64,
    /// Enumeration bound for the series identities.
    #[arg(long, default_value_t = 10_000)]
    pub n: u64,
    /// Terms of the geometric resummation.
    #[arg(long, default_value_t = 2000)]
    pub kmax: u32,
    /// ω-derivative order for the dp identity.
    #[arg(long, default_value_t = 1)]
    pub p: u32,
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    /// Real parts of s: comma-separated values and start:stop:step ranges.
    #[arg(long, default_value = "0.9:2:0.1", allow_hyphen_values = true)]
    pub s: String,
    /// Imaginary parts of s, same syntax.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub t: String,
    /// Values of ω, same syntax.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub omega: String,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Reduced,
    All,
}

impl From<Kind> for PairKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Reduced => PairKind::Reduced,
            Kind::All => PairKind::All,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefArg {
    LogV,
    LogN,
    LogVOverGcd,
}

impl From<RefArg> for Reference {
    fn from(r: RefArg) -> Self {
        match r {
            RefArg::LogV => Reference::LogV,
            RefArg::LogN => Reference::LogN,
            RefArg::LogVOverGcd => Reference::LogVOverGcd,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Identity {
    Depth,
    Series,
    Dp,
}
