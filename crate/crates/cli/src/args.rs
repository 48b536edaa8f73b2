use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Parser, Debug)]
#[command(name = "fdl", version, about = "Dimensions, pressures and lower spectral radii of matrix systems")]
pub struct Cli {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Print a structured JSON result instead of a table.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Singular value function of one matrix.
    Phi(PhiArgs),
    /// Finite-depth bracket for the q-pressure (with --q) or the singular-value pressure.
    Pressure(PressureArgs),
    /// Certified bracket for the q-dimension formula value.
    Qdim(QdimArgs),
    /// Certified bracket for the affinity dimension.
    Sdim(SdimArgs),
    /// Bracket for the lower spectral radius.
    Lsr(LsrArgs),
    /// Finite-horizon resistance check of a pair.
    Resist(ResistArgs),
    /// Sample a self-affine measure by random iteration.
    Chaos(ChaosArgs),
    /// Mesh moment sums and the L^q slope of a sample file.
    Moments(MomentsArgs),
    /// Growth of B1^n B2^k B1^n.
    Witness(WitnessArgs),
    /// Commuting pair vs rotated perturbations.
    DiscontinuityScan(ScanArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Phi(_) => "phi",
            Command::Pressure(_) => "pressure",
            Command::Qdim(_) => "qdim",
            Command::Sdim(_) => "sdim",
            Command::Lsr(_) => "lsr",
            Command::Resist(_) => "resist",
            Command::Chaos(_) => "chaos",
            Command::Moments(_) => "moments",
            Command::Witness(_) => "witness",
            Command::DiscontinuityScan(_) => "discontinuity-scan",
        }
    }
}

/// Matrix rows, given on the command line as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rows(pub Vec<Vec<f64>>);

fn parse_rows(s: &str) -> Result<Rows, String> {
    serde_json::from_str(s).map(Rows).map_err(|e| format!("expected JSON rows like [[0.4,0],[0,0.05]]: {e}"))
}

fn parse_vectors(s: &str) -> Result<Rows, String> {
    serde_json::from_str(s).map(Rows).map_err(|e| format!("expected JSON vectors like [[0,0],[0.6,0]]: {e}"))
}

/// Accepts `0.5` as well as `[0.5, 0.5]` in config files.
fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairName {
    /// (diag(λ, δ), λI)
    Theorem1,
    /// (diag(λ, δ), λ·rotation(π/(2k)))
    Perturbed,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemArgs {
    /// One map as JSON rows; repeat for each map.
    #[arg(long = "matrix", value_parser = parse_rows)]
    pub matrix: Vec<Rows>,
    /// Named pair instead of explicit matrices.
    #[arg(long, value_enum)]
    pub pair: Option<PairName>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Rotation index of the perturbed pair.
    #[arg(long)]
    pub k: Option<u32>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecArgs {
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Maximum words per enumeration.
    #[arg(long, env = "FDL_BUDGET")]
    pub budget: Option<u64>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PhiArgs {
    #[arg(long = "matrix", value_parser = parse_rows)]
    pub matrix: Option<Rows>,
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PressureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub exec: ExecArgs,
    /// Probability vector (comma separated); a single value p means (p, 1−p).
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub p: Vec<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// Word length (default 8).
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct QdimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub exec: ExecArgs,
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub p: Vec<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Bracket width target (default 1e-4).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Deepest enumeration per probe.
    #[arg(long)]
    pub max_depth: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SdimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub exec: ExecArgs,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_depth: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LsrArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub exec: ExecArgs,
    /// Longest exhaustively searched word (default 16).
    #[arg(long)]
    pub nmax: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ResistArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub exec: ExecArgs,
    #[arg(long)]
    pub c: Option<f64>,
    /// Allowed fraction of second-map letters.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Growth rate the norms are compared against (> 1).
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ChaosArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Translation vectors as JSON, one per map.
    #[arg(long, value_parser = parse_vectors)]
    pub translations: Option<Rows>,
    #[arg(long, value_delimiter = ',')]
    #[serde(deserialize_with = "one_or_many")]
    pub p: Vec<f64>,
    /// Points kept (default 100000).
    #[arg(long)]
    pub count: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iterates discarded first (default 1000).
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Binary sample file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MomentsArgs {
    /// Sample file written by `chaos`.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Mesh sizes (comma separated, decreasing).
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    /// Mesh sizes as exponents j for r = 2^-j (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub r_exp: Vec<i32>,
    /// CSV file to write.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct WitnessArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Exponent of the middle map (default: --k).
    #[arg(long)]
    pub power: Option<u64>,
    /// Largest n (default 40).
    #[arg(long)]
    pub nmax: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanArgs {
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Rotation indices (comma separated).
    #[arg(long = "k", value_delimiter = ',')]
    pub k: Vec<u32>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub exec: ExecArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
