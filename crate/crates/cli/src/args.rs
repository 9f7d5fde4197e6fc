use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "kerneldist",
    version,
    about = "Kernel distance between weighted point sets"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "KERNELDIST_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel distance between two point sets.
    Dist(DistArgs),
    /// Translation or rigid motion of Q minimizing the distance to P.
    Align(AlignArgs),
    /// Random coreset of a point set, with a discrepancy report.
    Coreset(CoresetArgs),
    /// Feature-space embedding written in the KDFV binary format.
    Embed(EmbedArgs),
    /// Timing table comparing the approximate methods with exact evaluation.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Params {
    /// Kernel bandwidth.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Accuracy; error bounds are `eps W^2`.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Failure probability for randomized methods.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl Params {
    /// Range checks shared by every command: `sigma > 0`, `eps` in `(0, 1]`,
    /// `delta` in `(0, 1)`.
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |what: &str| Err(crate::CliError::Usage(what.to_string()));
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad("--sigma must be a positive finite number");
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return bad("--eps must be in (0, 1]");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad("--delta must be in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistMethod {
    Exact,
    Wspd,
    Rff,
    Ifgt,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    pub p: PathBuf,
    pub q: PathBuf,
    #[arg(long, value_enum, default_value_t = DistMethod::Exact)]
    pub method: DistMethod,
    #[command(flatten)]
    pub params: Params,
    /// Report path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AlignMode {
    Translate,
    Rigid,
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    pub p: PathBuf,
    pub q: PathBuf,
    #[arg(long, value_enum, default_value_t = AlignMode::Translate)]
    pub mode: AlignMode,
    /// Search on random coresets of both sets.
    #[arg(long)]
    pub coreset: bool,
    #[command(flatten)]
    pub params: Params,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoresetKind {
    Random,
    Feature,
}

#[derive(Debug, Args)]
pub struct CoresetArgs {
    pub p: PathBuf,
    #[arg(long, value_enum, default_value_t = CoresetKind::Random)]
    pub method: CoresetKind,
    /// Sample size (default: from eps and delta).
    #[arg(long)]
    pub size: Option<usize>,
    #[command(flatten)]
    pub params: Params,
    /// Coreset file; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Report path (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbedMethod {
    Rff,
    Ifgt,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    pub p: PathBuf,
    #[arg(long, value_enum, default_value_t = EmbedMethod::Rff)]
    pub method: EmbedMethod,
    /// Fourier feature count (default: from eps, delta and the input size).
    /// Embeddings are comparable only when computed with the same basis.
    #[arg(long)]
    pub rho: Option<u64>,
    /// Taylor truncation degree (default: from eps and the data radius).
    #[arg(long)]
    pub tau: Option<usize>,
    /// Taylor expansion center, comma separated (default: centroid).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub center: Option<Vec<f64>>,
    #[command(flatten)]
    pub params: Params,
    #[arg(long)]
    pub out: PathBuf,
    /// Report path (default: stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Suite to run (`dist`).
    #[arg(long)]
    pub suite: String,
    /// Points per set.
    #[arg(long, value_delimiter = ',', default_value = "1000,5000,20000")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Sides of the cubes the instances are drawn from, in units of sigma.
    #[arg(long, value_delimiter = ',', default_value = "1,32")]
    pub extents: Vec<f64>,
    /// Methods to time against exact evaluation.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "wspd,ifgt,rff"
    )]
    pub methods: Vec<DistMethod>,
    #[command(flatten)]
    pub params: Params,
    /// CSV table path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}
