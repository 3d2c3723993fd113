use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tskit::recursive::{DEFAULT_CONST_PROB_C, DEFAULT_HIGH_PROB_C};

use crate::io::Format;

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 0x5EED_0001;
/// OSNAP column sparsity used when `--variant high-prob` is given without `--sparsity`.
pub const DEFAULT_SPARSITY: usize = 4;

#[derive(Parser, Debug, Clone)]
#[command(name = "tskit", version, about = "Recursive tensor sketching for polynomial and Gaussian kernels")]
pub struct Cli {
    /// Maximum number of worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Sketch x^{⊗p} for every column x of a d×n matrix.
    Sketch(SketchArgs),
    /// Gaussian-kernel features S_g(X).
    GaussianFeatures(GaussianArgs),
    /// Polynomial-kernel ridge regression, exact and sketched.
    Krr(KrrArgs),
    /// Run a statistical verification suite.
    Verify(VerifyArgs),
    /// Timing table for the sketching pipeline.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    ConstProb,
    HighProb,
}

pub fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => t.replace('_', "").parse::<u64>(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed (decimal or 0x-prefixed hex).
    #[arg(long, value_parser = parse_seed, default_value = "0x5EED0001")]
    pub seed: u64,
    /// Output matrix format.
    #[arg(long, value_enum, default_value = "kmat")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct SketchArgs {
    /// d×n input matrix (KMAT1 or CSV), one data point per column.
    #[arg(long)]
    pub input: PathBuf,
    /// m×n output matrix; a manifest is written next to it.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Target dimension; derived from --lambda and --eps when absent.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value = "const-prob")]
    pub variant: VariantArg,
    /// OSNAP column sparsity for the high-prob variant.
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// Ridge parameter for automatic sizing.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long = "const-c", default_value_t = DEFAULT_CONST_PROB_C)]
    pub const_c: f64,
    #[arg(long = "const-c1", default_value_t = DEFAULT_HIGH_PROB_C.0)]
    pub const_c1: f64,
    #[arg(long = "const-c2", default_value_t = DEFAULT_HIGH_PROB_C.1)]
    pub const_c2: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct GaussianArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Bound r on every squared column norm; defaults to the largest one in the input.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Fixed per-degree target dimension; theory sizing when absent.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value = "const-prob")]
    pub variant: VariantArg,
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// Theory-sizing constant; defaults to 8 for const-prob and 0.25 for high-prob.
    #[arg(long = "const-c1")]
    pub const_c1: Option<f64>,
    #[arg(long = "const-c2", default_value_t = DEFAULT_HIGH_PROB_C.1)]
    pub const_c2: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct KrrArgs {
    /// d×n training matrix.
    #[arg(long)]
    pub input: PathBuf,
    /// Target point b as a d×1 or 1×d matrix; the response is b^{⊗p}.
    #[arg(long)]
    pub b: PathBuf,
    /// n×1 coefficient vector of the sketched solution.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long)]
    pub lambda: f64,
    /// Sketch dimension; derived from the statistical dimension when absent.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "const-prob")]
    pub variant: VariantArg,
    #[arg(long)]
    pub sparsity: Option<usize>,
    #[arg(long = "const-c", default_value_t = DEFAULT_CONST_PROB_C)]
    pub const_c: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Unbiased,
    SecondMoment,
    Ose,
    Amp,
    Spectral,
    VarianceProbe,
    Tail,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Trials per check; each suite has its own default.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_parser = parse_seed, default_value = "0x5EED0001")]
    pub seed: u64,
    /// Also write the JSON report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    /// Dense input dimension.
    #[arg(long, default_value_t = 64)]
    pub d: usize,
    /// Base number of columns; runs use n and 2n.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Base degree; runs use p and 2p.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    #[arg(long, default_value_t = 256)]
    pub m: usize,
    /// Dimension of the sparse inputs.
    #[arg(long = "sparse-d", default_value_t = 200_000)]
    pub sparse_d: usize,
    /// Number of sparse columns.
    #[arg(long = "sparse-n", default_value_t = 256)]
    pub sparse_n: usize,
    /// Repetitions per configuration; the median is reported.
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[arg(long, value_parser = parse_seed, default_value = "0x5EED0001")]
    pub seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
