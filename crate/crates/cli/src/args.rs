use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "dsopt", version, about = "Learn minimum-size decision sets with SAT and MaxSAT")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a decision set from a CSV file.
    Learn(LearnArgs),
    /// Evaluate a saved model on a CSV file.
    Eval(EvalArgs),
    /// Stratified k-fold cross-validation.
    Cv(CvArgs),
    /// Write the SAT/MaxSAT encoding in DIMACS format.
    Encode(EncodeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Smallest perfect set, iterative SAT.
    Opt,
    /// Smallest perfect set, MaxSAT over a node bound.
    Mopt,
    /// Errors traded against size (needs --lambda).
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    Aggregated,
    PerClass,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "per-class")]
    pub scope: ScopeArg,
    /// Node cost as a fraction of the training examples (sparse mode).
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Bins per numeric column (2, 3 or 4).
    #[arg(long, default_value_t = 2)]
    pub bins: usize,
    /// First node bound (mopt, sparse) or node count (encode).
    #[arg(long)]
    pub n0: Option<usize>,
    /// Growth of the node bound between rounds.
    #[arg(long, default_value_t = 10)]
    pub step: usize,
    /// Largest node count tried.
    #[arg(long, default_value_t = 64)]
    pub max_n: usize,
    /// Remove groups of identical examples with different classes.
    #[arg(long)]
    pub drop_contradictions: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 600.0)]
    pub time_limit: f64,
    /// Budget of one solver call in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub solve_limit: f64,
    /// Print per-round progress as JSON lines on stderr.
    #[arg(long)]
    pub verbose: bool,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Where to write the model JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Accepted for symmetry with `cv`; learning is deterministic.
    #[arg(long, default_value_t = 1234)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Bins used when the model carries no column encoding.
    #[arg(long, default_value_t = 2)]
    pub bins: usize,
    /// Also report the per-class misclassification count.
    #[arg(long)]
    pub separated: bool,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 1234)]
    pub seed: u64,
    /// Write the report as JSON to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Output formula; per-class scope writes one file per class.
    #[arg(long)]
    pub dimacs: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}
