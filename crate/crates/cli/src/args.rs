use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "htree",
    version,
    about = "Cluster-then-explain classification for imbalanced tabular data"
)]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model from a labeled CSV.
    Train(TrainArgs),
    /// Classify the rows of a CSV with a trained model.
    Classify(ClassifyArgs),
    /// Render the per-cluster persona report of a trained model.
    Report(ReportArgs),
    /// Generate a planted-persona dataset with a ground-truth sidecar.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Duplicate,
    Interpolate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ImpurityArg {
    Gini,
    Entropy,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// TOML file with training settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub output: PathBuf,
    /// Label column name.
    #[arg(long, default_value = "success")]
    pub label: String,
    /// Record id column; `id` is used when present.
    #[arg(long)]
    pub id: Option<String>,
    /// Use the offline persona generator.
    #[arg(long, conflicts_with = "llm_endpoint")]
    pub mock_llm: bool,
    /// Chat-completion endpoint for live persona generation.
    #[arg(long)]
    pub llm_endpoint: Option<String>,
    #[arg(long, requires = "llm_endpoint")]
    pub llm_model: Option<String>,
    /// Exit with status 3 when any persona description fails in live mode.
    #[arg(long)]
    pub strict_llm: bool,
    /// Persona prompt template containing `{feature_data}` once.
    #[arg(long)]
    pub prompt_template: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub clusters: Option<usize>,
    #[arg(long)]
    pub min_subcluster_size: Option<usize>,
    #[arg(long)]
    pub real_world_success_rate: Option<f64>,
    #[arg(long)]
    pub target_success_rate: Option<f64>,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyArg>,
    #[arg(long)]
    pub neighbor_count: Option<usize>,
    /// Train on the input as is.
    #[arg(long)]
    pub no_resample: bool,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long, value_enum)]
    pub impurity: Option<ImpurityArg>,
    #[arg(long)]
    pub top_k_features: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// JSON-lines output; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Md,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    pub format: ReportFormat,
    /// Stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 8)]
    pub personas: usize,
    #[arg(long, default_value_t = 2000)]
    pub rows: usize,
    #[arg(long, default_value_t = 0.019)]
    pub base_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    /// Ground-truth sidecar; defaults to the output path with `.truth.json`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Comma-separated success rate per persona.
    #[arg(long, value_delimiter = ',')]
    pub blob_rates: Option<Vec<f64>>,
    #[arg(long, default_value_t = 4)]
    pub signal_features: usize,
    #[arg(long, default_value_t = 2)]
    pub flag_features: usize,
    #[arg(long, default_value_t = 6.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0.3)]
    pub spread: f64,
    #[arg(long, default_value_t = 0.9)]
    pub purity: f64,
}
