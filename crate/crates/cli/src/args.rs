use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qosketch", version, about = "Quasi-orthogonal sketches for link prediction")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true, env = "QOSKETCH_THREADS", value_parser = clap::value_parser!(usize))]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic graph as an edge list.
    Gen(GenArgs),
    /// Split a graph's edges into train/valid/test sets.
    Split(SplitArgs),
    /// Estimate label counts #(p,q) for node pairs.
    Estimate(EstimateArgs),
    /// Check the expected GCN/SAGE inner product by sampling.
    Probe(ProbeArgs),
    /// Train the structural link classifier.
    Train(TrainArgs),
    /// Score a split's test links.
    Eval(EvalArgs),
    /// Run repeated-split or estimation-accuracy benchmarks.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphModel {
    Er,
    Ba,
    Rr,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub model: GraphModel,
    #[arg(long)]
    pub n: usize,
    /// Edge probability (er).
    #[arg(long, required_if_eq("model", "er"))]
    pub p: Option<f64>,
    /// Edges per new node (ba).
    #[arg(long, required_if_eq("model", "ba"))]
    pub m: Option<usize>,
    /// Degree (rr).
    #[arg(long, required_if_eq("model", "rr"))]
    pub d: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Edge-list path or generator spec such as `ba:2000:5:0`.
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Train, validation and test fractions.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.7, 0.1, 0.2])]
    pub ratios: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct GraphSource {
    /// Edge-list path or generator spec such as `ba:2000:5:0`.
    #[arg(long, conflicts_with = "split")]
    pub graph: Option<String>,
    /// Split directory; its observed (train) graph is used.
    #[arg(long)]
    pub split: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long, default_value_t = 1024)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub hubs: usize,
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
    /// File of node pairs, one per line.
    #[arg(long, conflicts_with_all = ["all_test", "random"])]
    pub pairs: Option<PathBuf>,
    /// Every test positive and negative of `--split`.
    #[arg(long, requires = "split")]
    pub all_test: bool,
    /// Number of uniformly sampled pairs when no pair list is given.
    #[arg(long, default_value_t = 100)]
    pub random: usize,
    /// Append exact counts.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Gcn,
    Sage,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Aggregation {
    SqrtDegree,
    Mean,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[arg(long, value_enum, default_value_t = Kind::Gcn)]
    pub kind: Kind,
    /// Graph to probe; defaults to the path 0-1-2.
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub u: usize,
    #[arg(long, default_value_t = 2)]
    pub v: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 64)]
    pub input_dim: usize,
    #[arg(long, default_value_t = 64)]
    pub output_dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_node: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_weight: f64,
    #[arg(long, value_enum, default_value_t = Aggregation::SqrtDegree)]
    pub aggregation: Aggregation,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainOverrides {
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub hubs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// JSON training config; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub split: PathBuf,
    /// Checkpoint destination.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: TrainOverrides,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Heuristic {
    Cn,
    Aa,
    Ra,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub split: PathBuf,
    #[arg(long, required_unless_present = "heuristic")]
    pub checkpoint: Option<PathBuf>,
    /// Score with an exact heuristic instead of a checkpoint.
    #[arg(long, value_enum, conflicts_with = "checkpoint")]
    pub heuristic: Option<Heuristic>,
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(subcommand)]
    pub command: BenchCommand,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BenchModelArg {
    Cn,
    Aa,
    Ra,
    Predictor,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Test Hits@K over repeated random splits.
    Links(LinksArgs),
    /// Label-count MSE against exact counts across dimensions and hubs.
    Estimation(EstimationArgs),
}

#[derive(Debug, Args)]
pub struct LinksArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long, value_enum, default_value_t = BenchModelArg::Cn)]
    pub model: BenchModelArg,
    /// Training config for the predictor.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    #[command(flatten)]
    pub overrides: TrainOverrides,
    /// One row per repeat.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Summary; printed to stdout when omitted.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Fail unless the predictor beats the common-neighbor baseline.
    #[arg(long = "assert")]
    pub check: bool,
}

#[derive(Debug, Args)]
pub struct EstimationArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long, value_delimiter = ',', default_values_t = [256, 512, 1024, 2048])]
    pub dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0])]
    pub hubs: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    /// Signature seeds per configuration, starting at `--seed`.
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    /// Include wall-clock columns, which vary between runs.
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Fail unless MSE halves per doubling of the dimension (within 30%)
    /// and hub-exact rows are zero.
    #[arg(long = "assert")]
    pub check: bool,
}
