//! Ranking metrics, estimation-accuracy sweeps and repeated-split
//! benchmarks.

mod benchmark;
mod datasets;
mod estimation;
mod metrics;

pub use benchmark::{heuristic_scores, run_benchmark, BenchConfig, BenchModel, BenchSummary, RepeatResult};
pub use datasets::resolve_dataset;
pub use estimation::{
    estimation_benchmark, random_pairs, EstimationReport, EstimationRow, EstimationSweep, HOP_ORACLE_LIMIT,
};
pub use metrics::{hits_at_k, mrr};
