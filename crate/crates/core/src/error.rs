use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge list contains no edges")]
    EmptyGraph,

    #[error("graph has {edges} edges, at least {required} are needed")]
    GraphTooSmall { edges: usize, required: usize },

    #[error("node {node} out of range for graph with {num_nodes} nodes")]
    InvalidNode { node: usize, num_nodes: usize },

    #[error("edge ({0}, {1}) is not present in the graph")]
    EdgeNotInGraph(usize, usize),

    #[error("hop {requested} exceeds the computed radius {radius}")]
    HopOutOfRange { requested: usize, radius: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("k = {k} exceeds the {available} available negatives")]
    KTooLarge { k: usize, available: usize },

    #[error("pair ({0}, {1}) is adjacent")]
    AdjacentPair(usize, usize),

    #[error("oracle limited to {limit} nodes, graph has {num_nodes}")]
    OracleTooLarge { num_nodes: usize, limit: usize },

    #[error("integer overflow in walk count")]
    Overflow,

    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error("dataset not found, expected {}", .0.display())]
    MissingDataset(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
