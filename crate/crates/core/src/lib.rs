//! Link-level structural features from quasi-orthogonal message passing.
//!
//! Every node receives a random signature drawn from the vertices of a
//! scaled hypercube. Summing signatures over neighborhoods and taking inner
//! products yields unbiased estimates of common-neighbor counts, distance
//! label counts `#(p, q)`, walk counts and per-node triangle counts. The
//! [`oracles`] module computes each quantity exactly for verification and
//! the [`predictor`] module trains a small classifier on the estimates.

pub mod error;
pub mod eval;
pub mod graph;
pub mod linalg;
pub mod oracles;
pub mod predictor;
pub mod probe;
pub mod rng;
pub mod sketch;

pub use error::{Error, Result};
pub use graph::{DatasetSplit, Graph, HopNeighborhoods, Topology};
