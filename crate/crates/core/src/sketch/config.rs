use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Topology;

/// Largest supported hop radius.
pub const MAX_HOPS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SketchConfig {
    /// Signature dimension `F`.
    pub dim: usize,
    /// Number of top-degree nodes given one-hot signatures; 0 disables.
    pub hubs: usize,
    /// Largest shortest-path distance `r` considered.
    pub hops: usize,
    pub seed: u64,
    pub rescale: Rescale,
}

impl Default for SketchConfig {
    fn default() -> Self {
        Self {
            dim: 1024,
            hubs: 0,
            hops: 2,
            seed: 0,
            rescale: Rescale::None,
        }
    }
}

impl SketchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("signature dimension must be positive".into()));
        }
        if self.hubs >= self.dim {
            return Err(Error::Config(format!(
                "hub count {} must be smaller than the dimension {}",
                self.hubs, self.dim
            )));
        }
        if !(1..=MAX_HOPS).contains(&self.hops) {
            return Err(Error::Config(format!("hops must be in 1..={MAX_HOPS}, got {}", self.hops)));
        }
        Ok(())
    }
}

/// How signature norms are scaled before propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Rescale {
    #[default]
    None,
    /// A fixed function of degree.
    Fixed(DegreeWeight),
    /// A small network of degree trained with the classifier.
    Learned,
}

/// Fixed degree-dependent norms. A shared neighbor `k` contributes `w_k²`
/// to an inner product, so these turn the common-neighbor estimate into a
/// resource-allocation or Adamic-Adar estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeWeight {
    /// `1/√d`, giving resource allocation.
    InverseSqrtDegree,
    /// `1/√ln d`, giving Adamic-Adar. Degrees below 2 map to 0.
    InverseSqrtLogDegree,
}

impl DegreeWeight {
    pub fn weight(self, degree: usize) -> f64 {
        match self {
            Self::InverseSqrtDegree if degree == 0 => 0.0,
            Self::InverseSqrtDegree => 1.0 / (degree as f64).sqrt(),
            // such nodes are never shared neighbors of two distinct nodes
            Self::InverseSqrtLogDegree if degree < 2 => 0.0,
            Self::InverseSqrtLogDegree => 1.0 / (degree as f64).ln().sqrt(),
        }
    }

    pub fn weights<T: Topology>(self, topo: &T) -> Vec<f64> {
        (0..topo.num_nodes()).map(|v| self.weight(topo.degree(v))).collect()
    }
}
