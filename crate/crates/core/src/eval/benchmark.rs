use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metrics::hits_at_k;
use crate::error::{Error, Result};
use crate::graph::{split_edges, Graph, SplitRatios};
use crate::oracles::{exact_aa, exact_cn, exact_ra};
use crate::predictor::{train, FeatureEngine, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum BenchModel {
    Cn,
    Aa,
    Ra,
    Predictor { config: TrainConfig },
}

impl BenchModel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Cn => "cn",
            Self::Aa => "aa",
            Self::Ra => "ra",
            Self::Predictor { .. } => "predictor",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub dataset: String,
    pub model: BenchModel,
    pub repeats: usize,
    /// Repeat `i` splits with seed `seed + i`.
    pub seed: u64,
    pub k: usize,
    pub ratios: SplitRatios,
}

impl BenchConfig {
    pub fn new(dataset: impl Into<String>, model: BenchModel) -> Self {
        Self { dataset: dataset.into(), model, repeats: 10, seed: 0, k: 50, ratios: SplitRatios::default() }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub repeat: usize,
    pub split_seed: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub dataset: String,
    pub model: String,
    pub metric: String,
    pub mean: f64,
    /// Population standard deviation over repeats.
    pub std: f64,
    pub config_hash: String,
    pub repeats: Vec<RepeatResult>,
}

impl BenchSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("repeat,split_seed,score\n");
        for r in &self.repeats {
            let _ = writeln!(out, "{},{},{:.6}", r.repeat, r.split_seed, r.score);
        }
        out
    }
}

/// Exact heuristic scores of `links` on `g`.
pub fn heuristic_scores(g: &Graph, model: &BenchModel, links: &[(usize, usize)]) -> Result<Vec<f64>> {
    let f: fn(&Graph, usize, usize) -> f64 = match model {
        BenchModel::Cn => |g, u, v| exact_cn(g, u, v) as f64,
        BenchModel::Aa => exact_aa,
        BenchModel::Ra => exact_ra,
        BenchModel::Predictor { .. } => {
            return Err(Error::InvalidArgument("the predictor is not a heuristic".into()))
        }
    };
    Ok(links.iter().map(|&(u, v)| f(g, u, v)).collect())
}

fn run_repeat(g: &Graph, cfg: &BenchConfig, repeat: usize) -> Result<RepeatResult> {
    let split_seed = cfg.seed.wrapping_add(repeat as u64);
    let split = split_edges(g, cfg.ratios, split_seed)?;
    let (pos, neg) = match &cfg.model {
        BenchModel::Predictor { config } => {
            let outcome = train(&split, config, None)?;
            let observed = split.observed_graph(config.include_valid);
            let engine = FeatureEngine::new(&observed, config, None)?;
            (engine.score(&outcome.params, &split.test_pos)?, engine.score(&outcome.params, &split.test_neg)?)
        }
        heuristic => {
            let observed = split.observed_graph(false);
            (
                heuristic_scores(&observed, heuristic, &split.test_pos)?,
                heuristic_scores(&observed, heuristic, &split.test_neg)?,
            )
        }
    };
    let score = hits_at_k(&pos, &neg, cfg.k)?;
    Ok(RepeatResult { repeat, split_seed, score })
}

/// Test Hits@K over `repeats` independent splits.
pub fn run_benchmark(g: &Graph, cfg: &BenchConfig) -> Result<BenchSummary> {
    if cfg.repeats == 0 {
        return Err(Error::Config("repeats must be positive".into()));
    }
    let repeats: Vec<RepeatResult> =
        (0..cfg.repeats).into_par_iter().map(|i| run_repeat(g, cfg, i)).collect::<Result<_>>()?;
    let n = repeats.len() as f64;
    let mean = repeats.iter().map(|r| r.score).sum::<f64>() / n;
    let std = (repeats.iter().map(|r| (r.score - mean).powi(2)).sum::<f64>() / n).sqrt();
    Ok(BenchSummary {
        dataset: cfg.dataset.clone(),
        model: cfg.model.name().into(),
        metric: format!("hits@{}", cfg.k),
        mean,
        std,
        config_hash: cfg.hash(),
        repeats,
    })
}
