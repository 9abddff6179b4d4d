use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical, hop_neighborhoods_for, Graph};
use crate::oracles::exact_de_count;
use crate::rng::{stream, Domain};
use crate::sketch::{feature_pairs, sample_signatures, HopSketch, SketchConfig, StructuralFeature};

/// Largest graph the exact label-count oracle is run on.
pub const HOP_ORACLE_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimationSweep {
    pub dims: Vec<usize>,
    pub hubs: Vec<usize>,
    pub hops: usize,
    /// Signature seeds averaged per configuration.
    pub seeds: Vec<u64>,
}

impl Default for EstimationSweep {
    fn default() -> Self {
        Self { dims: vec![256, 512, 1024, 2048], hubs: vec![0], hops: 2, seeds: vec![0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationRow {
    pub dim: usize,
    pub hubs: usize,
    pub p: usize,
    pub q: usize,
    pub mse: f64,
    /// Wall time of signature sampling, propagation and estimation.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationReport {
    pub num_pairs: usize,
    pub num_seeds: usize,
    pub rows: Vec<EstimationRow>,
}

impl EstimationReport {
    pub fn mse(&self, dim: usize, hubs: usize, p: usize, q: usize) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.dim == dim && r.hubs == hubs && r.p == p && r.q == q)
            .map(|r| r.mse)
    }

    /// One row per configuration and label pair. Timing is opt-in since it
    /// differs between runs.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut out = String::from(if timing { "dim,hubs,p,q,mse,seconds\n" } else { "dim,hubs,p,q,mse\n" });
        for r in &self.rows {
            let _ = write!(out, "{},{},{},{},{:e}", r.dim, r.hubs, r.p, r.q, r.mse);
            if timing {
                let _ = write!(out, ",{:.6}", r.seconds);
            }
            out.push('\n');
        }
        out
    }
}

/// `count` distinct node pairs `u < v` drawn uniformly.
pub fn random_pairs(num_nodes: usize, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    let total = num_nodes * num_nodes.saturating_sub(1) / 2;
    if count > total {
        return Err(Error::InvalidArgument(format!("{count} pairs requested, graph has {total}")));
    }
    let mut rng = stream(seed, Domain::Pairs, u64::MAX);
    let mut seen = std::collections::HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..num_nodes);
        let v = rng.random_range(0..num_nodes);
        if u != v && seen.insert(canonical(u, v)) {
            out.push(canonical(u, v));
        }
    }
    Ok(out)
}

/// Mean squared error of every estimated `#(p, q)` against the exact
/// count, for each signature dimension and hub count in the sweep.
pub fn estimation_benchmark(g: &Graph, sweep: &EstimationSweep, pairs: &[(usize, usize)]) -> Result<EstimationReport> {
    let n = g.num_nodes();
    if n > HOP_ORACLE_LIMIT {
        return Err(Error::OracleTooLarge { num_nodes: n, limit: HOP_ORACLE_LIMIT });
    }
    if pairs.is_empty() {
        return Err(Error::Empty("pair sample"));
    }
    if sweep.seeds.is_empty() {
        return Err(Error::Empty("seed list"));
    }
    for &(u, v) in pairs {
        g.check_node(u)?;
        g.check_node(v)?;
        if u == v {
            return Err(Error::InvalidArgument(format!("pair ({u},{v}) repeats a node")));
        }
    }
    let r = sweep.hops;
    let labels = feature_pairs(r);
    let mut nodes: Vec<usize> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let hops = hop_neighborhoods_for(g, r, &nodes)?;
    let exact: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(u, v)| {
            labels
                .iter()
                .map(|&(p, q)| exact_de_count(&hops, u, v, p, q).map(|c| c as f64))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for &dim in &sweep.dims {
        for &hubs in &sweep.hubs {
            let started = Instant::now();
            let mut sq = vec![0.0; labels.len()];
            for &seed in &sweep.seeds {
                let cfg = SketchConfig { dim, hubs, hops: r, seed, ..SketchConfig::default() };
                let sig = sample_signatures(&cfg, g)?;
                let sketches: Vec<HopSketch> =
                    nodes.par_iter().map(|&v| HopSketch::of(&sig, &hops, v)).collect::<Result<_>>()?;
                let index: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
                let estimates: Vec<Vec<f64>> = pairs
                    .par_iter()
                    .map(|(u, v)| {
                        StructuralFeature::from_sketches(&sketches[index[u]], &sketches[index[v]]).map(|f| f.ordered())
                    })
                    .collect::<Result<_>>()?;
                for (est, ex) in estimates.iter().zip(&exact) {
                    for i in 0..labels.len() {
                        sq[i] += (est[i] - ex[i]).powi(2);
                    }
                }
            }
            let seconds = started.elapsed().as_secs_f64() / sweep.seeds.len() as f64;
            let denom = (pairs.len() * sweep.seeds.len()) as f64;
            for (&(p, q), s) in labels.iter().zip(&sq) {
                rows.push(EstimationRow { dim, hubs, p, q, mse: s / denom, seconds });
            }
        }
    }
    Ok(EstimationReport { num_pairs: pairs.len(), num_seeds: sweep.seeds.len(), rows })
}
