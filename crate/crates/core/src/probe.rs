//! Monte-Carlo check of the expected inner product of one randomly
//! initialized GCN or SAGE layer.
//!
//! With inputs of standard deviation `σ_node` and weights of standard
//! deviation `σ_weight`, for a non-adjacent pair
//!
//! ```text
//! GCN : E(h_u·h_v) = C/√(d̂_u d̂_v) · Σ_{k∈N_u∩N_v} 1/d̂_k      d̂ = d + 1
//! SAGE: E(h_u·h_v) = C/√(d_u d_v) · |N_u∩N_v|
//! ```
//!
//! with `C = σ_node² σ_weight² F F'`. The SAGE form holds exactly for
//! neighbor sums normalized by `1/√d` ([`SageAggregation::SqrtDegree`]).
//! A plain neighbor mean gives `C·cn/(d_u d_v)` instead; probing it against
//! the stated form reports the gap through the z-score.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Matrix;
use crate::oracles::common_neighbors;
use crate::rng::{stream, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeKind {
    Gcn,
    Sage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SageAggregation {
    /// `Σ_{k∈N(v)} x_k / √d_v`.
    #[default]
    SqrtDegree,
    /// `Σ_{k∈N(v)} x_k / d_v`.
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub sigma_node: f64,
    pub sigma_weight: f64,
    pub trials: usize,
    pub kind: ProbeKind,
    pub sage_aggregation: SageAggregation,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            input_dim: 64,
            output_dim: 64,
            sigma_node: 1.0,
            sigma_weight: 1.0,
            trials: 10_000,
            kind: ProbeKind::Gcn,
            sage_aggregation: SageAggregation::default(),
            seed: 0,
        }
    }
}

impl ProbeConfig {
    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::Config("probe dimensions must be positive".into()));
        }
        if !(self.sigma_node > 0.0 && self.sigma_weight > 0.0) {
            return Err(Error::Config("probe standard deviations must be positive".into()));
        }
        if self.trials < 100 {
            return Err(Error::Config(format!("at least 100 trials required, got {}", self.trials)));
        }
        Ok(())
    }

    /// `C = σ_node² σ_weight² F F'`.
    pub fn scale(&self) -> f64 {
        (self.sigma_node * self.sigma_weight).powi(2) * (self.input_dim * self.output_dim) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub pair: (usize, usize),
    pub kind: ProbeKind,
    pub aggregation: Option<SageAggregation>,
    pub trials: usize,
    pub empirical: f64,
    pub closed_form: f64,
    pub std_error: f64,
    /// `|empirical - closed_form| / std_error`.
    pub z: f64,
    /// Set when `z` reaches [`DEVIATION_Z`].
    pub deviates: bool,
}

/// z-score at which a probe is reported as disagreeing with its closed form.
pub const DEVIATION_Z: f64 = 4.0;

/// `(node, coefficient)` terms of one node's aggregated input.
fn gcn_terms(g: &Graph, u: usize) -> Vec<(usize, f64)> {
    let du = (g.degree(u) + 1) as f64;
    let mut nodes: Vec<usize> = g.neighbors(u).to_vec();
    let at = nodes.partition_point(|&k| k < u);
    nodes.insert(at, u);
    nodes
        .into_iter()
        .map(|k| (k, 1.0 / ((g.degree(k) + 1) as f64 * du).sqrt()))
        .collect()
}

fn sage_terms(g: &Graph, u: usize, agg: SageAggregation) -> Vec<(usize, f64)> {
    let d = g.degree(u) as f64;
    let c = match agg {
        SageAggregation::SqrtDegree => 1.0 / d.sqrt(),
        SageAggregation::Mean => 1.0 / d,
    };
    g.neighbors(u).iter().map(|&k| (k, c)).collect()
}

fn check_shapes(g: &Graph, x: &Matrix, w: &Matrix) -> Result<()> {
    if x.rows() != g.num_nodes() {
        return Err(Error::DimensionMismatch { expected: g.num_nodes(), found: x.rows() });
    }
    if w.cols() != x.cols() {
        return Err(Error::DimensionMismatch { expected: x.cols(), found: w.cols() });
    }
    Ok(())
}

fn apply_layer(x: &Matrix, w: &Matrix, terms: impl Fn(usize) -> Vec<(usize, f64)>) -> Matrix {
    let mut out = Matrix::zeros(x.rows(), w.rows());
    let mut agg = vec![0.0; x.cols()];
    for v in 0..x.rows() {
        agg.fill(0.0);
        for (k, c) in terms(v) {
            for (a, &xk) in agg.iter_mut().zip(x.row(k)) {
                *a += c * xk;
            }
        }
        w.matvec(&agg, out.row_mut(v));
    }
    out
}

/// `h_v = W Σ_{k∈N(v)∪{v}} x_k / √(d̂_k d̂_v)`.
pub fn gcn_layer(g: &Graph, x: &Matrix, w: &Matrix) -> Result<Matrix> {
    check_shapes(g, x, w)?;
    Ok(apply_layer(x, w, |v| gcn_terms(g, v)))
}

/// `h_v = W · mean_{k∈N(v)} x_k`, no self term; isolated nodes map to zero.
pub fn sage_layer(g: &Graph, x: &Matrix, w: &Matrix) -> Result<Matrix> {
    sage_layer_with(g, x, w, SageAggregation::Mean)
}

pub fn sage_layer_with(g: &Graph, x: &Matrix, w: &Matrix, agg: SageAggregation) -> Result<Matrix> {
    check_shapes(g, x, w)?;
    Ok(apply_layer(x, w, |v| sage_terms(g, v, agg)))
}

/// Expected `h_u · h_v` for a non-adjacent pair.
pub fn closed_form(cfg: &ProbeConfig, g: &Graph, u: usize, v: usize) -> f64 {
    let c = cfg.scale();
    match cfg.kind {
        ProbeKind::Gcn => {
            let du = (g.degree(u) + 1) as f64;
            let dv = (g.degree(v) + 1) as f64;
            let weighted: f64 = common_neighbors(g, u, v).map(|k| 1.0 / (g.degree(k) + 1) as f64).sum();
            c / (du * dv).sqrt() * weighted
        }
        ProbeKind::Sage => {
            let cn = common_neighbors(g, u, v).count() as f64;
            if cn == 0.0 {
                0.0
            } else {
                c / (g.degree(u) as f64 * g.degree(v) as f64).sqrt() * cn
            }
        }
    }
}

/// Averages `h_u · h_v` over `trials` fresh draws of inputs and weights.
///
/// Only the input rows that reach `u` or `v` are drawn; the rest of `X`
/// cannot affect the two outputs.
pub fn probe_expectation(cfg: &ProbeConfig, g: &Graph, u: usize, v: usize) -> Result<ProbeReport> {
    cfg.validate()?;
    g.check_node(u)?;
    g.check_node(v)?;
    if u == v {
        return Err(Error::InvalidArgument("probe pair must have distinct endpoints".into()));
    }
    if g.has_edge(u, v) {
        return Err(Error::AdjacentPair(u, v));
    }
    let (terms_u, terms_v) = match cfg.kind {
        ProbeKind::Gcn => (gcn_terms(g, u), gcn_terms(g, v)),
        ProbeKind::Sage => (
            sage_terms(g, u, cfg.sage_aggregation),
            sage_terms(g, v, cfg.sage_aggregation),
        ),
    };
    let mut support: Vec<usize> = terms_u.iter().chain(&terms_v).map(|&(k, _)| k).collect();
    support.sort_unstable();
    support.dedup();
    let slot = |k: usize| support.binary_search(&k).expect("term node in support");

    let (f_in, f_out) = (cfg.input_dim, cfg.output_dim);
    let node_dist = Normal::new(0.0, cfg.sigma_node).expect("positive sigma");
    let weight_dist = Normal::new(0.0, cfg.sigma_weight).expect("positive sigma");

    let samples: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(cfg.seed, Domain::Probe, trial as u64);
            let x: Vec<f64> = (0..support.len() * f_in).map(|_| node_dist.sample(&mut rng)).collect();
            let w = Matrix::from_fn(f_out, f_in, |_, _| weight_dist.sample(&mut rng));
            let aggregate = |terms: &[(usize, f64)]| {
                let mut z = vec![0.0; f_in];
                for &(k, c) in terms {
                    let row = &x[slot(k) * f_in..(slot(k) + 1) * f_in];
                    for (a, &xk) in z.iter_mut().zip(row) {
                        *a += c * xk;
                    }
                }
                let mut h = vec![0.0; f_out];
                w.matvec(&z, &mut h);
                h
            };
            let (hu, hv) = (aggregate(&terms_u), aggregate(&terms_v));
            hu.iter().zip(&hv).map(|(a, b)| a * b).sum()
        })
        .collect();

    let n = samples.len() as f64;
    let empirical = samples.iter().sum::<f64>() / n;
    let variance = samples.iter().map(|s| (s - empirical).powi(2)).sum::<f64>() / (n - 1.0);
    let std_error = (variance / n).sqrt();
    let expected = closed_form(cfg, g, u, v);
    let diff = (empirical - expected).abs();
    let z = if std_error > 0.0 {
        diff / std_error
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ProbeReport {
        pair: (u, v),
        kind: cfg.kind,
        aggregation: (cfg.kind == ProbeKind::Sage).then_some(cfg.sage_aggregation),
        trials: cfg.trials,
        empirical,
        closed_form: expected,
        std_error,
        z,
        deviates: z >= DEVIATION_Z,
    })
}
