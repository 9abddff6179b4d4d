use serde::{Deserialize, Serialize};

use super::{HopSketch, PropagatedSignatures};
use crate::error::{Error, Result};
use crate::graph::HopNeighborhoods;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inner product of two first-stage walk signatures, an unbiased estimate of
/// the common-neighbor count.
pub fn estimate_cn(hu: &[f64], hv: &[f64]) -> Result<f64> {
    if hu.len() != hv.len() {
        return Err(Error::DimensionMismatch { expected: hu.len(), found: hv.len() });
    }
    Ok(dot(hu, hv))
}

/// Variance of the common-neighbor estimate for signature entries with
/// variance `1/F`: `(d_u d_v + cn² - 2cn)/F + F·Var(x²)·cn`. Hypercube
/// entries have `Var(x²) = 0`.
pub fn predicted_variance(du: f64, dv: f64, cn: f64, dim: usize, var_x2: f64) -> f64 {
    let f = dim as f64;
    (du * dv + cn * cn - 2.0 * cn) / f + f * var_x2 * cn
}

/// Feature order for radius `r`: for each `s`, `(s,s)`, then `(s,t),(t,s)`
/// for `t > s`, then `(s,0),(0,s)`. For `r = 2` this is
/// `(1,1) (1,2) (2,1) (1,0) (0,1) (2,2) (2,0) (0,2)`.
pub fn feature_pairs(r: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity((r + 1) * (r + 1) - 1);
    for s in 1..=r {
        out.push((s, s));
        for t in s + 1..=r {
            out.push((s, t));
            out.push((t, s));
        }
        out.push((s, 0));
        out.push((0, s));
    }
    out
}

/// Estimated label counts `#(p, q)` for one link, `0 <= p, q <= r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuralFeature {
    radius: usize,
    counts: Vec<f64>,
    /// Estimated triangles through each endpoint, when requested.
    pub triangles: Option<(f64, f64)>,
}

impl StructuralFeature {
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// `#(p, q)`; `None` for `(0, 0)` or indices beyond the radius.
    pub fn get(&self, p: usize, q: usize) -> Option<f64> {
        if p > self.radius || q > self.radius || p + q == 0 {
            return None;
        }
        Some(self.counts[p * (self.radius + 1) + q])
    }

    /// Counts in [`feature_pairs`] order.
    pub fn ordered(&self) -> Vec<f64> {
        feature_pairs(self.radius)
            .into_iter()
            .map(|(p, q)| self.counts[p * (self.radius + 1) + q])
            .collect()
    }

    /// Builds the counts from shell sums of both endpoints. Rows with a
    /// zero index subtract the estimated counts from the exact shell size.
    pub fn from_sketches(u: &HopSketch, v: &HopSketch) -> Result<Self> {
        if u.radius() != v.radius() {
            return Err(Error::DimensionMismatch { expected: u.radius(), found: v.radius() });
        }
        let eta_u: Vec<&[f64]> = u.rows.iter().map(Vec::as_slice).collect();
        let eta_v: Vec<&[f64]> = v.rows.iter().map(Vec::as_slice).collect();
        Ok(assemble(&eta_u, &eta_v, &u.shell_sizes, &v.shell_sizes))
    }
}

pub(crate) fn assemble(eta_u: &[&[f64]], eta_v: &[&[f64]], sizes_u: &[usize], sizes_v: &[usize]) -> StructuralFeature {
    let r = eta_u.len();
    let w = r + 1;
    let mut counts = vec![0.0; w * w];
    for p in 1..=r {
        for q in 1..=r {
            counts[p * w + q] = dot(eta_u[p - 1], eta_v[q - 1]);
        }
    }
    for q in 1..=r {
        let inner: f64 = (1..=r).map(|s| counts[s * w + q]).sum();
        counts[q] = sizes_v[q - 1] as f64 - inner;
    }
    for p in 1..=r {
        let inner: f64 = (1..=r).map(|s| counts[p * w + s]).sum();
        counts[p * w] = sizes_u[p - 1] as f64 - inner;
    }
    StructuralFeature { radius: r, counts, triangles: None }
}

/// `#(p, q)` for every `p, q <= r` from precomputed hop stages.
pub fn estimate_de_counts(
    prop: &PropagatedSignatures,
    hops: &HopNeighborhoods,
    u: usize,
    v: usize,
) -> Result<StructuralFeature> {
    if u == v {
        return Err(Error::InvalidArgument("label counts need two distinct endpoints".into()));
    }
    let r = hops.radius();
    let mut eta_u = Vec::with_capacity(r);
    let mut eta_v = Vec::with_capacity(r);
    let mut sizes_u = Vec::with_capacity(r);
    let mut sizes_v = Vec::with_capacity(r);
    for s in 1..=r {
        let stage = prop.hop(s)?;
        eta_u.push(stage.row(u));
        eta_v.push(stage.row(v));
        sizes_u.push(hops.shell_size(u, s)?);
        sizes_v.push(hops.shell_size(v, s)?);
    }
    Ok(assemble(&eta_u, &eta_v, &sizes_u, &sizes_v))
}

/// `h_u^(p) · h_v^(q)`, an unbiased estimate of `(A^(p+q))_{uv}`.
pub fn estimate_walk_features(
    prop: &PropagatedSignatures,
    u: usize,
    v: usize,
    p: usize,
    q: usize,
) -> Result<f64> {
    Ok(dot(prop.walk(p)?.row(u), prop.walk(q)?.row(v)))
}

/// `½ h_u^(1) · h_u^(2)`, an unbiased estimate of the triangles through `u`.
pub fn estimate_triangles(prop: &PropagatedSignatures, u: usize) -> Result<f64> {
    Ok(0.5 * dot(prop.walk(1)?.row(u), prop.walk(2)?.row(u)))
}
