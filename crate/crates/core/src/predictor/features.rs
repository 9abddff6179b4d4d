//! Link feature vectors built from shell sums of (optionally rescaled)
//! signatures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{hop_neighborhoods_for, masked_view, BatchMask, Graph, HopNeighborhoods, Topology};
use crate::linalg::Matrix;
use crate::sketch::{assemble, dot, feature_pairs, SignatureMatrix};

/// Column layout: label counts in `feature_pairs` order, then the summed
/// endpoint triangle estimate, then the Hadamard product of external node
/// features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub radius: usize,
    pub triangles: bool,
    pub node_feature_dim: usize,
}

impl FeatureLayout {
    pub fn num_counts(&self) -> usize {
        (self.radius + 1) * (self.radius + 1) - 1
    }

    pub fn width(&self) -> usize {
        self.num_counts() + usize::from(self.triangles) + self.node_feature_dim
    }

    pub fn names(&self) -> Vec<String> {
        let mut out: Vec<String> = feature_pairs(self.radius)
            .into_iter()
            .map(|(p, q)| format!("#({p},{q})"))
            .collect();
        if self.triangles {
            out.push("triangles".into());
        }
        out.extend((0..self.node_feature_dim).map(|i| format!("x{i}")));
        out
    }
}

/// Everything needed to featurize links on some topology.
#[derive(Debug, Clone, Copy)]
pub struct FeatureSource<'a> {
    pub signatures: &'a SignatureMatrix,
    /// Per-node norm multipliers; `None` leaves signatures unscaled.
    pub weights: Option<&'a [f64]>,
    pub layout: FeatureLayout,
    pub node_features: Option<&'a Matrix>,
}

impl FeatureSource<'_> {
    fn check(&self, num_nodes: usize) -> Result<()> {
        if self.signatures.num_nodes() != num_nodes {
            return Err(Error::DimensionMismatch { expected: num_nodes, found: self.signatures.num_nodes() });
        }
        if let Some(w) = self.weights {
            if w.len() != num_nodes {
                return Err(Error::DimensionMismatch { expected: num_nodes, found: w.len() });
            }
        }
        match self.node_features {
            Some(x) if x.rows() != num_nodes => {
                Err(Error::DimensionMismatch { expected: num_nodes, found: x.rows() })
            }
            Some(x) if x.cols() != self.layout.node_feature_dim => {
                Err(Error::DimensionMismatch { expected: self.layout.node_feature_dim, found: x.cols() })
            }
            None if self.layout.node_feature_dim > 0 => Err(Error::Config(
                "layout expects node features but none were supplied".into(),
            )),
            _ => Ok(()),
        }
    }

    fn shell_sum(&self, shell: &[usize]) -> Vec<f64> {
        let mut acc = vec![0.0; self.signatures.dim()];
        for &k in shell {
            let w = self.weights.map_or(1.0, |w| w[k]);
            for (a, &x) in acc.iter_mut().zip(self.signatures.row(k)) {
                *a += w * x;
            }
        }
        acc
    }
}

/// Shell sums of both endpoints and the raw feature vector of one link.
#[derive(Debug, Clone)]
pub(crate) struct LinkState {
    pub eta_u: Vec<Vec<f64>>,
    pub eta_v: Vec<Vec<f64>>,
    pub features: Vec<f64>,
}

/// `½ h¹_u · h²_u` from unscaled signatures.
fn triangle_estimate<T: Topology>(topo: &T, sig: &SignatureMatrix, u: usize) -> f64 {
    let dim = sig.dim();
    let mut h1 = vec![0.0; dim];
    let mut h2 = vec![0.0; dim];
    topo.for_each_neighbor(u, |a| {
        for (acc, &x) in h1.iter_mut().zip(sig.row(a)) {
            *acc += x;
        }
        topo.for_each_neighbor(a, |b| {
            for (acc, &x) in h2.iter_mut().zip(sig.row(b)) {
                *acc += x;
            }
        });
    });
    0.5 * dot(&h1, &h2)
}

pub(crate) fn link_state<T: Topology>(
    src: &FeatureSource<'_>,
    topo: &T,
    hops: &HopNeighborhoods,
    (u, v): (usize, usize),
) -> Result<LinkState> {
    if u == v {
        return Err(Error::InvalidArgument(format!("link ({u},{v}) is a self-loop")));
    }
    let r = src.layout.radius;
    let sums = |x: usize| -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
        let mut rows = Vec::with_capacity(r);
        let mut sizes = Vec::with_capacity(r);
        for s in 1..=r {
            let shell = hops.shell(x, s)?;
            rows.push(src.shell_sum(shell));
            sizes.push(shell.len());
        }
        Ok((rows, sizes))
    };
    let (eta_u, sizes_u) = sums(u)?;
    let (eta_v, sizes_v) = sums(v)?;
    fn refs(rows: &[Vec<f64>]) -> Vec<&[f64]> {
        rows.iter().map(Vec::as_slice).collect()
    }
    let mut features = assemble(&refs(&eta_u), &refs(&eta_v), &sizes_u, &sizes_v).ordered();
    if src.layout.triangles {
        features.push(triangle_estimate(topo, src.signatures, u) + triangle_estimate(topo, src.signatures, v));
    }
    if let Some(x) = src.node_features {
        features.extend(x.row(u).iter().zip(x.row(v)).map(|(a, b)| a * b));
    }
    if features.iter().any(|f| !f.is_finite()) {
        return Err(Error::NonFinite("link feature"));
    }
    Ok(LinkState { eta_u, eta_v, features })
}

pub(crate) fn endpoints(links: &[(usize, usize)]) -> Vec<usize> {
    let mut nodes: Vec<usize> = links.iter().flat_map(|&(u, v)| [u, v]).collect();
    nodes.sort_unstable();
    nodes.dedup();
    nodes
}

/// Raw features of `links` on any topology, one row per link.
pub fn assemble_on<T: Topology>(topo: &T, links: &[(usize, usize)], src: &FeatureSource<'_>) -> Result<Matrix> {
    src.check(topo.num_nodes())?;
    let hops = hop_neighborhoods_for(topo, src.layout.radius, &endpoints(links))?;
    let rows: Vec<Vec<f64>> = links
        .par_iter()
        .map(|&link| link_state(src, topo, &hops, link).map(|s| s.features))
        .collect::<Result<_>>()?;
    let width = src.layout.width();
    Matrix::from_vec(links.len(), width, rows.concat())
}

/// Raw features of `links` on `g`, or on `g` without the masked edges.
pub fn assemble_features(
    g: &Graph,
    links: &[(usize, usize)],
    mask: Option<&BatchMask>,
    src: &FeatureSource<'_>,
) -> Result<Matrix> {
    match mask {
        Some(mask) => assemble_on(&masked_view(g, mask)?, links, src),
        None => assemble_on(g, links, src),
    }
}

/// `sign(x) ln(1 + |x|)`; tames the spread of counts around hubs.
pub fn signed_log1p(x: f64) -> f64 {
    x.signum() * x.abs().ln_1p()
}

pub(crate) fn signed_log1p_grad(x: f64) -> f64 {
    1.0 / (1.0 + x.abs())
}

/// Sparse `∂L/∂w_k` for one link given `∂L/∂(raw features)`.
///
/// A zero-index row `#(p,0) = |N^p_u| - Σ_q #(p,q)` passes its gradient
/// back through every inner product it subtracts.
pub(crate) fn weight_grad(
    src: &FeatureSource<'_>,
    hops: &HopNeighborhoods,
    (u, v): (usize, usize),
    state: &LinkState,
    feature_grad: &[f64],
) -> Result<Vec<(usize, f64)>> {
    let r = src.layout.radius;
    let w = r + 1;
    let mut g = vec![0.0; w * w];
    for ((p, q), gf) in feature_pairs(r).into_iter().zip(feature_grad) {
        g[p * w + q] = *gf;
    }
    let coef = |p: usize, q: usize| g[p * w + q] - g[p * w] - g[q];
    let dim = src.signatures.dim();
    let mut out = Vec::new();
    for p in 1..=r {
        // ∂/∂η^p_u of Σ_q c̃_pq η^p_u·η^q_v
        let mut a = vec![0.0; dim];
        let mut b = vec![0.0; dim];
        for q in 1..=r {
            let (cu, cv) = (coef(p, q), coef(q, p));
            for i in 0..dim {
                a[i] += cu * state.eta_v[q - 1][i];
                b[i] += cv * state.eta_u[q - 1][i];
            }
        }
        for &k in hops.shell(u, p)? {
            out.push((k, dot(src.signatures.row(k), &a)));
        }
        for &k in hops.shell(v, p)? {
            out.push((k, dot(src.signatures.row(k), &b)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{estimate_de_counts, propagate_hops, sample_signatures, SketchConfig};

    fn layout(radius: usize) -> FeatureLayout {
        FeatureLayout { radius, triangles: false, node_feature_dim: 0 }
    }

    fn source<'a>(sig: &'a SignatureMatrix, weights: Option<&'a [f64]>) -> FeatureSource<'a> {
        FeatureSource { signatures: sig, weights, layout: layout(2), node_features: None }
    }

    #[test]
    fn layout_names() {
        let l = FeatureLayout { radius: 2, triangles: true, node_feature_dim: 2 };
        assert_eq!(l.width(), 11);
        assert_eq!(l.names()[..3], ["#(1,1)", "#(1,2)", "#(2,1)"]);
        assert_eq!(l.names()[8], "triangles");
    }

    #[test]
    fn masked_triangle_keeps_common_neighbor() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let cfg = SketchConfig { dim: 8, hubs: 3, ..SketchConfig::default() };
        let sig = sample_signatures(&cfg, &g).unwrap();
        let mask = BatchMask::new(vec![(0, 1)]);
        let x = assemble_features(&g, &[(0, 1)], Some(&mask), &source(&sig, None)).unwrap();
        assert_eq!(x.get(0, 0), 1.0);
        let open = assemble_features(&g, &[(0, 1)], None, &source(&sig, None)).unwrap();
        // unmasked, each endpoint is the other's first-hop neighbor
        assert_eq!(open.get(0, 3), 1.0);
        assert_eq!(x.get(0, 3), 0.0);
    }

    #[test]
    fn isolated_pair_is_all_zero() {
        let g = Graph::from_edges(4, [(0, 1)]).unwrap();
        let sig = sample_signatures(&SketchConfig { dim: 16, ..SketchConfig::default() }, &g).unwrap();
        let x = assemble_features(&g, &[(2, 3)], None, &source(&sig, None)).unwrap();
        assert!(x.row(0).iter().all(|&f| f == 0.0));
    }

    #[test]
    fn four_cycle_differs_with_removal() {
        // 0-1-2-3-0: without the target edge (0,1), node 1 is two hops from 0
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let sig = sample_signatures(&SketchConfig { dim: 8, hubs: 4, ..SketchConfig::default() }, &g).unwrap();
        let src = source(&sig, None);
        let open = assemble_features(&g, &[(0, 1)], None, &src).unwrap();
        let masked = assemble_features(&g, &[(0, 1)], Some(&BatchMask::new(vec![(0, 1)])), &src).unwrap();
        assert_ne!(open.row(0), masked.row(0));
        // masked: 0 and 1 are each at distance 3, so #(2,1) = |{3}∩{2}| = 0, #(1,1) = 0
        assert_eq!(masked.get(0, 0), 0.0);
        assert_eq!(masked.get(0, 1), 1.0);
    }

    #[test]
    fn matches_sketch_engine_bit_for_bit() {
        let g = crate::graph::erdos_renyi(60, 0.1, 3).unwrap();
        let sig = sample_signatures(&SketchConfig { dim: 128, ..SketchConfig::default() }, &g).unwrap();
        let hops = crate::graph::hop_neighborhoods(&g, 2).unwrap();
        let prop = propagate_hops(&sig, &hops).unwrap();
        let links = [(0, 1), (5, 9), (10, 40)];
        let ones = vec![1.0; 60];
        let plain = assemble_features(&g, &links, None, &source(&sig, None)).unwrap();
        let unit = assemble_features(&g, &links, None, &source(&sig, Some(&ones))).unwrap();
        assert_eq!(plain, unit);
        for (i, &(u, v)) in links.iter().enumerate() {
            let est = estimate_de_counts(&prop, &hops, u, v).unwrap().ordered();
            assert_eq!(plain.row(i), est.as_slice());
        }
    }

    #[test]
    fn node_features_enter_as_hadamard_block() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let sig = sample_signatures(&SketchConfig { dim: 8, ..SketchConfig::default() }, &g).unwrap();
        let x = Matrix::from_fn(3, 2, |i, j| (i + 1) as f64 * (j + 1) as f64);
        let src = FeatureSource {
            signatures: &sig,
            weights: None,
            layout: FeatureLayout { radius: 2, triangles: false, node_feature_dim: 2 },
            node_features: Some(&x),
        };
        let f = assemble_features(&g, &[(0, 2)], None, &src).unwrap();
        assert_eq!(&f.row(0)[8..], &[3.0, 12.0]);
        let missing = FeatureSource { node_features: None, ..src };
        assert!(assemble_features(&g, &[(0, 2)], None, &missing).is_err());
    }

    #[test]
    fn signed_log1p_is_odd() {
        assert_eq!(signed_log1p(0.0), 0.0);
        assert_eq!(signed_log1p(-3.0), -signed_log1p(3.0));
    }
}
