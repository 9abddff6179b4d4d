use rand::RngCore;
use rayon::prelude::*;

use super::SketchConfig;
use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::rng::{stream, Domain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Initial,
    Rescaled,
    /// After `l` rounds of neighbor summation.
    Walk(usize),
    /// Sum over the exact-distance-`s` shell.
    Hop(usize),
}

/// Row-major `num_nodes × dim` matrix of node signatures.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureMatrix {
    dim: usize,
    data: Vec<f64>,
    stage: Stage,
}

impl SignatureMatrix {
    pub fn zeros(num_nodes: usize, dim: usize, stage: Stage) -> Self {
        Self {
            dim,
            data: vec![0.0; num_nodes * dim],
            stage,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_nodes(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub(crate) fn rows_mut(&mut self) -> rayon::slice::ChunksMut<'_, f64> {
        self.data.par_chunks_mut(self.dim)
    }

    pub(crate) fn with_stage(mut self, stage: Stage) -> Self {
        self.stage = stage;
        self
    }
}

/// Draws individual signature rows on demand.
///
/// The top `hubs` nodes by degree (ties to the lower id) own one-hot rows in
/// the last `hubs` coordinates. Every other node gets a uniformly random
/// vertex of the hypercube `{±1/√(F-b)}^(F-b) × {0}^b`, read from the ChaCha
/// stream keyed by `(seed, node)`, so a row never depends on which other
/// rows were drawn or in which order.
#[derive(Debug, Clone)]
pub struct SignatureSampler {
    dim: usize,
    free_dims: usize,
    seed: u64,
    scale: f64,
    hub_slot: Vec<Option<usize>>,
}

impl SignatureSampler {
    pub fn new<T: Topology>(cfg: &SketchConfig, topo: &T) -> Result<Self> {
        cfg.validate()?;
        let n = topo.num_nodes();
        if cfg.hubs > n {
            return Err(Error::Config(format!(
                "{} hubs requested for a graph with {n} nodes",
                cfg.hubs
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| topo.degree(b).cmp(&topo.degree(a)).then(a.cmp(&b)));
        let mut hub_slot = vec![None; n];
        for (rank, &v) in order.iter().take(cfg.hubs).enumerate() {
            hub_slot[v] = Some(rank);
        }
        let free_dims = cfg.dim - cfg.hubs;
        Ok(Self {
            dim: cfg.dim,
            free_dims,
            seed: cfg.seed,
            scale: 1.0 / (free_dims as f64).sqrt(),
            hub_slot,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hub(&self, k: usize) -> bool {
        self.hub_slot[k].is_some()
    }

    /// Writes node `k`'s initial signature into `out` (length `dim`).
    pub fn fill_row(&self, k: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        out.fill(0.0);
        if let Some(slot) = self.hub_slot[k] {
            out[self.free_dims + slot] = 1.0;
            return;
        }
        let mut rng = stream(self.seed, Domain::Signature, k as u64);
        for chunk in out[..self.free_dims].chunks_mut(64) {
            let bits = rng.next_u64();
            for (i, x) in chunk.iter_mut().enumerate() {
                *x = if bits >> i & 1 == 1 { self.scale } else { -self.scale };
            }
        }
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.fill_row(k, &mut out);
        out
    }

    pub fn sample_all(&self) -> SignatureMatrix {
        let n = self.hub_slot.len();
        let mut sig = SignatureMatrix::zeros(n, self.dim, Stage::Initial);
        sig.rows_mut().enumerate().for_each(|(k, row)| self.fill_row(k, row));
        sig
    }
}

pub fn sample_signatures<T: Topology>(cfg: &SketchConfig, topo: &T) -> Result<SignatureMatrix> {
    Ok(SignatureSampler::new(cfg, topo)?.sample_all())
}

/// Scales row `k` by `weights[k]`.
pub fn rescale_norms(sig: &SignatureMatrix, weights: &[f64]) -> Result<SignatureMatrix> {
    if weights.len() != sig.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: sig.num_nodes(),
            found: weights.len(),
        });
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFinite("rescaling weights"));
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidArgument("rescaling weights must be non-negative".into()));
    }
    let mut out = sig.clone().with_stage(Stage::Rescaled);
    out.rows_mut().zip(weights.par_iter()).for_each(|(row, &w)| {
        row.iter_mut().for_each(|x| *x *= w);
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{erdos_renyi, Graph};
    use crate::sketch::dot;

    fn cfg(dim: usize, hubs: usize) -> SketchConfig {
        SketchConfig { dim, hubs, ..SketchConfig::default() }
    }

    #[test]
    fn plain_hypercube_rows() {
        let g = erdos_renyi(30, 0.2, 1).unwrap();
        let sig = sample_signatures(&cfg(4, 0), &g).unwrap();
        for k in 0..30 {
            assert!(sig.row(k).iter().all(|&x| x.abs() == 0.5));
            assert_eq!(dot(sig.row(k), sig.row(k)), 1.0);
        }
    }

    #[test]
    fn all_hubs_form_an_orthonormal_set() {
        let g = erdos_renyi(12, 0.3, 2).unwrap();
        let sig = sample_signatures(&cfg(13, 12), &g).unwrap();
        for a in 0..12 {
            for b in 0..12 {
                assert_eq!(dot(sig.row(a), sig.row(b)), f64::from(u8::from(a == b)));
            }
        }
    }

    #[test]
    fn hubs_are_top_degree_with_low_id_ties() {
        // star: center 0, then every leaf has degree 1
        let g = Graph::from_edges(5, (1..5).map(|l| (0, l))).unwrap();
        let sampler = SignatureSampler::new(&cfg(8, 2), &g).unwrap();
        assert!(sampler.is_hub(0));
        assert!(sampler.is_hub(1));
        assert!(!sampler.is_hub(2));
        assert_eq!(&sampler.row(0)[6..], &[1.0, 0.0]);
        assert_eq!(&sampler.row(1)[6..], &[0.0, 1.0]);
        let plain = sampler.row(3);
        assert!(plain[..6].iter().all(|&x| x.abs() == 1.0 / 6f64.sqrt()));
        assert_eq!(&plain[6..], &[0.0, 0.0]);
        assert_eq!(dot(&plain, &sampler.row(0)), 0.0);
    }

    #[test]
    fn config_errors() {
        let g = erdos_renyi(5, 0.5, 0).unwrap();
        assert!(matches!(sample_signatures(&cfg(4, 4), &g), Err(Error::Config(_))));
        assert!(matches!(sample_signatures(&cfg(16, 6), &g), Err(Error::Config(_))));
    }

    #[test]
    fn rows_do_not_depend_on_graph_size() {
        let small = erdos_renyi(10, 0.3, 0).unwrap();
        let large = erdos_renyi(50, 0.3, 0).unwrap();
        let a = SignatureSampler::new(&cfg(100, 0), &small).unwrap();
        let b = SignatureSampler::new(&cfg(100, 0), &large).unwrap();
        assert_eq!(a.row(7), b.row(7));
    }

    #[test]
    fn distinct_rows_are_nearly_orthogonal() {
        // mean of 10^4 pairwise inner products; each has variance 1/F
        let g = Graph::empty(2000);
        let sig = sample_signatures(&cfg(1024, 0), &g).unwrap();
        let pairs = 10_000;
        let mean: f64 = (0..pairs)
            .map(|i| dot(sig.row(i % 1000), sig.row(1000 + (97 * (i / 1000) + i) % 1000)))
            .sum::<f64>()
            / pairs as f64;
        assert!(mean.abs() <= 3.0 / ((1024 * pairs) as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn rescale_identity_and_errors() {
        let g = erdos_renyi(10, 0.3, 0).unwrap();
        let sig = sample_signatures(&cfg(32, 0), &g).unwrap();
        let same = rescale_norms(&sig, &[1.0; 10]).unwrap();
        assert_eq!(same.stage(), Stage::Rescaled);
        for k in 0..10 {
            assert_eq!(same.row(k), sig.row(k));
        }
        let mut w = vec![1.0; 10];
        w[3] = f64::NAN;
        assert!(matches!(rescale_norms(&sig, &w), Err(Error::NonFinite(_))));
        assert!(rescale_norms(&sig, &[1.0; 9]).is_err());
        assert!(rescale_norms(&sig, &[-1.0; 10]).is_err());
    }
}
