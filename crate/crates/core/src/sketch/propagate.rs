use rayon::prelude::*;

use super::{SignatureMatrix, Stage};
use crate::error::{Error, Result};
use crate::graph::{HopNeighborhoods, Topology};

/// Propagated signature stages.
///
/// Walk stage `l` is `l` rounds of `h_v ← Σ_{u∈N(v)} h_u` applied to the
/// initial (or rescaled) signatures, with no self term. Hop stage `s` sums
/// the initial signatures over the exact-distance shell `N_v^s`, so every
/// node contributes at most once.
#[derive(Debug, Clone, Default)]
pub struct PropagatedSignatures {
    walk: Vec<SignatureMatrix>,
    hop: Vec<SignatureMatrix>,
}

impl PropagatedSignatures {
    /// Walk stage `l`; stage 0 is the input signatures.
    pub fn walk(&self, l: usize) -> Result<&SignatureMatrix> {
        self.walk.get(l).ok_or(Error::HopOutOfRange {
            requested: l,
            radius: self.walk.len().saturating_sub(1),
        })
    }

    /// Hop stage `s >= 1`.
    pub fn hop(&self, s: usize) -> Result<&SignatureMatrix> {
        s.checked_sub(1)
            .and_then(|i| self.hop.get(i))
            .ok_or(Error::HopOutOfRange {
                requested: s,
                radius: self.hop.len(),
            })
    }

    pub fn walk_steps(&self) -> usize {
        self.walk.len().saturating_sub(1)
    }

    pub fn hop_radius(&self) -> usize {
        self.hop.len()
    }

    /// Keeps the walk stages of `self` and the hop stages of `other`.
    pub fn with_hops_from(mut self, other: PropagatedSignatures) -> Self {
        self.hop = other.hop;
        self
    }
}

/// `steps` rounds of neighbor summation.
pub fn propagate_walk<T: Topology>(
    sig: &SignatureMatrix,
    topo: &T,
    steps: usize,
) -> Result<PropagatedSignatures> {
    if steps == 0 {
        return Err(Error::InvalidArgument("at least one propagation step is required".into()));
    }
    if sig.num_nodes() != topo.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: topo.num_nodes(),
            found: sig.num_nodes(),
        });
    }
    let mut walk = Vec::with_capacity(steps + 1);
    walk.push(sig.clone());
    for l in 1..=steps {
        let prev = &walk[l - 1];
        let mut next = SignatureMatrix::zeros(sig.num_nodes(), sig.dim(), Stage::Walk(l));
        next.rows_mut().enumerate().for_each(|(v, row)| {
            topo.for_each_neighbor(v, |u| add_assign(row, prev.row(u)));
        });
        walk.push(next);
    }
    Ok(PropagatedSignatures { walk, hop: Vec::new() })
}

/// Shell sums `η_v^(s)` for every `s` up to the hop radius. Nodes whose
/// shells were not computed get zero rows.
pub fn propagate_hops(sig: &SignatureMatrix, hops: &HopNeighborhoods) -> Result<PropagatedSignatures> {
    if sig.num_nodes() != hops.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: hops.num_nodes(),
            found: sig.num_nodes(),
        });
    }
    let mut hop = Vec::with_capacity(hops.radius());
    for s in 1..=hops.radius() {
        let mut stage = SignatureMatrix::zeros(sig.num_nodes(), sig.dim(), Stage::Hop(s));
        stage.rows_mut().enumerate().for_each(|(v, row)| {
            if hops.is_computed(v) {
                let shell = hops.shell(v, s).expect("s within radius");
                for &k in shell {
                    add_assign(row, sig.row(k));
                }
            }
        });
        hop.push(stage);
    }
    Ok(PropagatedSignatures { walk: Vec::new(), hop })
}

/// `Σ_{k∈nodes} sig_k`, summed in iteration order.
pub fn aggregate(sig: &SignatureMatrix, nodes: impl IntoIterator<Item = usize>) -> Vec<f64> {
    let mut out = vec![0.0; sig.dim()];
    for k in nodes {
        add_assign(&mut out, sig.row(k));
    }
    out
}

/// One node's shell sums `η_v^(1..=r)` plus shell sizes, computed on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct HopSketch {
    pub rows: Vec<Vec<f64>>,
    pub shell_sizes: Vec<usize>,
}

impl HopSketch {
    pub fn of(sig: &SignatureMatrix, hops: &HopNeighborhoods, v: usize) -> Result<Self> {
        let mut rows = Vec::with_capacity(hops.radius());
        let mut shell_sizes = Vec::with_capacity(hops.radius());
        for s in 1..=hops.radius() {
            let shell = hops.shell(v, s)?;
            rows.push(aggregate(sig, shell.iter().copied()));
            shell_sizes.push(shell.len());
        }
        Ok(Self { rows, shell_sizes })
    }

    pub fn radius(&self) -> usize {
        self.rows.len()
    }
}

pub(crate) fn add_assign(acc: &mut [f64], row: &[f64]) {
    for (a, &x) in acc.iter_mut().zip(row) {
        *a += x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{hop_neighborhoods, Graph};
    use crate::sketch::{sample_signatures, SketchConfig};

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn sig(g: &Graph, dim: usize, hubs: usize) -> SignatureMatrix {
        let cfg = SketchConfig { dim, hubs, seed: 5, ..SketchConfig::default() };
        sample_signatures(&cfg, g).unwrap()
    }

    #[test]
    fn one_step_on_a_path() {
        let g = path3();
        let x = sig(&g, 16, 0);
        let prop = propagate_walk(&x, &g, 1).unwrap();
        let expected: Vec<f64> = x.row(0).iter().zip(x.row(2)).map(|(a, b)| a + b).collect();
        assert_eq!(prop.walk(1).unwrap().row(1), expected.as_slice());
        assert_eq!(prop.walk(1).unwrap().stage(), Stage::Walk(1));
    }

    #[test]
    fn isolated_node_stays_zero() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let prop = propagate_walk(&sig(&g, 8, 0), &g, 3).unwrap();
        for l in 1..=3 {
            assert!(prop.walk(l).unwrap().row(2).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn first_hop_equals_first_walk() {
        let g = crate::graph::erdos_renyi(40, 0.15, 3).unwrap();
        let x = sig(&g, 64, 0);
        let walk = propagate_walk(&x, &g, 1).unwrap();
        let hop = propagate_hops(&x, &hop_neighborhoods(&g, 2).unwrap()).unwrap();
        for v in 0..40 {
            assert_eq!(walk.walk(1).unwrap().row(v), hop.hop(1).unwrap().row(v));
        }
    }

    #[test]
    fn second_shell_on_path_and_triangle() {
        let g = path3();
        let x = sig(&g, 16, 0);
        let hop = propagate_hops(&x, &hop_neighborhoods(&g, 2).unwrap()).unwrap();
        assert_eq!(hop.hop(2).unwrap().row(0), x.row(2));

        let k3 = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let hop = propagate_hops(&sig(&k3, 16, 0), &hop_neighborhoods(&k3, 2).unwrap()).unwrap();
        for v in 0..3 {
            assert!(hop.hop(2).unwrap().row(v).iter().all(|&x| x == 0.0));
        }
        assert!(matches!(hop.hop(3), Err(Error::HopOutOfRange { requested: 3, radius: 2 })));
        assert!(hop.hop(0).is_err());
    }

    #[test]
    fn zero_steps_rejected() {
        let g = path3();
        assert!(propagate_walk(&sig(&g, 8, 0), &g, 0).is_err());
    }

    #[test]
    fn hop_sketch_matches_full_propagation() {
        let g = crate::graph::erdos_renyi(40, 0.1, 8).unwrap();
        let x = sig(&g, 32, 4);
        let hops = hop_neighborhoods(&g, 3).unwrap();
        let prop = propagate_hops(&x, &hops).unwrap();
        let sk = HopSketch::of(&x, &hops, 17).unwrap();
        for s in 1..=3 {
            assert_eq!(sk.rows[s - 1].as_slice(), prop.hop(s).unwrap().row(17));
            assert_eq!(sk.shell_sizes[s - 1], hops.shell(17, s).unwrap().len());
        }
    }
}
