//! Undirected simple graphs in compressed adjacency form.

mod generate;
mod hops;
mod io;
mod mask;
mod split;

pub use generate::{barabasi_albert, erdos_renyi, random_regular};
pub use hops::{bfs_distances, hop_neighborhoods, hop_neighborhoods_for, HopNeighborhoods, UNREACHABLE};
pub use io::{load_edge_list, read_edge_list, write_edge_list, EdgeListFormat, LoadReport, LoadedGraph};
pub use mask::{masked_view, BatchMask, MaskedView};
pub use split::{sample_negatives, split_edges, DatasetSplit, SplitManifest, SplitRatios};

use crate::error::{Error, Result};

/// Read access to an undirected adjacency structure.
///
/// Implemented by [`Graph`] and by [`MaskedView`], so BFS and signature
/// propagation run unchanged on a graph with a training batch removed.
pub trait Topology: Sync {
    fn num_nodes(&self) -> usize;

    fn degree(&self, v: usize) -> usize;

    /// Calls `f` on every neighbor of `v` in ascending id order.
    fn for_each_neighbor<F: FnMut(usize)>(&self, v: usize, f: F);

    fn neighbor_vec(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree(v));
        self.for_each_neighbor(v, |k| out.push(k));
        out
    }
}

/// Immutable undirected simple graph.
///
/// Neighbor lists are sorted ascending with no self-loops or duplicates,
/// and `v ∈ N(u) ⇔ u ∈ N(v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    /// Builds a canonical graph from arbitrary pairs: self-loops are dropped,
    /// both directions inserted, and duplicates removed.
    pub fn from_edges<I>(num_nodes: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut directed = Vec::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= num_nodes {
                    return Err(Error::InvalidNode { node, num_nodes });
                }
            }
            if u != v {
                directed.push((u, v));
                directed.push((v, u));
            }
        }
        directed.sort_unstable();
        directed.dedup();

        let mut offsets = vec![0usize; num_nodes + 1];
        for &(u, _) in &directed {
            offsets[u + 1] += 1;
        }
        for i in 0..num_nodes {
            offsets[i + 1] += offsets[i];
        }
        let targets = directed.into_iter().map(|(_, v)| v).collect();
        Ok(Self { offsets, targets })
    }

    pub fn empty(num_nodes: usize) -> Self {
        Self {
            offsets: vec![0; num_nodes + 1],
            targets: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes()).map(|v| self.degree(v)).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Undirected edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node < self.num_nodes() {
            Ok(())
        } else {
            Err(Error::InvalidNode {
                node,
                num_nodes: self.num_nodes(),
            })
        }
    }
}

impl Topology for Graph {
    fn num_nodes(&self) -> usize {
        Graph::num_nodes(self)
    }

    fn degree(&self, v: usize) -> usize {
        Graph::degree(self, v)
    }

    fn for_each_neighbor<F: FnMut(usize)>(&self, v: usize, f: F) {
        self.neighbors(v).iter().copied().for_each(f);
    }
}

/// Canonical `(min, max)` form of an undirected pair.
pub fn canonical(u: usize, v: usize) -> (usize, usize) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}
