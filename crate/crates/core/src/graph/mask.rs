use std::collections::HashMap;

use super::{canonical, hop_neighborhoods_for, Graph, HopNeighborhoods, Topology};
use crate::error::{Error, Result};

/// Target links hidden from the graph while a training batch is featurized.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchMask {
    pub removed_edges: Vec<(usize, usize)>,
}

impl BatchMask {
    pub fn new(removed_edges: Vec<(usize, usize)>) -> Self {
        Self { removed_edges }
    }
}

/// A graph with some edges logically removed. The base graph is borrowed,
/// never copied or modified.
#[derive(Debug, Clone)]
pub struct MaskedView<'g> {
    base: &'g Graph,
    removed: HashMap<usize, Vec<usize>>,
}

pub fn masked_view<'g>(g: &'g Graph, mask: &BatchMask) -> Result<MaskedView<'g>> {
    let mut removed: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(u, v) in &mask.removed_edges {
        if !g.has_edge(u, v) {
            return Err(Error::EdgeNotInGraph(u, v));
        }
        let (a, b) = canonical(u, v);
        removed.entry(a).or_default().push(b);
        removed.entry(b).or_default().push(a);
    }
    for list in removed.values_mut() {
        list.sort_unstable();
        list.dedup();
    }
    Ok(MaskedView { base: g, removed })
}

impl<'g> MaskedView<'g> {
    /// Drops the mask, handing back the untouched base graph.
    pub fn unmask(self) -> &'g Graph {
        self.base
    }

    pub fn base(&self) -> &'g Graph {
        self.base
    }

    pub fn is_removed(&self, u: usize, v: usize) -> bool {
        self.removed
            .get(&u)
            .is_some_and(|list| list.binary_search(&v).is_ok())
    }

    /// Shells for `nodes` computed on the masked topology only.
    pub fn hops_for(&self, radius: usize, nodes: &[usize]) -> Result<HopNeighborhoods> {
        hop_neighborhoods_for(self, radius, nodes)
    }

    /// Owned copy of the masked graph.
    pub fn materialize(&self) -> Graph {
        let edges = self.base.edges().filter(|&(u, v)| !self.is_removed(u, v));
        Graph::from_edges(self.base.num_nodes(), edges).expect("subgraph of a valid graph")
    }
}

impl Topology for MaskedView<'_> {
    fn num_nodes(&self) -> usize {
        self.base.num_nodes()
    }

    fn degree(&self, v: usize) -> usize {
        self.base.degree(v) - self.removed.get(&v).map_or(0, Vec::len)
    }

    fn for_each_neighbor<F: FnMut(usize)>(&self, v: usize, mut f: F) {
        match self.removed.get(&v) {
            None => self.base.neighbors(v).iter().copied().for_each(f),
            Some(skip) => {
                for &k in self.base.neighbors(v) {
                    if skip.binary_search(&k).is_err() {
                        f(k);
                    }
                }
            }
        }
    }
}
