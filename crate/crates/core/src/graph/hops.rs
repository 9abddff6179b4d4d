use std::collections::VecDeque;

use rayon::prelude::*;

use super::Topology;
use crate::error::{Error, Result};

/// Distance sentinel for nodes in another component.
pub const UNREACHABLE: usize = usize::MAX;

/// Exact shortest-path shells `N_v^s` for `s = 1..=radius`.
///
/// Shells may be computed for every node or only for a subset (the
/// receptive field of a training batch); asking for a node that was not
/// computed panics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopNeighborhoods {
    radius: usize,
    shells: Vec<Option<Vec<Vec<usize>>>>,
}

impl HopNeighborhoods {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn num_nodes(&self) -> usize {
        self.shells.len()
    }

    pub fn is_computed(&self, v: usize) -> bool {
        self.shells.get(v).is_some_and(Option::is_some)
    }

    /// Sorted ids at exact distance `s` from `v`, `1 <= s <= radius`.
    pub fn shell(&self, v: usize, s: usize) -> Result<&[usize]> {
        if s == 0 || s > self.radius {
            return Err(Error::HopOutOfRange {
                requested: s,
                radius: self.radius,
            });
        }
        Ok(&self.shells_of(v)[s - 1])
    }

    /// `|N_v^s|`, with the same bounds as [`shell`](Self::shell).
    pub fn shell_size(&self, v: usize, s: usize) -> Result<usize> {
        self.shell(v, s).map(<[usize]>::len)
    }

    fn shells_of(&self, v: usize) -> &[Vec<usize>] {
        self.shells[v]
            .as_deref()
            .unwrap_or_else(|| panic!("hop shells for node {v} were not computed"))
    }

    /// Distance from `v` to `k` if it is at most the radius.
    pub fn distance(&self, v: usize, k: usize) -> Option<usize> {
        if v == k {
            return Some(0);
        }
        self.shells_of(v)
            .iter()
            .position(|shell| shell.binary_search(&k).is_ok())
            .map(|i| i + 1)
    }
}

/// BFS truncated at depth `radius` from every node.
pub fn hop_neighborhoods<T: Topology>(topo: &T, radius: usize) -> Result<HopNeighborhoods> {
    let nodes: Vec<usize> = (0..topo.num_nodes()).collect();
    hop_neighborhoods_for(topo, radius, &nodes)
}

/// BFS truncated at depth `radius` from the listed nodes only.
pub fn hop_neighborhoods_for<T: Topology>(
    topo: &T,
    radius: usize,
    nodes: &[usize],
) -> Result<HopNeighborhoods> {
    if radius == 0 {
        return Err(Error::InvalidArgument("hop radius must be at least 1".into()));
    }
    let n = topo.num_nodes();
    for &v in nodes {
        if v >= n {
            return Err(Error::InvalidNode { node: v, num_nodes: n });
        }
    }
    let mut roots = nodes.to_vec();
    roots.sort_unstable();
    roots.dedup();
    let computed: Vec<(usize, Vec<Vec<usize>>)> = roots
        .par_iter()
        .map_init(
            || vec![UNREACHABLE; n],
            |mark, &v| (v, truncated_bfs(topo, v, radius, mark)),
        )
        .collect();

    let mut shells = vec![None; n];
    for (v, s) in computed {
        shells[v] = Some(s);
    }
    Ok(HopNeighborhoods { radius, shells })
}

// `mark[k] == src` flags k as visited in the BFS rooted at src, so the
// scratch buffer never needs clearing between roots.
fn truncated_bfs<T: Topology>(
    topo: &T,
    src: usize,
    radius: usize,
    mark: &mut [usize],
) -> Vec<Vec<usize>> {
    mark[src] = src;
    let mut shells: Vec<Vec<usize>> = Vec::with_capacity(radius);
    let mut frontier = vec![src];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &k in &frontier {
            topo.for_each_neighbor(k, |j| {
                if mark[j] != src {
                    mark[j] = src;
                    next.push(j);
                }
            });
        }
        next.sort_unstable();
        frontier = next.clone();
        shells.push(next);
    }
    shells
}

/// Unbounded BFS distances from `src`.
pub fn bfs_distances<T: Topology>(topo: &T, src: usize) -> Vec<usize> {
    let mut dist = vec![UNREACHABLE; topo.num_nodes()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(k) = queue.pop_front() {
        let next = dist[k] + 1;
        topo.for_each_neighbor(k, |j| {
            if dist[j] == UNREACHABLE {
                dist[j] = next;
                queue.push_back(j);
            }
        });
    }
    dist
}
