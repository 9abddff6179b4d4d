//! Exact reference values for everything the sketches estimate.

use log::warn;

use crate::error::{Error, Result};
use crate::graph::{Graph, HopNeighborhoods};

/// Node limit for the dense walk-count oracle.
pub const WALK_ORACLE_LIMIT: usize = 500;

/// Iterates `N_u ∩ N_v` by merging the sorted neighbor lists.
pub fn common_neighbors<'a>(g: &'a Graph, u: usize, v: usize) -> impl Iterator<Item = usize> + 'a {
    sorted_intersection(g.neighbors(u), g.neighbors(v))
}

fn sorted_intersection<'a>(a: &'a [usize], b: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
    let (mut i, mut j) = (0, 0);
    std::iter::from_fn(move || {
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    let k = a[i];
                    i += 1;
                    j += 1;
                    return Some(k);
                }
            }
        }
        None
    })
}

pub fn exact_cn(g: &Graph, u: usize, v: usize) -> usize {
    common_neighbors(g, u, v).count()
}

/// Adamic-Adar. A shared neighbor of degree 1 would contribute `1/ln 1`;
/// such terms are skipped with a warning.
pub fn exact_aa(g: &Graph, u: usize, v: usize) -> f64 {
    common_neighbors(g, u, v)
        .filter_map(|k| {
            let d = g.degree(k);
            if d < 2 {
                warn!("adamic-adar: skipping common neighbor {k} with degree {d}");
                None
            } else {
                Some(1.0 / (d as f64).ln())
            }
        })
        .sum()
}

/// Resource allocation.
pub fn exact_ra(g: &Graph, u: usize, v: usize) -> f64 {
    common_neighbors(g, u, v).map(|k| 1.0 / g.degree(k) as f64).sum()
}

/// `#(p, q)`: nodes at distance `p` from `u` and `q` from `v`.
///
/// A zero index mirrors the subtraction rows used by the estimator:
/// `#(0, q)` counts members of `N_v^q` that lie in none of `N_u^1..N_u^r`
/// (this includes `u` itself and nodes farther than `r` from `u`).
pub fn exact_de_count(
    hops: &HopNeighborhoods,
    u: usize,
    v: usize,
    p: usize,
    q: usize,
) -> Result<usize> {
    let r = hops.radius();
    if p > r || q > r {
        return Err(Error::HopOutOfRange { requested: p.max(q), radius: r });
    }
    match (p, q) {
        (0, 0) => Err(Error::InvalidArgument("#(0, 0) is undefined".into())),
        (0, q) => outside_radius(hops, hops.shell(v, q)?, u),
        (p, 0) => outside_radius(hops, hops.shell(u, p)?, v),
        (p, q) => Ok(sorted_intersection(hops.shell(u, p)?, hops.shell(v, q)?).count()),
    }
}

fn outside_radius(hops: &HopNeighborhoods, shell: &[usize], other: usize) -> Result<usize> {
    let mut count = 0;
    for &k in shell {
        let mut inside = false;
        for s in 1..=hops.radius() {
            if hops.shell(other, s)?.binary_search(&k).is_ok() {
                inside = true;
                break;
            }
        }
        count += usize::from(!inside);
    }
    Ok(count)
}

/// Dense `A^l` with overflow-checked entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl WalkMatrix {
    pub fn power(g: &Graph, l: usize) -> Result<Self> {
        let n = g.num_nodes();
        if n > WALK_ORACLE_LIMIT {
            return Err(Error::OracleTooLarge { num_nodes: n, limit: WALK_ORACLE_LIMIT });
        }
        let mut counts = vec![0u64; n * n];
        for i in 0..n {
            counts[i * n + i] = 1;
        }
        for _ in 0..l {
            // next[i][j] = sum over k in N(j) of cur[i][k]
            let mut next = vec![0u64; n * n];
            for i in 0..n {
                let row = &counts[i * n..(i + 1) * n];
                for j in 0..n {
                    let mut acc = 0u64;
                    for &k in g.neighbors(j) {
                        acc = acc.checked_add(row[k]).ok_or(Error::Overflow)?;
                    }
                    next[i * n + j] = acc;
                }
            }
            counts = next;
        }
        Ok(Self { n, counts })
    }

    pub fn get(&self, u: usize, v: usize) -> u64 {
        self.counts[u * self.n + v]
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }
}

/// Number of length-`l` walks between `u` and `v`, i.e. `(A^l)_{uv}`.
pub fn exact_walk_count(g: &Graph, l: usize, u: usize, v: usize) -> Result<u64> {
    let n = g.num_nodes();
    if n > WALK_ORACLE_LIMIT {
        return Err(Error::OracleTooLarge { num_nodes: n, limit: WALK_ORACLE_LIMIT });
    }
    g.check_node(u)?;
    g.check_node(v)?;
    let mut walks = vec![0u64; n];
    walks[u] = 1;
    for _ in 0..l {
        let mut next = vec![0u64; n];
        for (j, slot) in next.iter_mut().enumerate() {
            for &k in g.neighbors(j) {
                *slot = slot.checked_add(walks[k]).ok_or(Error::Overflow)?;
            }
        }
        walks = next;
    }
    Ok(walks[v])
}

/// Triangles through `u`, computed as `(A^3)_{uu} / 2`.
pub fn exact_triangles_at(g: &Graph, u: usize) -> usize {
    let closed: usize = g
        .neighbors(u)
        .iter()
        .map(|&a| sorted_intersection(g.neighbors(a), g.neighbors(u)).count())
        .sum();
    closed / 2
}

/// Mean of training-set heuristic values, the non-informative baseline.
pub fn mean_baseline(train_values: &[f64]) -> Result<f64> {
    if train_values.is_empty() {
        return Err(Error::Empty("training values"));
    }
    Ok(train_values.iter().sum::<f64>() / train_values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bfs_distances, erdos_renyi, hop_neighborhoods, UNREACHABLE};
    use proptest::prelude::*;

    fn k(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn triangle_heuristics() {
        let g = k(3);
        assert_eq!(exact_cn(&g, 0, 1), 1);
        assert_eq!(exact_ra(&g, 0, 1), 0.5);
        assert!((exact_aa(&g, 0, 1) - 1.0 / 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn star_leaves_share_the_center() {
        let g = star(5);
        assert_eq!(exact_ra(&g, 1, 2), 1.0 / 5.0);
        assert_eq!(exact_cn(&g, 3, 4), 1);
    }

    #[test]
    fn disjoint_pair_scores_zero() {
        let g = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(exact_cn(&g, 0, 2), 0);
        assert_eq!(exact_aa(&g, 0, 2), 0.0);
        assert_eq!(exact_ra(&g, 0, 2), 0.0);
    }

    #[test]
    fn aa_skips_degree_one_common_neighbor() {
        // node 1 is the sole neighbor of 0 and a neighbor of itself only in
        // a query (u == v), the only way a degree-1 node can be "shared"
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(exact_cn(&g, 0, 0), 1);
        assert_eq!(exact_aa(&g, 0, 0), 0.0);
    }

    #[test]
    fn de_counts_on_small_graphs() {
        let g = k(3);
        let hops = hop_neighborhoods(&g, 2).unwrap();
        assert_eq!(exact_de_count(&hops, 0, 1, 1, 1).unwrap(), 1);

        let g = path(3);
        let hops = hop_neighborhoods(&g, 2).unwrap();
        assert_eq!(exact_de_count(&hops, 0, 2, 1, 1).unwrap(), 1);
        assert_eq!(exact_de_count(&hops, 0, 2, 2, 2).unwrap(), 0);
        // #(0, 2) for (a, c) is node a itself
        assert_eq!(exact_de_count(&hops, 0, 2, 0, 2).unwrap(), 1);
    }

    #[test]
    fn de_count_argument_errors() {
        let hops = hop_neighborhoods(&path(4), 2).unwrap();
        assert!(matches!(exact_de_count(&hops, 0, 1, 3, 1), Err(Error::HopOutOfRange { .. })));
        assert!(exact_de_count(&hops, 0, 1, 0, 0).is_err());
    }

    #[test]
    fn walk_counts() {
        assert_eq!(exact_walk_count(&path(3), 2, 0, 2).unwrap(), 1);
        assert_eq!(exact_walk_count(&k(3), 2, 0, 0).unwrap(), 2);
        assert_eq!(exact_walk_count(&k(3), 0, 1, 1).unwrap(), 1);
        let m = WalkMatrix::power(&k(3), 2).unwrap();
        assert_eq!(m.get(0, 0), 2);
        assert_eq!(m.get(0, 1), 1);
    }

    #[test]
    fn walk_oracle_size_cap() {
        let g = Graph::empty(WALK_ORACLE_LIMIT + 1);
        assert!(matches!(exact_walk_count(&g, 1, 0, 1), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn walk_overflow_is_detected() {
        // walk counts in K_40 grow like 39^l / 40; 39^14 / 40 > 2^64
        assert!(matches!(exact_walk_count(&k(40), 14, 0, 0), Err(Error::Overflow)));
    }

    #[test]
    fn triangle_counts() {
        assert!((0..3).all(|u| exact_triangles_at(&k(3), u) == 1));
        assert!((0..6).all(|u| exact_triangles_at(&star(5), u) == 0));
        assert!((0..4).all(|u| exact_triangles_at(&k(4), u) == 3));
    }

    #[test]
    fn mean_baseline_values() {
        assert_eq!(mean_baseline(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(mean_baseline(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(mean_baseline(&[4.5; 7]).unwrap(), 4.5);
        assert!(mean_baseline(&[]).is_err());
    }

    // Double-BFS oracle: classify every node by its distance to both ends.
    fn de_by_distances(g: &Graph, r: usize, u: usize, v: usize, p: usize, q: usize) -> usize {
        let du = bfs_distances(g, u);
        let dv = bfs_distances(g, v);
        let within = |d: usize| d != UNREACHABLE && (1..=r).contains(&d);
        (0..g.num_nodes())
            .filter(|&k| match (p, q) {
                (0, q) => dv[k] == q && !within(du[k]),
                (p, 0) => du[k] == p && !within(dv[k]),
                (p, q) => du[k] == p && dv[k] == q,
            })
            .count()
    }

    fn triangles_by_enumeration(g: &Graph, u: usize) -> usize {
        let nb = g.neighbors(u);
        let mut t = 0;
        for (i, &a) in nb.iter().enumerate() {
            for &b in &nb[i + 1..] {
                t += usize::from(g.has_edge(a, b));
            }
        }
        t
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn de_counts_match_double_bfs(seed in any::<u64>(), r in 1usize..4) {
            let g = erdos_renyi(50, 0.06, seed).unwrap();
            let hops = hop_neighborhoods(&g, r).unwrap();
            for (u, v) in [(0, 1), (2, 30), (7, 49), (11, 12)] {
                for p in 0..=r {
                    for q in 0..=r {
                        if p + q == 0 { continue; }
                        prop_assert_eq!(
                            exact_de_count(&hops, u, v, p, q).unwrap(),
                            de_by_distances(&g, r, u, v, p, q)
                        );
                    }
                }
                prop_assert_eq!(exact_de_count(&hops, u, v, 1, 1).unwrap(), exact_cn(&g, u, v));
                for p in 1..=r {
                    let row: usize = (0..=r).map(|q| exact_de_count(&hops, u, v, p, q).unwrap()).sum();
                    prop_assert_eq!(row, hops.shell_size(u, p).unwrap());
                }
            }
        }

        #[test]
        fn walks_and_triangles_match_matrix_power(seed in any::<u64>()) {
            let g = erdos_renyi(20, 0.25, seed).unwrap();
            let a1 = WalkMatrix::power(&g, 1).unwrap();
            let a3 = WalkMatrix::power(&g, 3).unwrap();
            for u in 0..20 {
                prop_assert_eq!(exact_triangles_at(&g, u) as u64 * 2, a3.get(u, u));
                prop_assert_eq!(exact_triangles_at(&g, u), triangles_by_enumeration(&g, u));
                for v in 0..20 {
                    prop_assert_eq!(a1.get(u, v) == 1, g.has_edge(u, v));
                    prop_assert_eq!(exact_walk_count(&g, 3, u, v).unwrap(), a3.get(u, v));
                }
            }
        }
    }
}
