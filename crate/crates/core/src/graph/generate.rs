//! Synthetic graph families used by the tests and benchmarks.

use std::collections::HashSet;

use rand::Rng;

use super::{canonical, Graph};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

/// G(n, p): each of the n(n-1)/2 pairs is an edge independently.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = stream(seed, Domain::Generator, 0);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Uniform-ish random d-regular graph by incremental stub pairing, restarting
/// whenever the remaining stubs cannot be matched without loops or repeats.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n || !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "no simple {d}-regular graph on {n} nodes"
        )));
    }
    let mut rng = stream(seed, Domain::Generator, 1);
    'attempt: for _ in 0..1000 {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut edges = HashSet::with_capacity(n * d / 2);
        while !stubs.is_empty() {
            let mut placed = false;
            for _ in 0..100 {
                let i = rng.random_range(0..stubs.len());
                let j = rng.random_range(0..stubs.len());
                let (a, b) = (stubs[i], stubs[j]);
                if a == b || edges.contains(&canonical(a, b)) {
                    continue;
                }
                edges.insert(canonical(a, b));
                let (hi, lo) = if i > j { (i, j) } else { (j, i) };
                stubs.swap_remove(hi);
                stubs.swap_remove(lo);
                placed = true;
                break;
            }
            if !placed {
                continue 'attempt;
            }
        }
        let mut edges: Vec<_> = edges.into_iter().collect();
        edges.sort_unstable();
        return Graph::from_edges(n, edges);
    }
    Err(Error::InvalidArgument(format!(
        "failed to sample a {d}-regular graph on {n} nodes"
    )))
}

/// Preferential attachment: each new node links to `m` distinct existing
/// nodes chosen proportionally to degree.
pub fn barabasi_albert(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m == 0 || m >= n {
        return Err(Error::InvalidArgument(format!(
            "attachment count {m} must be in 1..{n}"
        )));
    }
    let mut rng = stream(seed, Domain::Generator, 2);
    let mut edges = Vec::with_capacity(m * (n - m));
    let mut repeated: Vec<usize> = Vec::with_capacity(2 * m * (n - m));
    let mut targets: Vec<usize> = (0..m).collect();
    for source in m..n {
        for &t in &targets {
            edges.push((source, t));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat_n(source, m));

        let mut chosen = HashSet::with_capacity(m);
        targets.clear();
        while targets.len() < m {
            let t = repeated[rng.random_range(0..repeated.len())];
            if chosen.insert(t) {
                targets.push(t);
            }
        }
    }
    Graph::from_edges(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_is_deterministic() {
        assert_eq!(erdos_renyi(200, 0.05, 7).unwrap(), erdos_renyi(200, 0.05, 7).unwrap());
        assert_ne!(erdos_renyi(200, 0.05, 7).unwrap(), erdos_renyi(200, 0.05, 8).unwrap());
    }

    #[test]
    fn er_density() {
        let g = erdos_renyi(400, 0.05, 1).unwrap();
        let expected = 0.05 * (400.0 * 399.0 / 2.0);
        assert!((g.num_edges() as f64 - expected).abs() < 4.0 * expected.sqrt());
    }

    #[test]
    fn regular_degrees() {
        let g = random_regular(500, 6, 3).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 6));
        assert!(random_regular(5, 3, 0).is_err());
    }

    #[test]
    fn preferential_attachment_shape() {
        let g = barabasi_albert(2000, 5, 4).unwrap();
        assert_eq!(g.num_edges(), 5 * (2000 - 5));
        let max = *g.degrees().iter().max().unwrap();
        assert!(max > 60, "expected hubs, max degree {max}");
    }
}
