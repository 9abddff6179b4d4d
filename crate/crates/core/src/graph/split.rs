use std::collections::HashSet;
use std::fs::{self, File};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{canonical, write_edge_list, EdgeListFormat, Graph};
use crate::error::{Error, Result};
use crate::rng::{stream, Domain};

const MIN_EDGES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.7,
            valid: 0.1,
            test: 0.2,
        }
    }
}

impl SplitRatios {
    fn validate(&self) -> Result<()> {
        let all = [self.train, self.valid, self.test];
        if all.iter().any(|r| !r.is_finite() || *r < 0.0) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
            return Err(Error::Config(format!("split ratios must be non-negative and sum to 1, got {all:?}")));
        }
        Ok(())
    }
}

/// Positive edges partitioned into train/valid/test plus one sampled
/// non-edge per valid and test positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub num_nodes: usize,
    pub train_pos: Vec<(usize, usize)>,
    pub valid_pos: Vec<(usize, usize)>,
    pub test_pos: Vec<(usize, usize)>,
    pub valid_neg: Vec<(usize, usize)>,
    pub test_neg: Vec<(usize, usize)>,
    pub seed: u64,
    pub ratios: SplitRatios,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub valid_neg: usize,
    pub test_neg: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitManifest {
    pub schema: u32,
    pub seed: u64,
    pub ratios: SplitRatios,
    pub num_nodes: usize,
    pub counts: SplitCounts,
}

const FILES: [&str; 5] = ["train.txt", "valid.txt", "test.txt", "valid_neg.txt", "test_neg.txt"];

/// Shuffles the edges with `seed` and cuts them by `ratios`. Valid and test
/// sizes are floored; the remainder goes to train.
pub fn split_edges(g: &Graph, ratios: SplitRatios, seed: u64) -> Result<DatasetSplit> {
    ratios.validate()?;
    let m = g.num_edges();
    if m < MIN_EDGES {
        return Err(Error::GraphTooSmall { edges: m, required: MIN_EDGES });
    }
    let mut edges: Vec<_> = g.edges().collect();
    let mut rng = stream(seed, Domain::Split, 0);
    edges.shuffle(&mut rng);

    let portion = |r: f64| ((m as f64) * r + 1e-9).floor() as usize;
    let n_test = portion(ratios.test);
    let n_valid = portion(ratios.valid);

    let mut test_pos = edges[..n_test].to_vec();
    let mut valid_pos = edges[n_test..n_test + n_valid].to_vec();
    let mut train_pos = edges[n_test + n_valid..].to_vec();
    train_pos.sort_unstable();
    valid_pos.sort_unstable();
    test_pos.sort_unstable();

    let mut seen = HashSet::new();
    let valid_neg = draw_negatives(g, valid_pos.len(), &mut rng, &mut seen)?;
    let test_neg = draw_negatives(g, test_pos.len(), &mut rng, &mut seen)?;

    Ok(DatasetSplit {
        num_nodes: g.num_nodes(),
        train_pos,
        valid_pos,
        test_pos,
        valid_neg,
        test_neg,
        seed,
        ratios,
    })
}

/// `count` distinct uniform non-edges of `g` drawn from stream `index`.
pub fn sample_negatives(g: &Graph, count: usize, seed: u64, index: u64) -> Result<Vec<(usize, usize)>> {
    let mut rng = stream(seed, Domain::Pairs, index);
    draw_negatives(g, count, &mut rng, &mut HashSet::new())
}

fn draw_negatives(
    g: &Graph,
    count: usize,
    rng: &mut ChaCha8Rng,
    seen: &mut HashSet<(usize, usize)>,
) -> Result<Vec<(usize, usize)>> {
    let n = g.num_nodes();
    let pairs = n * n.saturating_sub(1) / 2;
    let available = pairs.saturating_sub(g.num_edges() + seen.len());
    if count > available {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {count} negatives, only {available} non-edges remain"
        )));
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v || g.has_edge(u, v) {
            continue;
        }
        let pair = canonical(u, v);
        if seen.insert(pair) {
            out.push(pair);
        }
    }
    Ok(out)
}

impl DatasetSplit {
    /// The graph models score against: train edges, plus validation edges
    /// when `include_valid` is set.
    pub fn observed_graph(&self, include_valid: bool) -> Graph {
        let valid: &[(usize, usize)] = if include_valid { &self.valid_pos } else { &[] };
        Graph::from_edges(
            self.num_nodes,
            self.train_pos.iter().chain(valid).copied(),
        )
        .expect("split edges index valid nodes")
    }

    pub fn manifest(&self) -> SplitManifest {
        SplitManifest {
            schema: 1,
            seed: self.seed,
            ratios: self.ratios,
            num_nodes: self.num_nodes,
            counts: SplitCounts {
                train: self.train_pos.len(),
                valid: self.valid_pos.len(),
                test: self.test_pos.len(),
                valid_neg: self.valid_neg.len(),
                test_neg: self.test_neg.len(),
            },
        }
    }

    /// Writes the five edge lists and `manifest.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let lists = [&self.train_pos, &self.valid_pos, &self.test_pos, &self.valid_neg, &self.test_neg];
        for (name, edges) in FILES.iter().zip(lists) {
            write_edge_list(File::create(dir.join(name))?, edges.iter().copied(), EdgeListFormat::Tsv)?;
        }
        let manifest = serde_json::to_string_pretty(&self.manifest())?;
        fs::write(dir.join("manifest.json"), manifest + "\n")?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let manifest: SplitManifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        if manifest.schema != 1 {
            return Err(Error::Config(format!("unsupported split schema {}", manifest.schema)));
        }
        let mut lists = Vec::with_capacity(FILES.len());
        for name in FILES {
            lists.push(read_pairs(&dir.join(name), manifest.num_nodes)?);
        }
        let [train_pos, valid_pos, test_pos, valid_neg, test_neg]: [Vec<(usize, usize)>; 5] =
            lists.try_into().expect("five lists");
        let split = Self {
            num_nodes: manifest.num_nodes,
            train_pos,
            valid_pos,
            test_pos,
            valid_neg,
            test_neg,
            seed: manifest.seed,
            ratios: manifest.ratios,
        };
        if split.manifest().counts != manifest.counts {
            return Err(Error::Config("split files disagree with manifest counts".into()));
        }
        Ok(split)
    }
}

// Split files hold dense ids already, so they are read verbatim rather than
// re-densified.
fn read_pairs(path: &Path, num_nodes: usize) -> Result<Vec<(usize, usize)>> {
    if fs::metadata(path)?.len() == 0 {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ids: Vec<usize> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: i + 1, message: format!("{e}") })?;
        match ids[..] {
            [u, v] if u < num_nodes && v < num_nodes => out.push((u, v)),
            [_, _] => return Err(Error::Parse { line: i + 1, message: "node id out of range".into() }),
            _ => return Err(Error::Parse { line: i + 1, message: "expected two node ids".into() }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::erdos_renyi;

    fn graph_with_edges(m: usize) -> Graph {
        // a long path has exactly n-1 edges
        Graph::from_edges(m + 1, (0..m).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn hundred_edges_split_exactly() {
        let split = split_edges(&graph_with_edges(100), SplitRatios::default(), 3).unwrap();
        assert_eq!(split.train_pos.len(), 70);
        assert_eq!(split.valid_pos.len(), 10);
        assert_eq!(split.test_pos.len(), 20);
        assert_eq!(split.valid_neg.len(), 10);
        assert_eq!(split.test_neg.len(), 20);
    }

    #[test]
    fn remainder_goes_to_train() {
        // 2126 undirected edges: floor(212.6) = 212, floor(425.2) = 425
        let split = split_edges(&graph_with_edges(2126), SplitRatios::default(), 0).unwrap();
        assert_eq!(
            (split.train_pos.len(), split.valid_pos.len(), split.test_pos.len()),
            (1489, 212, 425)
        );
    }

    #[test]
    fn deterministic_per_seed() {
        let g = erdos_renyi(60, 0.1, 1).unwrap();
        let a = split_edges(&g, SplitRatios::default(), 9).unwrap();
        let b = split_edges(&g, SplitRatios::default(), 9).unwrap();
        let c = split_edges(&g, SplitRatios::default(), 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.test_pos, c.test_pos);
    }

    #[test]
    fn partitions_edges_and_negatives_are_non_edges() {
        let g = erdos_renyi(80, 0.08, 2).unwrap();
        let split = split_edges(&g, SplitRatios::default(), 4).unwrap();
        let mut all: Vec<_> = split
            .train_pos
            .iter()
            .chain(&split.valid_pos)
            .chain(&split.test_pos)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, g.edges().collect::<Vec<_>>());
        for &(u, v) in split.valid_neg.iter().chain(&split.test_neg) {
            assert_ne!(u, v);
            assert!(!g.has_edge(u, v));
        }
        let observed = split.observed_graph(false);
        for &(u, v) in split.valid_pos.iter().chain(&split.test_pos) {
            assert!(!observed.has_edge(u, v));
        }
        assert!(split.observed_graph(true).has_edge(split.valid_pos[0].0, split.valid_pos[0].1));
    }

    #[test]
    fn too_small_graph() {
        assert!(matches!(
            split_edges(&graph_with_edges(9), SplitRatios::default(), 0),
            Err(Error::GraphTooSmall { edges: 9, .. })
        ));
    }

    #[test]
    fn save_and_load() {
        let g = erdos_renyi(50, 0.1, 5).unwrap();
        let split = split_edges(&g, SplitRatios::default(), 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        split.save(dir.path()).unwrap();
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["seed"], 11);
        assert_eq!(manifest["counts"]["train"], split.train_pos.len());
        assert_eq!(DatasetSplit::load(dir.path()).unwrap(), split);
    }
}
