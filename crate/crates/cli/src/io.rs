use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use qosketch::eval::resolve_dataset;
use qosketch::graph::{load_edge_list, EdgeListFormat, Graph};

/// A graph plus the id each dense node carried in its source.
pub struct Loaded {
    pub name: String,
    pub graph: Graph,
    pub labels: Vec<i64>,
}

impl Loaded {
    pub fn label(&self, v: usize) -> i64 {
        self.labels[v]
    }
}

pub fn load_graph(spec: &str) -> Result<Loaded> {
    let path = Path::new(spec);
    if path.exists() {
        let loaded = load_edge_list(path, EdgeListFormat::from_path(path))
            .with_context(|| format!("reading {}", path.display()))?;
        let name = path.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
        return Ok(Loaded { name, graph: loaded.graph, labels: loaded.labels });
    }
    let (name, graph) = resolve_dataset(spec)?;
    let labels = (0..graph.num_nodes() as i64).collect();
    Ok(Loaded { name, graph, labels })
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Pairs of source ids, one per line, separated by whitespace or a comma.
pub fn read_pairs(path: &Path) -> Result<Vec<(i64, i64)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let ids: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        let [a, b] = ids[..] else {
            bail!("{}:{}: expected two node ids", path.display(), i + 1);
        };
        let parse = |s: &str| s.parse::<i64>().with_context(|| format!("{}:{}: invalid id {s:?}", path.display(), i + 1));
        out.push((parse(a)?, parse(b)?));
    }
    Ok(out)
}
