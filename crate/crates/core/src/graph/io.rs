use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EdgeListFormat {
    /// Whitespace separated.
    #[default]
    Tsv,
    /// Comma separated.
    Csv,
}

impl EdgeListFormat {
    /// Picks CSV for `.csv` paths and whitespace otherwise.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Self::Csv,
            _ => Self::Tsv,
        }
    }

    fn separator(self) -> &'static str {
        match self {
            Self::Tsv => "\t",
            Self::Csv => ",",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub lines: usize,
    pub nodes: usize,
    pub edges: usize,
    pub self_loops_dropped: usize,
    pub duplicates_dropped: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `labels[i]` is the id node `i` carried in the file.
    pub labels: Vec<i64>,
    pub report: LoadReport,
}

pub fn load_edge_list(path: &Path, format: EdgeListFormat) -> Result<LoadedGraph> {
    read_edge_list(File::open(path)?, format)
}

/// Parses an edge list, densifying ids in order of first appearance.
pub fn read_edge_list<R: Read>(reader: R, format: EdgeListFormat) -> Result<LoadedGraph> {
    let mut ids: HashMap<i64, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut pairs = Vec::new();
    let mut report = LoadReport::default();

    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = match format {
            EdgeListFormat::Tsv => trimmed.split_whitespace().collect(),
            EdgeListFormat::Csv => trimmed.split(',').map(str::trim).collect(),
        };
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected two node ids, found {} fields", fields.len()),
            });
        }
        let mut ends = [0usize; 2];
        for (slot, field) in ends.iter_mut().zip(&fields) {
            let label: i64 = field.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid node id {field:?}"),
            })?;
            *slot = *ids.entry(label).or_insert_with(|| {
                labels.push(label);
                labels.len() - 1
            });
        }
        report.lines += 1;
        if ends[0] == ends[1] {
            report.self_loops_dropped += 1;
        } else {
            pairs.push((ends[0], ends[1]));
        }
    }

    if report.lines == 0 {
        return Err(Error::EmptyGraph);
    }
    let graph = Graph::from_edges(labels.len(), pairs.iter().copied())?;
    report.nodes = graph.num_nodes();
    report.edges = graph.num_edges();
    report.duplicates_dropped = pairs.len() - report.edges;
    Ok(LoadedGraph {
        graph,
        labels,
        report,
    })
}

pub fn write_edge_list<W: Write>(
    writer: W,
    edges: impl IntoIterator<Item = (usize, usize)>,
    format: EdgeListFormat,
) -> Result<()> {
    let mut out = BufWriter::new(writer);
    let sep = format.separator();
    for (u, v) in edges {
        writeln!(out, "{u}{sep}{v}")?;
    }
    out.flush()?;
    Ok(())
}
