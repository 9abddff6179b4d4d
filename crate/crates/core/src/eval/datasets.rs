use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{barabasi_albert, erdos_renyi, load_edge_list, random_regular, EdgeListFormat, Graph};

/// A graph named either by a generator spec or by an edge-list path.
///
/// Generator specs are `ba:N:M:SEED`, `er:N:P:SEED` and `rr:N:D:SEED`.
/// Anything else is read as a file.
pub fn resolve_dataset(spec: &str) -> Result<(String, Graph)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if let [kind @ ("ba" | "er" | "rr"), n, param, seed] = parts.as_slice() {
        let bad = |what: &str| Error::InvalidArgument(format!("bad {what} in dataset spec {spec:?}"));
        let n: usize = n.parse().map_err(|_| bad("node count"))?;
        let seed: u64 = seed.parse().map_err(|_| bad("seed"))?;
        let g = match *kind {
            "ba" => barabasi_albert(n, param.parse().map_err(|_| bad("attachment count"))?, seed)?,
            "er" => erdos_renyi(n, param.parse().map_err(|_| bad("edge probability"))?, seed)?,
            _ => random_regular(n, param.parse().map_err(|_| bad("degree"))?, seed)?,
        };
        return Ok((spec.to_string(), g));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::MissingDataset(path.to_path_buf()));
    }
    let loaded = load_edge_list(path, EdgeListFormat::from_path(path))?;
    let name = path.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
    Ok((name, loaded.graph))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_specs() {
        let (name, g) = resolve_dataset("rr:20:4:1").unwrap();
        assert_eq!(name, "rr:20:4:1");
        assert!((0..20).all(|v| g.degree(v) == 4));
        assert_eq!(resolve_dataset("ba:50:2:0").unwrap().1.num_edges(), 96);
        assert!(resolve_dataset("er:x:0.1:0").is_err());
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = resolve_dataset("/nonexistent/USAir.txt").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/USAir.txt"));
    }
}
