use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{read_edge_list, read_labels, Graph, LabelVector, MASKED};

/// A labelled graph loaded from disk.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub graph: Graph,
    pub labels: LabelVector,
    /// Original id of each compacted node.
    pub node_ids: Vec<u64>,
    /// Original value of each compacted class.
    pub class_ids: Vec<i32>,
    /// Non-comment lines in the edge file, i.e. edge entries before
    /// symmetrisation and deduplication.
    pub raw_edge_entries: usize,
}

impl Dataset {
    pub fn k(&self) -> usize {
        self.labels.k()
    }
}

/// Loads an edge list and its label file.
///
/// Node `i` is labelled by line `i` of the label file. Edge files that number
/// nodes from 1 (max id equal to the number of labels, no id 0) are shifted
/// down by one. Labels are compacted to `0..K` in increasing order; `-1`
/// stays unknown. The graph is symmetrised and deduplicated and every
/// component is kept.
pub fn load_dataset(edge_path: impl AsRef<Path>, label_path: impl AsRef<Path>) -> Result<Dataset> {
    let edge_path = edge_path.as_ref();
    let edges = read_edge_list(edge_path)?;
    let raw_labels = read_labels(label_path.as_ref())?;
    let n = raw_labels.len();
    let (min_id, max_id) = match (edges.min_id(), edges.max_id()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => (0, 0),
    };
    let offset = if edges.pairs.is_empty() || max_id < n as u64 {
        0
    } else if min_id >= 1 && max_id == n as u64 {
        1
    } else {
        return Err(Error::SizeMismatch {
            labels: n,
            nodes: max_id as usize + 1,
        });
    };
    let pairs: Vec<(usize, usize)> = edges
        .pairs
        .iter()
        .map(|&(u, v)| ((u - offset) as usize, (v - offset) as usize))
        .collect();
    let graph = Graph::from_edge_list(&pairs, n)?;

    let mut class_ids: Vec<i32> = raw_labels.iter().copied().filter(|&v| v >= 0).collect();
    class_ids.sort_unstable();
    class_ids.dedup();
    let values = raw_labels
        .iter()
        .map(|&v| {
            if v < 0 {
                MASKED
            } else {
                class_ids.binary_search(&v).expect("collected above") as i32
            }
        })
        .collect();
    let labels = LabelVector::new(values, class_ids.len())?;

    let name = edge_path
        .parent()
        .and_then(|p| p.file_name())
        .or_else(|| edge_path.file_stem())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    Ok(Dataset {
        name,
        graph,
        labels,
        node_ids: (0..n as u64).map(|i| i + offset).collect(),
        class_ids,
        raw_edge_entries: edges.pairs.len(),
    })
}

/// Directory holding the vendored fixtures. `GNNSEED_FIXTURES` overrides it.
pub fn fixtures_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Loads `<root>/<name>/edges.txt` and `labels.txt`, looking under
/// `GNNSEED_FIXTURES` first and then in the bundled fixtures.
pub fn load_fixture(name: &str) -> Result<Dataset> {
    let dir = std::env::var_os("GNNSEED_FIXTURES")
        .map(|root| PathBuf::from(root).join(name))
        .filter(|d| d.is_dir())
        .unwrap_or_else(|| fixtures_root().join(name));
    let mut ds = load_dataset(dir.join("edges.txt"), dir.join("labels.txt"))?;
    ds.name = name.to_string();
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn karate_fixture() {
        let ds = load_fixture("karate").unwrap();
        assert_eq!(ds.graph.n(), 34);
        assert_eq!(ds.k(), 4);
        assert_eq!(ds.graph.m(), 78);
        let mut sizes = ds.labels.class_counts();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![13, 12, 5, 4]);
    }

    #[test]
    fn short_label_file_is_a_size_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("e.txt"), "0 1\n1 2\n2 5\n").unwrap();
        fs::write(dir.path().join("l.txt"), "0\n0\n1\n").unwrap();
        let err = load_dataset(dir.path().join("e.txt"), dir.path().join("l.txt")).unwrap_err();
        assert!(matches!(err, Error::SizeMismatch { labels: 3, nodes: 6 }));
    }

    #[test]
    fn headers_skipped_and_one_based_ids_shifted() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("e.txt"), "# source target\n% more\n1 2\n2 3 1.0\n3 1\n").unwrap();
        fs::write(dir.path().join("l.txt"), "5\n5\n9\n").unwrap();
        let ds = load_dataset(dir.path().join("e.txt"), dir.path().join("l.txt")).unwrap();
        assert_eq!(ds.graph.m(), 3);
        assert_eq!(ds.node_ids, vec![1, 2, 3]);
        assert_eq!(ds.labels.values(), &[0, 0, 1]);
        assert_eq!(ds.class_ids, vec![5, 9]);
        assert_eq!(ds.raw_edge_entries, 3);
    }
}
