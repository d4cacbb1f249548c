//! Plain-text edge-list and label files.
//!
//! Edge lists hold one edge per line as two whitespace-separated non-negative
//! integers. Lines starting with `#` or `%` are comments and a third column
//! (a weight) is accepted and discarded. Label files hold one integer per
//! line, line `i` being the label of node `i`; `-1` marks an unknown label.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{Graph, LabelVector};
use crate::error::{Error, Result};

/// Raw node-id pairs exactly as read from a file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeList {
    pub pairs: Vec<(u64, u64)>,
}

impl EdgeList {
    pub fn max_id(&self) -> Option<u64> {
        self.pairs.iter().map(|&(u, v)| u.max(v)).max()
    }

    pub fn min_id(&self) -> Option<u64> {
        self.pairs.iter().map(|&(u, v)| u.min(v)).min()
    }
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#') || t.starts_with('%')
}

pub fn parse_edge_list(text: &str, path: &Path) -> Result<EdgeList> {
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let mut fields = line.split_whitespace();
        let mut endpoint = || -> Result<u64> {
            let field = fields
                .next()
                .ok_or_else(|| parse_err("expected two node ids".into()))?;
            field
                .parse::<u64>()
                .map_err(|e| parse_err(format!("bad node id {field:?}: {e}")))
        };
        let u = endpoint()?;
        let v = endpoint()?;
        if let Some(w) = fields.next() {
            w.parse::<f64>()
                .map_err(|e| parse_err(format!("bad weight {w:?}: {e}")))?;
        }
        if fields.next().is_some() {
            return Err(parse_err("too many columns".into()));
        }
        pairs.push((u, v));
    }
    Ok(EdgeList { pairs })
}

pub fn parse_labels(text: &str, path: &Path) -> Result<Vec<i32>> {
    let mut labels = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let t = line.trim();
        let v = t.parse::<i32>().map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: format!("bad label {t:?}: {e}"),
        })?;
        if v < -1 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("label {v} below -1"),
            });
        }
        labels.push(v);
    }
    Ok(labels)
}

pub fn read_edge_list(path: impl AsRef<Path>) -> Result<EdgeList> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(&text, path)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<i32>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text, path)
}

pub fn write_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let res = (|| {
        writeln!(w, "# n={} m={}", g.n(), g.m())?;
        for (u, v) in g.edges() {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()
    })();
    res.map_err(|e| Error::io(path, e))
}

pub fn write_labels(y: &LabelVector, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::with_capacity(y.len() * 3);
    for &v in y.values() {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
