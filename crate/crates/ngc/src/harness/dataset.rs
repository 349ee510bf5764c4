//! Loading node-classification datasets from plain files.
//!
//! Four files describe a dataset (paths come from the `graph.*` config
//! keys):
//!
//! * **edges** — whitespace-separated `u v` pairs, `#` comments allowed;
//! * **features** — CSV, one row per node, `d` numeric columns;
//! * **labels** — one nonnegative integer per line;
//! * **split** — one tag per line: `train`, `val`, `test`, or `none`.
//!
//! The feature file fixes the node count `n`; every other file must agree
//! with it, and errors carry the offending file and line.

use crate::error::{Error, Result};
use crate::graph::{parse_edge_list_lines, Graph};
use crate::matrix::Matrix;
use crate::noise::SplitMasks;

/// A dataset as loaded: graph, clean features, labels, split.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub graph: Graph,
    pub features: Matrix,
    pub labels: Vec<usize>,
    /// `max label + 1`.
    pub classes: usize,
    pub masks: SplitMasks,
    /// True when every feature entry is 0 or 1, enabling flip noise.
    pub binary: bool,
}

/// Load and cross-validate the four dataset files.
pub fn load_dataset(
    edge_path: &str,
    feature_path: &str,
    label_path: &str,
    split_path: &str,
) -> Result<LoadedData> {
    let features = read_features(feature_path)?;
    let n = features.rows();

    let edge_text = std::fs::read_to_string(edge_path).map_err(|e| Error::io(edge_path, e))?;
    let edges_with_lines = parse_edge_list_lines(&edge_text, edge_path)?;
    for &(u, v, line) in &edges_with_lines {
        let bad = u.max(v);
        if bad >= n {
            return Err(Error::ParseError {
                path: edge_path.to_string(),
                line,
                message: format!("edge ({u}, {v}) references node {bad} but the feature file has {n} rows"),
            });
        }
    }
    let edges: Vec<(usize, usize)> = edges_with_lines.into_iter().map(|(u, v, _)| (u, v)).collect();
    let graph = Graph::build(n, &edges)?;

    let labels = read_labels(label_path)?;
    if labels.len() != n {
        return Err(Error::RowCountMismatch {
            left_name: feature_path.to_string(),
            left: n,
            right_name: label_path.to_string(),
            right: labels.len(),
        });
    }
    let classes = labels.iter().copied().max().unwrap_or(0) + 1;

    let masks = read_split(split_path)?;
    if masks.train.len() != n {
        return Err(Error::RowCountMismatch {
            left_name: feature_path.to_string(),
            left: n,
            right_name: split_path.to_string(),
            right: masks.train.len(),
        });
    }

    let binary = features.as_slice().iter().all(|&v| v == 0.0 || v == 1.0);
    Ok(LoadedData { graph, features, labels, classes, masks, binary })
}

fn read_features(path: &str) -> Result<Matrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| Error::ParseError {
                    path: path.to_string(),
                    line: lineno + 1,
                    message: format!("`{}` is not a number", tok.trim()),
                })
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::ParseError {
                    path: path.to_string(),
                    line: lineno + 1,
                    message: format!("expected {w} columns, got {}", row.len()),
                });
            }
            Some(_) => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::ParseError {
            path: path.to_string(),
            line: 1,
            message: "feature file is empty".into(),
        });
    }
    Matrix::from_rows(&rows)
}

fn read_labels(path: &str) -> Result<Vec<usize>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        labels.push(line.parse::<usize>().map_err(|_| Error::ParseError {
            path: path.to_string(),
            line: lineno + 1,
            message: format!("`{line}` is not a nonnegative integer label"),
        })?);
    }
    Ok(labels)
}

fn read_split(path: &str) -> Result<SplitMasks> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (mut train, mut val, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let (t, v, te) = match line {
            "train" => (true, false, false),
            "val" => (false, true, false),
            "test" => (false, false, true),
            "none" => (false, false, false),
            _ => {
                return Err(Error::ParseError {
                    path: path.to_string(),
                    line: lineno + 1,
                    message: format!("unknown split tag `{line}` (train | val | test | none)"),
                });
            }
        };
        train.push(t);
        val.push(v);
        test.push(te);
    }
    Ok(SplitMasks { train, val, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &std::path::Path, name: &str, content: &str) -> String {
        let p = dir.join(name);
        fs::write(&p, content).unwrap();
        p.to_string_lossy().into_owned()
    }

    #[test]
    fn loads_a_small_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let edges = write(dir.path(), "g.edges", "0 1\n1 2\n2 3\n");
        let feats = write(dir.path(), "g.features", "1,0,0\n0,1,0\n0,0,1\n1,1,0\n");
        let labels = write(dir.path(), "g.labels", "0\n1\n1\n0\n");
        let split = write(dir.path(), "g.split", "train\nval\ntest\nnone\n");
        let data = load_dataset(&edges, &feats, &labels, &split).unwrap();
        assert_eq!(data.graph.node_count(), 4);
        assert_eq!(data.features.shape(), (4, 3));
        assert_eq!(data.classes, 2);
        assert!(data.binary);
        assert_eq!(data.masks.train, vec![true, false, false, false]);
        assert_eq!(data.masks.test, vec![false, false, true, false]);
    }

    #[test]
    fn edge_outside_feature_rows_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let edges = write(dir.path(), "g.edges", "0 1\n# comment\n1 5\n");
        let feats = write(dir.path(), "g.features", "1,0\n0,1\n0,0\n");
        let labels = write(dir.path(), "g.labels", "0\n1\n0\n");
        let split = write(dir.path(), "g.split", "train\nval\ntest\n");
        let err = load_dataset(&edges, &feats, &labels, &split).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("g.edges:3"), "{msg}");
        assert!(msg.contains("node 5"), "{msg}");
        assert!(msg.contains("3 rows"), "{msg}");
    }

    #[test]
    fn label_count_mismatch_detected() {
        let dir = tempfile::tempdir().unwrap();
        let edges = write(dir.path(), "g.edges", "0 1\n");
        let feats = write(dir.path(), "g.features", "1,0\n0,1\n");
        let labels = write(dir.path(), "g.labels", "0\n");
        let split = write(dir.path(), "g.split", "train\ntest\n");
        let err = load_dataset(&edges, &feats, &labels, &split).unwrap_err();
        assert!(matches!(err, Error::RowCountMismatch { .. }), "{err}");
    }

    #[test]
    fn non_binary_features_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let edges = write(dir.path(), "g.edges", "0 1\n");
        let feats = write(dir.path(), "g.features", "0.5,0\n0,1\n");
        let labels = write(dir.path(), "g.labels", "0\n1\n");
        let split = write(dir.path(), "g.split", "train\ntest\n");
        let data = load_dataset(&edges, &feats, &labels, &split).unwrap();
        assert!(!data.binary);
    }

    #[test]
    fn unknown_split_tag_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let edges = write(dir.path(), "g.edges", "0 1\n");
        let feats = write(dir.path(), "g.features", "1\n0\n");
        let labels = write(dir.path(), "g.labels", "0\n1\n");
        let split = write(dir.path(), "g.split", "train\nholdout\n");
        let err = load_dataset(&edges, &feats, &labels, &split).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("g.split:2"), "{msg}");
        assert!(msg.contains("holdout"), "{msg}");
    }

    #[test]
    fn bad_feature_number_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let feats = write(dir.path(), "g.features", "1,0\n0,x\n");
        let err = read_features(&feats).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2"), "{msg}");
        assert!(msg.contains('x'), "{msg}");
    }
}
