//! Plain-text graph files.
//!
//! * edges: `i j` per line (zero-based, whitespace separated), `#` lines ignored
//! * features: one node per line, comma-separated reals; node id = line index
//! * labels: one `0`/`1` per line

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{BclError, Result};
use crate::graph::AttributedGraph;
use crate::numerics::DenseMatrix;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| BclError::io(path, e))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> BclError {
    BclError::Parse {
        file: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn parse_edges(path: &Path, text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut node = || -> Result<usize> {
            let tok = it
                .next()
                .ok_or_else(|| parse_err(path, i + 1, "expected two node ids"))?;
            tok.parse()
                .map_err(|_| parse_err(path, i + 1, format!("invalid node id `{tok}`")))
        };
        let (a, b) = (node()?, node()?);
        if it.next().is_some() {
            return Err(parse_err(path, i + 1, "trailing tokens after edge"));
        }
        edges.push((a, b));
    }
    Ok(edges)
}

fn parse_features(path: &Path, text: &str) -> Result<DenseMatrix> {
    let mut values = Vec::new();
    let mut cols: Option<usize> = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let mut n = 0;
        for tok in line.split(',') {
            let tok = tok.trim();
            let v: f64 = tok
                .parse()
                .map_err(|_| parse_err(path, i + 1, format!("invalid real `{tok}`")))?;
            if !v.is_finite() {
                return Err(parse_err(path, i + 1, "non-finite feature"));
            }
            values.push(v);
            n += 1;
        }
        match cols {
            None => cols = Some(n),
            Some(c) if c != n => {
                return Err(parse_err(path, i + 1, format!("expected {c} features, found {n}")));
            }
            _ => {}
        }
        rows += 1;
    }
    DenseMatrix::new(rows, cols.unwrap_or(0), values)
}

fn parse_labels(path: &Path, text: &str) -> Result<Vec<bool>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| match line.trim() {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(parse_err(path, i + 1, format!("label must be 0 or 1, got `{other}`"))),
        })
        .collect()
}

pub fn read_labels(path: &Path) -> Result<Vec<bool>> {
    parse_labels(path, &read(path)?)
}

/// One real score per line.
pub fn read_scores(path: &Path) -> Result<Vec<f64>> {
    read(path)?
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let tok = line.trim();
            tok.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(path, i + 1, format!("invalid score `{tok}`")))
        })
        .collect()
}

pub fn load_graph(edge_path: &Path, feature_path: &Path, label_path: &Path) -> Result<AttributedGraph> {
    let edges = parse_edges(edge_path, &read(edge_path)?)?;
    let features = parse_features(feature_path, &read(feature_path)?)?;
    let labels = read_labels(label_path)?;
    if features.rows() != labels.len() {
        return Err(BclError::dims(
            "feature rows vs label rows",
            features.rows(),
            labels.len(),
        ));
    }
    AttributedGraph::new(edges, features, labels)
}

/// Writes the canonical form: sorted `i<j` edges, shortest round-trip reals.
pub fn save_graph(graph: &AttributedGraph, edge_path: &Path, feature_path: &Path, label_path: &Path) -> Result<()> {
    let mut edges = String::new();
    for &(a, b) in graph.edges() {
        let _ = writeln!(edges, "{a} {b}");
    }
    let mut feats = String::new();
    for r in 0..graph.num_nodes() {
        let row: Vec<String> = graph.features().row(r).iter().map(|v| format!("{v:?}")).collect();
        let _ = writeln!(feats, "{}", row.join(","));
    }
    let mut labels = String::new();
    for &y in graph.labels() {
        let _ = writeln!(labels, "{}", u8::from(y));
    }
    for (path, body) in [(edge_path, edges), (feature_path, feats), (label_path, labels)] {
        fs::write(path, body).map_err(|e| BclError::io(path, e))?;
    }
    Ok(())
}
