//! Attributed graphs, normalized adjacency, splits and file I/O.

mod adjacency;
mod io;
mod split;

pub use adjacency::{normalize_adjacency, NormalizedAdjacency};
pub use io::{load_graph, read_labels, read_scores, save_graph};
pub use split::{make_split, NodeSplit, SplitRatios};

use std::collections::HashSet;

use crate::error::{BclError, Result};
use crate::numerics::{CsrMatrix, DenseMatrix};

/// Undirected simple graph with node features and binary anomaly labels.
///
/// Edges are stored once as `(i, j)` with `i < j`, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    features: DenseMatrix,
    labels: Vec<bool>,
}

impl AttributedGraph {
    /// Validates and canonicalizes. Self-loops, duplicates (in either
    /// orientation) and out-of-range endpoints are rejected.
    pub fn new(edges: Vec<(usize, usize)>, features: DenseMatrix, labels: Vec<bool>) -> Result<Self> {
        let num_nodes = features.rows();
        if labels.len() != num_nodes {
            return Err(BclError::dims("labels vs feature rows", num_nodes, labels.len()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut canon = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            for node in [a, b] {
                if node >= num_nodes {
                    return Err(BclError::DanglingEndpoint { node, num_nodes });
                }
            }
            if a == b {
                return Err(BclError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(BclError::DuplicateEdge(e.0, e.1));
            }
            canon.push(e);
        }
        canon.sort_unstable();
        Ok(Self {
            num_nodes,
            edges: canon,
            features,
            labels,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &DenseMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn num_anomalies(&self) -> usize {
        self.labels.iter().filter(|&&y| y).count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    /// Row-normalized adjacency `D⁻¹A` without self-loops. Isolated nodes get
    /// an all-zero row.
    pub fn mean_aggregator(&self) -> CsrMatrix {
        let deg = self.degrees();
        let mut triplets = Vec::with_capacity(2 * self.edges.len());
        for &(a, b) in &self.edges {
            triplets.push((a, b, 1.0 / deg[a] as f64));
            triplets.push((b, a, 1.0 / deg[b] as f64));
        }
        CsrMatrix::from_triplets(self.num_nodes, self.num_nodes, triplets)
            .expect("edge endpoints validated at construction")
    }

    /// Relabels nodes: old node `i` becomes `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_nodes;
        let mut hit = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut hit[p], true)) {
            return Err(BclError::InvalidArgument("not a permutation".into()));
        }
        let mut features = DenseMatrix::zeros(n, self.feature_dim());
        let mut labels = vec![false; n];
        for i in 0..n {
            features.row_mut(perm[i]).copy_from_slice(self.features.row(i));
            labels[perm[i]] = self.labels[i];
        }
        let edges = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Self::new(edges, features, labels)
    }
}
