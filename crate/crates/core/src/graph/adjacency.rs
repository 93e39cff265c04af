use crate::graph::AttributedGraph;
use crate::numerics::CsrMatrix;

/// Symmetric GCN propagation operator `D̃^{-1/2}(A + I)D̃^{-1/2}`.
///
/// Symmetric, so it is its own transpose in backward passes.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency {
    matrix: CsrMatrix,
}

impl NormalizedAdjacency {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn num_nodes(&self) -> usize {
        self.matrix.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }
}

pub fn normalize_adjacency(graph: &AttributedGraph) -> NormalizedAdjacency {
    let n = graph.num_nodes();
    // degree of A + I
    let inv_sqrt: Vec<f64> = graph
        .degrees()
        .into_iter()
        .map(|d| 1.0 / ((d + 1) as f64).sqrt())
        .collect();
    let mut triplets = Vec::with_capacity(n + 2 * graph.num_edges());
    for (i, &s) in inv_sqrt.iter().enumerate() {
        triplets.push((i, i, s * s));
    }
    for &(a, b) in graph.edges() {
        let v = inv_sqrt[a] * inv_sqrt[b];
        triplets.push((a, b, v));
        triplets.push((b, a, v));
    }
    let matrix = CsrMatrix::from_triplets(n, n, triplets).expect("edge endpoints validated at construction");
    NormalizedAdjacency { matrix }
}
