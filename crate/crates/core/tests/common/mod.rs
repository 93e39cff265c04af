#![allow(dead_code)]

use bcl_core::experiment::{generate_synthetic, SyntheticSpec};
use bcl_core::graph::AttributedGraph;
use bcl_core::numerics::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Erdos-Renyi graph with uniform features and every third node anomalous.
pub fn random_graph(n: usize, f: usize, p: f64, seed: u64) -> AttributedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    let feats = (0..n * f).map(|_| rng.random_range(-1.0..1.0)).collect();
    let labels = (0..n).map(|i| i % 3 == 0).collect();
    AttributedGraph::new(edges, DenseMatrix::new(n, f, feats).unwrap(), labels).unwrap()
}

pub fn two_block(num_nodes: usize, feature_dim: usize, seed: u64) -> AttributedGraph {
    let spec = SyntheticSpec {
        num_nodes,
        num_blocks: 2,
        p_intra: 0.2,
        p_inter: 0.02,
        feature_dim,
        anomaly_rate: 0.1,
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec, seed).unwrap()
}
