use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BclError, Result};
use crate::graph::AttributedGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.4,
            val: 0.2,
            test: 0.4,
        }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
            return Err(BclError::InvalidArgument(format!("split ratios must be positive: {parts:?}")));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(BclError::InvalidArgument(format!("split ratios must sum to 1: {parts:?}")));
        }
        Ok(())
    }
}

/// Disjoint train/val/test node index sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Largest-remainder apportionment of `total` by `weights`; ties go to the
/// lower index.
fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Label-stratified random split. Split sizes are apportioned from the ratios,
/// then anomalies are apportioned in proportion to split sizes, so each split's
/// anomaly ratio is within `1/|split|` of the global ratio.
pub fn make_split(graph: &AttributedGraph, ratios: SplitRatios, seed: u64) -> Result<NodeSplit> {
    ratios.validate()?;
    let n = graph.num_nodes();
    let mut anomalies: Vec<usize> = (0..n).filter(|&i| graph.labels()[i]).collect();
    let mut normals: Vec<usize> = (0..n).filter(|&i| !graph.labels()[i]).collect();

    let sizes = apportion(n, &[ratios.train, ratios.val, ratios.test]);
    let weights: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let anomaly_counts = if n == 0 { vec![0; 3] } else { apportion(anomalies.len(), &weights) };

    if anomaly_counts[0] == 0 || sizes[0] - anomaly_counts[0] == 0 {
        return Err(BclError::DegenerateLabels(format!(
            "train split needs at least one anomaly and one normal node \
             ({} anomalies, {} normals available)",
            anomalies.len(),
            normals.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    anomalies.shuffle(&mut rng);
    normals.shuffle(&mut rng);

    let mut parts: [Vec<usize>; 3] = Default::default();
    let (mut a_off, mut n_off) = (0, 0);
    for s in 0..3 {
        let a = anomaly_counts[s];
        let m = sizes[s] - a;
        parts[s].extend_from_slice(&anomalies[a_off..a_off + a]);
        parts[s].extend_from_slice(&normals[n_off..n_off + m]);
        parts[s].sort_unstable();
        a_off += a;
        n_off += m;
    }
    let [train, val, test] = parts;
    Ok(NodeSplit { train, val, test })
}
