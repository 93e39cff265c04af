//! Stochastic-block-model graphs with injected anomalies.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{BclError, Result};
use crate::graph::AttributedGraph;
use crate::numerics::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomalyKind {
    /// Features resampled around a far-off center.
    Contextual,
    /// Rewired into small dense cliques.
    Structural,
    /// Half contextual, half structural.
    Mixed,
}

impl fmt::Display for AnomalyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnomalyKind::Contextual => "contextual",
            AnomalyKind::Structural => "structural",
            AnomalyKind::Mixed => "mixed",
        })
    }
}

impl FromStr for AnomalyKind {
    type Err = BclError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contextual" => Ok(AnomalyKind::Contextual),
            "structural" => Ok(AnomalyKind::Structural),
            "mixed" => Ok(AnomalyKind::Mixed),
            other => Err(BclError::InvalidArgument(format!("unknown anomaly kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub num_nodes: usize,
    pub num_blocks: usize,
    pub p_intra: f64,
    pub p_inter: f64,
    pub feature_dim: usize,
    pub anomaly_rate: f64,
    pub anomaly_kind: AnomalyKind,
    /// Standard deviation of per-node feature noise.
    pub noise_scale: f64,
    /// Standard deviation of block centers around the origin.
    pub center_scale: f64,
    /// Distance of each block's anomaly center from the block center, in
    /// units of `noise_scale`. Must be at least 5.
    pub anomaly_shift: f64,
    pub clique_size: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            num_nodes: 500,
            num_blocks: 4,
            p_intra: 0.05,
            p_inter: 0.004,
            feature_dim: 16,
            anomaly_rate: 0.05,
            anomaly_kind: AnomalyKind::Contextual,
            noise_scale: 1.0,
            center_scale: 1.0,
            anomaly_shift: 5.0,
            clique_size: 8,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(BclError::InvalidArgument(m));
        if self.num_nodes < 2 {
            return fail(format!("num_nodes must be >= 2, got {}", self.num_nodes));
        }
        if self.num_blocks == 0 || self.num_blocks > self.num_nodes {
            return fail(format!("num_blocks must be in [1, num_nodes], got {}", self.num_blocks));
        }
        for (name, p) in [("p_intra", self.p_intra), ("p_inter", self.p_inter)] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.feature_dim == 0 {
            return fail("feature_dim must be >= 1".into());
        }
        if !(self.anomaly_rate > 0.0 && self.anomaly_rate < 0.5) {
            return fail(format!("anomaly_rate must be in (0, 0.5), got {}", self.anomaly_rate));
        }
        if !(self.noise_scale > 0.0) || !self.noise_scale.is_finite() {
            return fail(format!("noise_scale must be positive, got {}", self.noise_scale));
        }
        if !(self.center_scale >= 0.0) || !self.center_scale.is_finite() {
            return fail(format!("center_scale must be non-negative, got {}", self.center_scale));
        }
        if !(self.anomaly_shift >= 5.0) || !self.anomaly_shift.is_finite() {
            return fail(format!("anomaly_shift must be >= 5, got {}", self.anomaly_shift));
        }
        if self.clique_size < 2 {
            return fail(format!("clique_size must be >= 2, got {}", self.clique_size));
        }
        Ok(())
    }

    pub fn num_anomalies(&self) -> usize {
        ((self.anomaly_rate * self.num_nodes as f64) - 1e-9).ceil() as usize
    }

    /// Block of node `i`: nodes are laid out in contiguous, near-equal blocks.
    pub fn block_of(&self, i: usize) -> usize {
        i * self.num_blocks / self.num_nodes
    }
}

/// Calls `emit(k)` for each `k` in `0..count` independently with probability
/// `p`, in ascending order, using geometric gaps.
fn bernoulli_indices<R: Rng>(count: u64, p: f64, rng: &mut R, mut emit: impl FnMut(u64)) {
    if p <= 0.0 || count == 0 {
        return;
    }
    if p >= 1.0 {
        (0..count).for_each(emit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut k: i128 = -1;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        let gap = (u.ln() / log_q).floor();
        if !gap.is_finite() || gap >= (count as i128 - k) as f64 {
            return;
        }
        k += 1 + gap as i128;
        if k >= count as i128 {
            return;
        }
        emit(k as u64);
    }
}

/// Decodes linear index `k` over pairs `(w, v)` with `w < v`, enumerated
/// `(0,1), (0,2), (1,2), (0,3), …`.
fn triangular_pair(k: u64) -> (u64, u64) {
    let mut v = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0).floor() as u64;
    while v * (v - 1) / 2 > k {
        v -= 1;
    }
    while (v + 1) * v / 2 <= k {
        v += 1;
    }
    (k - v * (v - 1) / 2, v)
}

fn sbm_edges<R: Rng>(spec: &SyntheticSpec, rng: &mut R) -> Vec<(usize, usize)> {
    let n = spec.num_nodes;
    let mut starts: Vec<usize> = (0..spec.num_blocks)
        .map(|b| (0..n).find(|&i| spec.block_of(i) == b).unwrap_or(n))
        .collect();
    starts.push(n);
    let mut edges = Vec::new();
    for a in 0..spec.num_blocks {
        let (a0, a1) = (starts[a], starts[a + 1]);
        let sa = (a1 - a0) as u64;
        bernoulli_indices(sa * sa.saturating_sub(1) / 2, spec.p_intra, rng, |k| {
            let (w, v) = triangular_pair(k);
            edges.push((a0 + w as usize, a0 + v as usize));
        });
        for b in a + 1..spec.num_blocks {
            let (b0, b1) = (starts[b], starts[b + 1]);
            let sb = (b1 - b0) as u64;
            bernoulli_indices(sa * sb, spec.p_inter, rng, |k| {
                edges.push((a0 + (k / sb) as usize, b0 + (k % sb) as usize));
            });
        }
    }
    edges
}

fn gaussian_vec<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng))
        .collect()
}

/// Deterministic per seed.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<AttributedGraph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (n, f) = (spec.num_nodes, spec.feature_dim);

    let mut edges = sbm_edges(spec, &mut rng);

    let centers: Vec<Vec<f64>> = (0..spec.num_blocks)
        .map(|_| gaussian_vec(&mut rng, f, spec.center_scale))
        .collect();
    let mut features = DenseMatrix::zeros(n, f);
    for i in 0..n {
        let noise = gaussian_vec(&mut rng, f, spec.noise_scale);
        let c = &centers[spec.block_of(i)];
        for (k, x) in features.row_mut(i).iter_mut().enumerate() {
            *x = c[k] + noise[k];
        }
    }

    let mut anomalies = sample(&mut rng, n, spec.num_anomalies()).into_vec();
    anomalies.sort_unstable();
    let mut labels = vec![false; n];
    for &a in &anomalies {
        labels[a] = true;
    }

    let (contextual, structural): (Vec<usize>, Vec<usize>) = match spec.anomaly_kind {
        AnomalyKind::Contextual => (anomalies, Vec::new()),
        AnomalyKind::Structural => (Vec::new(), anomalies),
        AnomalyKind::Mixed => {
            let half = anomalies.len().div_ceil(2);
            let (c, s) = anomalies.split_at(half);
            (c.to_vec(), s.to_vec())
        }
    };

    // one far-off Gaussian per block: its center is shifted along a random unit direction
    let shift = spec.anomaly_shift * spec.noise_scale;
    let far_centers: Vec<Vec<f64>> = centers
        .iter()
        .map(|c| {
            let mut dir = gaussian_vec(&mut rng, f, 1.0);
            let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
            c.iter().zip(&mut dir).map(|(ck, d)| ck + shift * *d / norm).collect()
        })
        .collect();
    for &a in &contextual {
        let noise = gaussian_vec(&mut rng, f, spec.noise_scale);
        let c = &far_centers[spec.block_of(a)];
        for (k, x) in features.row_mut(a).iter_mut().enumerate() {
            *x = c[k] + noise[k];
        }
    }

    if !structural.is_empty() {
        let mut present: HashSet<(usize, usize)> = edges.iter().copied().collect();
        for clique in structural.chunks(spec.clique_size) {
            for (i, &a) in clique.iter().enumerate() {
                for &b in &clique[i + 1..] {
                    let e = (a.min(b), a.max(b));
                    if present.insert(e) {
                        edges.push(e);
                    }
                }
            }
        }
    }

    AttributedGraph::new(edges, features, labels)
}
