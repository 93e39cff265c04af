//! Graph-autoencoder difficulty measurer.
//!
//! The encoder is a two-layer GCN, `Z = Â·relu(Â·X·W₁)·W₂`, and a single linear
//! decoder maps embeddings back to feature space, `X̂ = Z·W₃`. Training
//! minimizes feature-reconstruction MSE over all nodes. A node's difficulty
//! score is the distance of its embedding row from the column-wise mean
//! embedding.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{BclError, Result};
use crate::graph::{AttributedGraph, NormalizedAdjacency};
use crate::numerics::{mse_loss, relu, relu_backward, spmm, AdamConfig, AdamState, DenseMatrix, ParamStore};

const ENC1: &str = "enc1";
const ENC2: &str = "enc2";
const DEC: &str = "dec";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BdsNorm {
    L1,
    L2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaeConfig {
    pub hidden: usize,
    pub embed: usize,
    pub epochs: usize,
    /// Stop once the per-epoch loss decrease stays below `min_delta` this many
    /// epochs in a row. `None` always runs `epochs`.
    pub patience: Option<usize>,
    pub min_delta: f64,
    pub adam: AdamConfig,
}

impl Default for GaeConfig {
    fn default() -> Self {
        Self {
            hidden: 64,
            embed: 32,
            epochs: 300,
            patience: Some(20),
            min_delta: 1e-6,
            adam: AdamConfig::default(),
        }
    }
}

impl GaeConfig {
    /// Clips hidden/embedding widths to the feature dimension.
    pub fn clipped_to(&self, feature_dim: usize) -> Self {
        Self {
            hidden: self.hidden.min(feature_dim).max(1),
            embed: self.embed.min(feature_dim).max(1),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaeModel {
    params: ParamStore,
    feature_dim: usize,
    hidden: usize,
    embed: usize,
}

struct GaeCache {
    p1: DenseMatrix,
    a1: DenseMatrix,
    p2: DenseMatrix,
    z: DenseMatrix,
}

impl GaeModel {
    pub fn init(feature_dim: usize, hidden: usize, embed: usize, seed: u64) -> Result<Self> {
        if feature_dim == 0 || hidden == 0 || embed == 0 {
            return Err(BclError::InvalidArgument(format!(
                "autoencoder widths must be >= 1 (f={feature_dim}, hidden={hidden}, embed={embed})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        params.insert_glorot(ENC1, feature_dim, hidden, &mut rng)?;
        params.insert_glorot(ENC2, hidden, embed, &mut rng)?;
        params.insert_glorot(DEC, embed, feature_dim, &mut rng)?;
        Ok(Self {
            params,
            feature_dim,
            hidden,
            embed,
        })
    }

    /// Builds a model from explicit weight matrices (`f×h`, `h×d`, `d×f`).
    pub fn from_weights(enc1: DenseMatrix, enc2: DenseMatrix, dec: DenseMatrix) -> Result<Self> {
        let (f, h) = enc1.shape();
        let d = enc2.cols();
        if enc2.rows() != h || dec.shape() != (d, f) {
            return Err(BclError::dims(
                "autoencoder weights",
                format!("({f},{h}), ({h},{d}), ({d},{f})"),
                format!("{:?}, {:?}, {:?}", enc1.shape(), enc2.shape(), dec.shape()),
            ));
        }
        let mut params = ParamStore::new();
        params.insert(ENC1, enc1)?;
        params.insert(ENC2, enc2)?;
        params.insert(DEC, dec)?;
        Ok(Self {
            params,
            feature_dim: f,
            hidden: h,
            embed: d,
        })
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn embed_dim(&self) -> usize {
        self.embed
    }

    fn encode(params: &ParamStore, adj: &NormalizedAdjacency, x: &DenseMatrix) -> Result<GaeCache> {
        if adj.num_nodes() != x.rows() {
            return Err(BclError::dims("adjacency vs feature rows", adj.num_nodes(), x.rows()));
        }
        let w1 = params.value(ENC1)?;
        if w1.rows() != x.cols() {
            return Err(BclError::dims("autoencoder feature dim", w1.rows(), x.cols()));
        }
        let p1 = spmm(adj, x)?;
        let a1 = p1.matmul(w1)?;
        let p2 = spmm(adj, &relu(&a1))?;
        let z = p2.matmul(params.value(ENC2)?)?;
        Ok(GaeCache { p1, a1, p2, z })
    }

    /// Reconstruction MSE at the current weights; accumulates gradients into
    /// `params`.
    pub fn loss_with(params: &mut ParamStore, adj: &NormalizedAdjacency, x: &DenseMatrix) -> Result<f64> {
        let cache = Self::encode(params, adj, x)?;
        let x_hat = cache.z.matmul(params.value(DEC)?)?;
        let (loss, d_xhat) = mse_loss(&x_hat, x)?;

        let d_dec = cache.z.t_matmul(&d_xhat)?;
        let d_z = d_xhat.matmul_t(params.value(DEC)?)?;
        let d_enc2 = cache.p2.t_matmul(&d_z)?;
        let d_p2 = d_z.matmul_t(params.value(ENC2)?)?;
        // Â is symmetric
        let d_h1 = spmm(adj, &d_p2)?;
        let d_a1 = relu_backward(&cache.a1, &d_h1)?;
        let d_enc1 = cache.p1.t_matmul(&d_a1)?;

        params.accumulate(DEC, &d_dec)?;
        params.accumulate(ENC2, &d_enc2)?;
        params.accumulate(ENC1, &d_enc1)?;
        Ok(loss)
    }

    /// Encoder output `Z`; row `i` is node `i`'s embedding.
    pub fn embed(&self, graph: &AttributedGraph, adj: &NormalizedAdjacency) -> Result<DenseMatrix> {
        Ok(Self::encode(&self.params, adj, graph.features())?.z)
    }
}

#[derive(Debug, Clone)]
pub struct GaeFit {
    pub model: GaeModel,
    /// Loss at the start of each epoch, before that epoch's update.
    pub losses: Vec<f64>,
}

/// Pretrains the autoencoder on all nodes with full-batch Adam.
pub fn gae_train(graph: &AttributedGraph, adj: &NormalizedAdjacency, config: &GaeConfig, seed: u64) -> Result<GaeFit> {
    if config.epochs == 0 {
        return Err(BclError::InvalidArgument("autoencoder epochs must be >= 1".into()));
    }
    let mut model = GaeModel::init(graph.feature_dim(), config.hidden, config.embed, seed)?;
    let mut adam = AdamState::new(config.adam);
    let x = graph.features();
    let mut losses = Vec::with_capacity(config.epochs);
    let mut stalled = 0usize;

    for epoch in 1..=config.epochs {
        let loss = GaeModel::loss_with(&mut model.params, adj, x)?;
        if !loss.is_finite() {
            return Err(BclError::Divergence { epoch, loss });
        }
        if let Some(&prev) = losses.last() {
            if prev - loss < config.min_delta {
                stalled += 1;
            } else {
                stalled = 0;
            }
        }
        losses.push(loss);
        adam.step(&mut model.params)?;
        if config.patience.is_some_and(|p| stalled >= p) {
            break;
        }
    }
    Ok(GaeFit { model, losses })
}

/// Distance of each embedding row from the column-wise mean row.
pub fn compute_bds(embeddings: &DenseMatrix, norm: BdsNorm) -> Result<Vec<f64>> {
    let n = embeddings.rows();
    if n == 0 {
        return Err(BclError::InvalidArgument("difficulty scores need at least one node".into()));
    }
    let mean = embeddings.column_sums().scale(1.0 / n as f64);
    let mean = mean.values();
    Ok((0..n)
        .map(|i| {
            let deltas = embeddings.row(i).iter().zip(mean).map(|(h, m)| h - m);
            match norm {
                BdsNorm::L1 => deltas.map(f64::abs).sum(),
                BdsNorm::L2 => deltas.map(|d| d * d).sum::<f64>().sqrt(),
            }
        })
        .collect())
}

/// Difficulty scores with the two curriculum orderings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyRanking {
    pub bds: Vec<f64>,
    /// Ascending by score, ties by ascending node index.
    pub q_homo: Vec<usize>,
    /// Exact reverse of `q_homo`.
    pub q_hete: Vec<usize>,
}

pub fn rank_nodes(bds: &[f64]) -> Result<DifficultyRanking> {
    if let Some(i) = bds.iter().position(|v| !v.is_finite()) {
        return Err(BclError::NonFinite(format!("difficulty score of node {i}")));
    }
    let mut q_homo: Vec<usize> = (0..bds.len()).collect();
    // stable: equal scores keep ascending index order
    q_homo.sort_by(|&a, &b| bds[a].total_cmp(&bds[b]));
    let q_hete = q_homo.iter().rev().copied().collect();
    Ok(DifficultyRanking {
        bds: bds.to_vec(),
        q_homo,
        q_hete,
    })
}

impl DifficultyRanking {
    /// CSV with columns `node_id,bds,rank_homo` (rank is the zero-based
    /// position in the ascending ordering).
    pub fn to_csv(&self) -> String {
        let mut rank = vec![0usize; self.bds.len()];
        for (pos, &node) in self.q_homo.iter().enumerate() {
            rank[node] = pos;
        }
        let mut out = String::from("node_id,bds,rank_homo\n");
        for (i, b) in self.bds.iter().enumerate() {
            let _ = writeln!(out, "{i},{b:?},{}", rank[i]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::normalize_adjacency;
    use crate::numerics::grad_check;
    use rand::Rng;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn random_graph(n: usize, f: usize, seed: u64) -> AttributedGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.3) {
                    edges.push((a, b));
                }
            }
        }
        let feats = (0..n * f).map(|_| rng.random_range(-1.0..1.0)).collect();
        let labels = (0..n).map(|i| i % 4 == 0).collect();
        AttributedGraph::new(edges, DenseMatrix::new(n, f, feats).unwrap(), labels).unwrap()
    }

    #[test]
    fn bds_hand_example() {
        let h = m(&[&[0.0, 0.0], &[2.0, 2.0], &[1.0, 1.0]]);
        assert_eq!(compute_bds(&h, BdsNorm::L1).unwrap(), vec![2.0, 2.0, 0.0]);
        let l2 = compute_bds(&h, BdsNorm::L2).unwrap();
        assert!((l2[0] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bds_identical_rows_and_single_node() {
        let h = m(&[&[1.5, -2.0], &[1.5, -2.0], &[1.5, -2.0]]);
        assert!(compute_bds(&h, BdsNorm::L1).unwrap().iter().all(|&b| b == 0.0));
        assert_eq!(compute_bds(&m(&[&[3.0, 4.0]]), BdsNorm::L1).unwrap(), vec![0.0]);
        assert!(compute_bds(&DenseMatrix::zeros(0, 2), BdsNorm::L1).is_err());
    }

    #[test]
    fn ranking_examples() {
        let r = rank_nodes(&[2.0, 2.0, 0.0]).unwrap();
        assert_eq!(r.q_homo, vec![2, 0, 1]);
        assert_eq!(r.q_hete, vec![1, 0, 2]);
        assert_eq!(rank_nodes(&[0.1, 0.2, 0.3]).unwrap().q_homo, vec![0, 1, 2]);
        assert_eq!(rank_nodes(&[1.0; 5]).unwrap().q_homo, vec![0, 1, 2, 3, 4]);
        assert!(rank_nodes(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn zero_encoder_gives_zero_embeddings() {
        let g = random_graph(6, 3, 1);
        let adj = normalize_adjacency(&g);
        let model = GaeModel::from_weights(
            DenseMatrix::zeros(3, 2),
            DenseMatrix::zeros(2, 2),
            DenseMatrix::zeros(2, 3),
        )
        .unwrap();
        assert_eq!(model.embed(&g, &adj).unwrap(), DenseMatrix::zeros(6, 2));
    }

    #[test]
    fn isolated_node_embedding_by_hand() {
        let (x, w1, w2) = (1.7, 0.8, 2.5);
        let g = AttributedGraph::new(vec![], m(&[&[x]]), vec![false]).unwrap();
        let adj = normalize_adjacency(&g);
        let model = GaeModel::from_weights(m(&[&[w1]]), m(&[&[w2]]), m(&[&[1.0]])).unwrap();
        let z = model.embed(&g, &adj).unwrap();
        assert!((z.get(0, 0) - (x * w1).max(0.0) * w2).abs() < 1e-15);
    }

    #[test]
    fn embeddings_are_permutation_equivariant() {
        let g = random_graph(8, 3, 5);
        let perm = vec![3, 0, 7, 1, 6, 2, 5, 4];
        let pg = g.permute(&perm).unwrap();
        let model = GaeModel::init(3, 4, 2, 11).unwrap();
        let z = model.embed(&g, &normalize_adjacency(&g)).unwrap();
        let pz = model.embed(&pg, &normalize_adjacency(&pg)).unwrap();
        for i in 0..8 {
            for (a, b) in z.row(i).iter().zip(pz.row(perm[i])) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn embed_rejects_wrong_feature_dim() {
        let g = random_graph(5, 3, 2);
        let model = GaeModel::init(4, 2, 2, 0).unwrap();
        assert!(model.embed(&g, &normalize_adjacency(&g)).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..5 {
            let g = random_graph(10, 4, seed);
            let adj = normalize_adjacency(&g);
            let mut model = GaeModel::init(4, 3, 2, seed + 100).unwrap();
            let err = grad_check(model.params_mut(), 1e-6, seed, |p| {
                GaeModel::loss_with(p, &adj, g.features())
            })
            .unwrap();
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn zero_epochs_rejected() {
        let g = random_graph(5, 2, 0);
        let cfg = GaeConfig { epochs: 0, ..GaeConfig::default() };
        assert!(gae_train(&g, &normalize_adjacency(&g), &cfg, 0).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let g = random_graph(12, 4, 3);
        let adj = normalize_adjacency(&g);
        let cfg = GaeConfig { hidden: 4, embed: 2, epochs: 30, ..GaeConfig::default() };
        let a = gae_train(&g, &adj, &cfg, 9).unwrap();
        let b = gae_train(&g, &adj, &cfg, 9).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.losses, b.losses);
    }

    #[test]
    fn csv_dump_columns() {
        let r = rank_nodes(&[2.0, 2.0, 0.0]).unwrap();
        assert_eq!(r.to_csv(), "node_id,bds,rank_homo\n0,2.0,1\n1,2.0,2\n2,0.0,0\n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn mat() -> impl Strategy<Value = DenseMatrix> {
            (1usize..20, 1usize..5).prop_flat_map(|(r, c)| {
                prop::collection::vec(-10.0f64..10.0, r * c)
                    .prop_map(move |v| DenseMatrix::new(r, c, v).unwrap())
            })
        }

        proptest! {
            #[test]
            fn bds_translation_invariant(h in mat(), shift in -50.0f64..50.0) {
                let shifted = h.map(|v| v + shift);
                let a = compute_bds(&h, BdsNorm::L1).unwrap();
                let b = compute_bds(&shifted, BdsNorm::L1).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((x - y).abs() <= 1e-9);
                }
            }

            #[test]
            fn bds_scale_equivariant(h in mat(), s in 0.01f64..10.0) {
                let a = compute_bds(&h, BdsNorm::L1).unwrap();
                let b = compute_bds(&h.scale(s), BdsNorm::L1).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((s * x - y).abs() <= 1e-9);
                    prop_assert!(*y >= 0.0);
                }
            }

            #[test]
            fn ranking_reversal_and_order(bds in prop::collection::vec(0.0f64..5.0, 0..50)) {
                let r = rank_nodes(&bds).unwrap();
                let mut rev = r.q_homo.clone();
                rev.reverse();
                prop_assert_eq!(&r.q_hete, &rev);
                for w in r.q_homo.windows(2) {
                    prop_assert!(bds[w[0]] < bds[w[1]] || (bds[w[0]] == bds[w[1]] && w[0] < w[1]));
                }
            }
        }
    }
}
