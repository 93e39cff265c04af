//! Host anomaly detectors: two-layer MLP, GCN and mean-aggregator SAGE.
//!
//! Every detector emits `N × 2` logits (normal, anomaly). Weights are
//! Glorot-uniform, biases start at zero.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curriculum::{train_with_curriculum, CurriculumConfig, PacingKind, TrainOutcome, TrainingBudget};
use crate::error::{BclError, Result};
use crate::graph::{AttributedGraph, NodeSplit, NormalizedAdjacency};
use crate::numerics::ops::{balanced_class_weights, softmax2};
use crate::numerics::{relu, relu_backward, softmax_ce_loss, spmm, CsrMatrix, DenseMatrix, ParamStore};

const W1: &str = "w1";
const B1: &str = "b1";
const W2: &str = "w2";
const B2: &str = "b2";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectorKind {
    Mlp,
    Gcn,
    Sage,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [DetectorKind::Mlp, DetectorKind::Gcn, DetectorKind::Sage];
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorKind::Mlp => "mlp",
            DetectorKind::Gcn => "gcn",
            DetectorKind::Sage => "sage",
        })
    }
}

impl FromStr for DetectorKind {
    type Err = BclError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mlp" => Ok(DetectorKind::Mlp),
            "gcn" => Ok(DetectorKind::Gcn),
            "sage" => Ok(DetectorKind::Sage),
            other => Err(BclError::InvalidArgument(format!("unknown detector `{other}`"))),
        }
    }
}

/// Everything a detector forward pass reads from the graph.
#[derive(Debug, Clone)]
pub struct DetectorInput {
    pub features: DenseMatrix,
    pub adj: NormalizedAdjacency,
    /// `D⁻¹A`, used by SAGE.
    pub mean_agg: CsrMatrix,
}

impl DetectorInput {
    pub fn new(graph: &AttributedGraph, adj: &NormalizedAdjacency) -> Result<Self> {
        if adj.num_nodes() != graph.num_nodes() {
            return Err(BclError::dims("adjacency size", graph.num_nodes(), adj.num_nodes()));
        }
        Ok(Self {
            features: graph.features().clone(),
            adj: adj.clone(),
            mean_agg: graph.mean_aggregator(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorModel {
    kind: DetectorKind,
    params: ParamStore,
    feature_dim: usize,
    hidden: usize,
}

struct Cache {
    /// Layer-1 input (X, ÂX or [X ‖ MX]).
    in1: DenseMatrix,
    pre1: DenseMatrix,
    /// Layer-2 input (H or [H ‖ MH]).
    in2: DenseMatrix,
}

impl DetectorModel {
    pub fn init(kind: DetectorKind, feature_dim: usize, hidden: usize, seed: u64) -> Result<Self> {
        if feature_dim == 0 || hidden == 0 {
            return Err(BclError::InvalidArgument(format!(
                "detector widths must be >= 1 (f={feature_dim}, hidden={hidden})"
            )));
        }
        let fan = if kind == DetectorKind::Sage { 2 } else { 1 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        params.insert_glorot(W1, fan * feature_dim, hidden, &mut rng)?;
        params.insert_glorot(W2, fan * hidden, 2, &mut rng)?;
        params.insert(B1, DenseMatrix::zeros(1, hidden))?;
        params.insert(B2, DenseMatrix::zeros(1, 2))?;
        Ok(Self {
            kind,
            params,
            feature_dim,
            hidden,
        })
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.params
    }

    fn run(kind: DetectorKind, params: &ParamStore, input: &DetectorInput) -> Result<(DenseMatrix, Cache)> {
        let x = &input.features;
        if input.adj.num_nodes() != x.rows() {
            return Err(BclError::dims("adjacency vs feature rows", x.rows(), input.adj.num_nodes()));
        }
        let in1 = match kind {
            DetectorKind::Mlp => x.clone(),
            DetectorKind::Gcn => spmm(&input.adj, x)?,
            DetectorKind::Sage => x.hconcat(&input.mean_agg.spmm(x)?)?,
        };
        let w1 = params.value(W1)?;
        if w1.rows() != in1.cols() {
            return Err(BclError::dims(format!("{kind} layer-1 input width"), w1.rows(), in1.cols()));
        }
        let pre1 = in1.matmul(w1)?.add_row_broadcast(params.value(B1)?)?;
        let h = relu(&pre1);
        let (in2, logits) = match kind {
            DetectorKind::Mlp => {
                let out = h.matmul(params.value(W2)?)?;
                (h, out)
            }
            DetectorKind::Gcn => {
                let out = spmm(&input.adj, &h.matmul(params.value(W2)?)?)?;
                (h, out)
            }
            DetectorKind::Sage => {
                let cat = h.hconcat(&input.mean_agg.spmm(&h)?)?;
                let out = cat.matmul(params.value(W2)?)?;
                (cat, out)
            }
        };
        let logits = logits.add_row_broadcast(params.value(B2)?)?;
        Ok((logits, Cache { in1, pre1, in2 }))
    }

    pub fn forward(&self, input: &DetectorInput) -> Result<DenseMatrix> {
        Ok(Self::run(self.kind, &self.params, input)?.0)
    }

    /// Masked class-balanced cross-entropy over `subset`; accumulates
    /// gradients into `params`.
    pub fn loss_with(
        kind: DetectorKind,
        params: &mut ParamStore,
        input: &DetectorInput,
        labels: &[bool],
        subset: &[usize],
    ) -> Result<f64> {
        let (logits, cache) = Self::run(kind, params, input)?;
        let weights = balanced_class_weights(labels, subset);
        let (loss, d_logits) = softmax_ce_loss(&logits, labels, subset, weights)?;

        let d_b2 = d_logits.column_sums();
        let d_in2 = match kind {
            DetectorKind::Mlp | DetectorKind::Sage => {
                params.accumulate(W2, &cache.in2.t_matmul(&d_logits)?)?;
                d_logits.matmul_t(params.value(W2)?)?
            }
            DetectorKind::Gcn => {
                // Â is symmetric
                let d_q = spmm(&input.adj, &d_logits)?;
                params.accumulate(W2, &cache.in2.t_matmul(&d_q)?)?;
                d_q.matmul_t(params.value(W2)?)?
            }
        };
        let d_h = match kind {
            DetectorKind::Sage => {
                let (d_self, d_nbr) = d_in2.hsplit(d_in2.cols() / 2)?;
                d_self.add(&input.mean_agg.spmm_transpose(&d_nbr)?)?
            }
            _ => d_in2,
        };
        let d_pre1 = relu_backward(&cache.pre1, &d_h)?;
        params.accumulate(W1, &cache.in1.t_matmul(&d_pre1)?)?;
        params.accumulate(B1, &d_pre1.column_sums())?;
        params.accumulate(B2, &d_b2)?;
        Ok(loss)
    }

    pub fn loss_and_grad(&mut self, input: &DetectorInput, labels: &[bool], subset: &[usize]) -> Result<f64> {
        Self::loss_with(self.kind, &mut self.params, input, labels, subset)
    }

    /// Header line `kind hidden feature_dim`, then the parameter dump.
    pub fn to_text(&self) -> String {
        format!("{} {} {}\n{}", self.kind, self.hidden, self.feature_dim, self.params.to_text())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (header, body) = text.split_once('\n').unwrap_or((text, ""));
        let bad = |m: &str| BclError::Parse {
            file: "<detector>".into(),
            line: 1,
            message: m.into(),
        };
        let parts: Vec<&str> = header.split_whitespace().collect();
        let [kind, hidden, f] = parts.as_slice() else {
            return Err(bad("expected `kind hidden feature_dim`"));
        };
        let kind: DetectorKind = kind.parse()?;
        let hidden: usize = hidden.parse().map_err(|_| bad("hidden"))?;
        let feature_dim: usize = f.parse().map_err(|_| bad("feature_dim"))?;
        let params = ParamStore::from_text(body)?;
        let template = Self::init(kind, feature_dim, hidden, 0)?;
        for (name, p) in template.params.iter() {
            if params.value(name)?.shape() != p.value.shape() {
                return Err(bad(&format!("shape of {name}")));
            }
        }
        if params.len() != template.params.len() {
            return Err(bad("unexpected parameter count"));
        }
        Ok(Self {
            kind,
            params,
            feature_dim,
            hidden,
        })
    }
}

/// Softmax probability of the anomaly class per row.
pub fn anomaly_score(logits: &DenseMatrix) -> Result<Vec<f64>> {
    if logits.cols() != 2 {
        return Err(BclError::dims("anomaly_score logits cols", 2, logits.cols()));
    }
    if !logits.is_finite() {
        return Err(BclError::NonFinite("logits".into()));
    }
    Ok((0..logits.rows()).map(|i| softmax2(logits.row(i))[1]).collect())
}

/// No-curriculum baseline: the curriculum loop with `λ₀ = 1` and `T = 0`.
pub fn train_plain(
    model: DetectorModel,
    input: &DetectorInput,
    labels: &[bool],
    split: &NodeSplit,
    budget: &TrainingBudget,
) -> Result<TrainOutcome> {
    let config = CurriculumConfig {
        pacing: PacingKind::Linear,
        lambda0: 1.0,
        t_max: 0,
    };
    let ordering: Vec<usize> = (0..input.num_nodes()).collect();
    train_with_curriculum(model, input, labels, split, &ordering, &config, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::normalize_adjacency;
    use crate::numerics::{glorot_bound, grad_check};
    use rand::Rng;

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
        let labels = (0..n).map(|i| i % 3 == 0).collect();
        AttributedGraph::new(edges, DenseMatrix::new(n, f, feats).unwrap(), labels).unwrap()
    }

    fn input(g: &AttributedGraph) -> DetectorInput {
        DetectorInput::new(g, &normalize_adjacency(g)).unwrap()
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        for kind in DetectorKind::ALL {
            let a = DetectorModel::init(kind, 5, 4, 3).unwrap();
            assert_eq!(a, DetectorModel::init(kind, 5, 4, 3).unwrap());
            let fan = if kind == DetectorKind::Sage { 2 } else { 1 };
            let b1 = glorot_bound(fan * 5, 4);
            let b2 = glorot_bound(fan * 4, 2);
            assert!(a.params().value(W1).unwrap().values().iter().all(|v| v.abs() <= b1));
            assert!(a.params().value(W2).unwrap().values().iter().all(|v| v.abs() <= b2));
        }
        assert!(DetectorModel::init(DetectorKind::Gcn, 5, 0, 0).is_err());
    }

    #[test]
    fn zero_weights_give_half_probability() {
        let g = random_graph(7, 3, 0);
        for kind in DetectorKind::ALL {
            let mut m = DetectorModel::init(kind, 3, 4, 0).unwrap();
            for name in m.params.names() {
                m.params.value_mut(&name).unwrap().fill(0.0);
            }
            let logits = m.forward(&input(&g)).unwrap();
            assert_eq!(logits, DenseMatrix::zeros(7, 2));
            assert!(anomaly_score(&logits).unwrap().iter().all(|&s| s == 0.5));
        }
    }

    #[test]
    fn mlp_ignores_structure() {
        let g = random_graph(6, 3, 1);
        let g2 = AttributedGraph::new(vec![], g.features().clone(), g.labels().to_vec()).unwrap();
        let m = DetectorModel::init(DetectorKind::Mlp, 3, 4, 2).unwrap();
        assert_eq!(m.forward(&input(&g)).unwrap(), m.forward(&input(&g2)).unwrap());
    }

    #[test]
    fn gcn_two_nodes_by_hand() {
        let x = DenseMatrix::from_rows(&[[2.0], [-1.0]]).unwrap();
        let g = AttributedGraph::new(vec![(0, 1)], x, vec![false, true]).unwrap();
        let mut m = DetectorModel::init(DetectorKind::Gcn, 1, 1, 0).unwrap();
        let (w1, w2a, w2b) = (1.5, 2.0, -3.0);
        *m.params.value_mut(W1).unwrap() = DenseMatrix::from_rows(&[[w1]]).unwrap();
        *m.params.value_mut(W2).unwrap() = DenseMatrix::from_rows(&[[w2a, w2b]]).unwrap();
        // ÂX = [0.5, 0.5]; h = relu(0.75) per node; Âh = 0.75 per node
        let h = 0.5 * 2.0 * w1 + 0.5 * -1.0 * w1;
        let agg = 0.5 * h + 0.5 * h;
        let logits = m.forward(&input(&g)).unwrap();
        for i in 0..2 {
            assert!((logits.get(i, 0) - agg * w2a).abs() < 1e-12);
            assert!((logits.get(i, 1) - agg * w2b).abs() < 1e-12);
        }
    }

    #[test]
    fn anomaly_score_examples() {
        let l = DenseMatrix::from_rows(&[[0.0, 0.0], [0.0, 3f64.ln()], [10.0, 13.0], [-90.0, -87.0]]).unwrap();
        let s = anomaly_score(&l).unwrap();
        assert_eq!(s[0], 0.5);
        assert!((s[1] - 0.75).abs() < 1e-15);
        assert!((s[2] - s[3]).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        for kind in DetectorKind::ALL {
            for seed in 0..5 {
                let g = random_graph(10, 4, seed);
                let inp = input(&g);
                let subset: Vec<usize> = (0..10).filter(|i| i % 4 != 1).collect();
                let mut m = DetectorModel::init(kind, 4, 3, seed + 7).unwrap();
                let err = grad_check(m.params_mut(), 1e-6, seed, |p| {
                    DetectorModel::loss_with(kind, p, &inp, g.labels(), &subset)
                })
                .unwrap();
                assert!(err < 1e-4, "{kind} seed {seed}: {err}");
            }
        }
    }

    #[test]
    fn structural_detectors_are_permutation_equivariant() {
        let g = random_graph(9, 3, 4);
        let perm = vec![8, 2, 5, 0, 1, 7, 3, 6, 4];
        let pg = g.permute(&perm).unwrap();
        for kind in DetectorKind::ALL {
            let m = DetectorModel::init(kind, 3, 5, 1).unwrap();
            let a = m.forward(&input(&g)).unwrap();
            let b = m.forward(&input(&pg)).unwrap();
            for i in 0..9 {
                for (x, y) in a.row(i).iter().zip(b.row(perm[i])) {
                    assert!((x - y).abs() < 1e-12, "{kind}");
                }
            }
        }
    }

    #[test]
    fn text_roundtrip() {
        let m = DetectorModel::init(DetectorKind::Sage, 3, 4, 8).unwrap();
        assert_eq!(DetectorModel::from_text(&m.to_text()).unwrap(), m);
        assert!(DetectorModel::from_text("gcn 4").is_err());
    }

    #[test]
    fn forward_rejects_wrong_dim() {
        let g = random_graph(5, 3, 0);
        let m = DetectorModel::init(DetectorKind::Mlp, 4, 2, 0).unwrap();
        assert!(m.forward(&input(&g)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn scores_are_probabilities(vals in prop::collection::vec(-40.0f64..40.0, 2..40)) {
                let n = vals.len() / 2;
                let l = DenseMatrix::new(n, 2, vals[..2 * n].to_vec()).unwrap();
                let s = anomaly_score(&l).unwrap();
                for i in 0..n {
                    prop_assert!((0.0..=1.0).contains(&s[i]));
                    let p = softmax2(l.row(i));
                    prop_assert!((p[0] + p[1] - 1.0).abs() <= 1e-12);
                }
            }
        }
    }
}
