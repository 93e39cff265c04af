//! Pacing functions and the easy-to-hard training loop.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detectors::{anomaly_score, DetectorInput, DetectorModel};
use crate::error::{BclError, Result};
use crate::graph::NodeSplit;
use crate::metrics::roc_auc;
use crate::numerics::{AdamConfig, AdamState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PacingKind {
    Linear,
    Root,
    Geometric,
}

impl PacingKind {
    pub const ALL: [PacingKind; 3] = [PacingKind::Linear, PacingKind::Root, PacingKind::Geometric];
}

impl fmt::Display for PacingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PacingKind::Linear => "linear",
            PacingKind::Root => "root",
            PacingKind::Geometric => "geometric",
        })
    }
}

impl FromStr for PacingKind {
    type Err = BclError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(PacingKind::Linear),
            "root" => Ok(PacingKind::Root),
            "geometric" => Ok(PacingKind::Geometric),
            other => Err(BclError::InvalidArgument(format!("unknown pacing `{other}`"))),
        }
    }
}

/// Schedule for one training direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurriculumConfig {
    pub pacing: PacingKind,
    /// Fraction of the training set available at epoch 0, in `(0, 1]`.
    pub lambda0: f64,
    /// Epoch at which the whole training set becomes available.
    pub t_max: usize,
}

impl CurriculumConfig {
    pub fn validate(&self) -> Result<()> {
        check_lambda0(self.lambda0)
    }

    pub fn pace(&self, t: usize) -> Result<f64> {
        pacing_value(self.pacing, self.lambda0, self.t_max, t)
    }
}

fn check_lambda0(lambda0: f64) -> Result<()> {
    if lambda0 > 0.0 && lambda0 <= 1.0 {
        Ok(())
    } else {
        Err(BclError::InvalidArgument(format!("lambda0 must be in (0, 1], got {lambda0}")))
    }
}

/// Fraction of the curriculum available at epoch `t`.
///
/// * linear: `λ₀ + (1 − λ₀)·t/T`
/// * root: `√(λ₀² + (1 − λ₀²)·t/T)`
/// * geometric: `2^(log₂λ₀ − log₂λ₀·t/T)`
///
/// All are capped at 1, equal `λ₀` exactly at `t = 0` and 1 exactly for
/// `t ≥ T`.
pub fn pacing_value(kind: PacingKind, lambda0: f64, t_max: usize, t: usize) -> Result<f64> {
    check_lambda0(lambda0)?;
    if t >= t_max {
        return Ok(1.0);
    }
    if t == 0 {
        return Ok(lambda0);
    }
    let frac = t as f64 / t_max as f64;
    let g = match kind {
        PacingKind::Linear => lambda0 + (1.0 - lambda0) * frac,
        PacingKind::Root => (lambda0 * lambda0 + (1.0 - lambda0 * lambda0) * frac).sqrt(),
        PacingKind::Geometric => {
            let l = lambda0.log2();
            (l - l * frac).exp2()
        }
    };
    Ok(g.min(1.0))
}

/// Products `λ·n` within this distance above an integer are treated as that
/// integer, so `0.7·10` selects 7 nodes rather than 8.
const CEIL_SLACK: f64 = 1e-9;

/// Number of training nodes admitted at fraction `lambda_t`:
/// `⌈λ·|train|⌉`, clamped to `[1, |train|]`.
pub fn subset_size(lambda_t: f64, train_len: usize) -> usize {
    let k = (lambda_t * train_len as f64 - CEIL_SLACK).ceil();
    (k.max(1.0) as usize).min(train_len)
}

/// Walks `ordering` from the easiest node and keeps the first
/// [`subset_size`] nodes that belong to the training set, in curriculum order.
pub fn select_subset(ordering: &[usize], train: &[usize], lambda_t: f64) -> Result<Vec<usize>> {
    if train.is_empty() {
        return Err(BclError::InvalidArgument("empty training set".into()));
    }
    if !(lambda_t > 0.0 && lambda_t <= 1.0) {
        return Err(BclError::InvalidArgument(format!("lambda_t must be in (0, 1], got {lambda_t}")));
    }
    let n = ordering.len().max(train.iter().max().map_or(0, |m| m + 1));
    let mut in_train = vec![false; n];
    for &i in train {
        in_train[i] = true;
    }
    let k = subset_size(lambda_t, train.len());
    let subset: Vec<usize> = ordering.iter().copied().filter(|&v| in_train[v]).take(k).collect();
    if subset.len() < k {
        return Err(BclError::InvalidArgument(
            "ordering does not cover the training set".into(),
        ));
    }
    Ok(subset)
}

/// Epoch cap, early-stopping patience and optimizer settings shared by every
/// detector training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingBudget {
    pub max_epochs: usize,
    /// Epochs without a validation-AUC improvement tolerated once the full
    /// training set is in use.
    pub patience: usize,
    pub adam: AdamConfig,
}

impl Default for TrainingBudget {
    fn default() -> Self {
        Self {
            max_epochs: 300,
            patience: 20,
            adam: AdamConfig {
                learning_rate: 0.005,
                ..AdamConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub lambda_t: f64,
    pub subset_size: usize,
    pub loss: f64,
    pub val_auc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the best validation-AUC epoch.
    pub model: DetectorModel,
    pub log: Vec<EpochLog>,
    /// Zero when no epoch ran.
    pub best_epoch: usize,
    pub best_val_auc: Option<f64>,
}

impl TrainOutcome {
    pub fn log_csv(&self) -> String {
        log_to_csv(&self.log)
    }
}

pub fn log_to_csv(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch,lambda_t,subset_size,loss,val_auc\n");
    for e in log {
        let _ = writeln!(out, "{},{:?},{},{:?},{:?}", e.epoch, e.lambda_t, e.subset_size, e.loss, e.val_auc);
    }
    out
}

/// Trains `model` on a growing prefix of `ordering` restricted to the
/// training split.
///
/// Epoch `e` (1-based) uses `λ = g(e - 1)` and takes one full-batch Adam
/// step on the class-balanced loss over the current subset. Once `λ` reaches 1
/// the whole training set is used and training continues until validation AUC
/// has not improved for `budget.patience` epochs (counted from the first full-set epoch) or
/// `budget.max_epochs` is reached. The returned model holds the parameters of
/// the best validation epoch.
pub fn train_with_curriculum(
    mut model: DetectorModel,
    input: &DetectorInput,
    labels: &[bool],
    split: &NodeSplit,
    ordering: &[usize],
    config: &CurriculumConfig,
    budget: &TrainingBudget,
) -> Result<TrainOutcome> {
    config.validate()?;
    let n = input.num_nodes();
    if labels.len() != n {
        return Err(BclError::dims("labels", n, labels.len()));
    }
    check_permutation(ordering, n)?;
    let val_labels: Vec<bool> = split.val.iter().map(|&i| labels[i]).collect();

    let mut adam = AdamState::new(budget.adam);
    let mut log = Vec::new();
    let mut best_model = model.clone();
    let mut best_auc: Option<f64> = None;
    let mut best_epoch = 0;
    let mut since_best = 0usize;
    let mut full_phase = false;

    for epoch in 1..=budget.max_epochs {
        // the first epoch trains on exactly λ₀ of the training set
        let lambda_t = config.pace(epoch - 1)?;
        let subset = select_subset(ordering, &split.train, lambda_t)?;
        let loss = model.loss_and_grad(input, labels, &subset)?;
        if !loss.is_finite() {
            return Err(BclError::Divergence { epoch, loss });
        }
        adam.step(model.params_mut())?;

        let scores = anomaly_score(&model.forward(input)?)?;
        let val_scores: Vec<f64> = split.val.iter().map(|&i| scores[i]).collect();
        let val_auc = roc_auc(&val_scores, &val_labels)?;
        log.push(EpochLog {
            epoch,
            lambda_t,
            subset_size: subset.len(),
            loss,
            val_auc,
        });

        if best_auc.is_none_or(|b| val_auc > b) {
            best_auc = Some(val_auc);
            best_model = model.clone();
            best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if lambda_t >= 1.0 {
            if !full_phase {
                full_phase = true;
                since_best = 0;
            } else if since_best >= budget.patience {
                break;
            }
        }
    }

    Ok(TrainOutcome {
        model: best_model,
        log,
        best_epoch,
        best_val_auc: best_auc,
    })
}

fn check_permutation(ordering: &[usize], n: usize) -> Result<()> {
    if ordering.len() != n {
        return Err(BclError::dims("curriculum ordering length", n, ordering.len()));
    }
    let mut seen = vec![false; n];
    for &v in ordering {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(BclError::InvalidArgument("curriculum ordering is not a permutation".into()));
        }
    }
    Ok(())
}
