//! Score fusion and evaluation metrics.

use serde::{Deserialize, Serialize};

use crate::error::{BclError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedScore {
    pub alpha: f64,
    pub score_homo: Vec<f64>,
    pub score_hete: Vec<f64>,
    pub score_final: Vec<f64>,
}

/// `α·homo + (1 − α)·hete`, elementwise.
pub fn fuse_scores(alpha: f64, homo: &[f64], hete: &[f64]) -> Result<FusedScore> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(BclError::InvalidArgument(format!("alpha must be in [0, 1], got {alpha}")));
    }
    if homo.len() != hete.len() {
        return Err(BclError::dims("fuse_scores lengths", homo.len(), hete.len()));
    }
    let score_final = homo
        .iter()
        .zip(hete)
        .map(|(h, e)| alpha * h + (1.0 - alpha) * e)
        .collect();
    Ok(FusedScore {
        alpha,
        score_homo: homo.to_vec(),
        score_hete: hete.to_vec(),
        score_final,
    })
}

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&y| y).count();
    (pos, labels.len() - pos)
}

/// ROC-AUC as the Mann-Whitney statistic `P(s⁺ > s⁻) + ½·P(s⁺ = s⁻)`.
///
/// Sorts once and walks tie groups, counting in half-units so the result is
/// the exact ratio `2U / (2·P·N)`.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(BclError::dims("roc_auc lengths", labels.len(), scores.len()));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(BclError::NonFinite(format!("score {i}")));
    }
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(BclError::DegenerateLabels(format!(
            "roc_auc needs both classes ({pos} positive, {neg} negative)"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let mut twice_u: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (mut p_g, mut n_g) = (0u128, 0u128);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] {
                p_g += 1;
            } else {
                n_g += 1;
            }
            i += 1;
        }
        twice_u += 2 * p_g * neg_below + p_g * n_g;
        neg_below += n_g;
    }
    Ok(twice_u as f64 / (2 * pos as u128 * neg as u128) as f64)
}

/// Mean of the per-class F1 scores, predicting anomaly iff `score > threshold`.
pub fn macro_f1(scores: &[f64], labels: &[bool], threshold: f64) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(BclError::dims("macro_f1 lengths", labels.len(), scores.len()));
    }
    let (pos, neg) = class_counts(labels);
    if pos == 0 || neg == 0 {
        return Err(BclError::DegenerateLabels(format!(
            "macro_f1 needs both classes ({pos} positive, {neg} negative)"
        )));
    }
    // confusion[actual][predicted]
    let mut confusion = [[0usize; 2]; 2];
    for (&s, &y) in scores.iter().zip(labels) {
        confusion[y as usize][(s > threshold) as usize] += 1;
    }
    let f1 = |c: usize| {
        let tp = confusion[c][c];
        let fp = confusion[1 - c][c];
        let fn_ = confusion[c][1 - c];
        let denom = 2 * tp + fp + fn_;
        if tp == 0 || denom == 0 {
            0.0
        } else {
            2.0 * tp as f64 / denom as f64
        }
    };
    Ok((f1(0) + f1(1)) / 2.0)
}
