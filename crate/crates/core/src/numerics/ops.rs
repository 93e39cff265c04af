//! Activations and losses with analytic gradients.

use crate::error::{BclError, Result};
use crate::numerics::{pairwise_sum, DenseMatrix};

pub fn relu(x: &DenseMatrix) -> DenseMatrix {
    x.map(|v| if v > 0.0 { v } else { 0.0 })
}

/// Passes `upstream` where the pre-activation was strictly positive.
pub fn relu_backward(pre: &DenseMatrix, upstream: &DenseMatrix) -> Result<DenseMatrix> {
    if pre.shape() != upstream.shape() {
        return Err(BclError::dims(
            "relu_backward",
            format!("{:?}", pre.shape()),
            format!("{:?}", upstream.shape()),
        ));
    }
    let values = pre
        .values()
        .iter()
        .zip(upstream.values())
        .map(|(&x, &g)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Ok(DenseMatrix::from_raw(pre.rows(), pre.cols(), values))
}

/// Mean squared error over every entry and its gradient w.r.t. `pred`.
pub fn mse_loss(pred: &DenseMatrix, target: &DenseMatrix) -> Result<(f64, DenseMatrix)> {
    if pred.shape() != target.shape() {
        return Err(BclError::dims(
            "mse_loss",
            format!("{:?}", target.shape()),
            format!("{:?}", pred.shape()),
        ));
    }
    let n = pred.len() as f64;
    let diff = pred.sub(target)?;
    let loss = diff.frobenius_sq() / n;
    let grad = diff.scale(2.0 / n);
    Ok((loss, grad))
}

/// Per-class loss weights for a labelled node subset.
///
/// Each class present in the subset gets `|subset| / (k · count_c)`, where `k`
/// is the number of present classes. A class that does not occur gets weight 1
/// (it never contributes).
pub fn balanced_class_weights(labels: &[bool], subset: &[usize]) -> [f64; 2] {
    let pos = subset.iter().filter(|&&i| labels[i]).count();
    let neg = subset.len() - pos;
    if pos == 0 || neg == 0 {
        return [1.0, 1.0];
    }
    let n = subset.len() as f64;
    [n / (2.0 * neg as f64), n / (2.0 * pos as f64)]
}

/// Row-wise softmax of an `N × 2` logits matrix, returning `P(anomaly)`.
pub fn softmax2(logits: &[f64]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let z = e0 + e1;
    [e0 / z, e1 / z]
}

/// Class-weighted two-class cross-entropy averaged over `mask`.
///
/// Gradient rows outside the mask are zero; inside they are
/// `w_y · (softmax − onehot) / |mask|`.
pub fn softmax_ce_loss(
    logits: &DenseMatrix,
    labels: &[bool],
    mask: &[usize],
    class_weights: [f64; 2],
) -> Result<(f64, DenseMatrix)> {
    if mask.is_empty() {
        return Err(BclError::InvalidArgument("softmax_ce_loss: empty mask".into()));
    }
    if logits.cols() != 2 {
        return Err(BclError::dims("softmax_ce_loss logits cols", 2, logits.cols()));
    }
    if labels.len() != logits.rows() {
        return Err(BclError::dims("softmax_ce_loss labels", logits.rows(), labels.len()));
    }
    let n = mask.len() as f64;
    let mut grad = DenseMatrix::zeros(logits.rows(), 2);
    let mut per_node = Vec::with_capacity(mask.len());
    for &i in mask {
        if i >= logits.rows() {
            return Err(BclError::dims("softmax_ce_loss mask index", logits.rows(), i));
        }
        let row = logits.row(i);
        if !row.iter().all(|v| v.is_finite()) {
            return Err(BclError::NonFinite(format!("logits row {i}")));
        }
        let y = labels[i] as usize;
        let w = class_weights[y];
        // -log p_y = (m - z_y) + ln(1 + e^{-|z0 - z1|}) with m the larger logit
        let m = row[0].max(row[1]);
        let nll = (m - row[y]) + (-(row[0] - row[1]).abs()).exp().ln_1p();
        per_node.push((i, w * nll));

        let p = softmax2(row);
        let g = grad.row_mut(i);
        for c in 0..2 {
            let onehot = if c == y { 1.0 } else { 0.0 };
            g[c] = w * (p[c] - onehot) / n;
        }
    }
    // sum in node order so the loss does not depend on mask order
    per_node.sort_unstable_by_key(|&(i, _)| i);
    let terms: Vec<f64> = per_node.into_iter().map(|(_, v)| v).collect();
    Ok((pairwise_sum(&terms) / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn relu_forward_and_backward() {
        let x = m(&[&[-1.0, 2.0]]);
        assert_eq!(relu(&x), m(&[&[0.0, 2.0]]));
        let up = m(&[&[5.0, 5.0]]);
        assert_eq!(relu_backward(&x, &up).unwrap(), m(&[&[0.0, 5.0]]));
        let neg = m(&[&[-1.0, -0.5], &[-3.0, 0.0]]);
        assert_eq!(relu(&neg), DenseMatrix::zeros(2, 2));
    }

    #[test]
    fn ce_uniform_logits_is_ln2() {
        let (loss, _) = softmax_ce_loss(&m(&[&[0.0, 0.0]]), &[false], &[0], [1.0, 1.0]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn ce_confident_correct_is_tiny() {
        let (loss, _) = softmax_ce_loss(&m(&[&[10.0, -10.0]]), &[false], &[0], [1.0, 1.0]).unwrap();
        // ln(1 + e^-20)
        let expected = (-20.0f64).exp().ln_1p();
        assert!((loss - expected).abs() < 1e-20);
        assert!((loss - 2.06e-9).abs() < 1e-11);
    }

    #[test]
    fn ce_empty_mask_errors() {
        assert!(softmax_ce_loss(&m(&[&[0.0, 0.0]]), &[false], &[], [1.0, 1.0]).is_err());
    }

    #[test]
    fn ce_gradient_zero_outside_mask() {
        let logits = m(&[&[0.3, -0.2], &[1.0, 2.0], &[0.0, 0.5]]);
        let (_, g) = softmax_ce_loss(&logits, &[false, true, true], &[0, 2], [1.0, 3.0]).unwrap();
        assert_eq!(g.row(1), &[0.0, 0.0]);
        let p = softmax2(logits.row(2));
        assert!((g.get(2, 1) - 3.0 * (p[1] - 1.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn mse_examples() {
        let a = m(&[&[1.0, 2.0]]);
        assert_eq!(mse_loss(&a, &a).unwrap().0, 0.0);
        let (loss, grad) = mse_loss(&m(&[&[1.0]]), &m(&[&[3.0]])).unwrap();
        assert_eq!(loss, 4.0);
        assert_eq!(grad, m(&[&[-4.0]]));
        assert!(mse_loss(&a, &m(&[&[1.0]])).is_err());
    }

    #[test]
    fn class_weights_balance_counts() {
        let labels = [false, false, false, true];
        let w = balanced_class_weights(&labels, &[0, 1, 2, 3]);
        assert_eq!(w, [4.0 / 6.0, 2.0]);
        assert_eq!(balanced_class_weights(&labels, &[0, 1]), [1.0, 1.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ce_permutation_equivariant(
                vals in prop::collection::vec(-5.0f64..5.0, 12),
                labels in prop::collection::vec(any::<bool>(), 6),
                rot in 0usize..6,
            ) {
                let n = 6;
                let logits = DenseMatrix::new(n, 2, vals).unwrap();
                let mask: Vec<usize> = (0..n).collect();
                let w = [0.7, 2.5];
                let (loss, grad) = softmax_ce_loss(&logits, &labels, &mask, w).unwrap();

                // relabel node i -> perm[i]
                let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
                let mut p_logits = DenseMatrix::zeros(n, 2);
                let mut p_labels = vec![false; n];
                for i in 0..n {
                    p_logits.row_mut(perm[i]).copy_from_slice(logits.row(i));
                    p_labels[perm[i]] = labels[i];
                }
                let p_mask: Vec<usize> = mask.iter().map(|&i| perm[i]).collect();
                let (p_loss, p_grad) = softmax_ce_loss(&p_logits, &p_labels, &p_mask, w).unwrap();
                prop_assert!((loss - p_loss).abs() <= 1e-12);
                for i in 0..n {
                    prop_assert_eq!(grad.row(i), p_grad.row(perm[i]));
                }
            }

            #[test]
            fn ce_ignores_mask_order(
                vals in prop::collection::vec(-5.0f64..5.0, 16),
                labels in prop::collection::vec(any::<bool>(), 8),
                mask in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(),
            ) {
                let logits = DenseMatrix::new(8, 2, vals).unwrap();
                let sorted: Vec<usize> = (0..8).collect();
                let a = softmax_ce_loss(&logits, &labels, &sorted, [1.0, 3.0]).unwrap();
                let b = softmax_ce_loss(&logits, &labels, &mask, [1.0, 3.0]).unwrap();
                prop_assert_eq!(a.0.to_bits(), b.0.to_bits());
                prop_assert_eq!(a.1, b.1);
            }
        }
    }
}
