//! Deterministic dense/sparse kernels, losses, Adam and gradient checking.
//!
//! Everything is `f64`. Accumulation orders are fixed so that two runs with the
//! same inputs produce bit-identical outputs.

mod adam;
mod gradcheck;
mod matrix;
pub mod ops;
mod params;
mod sparse;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::grad_check;
pub use matrix::{pairwise_sum, DenseMatrix};
pub use ops::{mse_loss, relu, relu_backward, softmax_ce_loss};
pub use params::{glorot_bound, Param, ParamStore};
pub use sparse::CsrMatrix;

use crate::error::Result;
use crate::graph::NormalizedAdjacency;

/// `Â · h` for a normalized adjacency.
pub fn spmm(adj: &NormalizedAdjacency, h: &DenseMatrix) -> Result<DenseMatrix> {
    adj.matrix().spmm(h)
}
