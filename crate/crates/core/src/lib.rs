//! Bi-directional curriculum learning for graph anomaly detection.
//!
//! A graph autoencoder scores every node by how far its embedding sits from the
//! mean embedding. Two copies of a host detector are then trained on the
//! training nodes in opposite orders of that score (easy-to-hard from the
//! typical end and from the atypical end), and their anomaly probabilities are
//! fused with a convex weight.
//!
//! Module map:
//!
//! * [`graph`]: attributed graphs, normalized adjacency, splits, file I/O
//! * [`numerics`]: dense/sparse kernels, losses, Adam, gradient checking
//! * [`difficulty`]: autoencoder pretraining and difficulty ranking
//! * [`curriculum`]: pacing functions, subset selection, the training loop
//! * [`detectors`]: MLP, GCN and mean-aggregator SAGE detectors
//! * [`metrics`]: score fusion, ROC-AUC, macro-F1
//! * [`experiment`]: configs, synthetic graphs, end-to-end runs, sweeps

pub mod curriculum;
pub mod detectors;
pub mod difficulty;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod metrics;
pub mod numerics;

pub use error::{BclError, Result};
