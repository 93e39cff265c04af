//! Configuration, synthetic data, end-to-end runs, sweeps and reports.

pub mod config;
pub mod report;
pub mod runner;
pub mod sweep;
pub mod synthetic;

pub use config::{DatasetSource, ExperimentConfig};
pub use report::{ExperimentReport, SeedReport, Variant, VariantMetrics};
pub use runner::{run_bcl, RunOptions, RunOutput};
pub use sweep::{apply_axis, sweep, SweepAxis, SweepResult};
pub use synthetic::{generate_synthetic, AnomalyKind, SyntheticSpec};
