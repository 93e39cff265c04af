//! JSON report schema and atomic persistence.
//!
//! `report.json` layout (schema version 1):
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "config": { ...ExperimentConfig... },
//!   "seeds": [
//!     {
//!       "seed": 0,
//!       "graph": { "nodes": 500, "edges": 2600, "anomalies": 25 },
//!       "split": { "train": 200, "val": 100, "test": 200 },
//!       "gae": { "epochs": 300, "initial_loss": 2.1, "final_loss": 0.8 },
//!       "bds": { "file": "seed0/bds.csv", "mean_anomaly": 3.2, "mean_normal": 1.1 },
//!       "variants": [
//!         { "variant": "baseline", "auc": 0.91, "macro_f1": 0.62,
//!           "best_epoch": 40, "epochs_run": 61, "log_file": "seed0/log_baseline.csv" },
//!         ... "homocl", "hetecl", "bcl" (bcl has no log and epoch fields of null)
//!       ],
//!       "scores_file": "seed0/scores.csv",
//!       "wall_clock_secs": 0.4            // omitted in deterministic mode
//!     }
//!   ],
//!   "summary": [ { "variant": "baseline", "mean_auc": ..., "std_auc": ...,
//!                  "mean_macro_f1": ..., "std_macro_f1": ... }, ... ],
//!   "wall_clock_secs": 3.9                // omitted in deterministic mode
//! }
//! ```

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{BclError, Result};
use crate::experiment::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Plain training, no curriculum.
    Baseline,
    /// Homogeneity direction only (ascending difficulty).
    HomoCl,
    /// Heterogeneity direction only (descending difficulty).
    HeteCl,
    /// Fused bi-directional scores.
    Bcl,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Baseline, Variant::HomoCl, Variant::HeteCl, Variant::Bcl];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Baseline => "baseline",
            Variant::HomoCl => "homocl",
            Variant::HeteCl => "hetecl",
            Variant::Bcl => "bcl",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantMetrics {
    pub variant: Variant,
    pub auc: f64,
    pub macro_f1: f64,
    pub best_epoch: Option<usize>,
    pub epochs_run: Option<usize>,
    pub log_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub anomalies: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaeStats {
    pub epochs: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdsStats {
    pub file: String,
    pub mean_anomaly: f64,
    pub mean_normal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub graph: GraphStats,
    pub split: SplitStats,
    pub gae: GaeStats,
    pub bds: BdsStats,
    pub variants: Vec<VariantMetrics>,
    pub scores_file: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_secs: Option<f64>,
}

impl SeedReport {
    pub fn metrics(&self, variant: Variant) -> Option<&VariantMetrics> {
        self.variants.iter().find(|m| m.variant == variant)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: Variant,
    pub mean_auc: f64,
    pub std_auc: f64,
    pub mean_macro_f1: f64,
    pub std_macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub seeds: Vec<SeedReport>,
    pub summary: Vec<VariantSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_secs: Option<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub(crate) fn summarize(seeds: &[SeedReport]) -> Vec<VariantSummary> {
    Variant::ALL
        .iter()
        .map(|&variant| {
            let rows: Vec<&VariantMetrics> = seeds.iter().filter_map(|s| s.metrics(variant)).collect();
            let aucs: Vec<f64> = rows.iter().map(|m| m.auc).collect();
            let f1s: Vec<f64> = rows.iter().map(|m| m.macro_f1).collect();
            let (mean_auc, std_auc) = mean_std(&aucs);
            let (mean_macro_f1, std_macro_f1) = mean_std(&f1s);
            VariantSummary {
                variant,
                mean_auc,
                std_auc,
                mean_macro_f1,
                std_macro_f1,
            }
        })
        .collect()
}

impl ExperimentReport {
    pub fn summary_for(&self, variant: Variant) -> Option<&VariantSummary> {
        self.summary.iter().find(|s| s.variant == variant)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Writes `contents` to a sibling temp file and renames it over `path`, so a
/// reader never observes a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| BclError::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| BclError::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(BclError::io(path, e));
    }
    Ok(())
}
