//! One-axis hyperparameter sweeps.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::curriculum::PacingKind;
use crate::error::{BclError, Result};
use crate::experiment::config::ExperimentConfig;
use crate::experiment::report::{ExperimentReport, Variant};
use crate::experiment::runner::{run_bcl, RunOptions, RunOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Alpha,
    /// Sets `λ₀` for both directions.
    Lambda0,
    /// Sets `T` for both directions as a fraction of the epoch budget.
    T,
    Pacing,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::Lambda0 => "lambda0",
            SweepAxis::T => "t",
            SweepAxis::Pacing => "pacing",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = BclError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" => Ok(SweepAxis::Alpha),
            "lambda0" => Ok(SweepAxis::Lambda0),
            "t" => Ok(SweepAxis::T),
            "pacing" => Ok(SweepAxis::Pacing),
            other => Err(BclError::InvalidArgument(format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// Accepted numeric range for the alpha, lambda0 and T-fraction axes.
pub const SWEEP_RANGE: (f64, f64) = (0.1, 0.9);

fn numeric(axis: SweepAxis, value: &str) -> Result<f64> {
    let v: f64 = value
        .parse()
        .map_err(|_| BclError::InvalidArgument(format!("{axis}: `{value}` is not a number")))?;
    let (lo, hi) = SWEEP_RANGE;
    if !(lo - 1e-12..=hi + 1e-12).contains(&v) {
        return Err(BclError::InvalidArgument(format!(
            "{axis}: {v} outside the sweep range [{lo}, {hi}]"
        )));
    }
    Ok(v)
}

/// Returns a copy of `template` with `value` applied on `axis`.
pub fn apply_axis(template: &ExperimentConfig, axis: SweepAxis, value: &str) -> Result<ExperimentConfig> {
    let mut cfg = template.clone();
    match axis {
        SweepAxis::Alpha => cfg.alpha = numeric(axis, value)?,
        SweepAxis::Lambda0 => {
            let v = numeric(axis, value)?;
            cfg.homo.lambda0 = v;
            cfg.hete.lambda0 = v;
        }
        SweepAxis::T => {
            let frac = numeric(axis, value)?;
            let t = (frac * cfg.training.max_epochs as f64).round() as usize;
            cfg.homo.t_max = t;
            cfg.hete.t_max = t;
        }
        SweepAxis::Pacing => {
            let p: PacingKind = value.parse()?;
            cfg.homo.pacing = p;
            cfg.hete.pacing = p;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: String,
    pub output: RunOutput,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn reports(&self) -> impl Iterator<Item = &ExperimentReport> {
        self.points.iter().map(|p| &p.output.report)
    }

    /// One row per swept value with mean test AUC and macro-F1 per variant.
    pub fn summary_csv(&self) -> String {
        let mut out = self.axis.to_string();
        for metric in ["auc", "macro_f1"] {
            for v in Variant::ALL {
                let _ = write!(out, ",{v}_{metric}");
            }
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&p.value);
            let r = &p.output.report;
            for metric in 0..2 {
                for v in Variant::ALL {
                    let s = r.summary_for(v).expect("summary has every variant");
                    let x = if metric == 0 { s.mean_auc } else { s.mean_macro_f1 };
                    let _ = write!(out, ",{x:.4}");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Runs `template` once per value. Every point shares the template's seeds.
pub fn sweep(template: &ExperimentConfig, axis: SweepAxis, values: &[String], opts: RunOptions) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(BclError::InvalidArgument("sweep needs at least one value".into()));
    }
    // validate every point before running any of them
    let configs = values
        .iter()
        .map(|v| apply_axis(template, axis, v))
        .collect::<Result<Vec<_>>>()?;
    let points = values
        .iter()
        .zip(configs)
        .map(|(value, cfg)| {
            Ok(SweepPoint {
                value: value.clone(),
                output: run_bcl(&cfg, opts)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { axis, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_values_rejected() {
        assert!(sweep(&ExperimentConfig::default(), SweepAxis::Alpha, &[], RunOptions::default()).is_err());
    }

    #[test]
    fn out_of_range_values_rejected() {
        let t = ExperimentConfig::default();
        assert!(apply_axis(&t, SweepAxis::Alpha, "0.95").is_err());
        assert!(apply_axis(&t, SweepAxis::Lambda0, "0").is_err());
        assert!(apply_axis(&t, SweepAxis::T, "1.0").is_err());
        assert!(apply_axis(&t, SweepAxis::Pacing, "cubic").is_err());
        assert!(apply_axis(&t, SweepAxis::Alpha, "abc").is_err());
    }

    #[test]
    fn axis_application() {
        let t = ExperimentConfig::default();
        assert_eq!(apply_axis(&t, SweepAxis::Alpha, "0.3").unwrap().alpha, 0.3);
        let c = apply_axis(&t, SweepAxis::T, "0.2").unwrap();
        assert_eq!(c.homo.t_max, (0.2 * t.training.max_epochs as f64).round() as usize);
        assert_eq!(c.hete.t_max, c.homo.t_max);
        let c = apply_axis(&t, SweepAxis::Pacing, "geometric").unwrap();
        assert_eq!(c.hete.pacing, PacingKind::Geometric);
    }
}
