//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys, repeated
//! keys and malformed values are errors.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curriculum::{CurriculumConfig, PacingKind, TrainingBudget};
use crate::detectors::DetectorKind;
use crate::difficulty::{BdsNorm, GaeConfig};
use crate::error::{BclError, Result};
use crate::experiment::synthetic::SyntheticSpec;
use crate::graph::SplitRatios;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DatasetSource {
    /// A fresh graph is generated per run seed.
    Synthetic(SyntheticSpec),
    Files {
        edges: PathBuf,
        features: PathBuf,
        labels: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub detector: DetectorKind,
    pub hidden: usize,
    pub homo: CurriculumConfig,
    pub hete: CurriculumConfig,
    pub alpha: f64,
    pub seeds: Vec<u64>,
    pub split: SplitRatios,
    pub training: TrainingBudget,
    pub gae: GaeConfig,
    pub bds_norm: BdsNorm,
    pub threshold: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let training = TrainingBudget::default();
        let curriculum = CurriculumConfig {
            pacing: PacingKind::Linear,
            lambda0: 0.5,
            t_max: training.max_epochs / 2,
        };
        Self {
            dataset: DatasetSource::Synthetic(SyntheticSpec::default()),
            detector: DetectorKind::Gcn,
            hidden: 32,
            homo: curriculum,
            hete: curriculum,
            alpha: 0.5,
            seeds: (0..10).collect(),
            split: SplitRatios::default(),
            training,
            gae: GaeConfig::default(),
            bds_norm: BdsNorm::L1,
            threshold: 0.5,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| BclError::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(BclError::Config(m));
        self.homo.validate().map_err(|e| BclError::Config(format!("homo: {e}")))?;
        self.hete.validate().map_err(|e| BclError::Config(format!("hete: {e}")))?;
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail(format!("alpha must be in [0, 1], got {}", self.alpha));
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required".into());
        }
        if self.hidden == 0 || self.gae.hidden == 0 || self.gae.embed == 0 || self.gae.epochs == 0 {
            return fail("hidden sizes and autoencoder epochs must be >= 1".into());
        }
        self.split.validate().map_err(|e| BclError::Config(e.to_string()))?;
        if let DatasetSource::Synthetic(spec) = &self.dataset {
            spec.validate().map_err(|e| BclError::Config(e.to_string()))?;
        }
        if !self.threshold.is_finite() {
            return fail("threshold must be finite".into());
        }
        Ok(())
    }

    /// Parses a config file; relative dataset paths resolve against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BclError::io(path, e))?;
        let mut cfg = Self::parse_str(&text)?;
        if let DatasetSource::Files { edges, features, labels } = &mut cfg.dataset {
            let base = path.parent().unwrap_or(Path::new("."));
            for p in [edges, features, labels] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut spec = SyntheticSpec::default();
        let mut dataset_kind = "synthetic".to_string();
        let mut files: [Option<PathBuf>; 3] = Default::default();
        let mut seen = HashSet::new();
        let mut t_explicit = [false; 2];

        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| BclError::Config(format!("line {}: expected `key = value`", i + 1)))?;
            if !seen.insert(key.to_string()) {
                return Err(BclError::Config(format!("line {}: duplicate key `{key}`", i + 1)));
            }
            match key {
                "dataset" => dataset_kind = value.to_string(),
                "edges" => files[0] = Some(PathBuf::from(value)),
                "features" => files[1] = Some(PathBuf::from(value)),
                "labels" => files[2] = Some(PathBuf::from(value)),

                "synth.num_nodes" => spec.num_nodes = parse(key, value)?,
                "synth.num_blocks" => spec.num_blocks = parse(key, value)?,
                "synth.p_intra" => spec.p_intra = parse(key, value)?,
                "synth.p_inter" => spec.p_inter = parse(key, value)?,
                "synth.feature_dim" => spec.feature_dim = parse(key, value)?,
                "synth.anomaly_rate" => spec.anomaly_rate = parse(key, value)?,
                "synth.anomaly_kind" => spec.anomaly_kind = parse(key, value)?,
                "synth.noise_scale" => spec.noise_scale = parse(key, value)?,
                "synth.center_scale" => spec.center_scale = parse(key, value)?,
                "synth.anomaly_shift" => spec.anomaly_shift = parse(key, value)?,
                "synth.clique_size" => spec.clique_size = parse(key, value)?,

                "detector" => cfg.detector = parse(key, value)?,
                "hidden" => cfg.hidden = parse(key, value)?,
                "pacing" => {
                    let p: PacingKind = parse(key, value)?;
                    cfg.homo.pacing = p;
                    cfg.hete.pacing = p;
                }
                "homo.pacing" => cfg.homo.pacing = parse(key, value)?,
                "hete.pacing" => cfg.hete.pacing = parse(key, value)?,
                "homo.lambda0" => cfg.homo.lambda0 = parse(key, value)?,
                "hete.lambda0" => cfg.hete.lambda0 = parse(key, value)?,
                "homo.t" => {
                    cfg.homo.t_max = parse(key, value)?;
                    t_explicit[0] = true;
                }
                "hete.t" => {
                    cfg.hete.t_max = parse(key, value)?;
                    t_explicit[1] = true;
                }
                "alpha" => cfg.alpha = parse(key, value)?,
                "seeds" => cfg.seeds = parse_list(key, value)?,
                "split" => {
                    let r: Vec<f64> = parse_list(key, value)?;
                    let [train, val, test] = r.as_slice() else {
                        return Err(BclError::Config("split needs three ratios train,val,test".into()));
                    };
                    cfg.split = SplitRatios { train: *train, val: *val, test: *test };
                }
                "epochs" => cfg.training.max_epochs = parse(key, value)?,
                "patience" => cfg.training.patience = parse(key, value)?,
                "lr" => cfg.training.adam.learning_rate = parse(key, value)?,
                "beta1" => cfg.training.adam.beta1 = parse(key, value)?,
                "beta2" => cfg.training.adam.beta2 = parse(key, value)?,
                "eps" => cfg.training.adam.epsilon = parse(key, value)?,

                "gae.hidden" => cfg.gae.hidden = parse(key, value)?,
                "gae.embed" => cfg.gae.embed = parse(key, value)?,
                "gae.epochs" => cfg.gae.epochs = parse(key, value)?,
                "gae.patience" => {
                    let p: usize = parse(key, value)?;
                    cfg.gae.patience = (p > 0).then_some(p);
                }
                "gae.lr" => cfg.gae.adam.learning_rate = parse(key, value)?,
                "bds.norm" => {
                    cfg.bds_norm = match value {
                        "l1" => BdsNorm::L1,
                        "l2" => BdsNorm::L2,
                        _ => return Err(BclError::Config(format!("invalid value `{value}` for `{key}`"))),
                    }
                }
                "threshold" => cfg.threshold = parse(key, value)?,
                other => {
                    return Err(BclError::Config(format!("line {}: unknown key `{other}`", i + 1)));
                }
            }
        }

        // T defaults to half the epoch budget unless given explicitly
        if !t_explicit[0] {
            cfg.homo.t_max = cfg.training.max_epochs / 2;
        }
        if !t_explicit[1] {
            cfg.hete.t_max = cfg.training.max_epochs / 2;
        }

        cfg.dataset = match dataset_kind.as_str() {
            "synthetic" => DatasetSource::Synthetic(spec),
            "files" => {
                let [Some(edges), Some(features), Some(labels)] = files else {
                    return Err(BclError::Config("dataset = files needs edges, features and labels".into()));
                };
                DatasetSource::Files { edges, features, labels }
            }
            other => return Err(BclError::Config(format!("unknown dataset `{other}`"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Renders the config back into the key-value format.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        match &self.dataset {
            DatasetSource::Synthetic(s) => {
                kv("dataset", "synthetic".into());
                kv("synth.num_nodes", s.num_nodes.to_string());
                kv("synth.num_blocks", s.num_blocks.to_string());
                kv("synth.p_intra", format!("{:?}", s.p_intra));
                kv("synth.p_inter", format!("{:?}", s.p_inter));
                kv("synth.feature_dim", s.feature_dim.to_string());
                kv("synth.anomaly_rate", format!("{:?}", s.anomaly_rate));
                kv("synth.anomaly_kind", s.anomaly_kind.to_string());
                kv("synth.noise_scale", format!("{:?}", s.noise_scale));
                kv("synth.center_scale", format!("{:?}", s.center_scale));
                kv("synth.anomaly_shift", format!("{:?}", s.anomaly_shift));
                kv("synth.clique_size", s.clique_size.to_string());
            }
            DatasetSource::Files { edges, features, labels } => {
                kv("dataset", "files".into());
                kv("edges", edges.display().to_string());
                kv("features", features.display().to_string());
                kv("labels", labels.display().to_string());
            }
        }
        kv("detector", self.detector.to_string());
        kv("hidden", self.hidden.to_string());
        kv("homo.pacing", self.homo.pacing.to_string());
        kv("homo.lambda0", format!("{:?}", self.homo.lambda0));
        kv("homo.t", self.homo.t_max.to_string());
        kv("hete.pacing", self.hete.pacing.to_string());
        kv("hete.lambda0", format!("{:?}", self.hete.lambda0));
        kv("hete.t", self.hete.t_max.to_string());
        kv("alpha", format!("{:?}", self.alpha));
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        kv("seeds", seeds.join(","));
        kv("split", format!("{:?},{:?},{:?}", self.split.train, self.split.val, self.split.test));
        kv("epochs", self.training.max_epochs.to_string());
        kv("patience", self.training.patience.to_string());
        kv("lr", format!("{:?}", self.training.adam.learning_rate));
        kv("beta1", format!("{:?}", self.training.adam.beta1));
        kv("beta2", format!("{:?}", self.training.adam.beta2));
        kv("eps", format!("{:?}", self.training.adam.epsilon));
        kv("gae.hidden", self.gae.hidden.to_string());
        kv("gae.embed", self.gae.embed.to_string());
        kv("gae.epochs", self.gae.epochs.to_string());
        kv("gae.patience", self.gae.patience.unwrap_or(0).to_string());
        kv("gae.lr", format!("{:?}", self.gae.adam.learning_rate));
        kv(
            "bds.norm",
            match self.bds_norm {
                BdsNorm::L1 => "l1",
                BdsNorm::L2 => "l2",
            }
            .into(),
        );
        kv("threshold", format!("{:?}", self.threshold));
        out
    }
}
