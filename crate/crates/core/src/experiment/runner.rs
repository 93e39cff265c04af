use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use crate::curriculum::{train_with_curriculum, TrainOutcome};
use crate::detectors::{anomaly_score, train_plain, DetectorInput, DetectorModel};
use crate::difficulty::{compute_bds, gae_train, rank_nodes};
use crate::error::{BclError, Result};
use crate::experiment::config::{DatasetSource, ExperimentConfig};
use crate::experiment::report::{
    summarize, write_atomic, BdsStats, ExperimentReport, GaeStats, GraphStats, SeedReport, SplitStats, Variant,
    VariantMetrics, SCHEMA_VERSION,
};
use crate::experiment::synthetic::generate_synthetic;
use crate::graph::{load_graph, make_split, normalize_adjacency, AttributedGraph, NodeSplit};
use crate::metrics::{fuse_scores, macro_f1, roc_auc};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Run seeds and directions sequentially and leave wall-clock times out of
    /// the report, so repeated runs produce byte-identical output.
    pub deterministic: bool,
}

/// A finished run: the report plus CSV side files keyed by path relative to
/// the output directory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: ExperimentReport,
    pub files: Vec<(String, String)>,
}

impl RunOutput {
    /// Writes side files, then `report.json` last, each atomically.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        for (rel, body) in &self.files {
            write_atomic(&dir.join(rel), body.as_bytes())?;
        }
        write_atomic(&dir.join("report.json"), self.report.to_json()?.as_bytes())
    }
}

/// Sub-seed for one pipeline stage (SplitMix64 finalizer over seed and tag).
fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const TAG_SPLIT: u64 = 1;
const TAG_GAE: u64 = 2;
const TAG_DETECTOR: u64 = 3;

/// Runs two closures, concurrently unless `sequential`.
fn join<A, B, RA, RB>(sequential: bool, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    if sequential {
        (a(), b())
    } else {
        rayon::join(a, b)
    }
}

struct SeedOutput {
    report: SeedReport,
    files: Vec<(String, String)>,
}

fn test_metrics(scores: &[f64], graph: &AttributedGraph, split: &NodeSplit, threshold: f64) -> Result<(f64, f64)> {
    let s: Vec<f64> = split.test.iter().map(|&i| scores[i]).collect();
    let y: Vec<bool> = split.test.iter().map(|&i| graph.labels()[i]).collect();
    Ok((roc_auc(&s, &y)?, macro_f1(&s, &y, threshold)?))
}

fn run_seed(config: &ExperimentConfig, base_graph: Option<&AttributedGraph>, seed: u64, opts: RunOptions) -> Result<SeedOutput> {
    let started = Instant::now();
    let generated;
    let graph = match (&config.dataset, base_graph) {
        (_, Some(g)) => g,
        (DatasetSource::Synthetic(spec), None) => {
            generated = generate_synthetic(spec, seed).map_err(|e| e.at_stage("generate", seed))?;
            &generated
        }
        (DatasetSource::Files { .. }, None) => unreachable!("file datasets are loaded once up front"),
    };
    let adj = normalize_adjacency(graph);
    let split = make_split(graph, config.split, derive_seed(seed, TAG_SPLIT)).map_err(|e| e.at_stage("split", seed))?;

    let gae_cfg = config.gae.clipped_to(graph.feature_dim());
    let gae = gae_train(graph, &adj, &gae_cfg, derive_seed(seed, TAG_GAE)).map_err(|e| e.at_stage("pretrain", seed))?;
    let ranking = gae
        .model
        .embed(graph, &adj)
        .and_then(|z| compute_bds(&z, config.bds_norm))
        .and_then(|bds| rank_nodes(&bds))
        .map_err(|e| e.at_stage("difficulty", seed))?;

    let input = DetectorInput::new(graph, &adj)?;
    let init = DetectorModel::init(
        config.detector,
        graph.feature_dim(),
        config.hidden,
        derive_seed(seed, TAG_DETECTOR),
    )?;
    let labels = graph.labels();
    let train_dir = |ordering: &[usize], cur| {
        train_with_curriculum(init.clone(), &input, labels, &split, ordering, cur, &config.training)
    };
    let (baseline, (homo, hete)) = join(
        opts.deterministic,
        || train_plain(init.clone(), &input, labels, &split, &config.training).map_err(|e| e.at_stage("baseline", seed)),
        || {
            join(
                opts.deterministic,
                || train_dir(&ranking.q_homo, &config.homo).map_err(|e| e.at_stage("homocl", seed)),
                || train_dir(&ranking.q_hete, &config.hete).map_err(|e| e.at_stage("hetecl", seed)),
            )
        },
    );
    let (baseline, homo, hete) = (baseline?, homo?, hete?);

    let score = |o: &TrainOutcome| anomaly_score(&o.model.forward(&input)?);
    let s_base = score(&baseline)?;
    let s_homo = score(&homo)?;
    let s_hete = score(&hete)?;
    let fused = fuse_scores(config.alpha, &s_homo, &s_hete).map_err(|e| e.at_stage("fusion", seed))?;

    let dir = format!("seed{seed}");
    let mut files = Vec::new();
    let mut variants = Vec::new();
    for (variant, outcome, scores) in [
        (Variant::Baseline, Some(&baseline), &s_base),
        (Variant::HomoCl, Some(&homo), &s_homo),
        (Variant::HeteCl, Some(&hete), &s_hete),
        (Variant::Bcl, None, &fused.score_final),
    ] {
        let (auc, f1) = test_metrics(scores, graph, &split, config.threshold).map_err(|e| e.at_stage("evaluate", seed))?;
        let log_file = outcome.map(|o| {
            let rel = format!("{dir}/log_{variant}.csv");
            files.push((rel.clone(), o.log_csv()));
            rel
        });
        variants.push(VariantMetrics {
            variant,
            auc,
            macro_f1: f1,
            best_epoch: outcome.map(|o| o.best_epoch),
            epochs_run: outcome.map(|o| o.log.len()),
            log_file,
        });
    }

    let bds_file = format!("{dir}/bds.csv");
    files.push((bds_file.clone(), ranking.to_csv()));
    let scores_file = format!("{dir}/scores.csv");
    files.push((scores_file.clone(), scores_csv(graph, &split, [&s_base, &s_homo, &s_hete, &fused.score_final])));

    let mean_where = |want: bool| {
        let v: Vec<f64> = (0..graph.num_nodes()).filter(|&i| labels[i] == want).map(|i| ranking.bds[i]).collect();
        v.iter().sum::<f64>() / v.len().max(1) as f64
    };

    let report = SeedReport {
        seed,
        graph: GraphStats {
            nodes: graph.num_nodes(),
            edges: graph.num_edges(),
            anomalies: graph.num_anomalies(),
        },
        split: SplitStats {
            train: split.train.len(),
            val: split.val.len(),
            test: split.test.len(),
        },
        gae: GaeStats {
            epochs: gae.losses.len(),
            initial_loss: gae.losses[0],
            final_loss: *gae.losses.last().expect("at least one epoch"),
        },
        bds: BdsStats {
            file: bds_file,
            mean_anomaly: mean_where(true),
            mean_normal: mean_where(false),
        },
        variants,
        scores_file,
        wall_clock_secs: (!opts.deterministic).then(|| started.elapsed().as_secs_f64()),
    };
    Ok(SeedOutput { report, files })
}

fn scores_csv(graph: &AttributedGraph, split: &NodeSplit, cols: [&Vec<f64>; 4]) -> String {
    let mut part = vec!["none"; graph.num_nodes()];
    for (name, idx) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
        for &i in idx {
            part[i] = name;
        }
    }
    let mut out = String::from("node_id,split,label,baseline,homocl,hetecl,bcl\n");
    for i in 0..graph.num_nodes() {
        let _ = writeln!(
            out,
            "{i},{},{},{:?},{:?},{:?},{:?}",
            part[i],
            u8::from(graph.labels()[i]),
            cols[0][i],
            cols[1][i],
            cols[2][i],
            cols[3][i]
        );
    }
    out
}

/// End-to-end run over every configured seed: pretrain the autoencoder, rank
/// nodes, train baseline and both curriculum directions, fuse, evaluate on the
/// test split.
pub fn run_bcl(config: &ExperimentConfig, opts: RunOptions) -> Result<RunOutput> {
    config.validate()?;
    let started = Instant::now();
    let loaded = match &config.dataset {
        DatasetSource::Files { edges, features, labels } => Some(load_graph(edges, features, labels)?),
        DatasetSource::Synthetic(_) => None,
    };
    let per_seed = |&seed: &u64| run_seed(config, loaded.as_ref(), seed, opts);
    let outputs: Vec<SeedOutput> = if opts.deterministic {
        config.seeds.iter().map(per_seed).collect::<Result<_>>()?
    } else {
        config.seeds.par_iter().map(per_seed).collect::<Result<_>>()?
    };

    let mut files = Vec::new();
    let mut seeds = Vec::with_capacity(outputs.len());
    for out in outputs {
        files.extend(out.files);
        seeds.push(out.report);
    }
    if seeds.len() != config.seeds.len() {
        return Err(BclError::InvalidArgument("missing seed results".into()));
    }
    let report = ExperimentReport {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        summary: summarize(&seeds),
        seeds,
        wall_clock_secs: (!opts.deterministic).then(|| started.elapsed().as_secs_f64()),
    };
    Ok(RunOutput { report, files })
}
