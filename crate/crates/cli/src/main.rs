use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bcl_core::experiment::report::{write_atomic, Variant};
use bcl_core::experiment::{generate_synthetic, run_bcl, sweep, DatasetSource, ExperimentConfig, RunOptions, SweepAxis};
use bcl_core::graph::{read_labels, read_scores, save_graph};
use bcl_core::metrics::{macro_f1, roc_auc};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bcl", version, about = "Bi-directional curriculum learning for graph anomaly detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write report.json plus CSV side files.
    Run(RunArgs),
    /// Run a config once per value along one hyperparameter axis.
    Sweep(SweepArgs),
    /// Write a synthetic dataset as edge, feature and label files.
    Gen(GenArgs),
    /// Score a file of anomaly scores against labels.
    Eval(EvalArgs),
}

#[derive(Args)]
struct Common {
    /// Experiment config file (defaults apply when omitted).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Replace the configured seed list with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// F1 decision threshold on the anomaly probability.
    #[arg(long)]
    threshold: Option<f64>,
    /// Single-threaded execution and no timings in the report.
    #[arg(long)]
    deterministic: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// alpha, lambda0, t (fraction of the epoch budget) or pacing.
    #[arg(long)]
    axis: SweepAxis,
    /// Comma-separated values for the axis.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    values: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Config whose synthetic dataset settings are used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// One score per line.
    #[arg(long)]
    scores: PathBuf,
    /// One 0/1 label per line.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_file(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn resolve(common: &Common) -> Result<(ExperimentConfig, RunOptions)> {
    let mut cfg = load_config(common.config.as_deref())?;
    if let Some(s) = common.seed {
        cfg.seeds = vec![s];
    }
    if let Some(t) = common.threshold {
        cfg.threshold = t;
    }
    cfg.validate()?;
    Ok((cfg, RunOptions { deterministic: common.deterministic }))
}

fn print_summary(report: &bcl_core::experiment::ExperimentReport) {
    println!("{:<10} {:>9} {:>9} {:>9} {:>9}", "variant", "auc", "auc_sd", "macro_f1", "f1_sd");
    for v in Variant::ALL {
        if let Some(s) = report.summary_for(v) {
            println!(
                "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
                v.to_string(),
                s.mean_auc,
                s.std_auc,
                s.mean_macro_f1,
                s.std_macro_f1
            );
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let (cfg, opts) = resolve(&args.common)?;
    let output = run_bcl(&cfg, opts)?;
    output.write_to(&args.out)?;
    print_summary(&output.report);
    println!("report: {}", args.out.join("report.json").display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let (cfg, opts) = resolve(&args.common)?;
    let result = sweep(&cfg, args.axis, &args.values, opts)?;
    for point in &result.points {
        let dir = args.out.join(format!("{}={}", result.axis, point.value));
        point.output.write_to(&dir)?;
    }
    let csv = result.summary_csv();
    write_atomic(&args.out.join("summary.csv"), csv.as_bytes())?;
    print!("{csv}");
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let DatasetSource::Synthetic(spec) = &cfg.dataset else {
        bail!("gen needs a synthetic dataset config");
    };
    let graph = generate_synthetic(spec, args.seed)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    save_graph(
        &graph,
        &args.out.join("edges.txt"),
        &args.out.join("features.txt"),
        &args.out.join("labels.txt"),
    )?;
    println!(
        "{} nodes, {} edges, {} anomalies -> {}",
        graph.num_nodes(),
        graph.num_edges(),
        graph.num_anomalies(),
        args.out.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let scores = read_scores(&args.scores)?;
    let labels = read_labels(&args.labels)?;
    if scores.len() != labels.len() {
        bail!("{} scores but {} labels", scores.len(), labels.len());
    }
    let out = serde_json::json!({
        "n": scores.len(),
        "auc": roc_auc(&scores, &labels)?,
        "macro_f1": macro_f1(&scores, &labels, args.threshold)?,
        "threshold": args.threshold,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Eval(a) => cmd_eval(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn sweep_values_split_on_commas() {
        let cli = Cli::try_parse_from(["bcl", "sweep", "--axis", "t", "--values", "0.1,0.5", "--out", "x"]).unwrap();
        let Command::Sweep(a) = cli.command else { panic!("expected sweep") };
        assert_eq!(a.axis, SweepAxis::T);
        assert_eq!(a.values, ["0.1", "0.5"]);
    }

    #[test]
    fn flags_override_seeds_and_threshold() {
        let common = Common {
            config: None,
            seed: Some(9),
            threshold: Some(0.7),
            deterministic: true,
        };
        let (cfg, opts) = resolve(&common).unwrap();
        assert_eq!(cfg.seeds, [9]);
        assert_eq!(cfg.threshold, 0.7);
        assert!(opts.deterministic);
    }
}
