use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bcl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcl")).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMALL: &str = "\
# tiny synthetic run
synth.num_nodes = 100
synth.p_intra = 0.15
synth.p_inter = 0.01
synth.feature_dim = 6
synth.anomaly_rate = 0.1
hidden = 8
seeds = 0,1
epochs = 30
gae.epochs = 30
";

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.cfg");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_twice_deterministic_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let stdout = ok(&bcl(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--deterministic"]));
        assert!(stdout.contains("bcl"), "{stdout}");
    }
    let ra = fs::read(a.join("report.json")).unwrap();
    assert_eq!(ra, fs::read(b.join("report.json")).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(report["seeds"].as_array().unwrap().len(), 2);
    assert_eq!(report["seeds"][0]["variants"].as_array().unwrap().len(), 4);
    assert!(a.join("seed1/log_hetecl.csv").is_file());
}

#[test]
fn seed_and_threshold_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("o");
    ok(&bcl(&[
        "run", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "5", "--threshold", "0.3",
    ]));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seeds"], serde_json::json!([5]));
    assert_eq!(report["config"]["threshold"], serde_json::json!(0.3));
    assert!(report["seeds"][0]["wall_clock_secs"].is_number());
}

#[test]
fn sweep_writes_reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("sw");
    let stdout = ok(&bcl(&[
        "sweep", "--config", &cfg, "--axis", "pacing", "--values", "linear,root,geometric", "--out",
        out.to_str().unwrap(), "--deterministic",
    ]));
    assert_eq!(stdout.lines().count(), 4);
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(csv, stdout);
    for v in ["linear", "root", "geometric"] {
        assert!(out.join(format!("pacing={v}/report.json")).is_file());
    }
    let bad = bcl(&["sweep", "--config", &cfg, "--axis", "alpha", "--values", "1.5", "--out", out.to_str().unwrap()]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("sweep range"));
}

#[test]
fn gen_then_eval() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let data = dir.path().join("data");
    let stdout = ok(&bcl(&["gen", "--config", &cfg, "--seed", "3", "--out", data.to_str().unwrap()]));
    assert!(stdout.starts_with("100 nodes"), "{stdout}");
    let labels = fs::read_to_string(data.join("labels.txt")).unwrap();
    assert_eq!(labels.lines().filter(|l| *l == "1").count(), 10);

    // score = label gives a perfect ranking
    let scores = dir.path().join("scores.txt");
    let body: String = labels.lines().map(|l| format!("{l}.0\n")).collect();
    fs::write(&scores, body).unwrap();
    let labels_path = data.join("labels.txt");
    let out = ok(&bcl(&[
        "eval", "--scores", scores.to_str().unwrap(), "--labels", labels_path.to_str().unwrap(),
    ]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["auc"], serde_json::json!(1.0));
    assert_eq!(v["macro_f1"], serde_json::json!(1.0));
    assert_eq!(v["n"], serde_json::json!(100));

    // a run on the generated files
    let file_cfg = write_config(
        dir.path(),
        "dataset = files\nedges = data/edges.txt\nfeatures = data/features.txt\nlabels = data/labels.txt\nseeds = 0\nepochs = 10\ngae.epochs = 10\nhidden = 4\n",
    );
    ok(&bcl(&["run", "--config", &file_cfg, "--out", dir.path().join("fr").to_str().unwrap()]));
}

#[test]
fn bad_inputs_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "alpah = 0.3\n");
    let out = bcl(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpah"));

    let s = dir.path().join("s.txt");
    let l = dir.path().join("l.txt");
    fs::write(&s, "0.1\n0.2\n").unwrap();
    fs::write(&l, "1\n").unwrap();
    let out = bcl(&["eval", "--scores", s.to_str().unwrap(), "--labels", l.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(!dir.path().join("report.json").exists());
}
