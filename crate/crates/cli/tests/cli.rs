use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TINY: &str = r#"
master_seed = 7
distributions = ["gaussian"]
[sweep]
radii_m = [40.0, 60.0]
sensor_counts = [30, 45, 60]
sensing_ranges_m = [15.0, 20.0]
tx_rule = "double"
trials_per_config = 2
allow_out_of_range = true
[train]
hidden_layers = [4]
restarts = 2
max_epochs = 50
[analysis]
pdp_grid = 5
boost_stumps = 10
[bench]
sensor_counts = [20, 40]
trials = 1
predictions = 100
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kbarrier"));
    c.env_remove("KBARRIER_OUTPUT_DIR");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Asserts a failure reported as exactly one JSON line and returns its class.
fn error_class(out: &Output) -> String {
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    let lines: Vec<_> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {stderr}");
    let v: Value = serde_json::from_str(lines[0]).unwrap();
    assert!(v["message"].is_string());
    v["error"].as_str().unwrap().to_string()
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.toml"), TINY).unwrap();
    dir
}

fn simulate(dir: &Path, out: &str) -> PathBuf {
    ok(dir, &["--config", "tiny.toml", "--output-dir", out, "simulate"]);
    dir.join(out)
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir = setup();
    let a = simulate(dir.path(), "a");
    let b = simulate(dir.path(), "b");
    for f in ["gaussian.csv", "gaussian.split.json", "gaussian.grid.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let csv = std::fs::read_to_string(a.join("gaussian.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("simulate.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["seeds"]["master"], 7);
    assert_eq!(manifest["details"]["count_stats"]["gaussian"]["trials"], 24);
}

#[test]
fn seed_flag_changes_the_data() {
    let dir = setup();
    let a = simulate(dir.path(), "a");
    ok(dir.path(), &["--config", "tiny.toml", "--seed", "8", "--output-dir", "b", "simulate"]);
    assert_ne!(
        std::fs::read(a.join("gaussian.csv")).unwrap(),
        std::fs::read(dir.path().join("b/gaussian.csv")).unwrap()
    );
}

#[test]
fn zero_trials_is_a_validation_error_and_writes_nothing() {
    let dir = setup();
    let out = run(
        dir.path(),
        &["--config", "tiny.toml", "--output-dir", "o", "simulate", "--trials", "0"],
    );
    assert_eq!(error_class(&out), "validation");
    assert!(!dir.path().join("o").exists());
}

#[test]
fn bad_config_is_reported() {
    let dir = setup();
    std::fs::write(dir.path().join("bad.toml"), "no_such_key = 1\n").unwrap();
    let out = run(dir.path(), &["--config", "bad.toml", "simulate"]);
    assert_eq!(error_class(&out), "config");
}

#[test]
fn train_explain_predict_pipeline() {
    let dir = setup();
    let d = dir.path();
    simulate(d, "o");
    ok(d, &["--config", "tiny.toml", "--output-dir", "o", "train", "o/gaussian.csv"]);
    let model = d.join("o/gaussian.4-4-1.model.json");
    assert!(model.exists());
    let metrics: Value = serde_json::from_str(
        &std::fs::read_to_string(d.join("o/gaussian.4-4-1.metrics.json")).unwrap(),
    )
    .unwrap();
    for panel in ["train", "val", "test", "overall"] {
        assert!(metrics[panel]["rmse"].as_f64().unwrap() >= 0.0, "{panel}");
    }
    assert_eq!(metrics["overall"]["n"], 12);
    let hist = std::fs::read_to_string(d.join("o/gaussian.4-4-1.errors.csv")).unwrap();
    assert_eq!(hist.lines().count(), 21);

    ok(
        d,
        &["--config", "tiny.toml", "--output-dir", "o", "explain", "o/gaussian.csv", model.to_str().unwrap()],
    );
    let pdps: Vec<_> = std::fs::read_dir(d.join("o"))
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("gaussian.pdp.") && n.ends_with(".csv"))
        .collect();
    assert_eq!(pdps.len(), 6, "{pdps:?}");
    let imp = std::fs::read_to_string(d.join("o/gaussian.importance.csv")).unwrap();
    assert_eq!(imp.lines().count(), 5);
    assert!(imp.starts_with("feature,score\n"));

    let out = ok(
        d,
        &["predict", model.to_str().unwrap(), "--area", "5026.5", "--rs", "15", "--rtx", "30", "--sensors", "45"],
    );
    let y: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(y.is_finite());
}

#[test]
fn train_honours_the_split_sidecar() {
    let dir = setup();
    let d = dir.path();
    simulate(d, "o");
    ok(d, &["--config", "tiny.toml", "--output-dir", "o", "train", "o/gaussian.csv"]);
    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(d.join("o/gaussian.4-4-1.train.manifest.json")).unwrap(),
    )
    .unwrap();
    let inputs = manifest["inputs"].as_array().unwrap();
    assert!(inputs.iter().any(|i| i.as_str().unwrap().ends_with("gaussian.split.json")));
}

#[test]
fn empty_hidden_layers_are_rejected() {
    let dir = setup();
    let d = dir.path();
    std::fs::write(d.join("nolayers.toml"), "[train]\nhidden_layers = []\n").unwrap();
    std::fs::write(d.join("x.csv"), "area,sensing_range,transmission_range,sensors,barriers\n").unwrap();
    let out = run(d, &["--config", "nolayers.toml", "train", "x.csv"]);
    assert_eq!(error_class(&out), "validation");
}

#[test]
fn missing_model_is_not_found() {
    let dir = setup();
    let out = run(
        dir.path(),
        &["predict", "absent.json", "--area", "1", "--rs", "1", "--rtx", "2", "--sensors", "3"],
    );
    assert_eq!(error_class(&out), "not_found");
}

#[test]
fn malformed_dataset_reports_the_line() {
    let dir = setup();
    let d = dir.path();
    std::fs::write(
        d.join("bad.csv"),
        "area,sensing_range,transmission_range,sensors,barriers\n5000,15,30,100,20\n5000,15,abc,100,20\n",
    )
    .unwrap();
    let out = run(d, &["--output-dir", "o", "train", "bad.csv"]);
    let stderr = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(error_class(&out), "parse");
    assert!(stderr.contains("bad.csv:3:"), "{stderr}");
}

#[test]
fn bench_writes_one_row_per_sensor_count_plus_surrogate() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["--config", "tiny.toml", "--output-dir", "o", "bench"]);
    let csv = std::fs::read_to_string(d.join("o/bench.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "task,n_sensors,seconds");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("monte_carlo,20,"));
    assert!(lines[3].starts_with("surrogate,,"));
}

#[test]
fn output_dir_flag_beats_environment() {
    let dir = setup();
    let d = dir.path();
    let out = bin()
        .current_dir(d)
        .env("KBARRIER_OUTPUT_DIR", d.join("env"))
        .args(["--config", "tiny.toml", "bench"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.join("env/bench.csv").exists());
    let out = bin()
        .current_dir(d)
        .env("KBARRIER_OUTPUT_DIR", d.join("env2"))
        .args(["--config", "tiny.toml", "--output-dir", "flag", "bench"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(d.join("flag/bench.csv").exists());
    assert!(!d.join("env2").exists());
}

#[test]
fn constant_feature_warns_about_degenerate_axes() {
    let dir = setup();
    let d = dir.path();
    let mut csv = String::from("area,sensing_range,transmission_range,sensors,barriers\n");
    for i in 0..12 {
        csv.push_str(&format!("5026.5,{},30,{},{}\n", 10 + i % 4, 100 + 20 * i, 10 + i));
    }
    std::fs::write(d.join("flat.csv"), csv).unwrap();
    ok(d, &["--config", "tiny.toml", "--output-dir", "o", "train", "flat.csv"]);
    let out = ok(
        d,
        &["--config", "tiny.toml", "--output-dir", "o", "explain", "flat.csv", "o/flat.4-4-1.model.json"],
    );
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("warning: feature area is constant"), "{stderr}");
    assert!(stderr.contains("feature transmission_range is constant"), "{stderr}");
    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(d.join("o/flat.explain.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["warnings"].as_array().unwrap().len(), 2);
}

#[test]
fn bench_runs_with_no_config() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["bench"]);
    let csv = std::fs::read_to_string(dir.path().join("out/bench.csv")).unwrap();
    let rows: Vec<_> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for (row, n) in rows.iter().zip(["100", "200", "300"]) {
        assert!(row.starts_with(&format!("monte_carlo,{n},")));
    }
}
