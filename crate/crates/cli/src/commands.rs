use std::path::{Path, PathBuf};
use std::time::Instant;

use kbarrier::analysis::{
    error_histogram, feature_pairs, mean_slope, metrics, pdp_curve, pdp_surface, MetricsReport,
    Predictor,
};
use kbarrier::coverage::{build_coverage_graph, count_barriers_with, CountOptions};
use kbarrier::dataset::{
    ingest_csv, run_sweep_with_stats, split, Dataset, SplitTag, SweepStats, FEATURE_NAMES,
};
use kbarrier::deployment::{sample, DeploymentSpec, Distribution, RegionSpec, SensorRanges};
use kbarrier::ensemble::{feature_importance, fit_lsboost, importance_csv};
use kbarrier::mlp::{train_lm, AffineMap, MlpModel};
use kbarrier::seed;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const VERSION: &str = match option_env!("KBARRIER_GIT_DESCRIBE") {
    Some(v) => v,
    None => concat!("v", env!("CARGO_PKG_VERSION")),
};

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a ExperimentConfig,
    seeds: Value,
    inputs: Vec<String>,
    outputs: Vec<String>,
    warnings: Vec<String>,
    details: Value,
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| kbarrier::Error::Io { path: path.to_path_buf(), source: e }.into())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| kbarrier::Error::from(e).into())
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| kbarrier::Error::Io { path: dir.to_path_buf(), source: e }.into())
}

fn display(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

fn write_manifest(cfg: &ExperimentConfig, name: &str, manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let path = cfg.output_dir.join(format!("{name}.manifest.json"));
    write_text(&path, &to_json(manifest)?)?;
    Ok(path)
}

fn seeds(cfg: &ExperimentConfig) -> Value {
    json!({
        "master": cfg.master_seed,
        "sweep": cfg.sweep_seed(),
        "split": cfg.split_seed(),
        "init": cfg.init_seed(),
    })
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    cfg.validate()?;
    let sweeps: Vec<_> = cfg.distributions.iter().map(|&d| cfg.sweep_config(d)).collect();
    for s in &sweeps {
        s.validate()?;
    }
    ensure_dir(&cfg.output_dir)?;
    let mut outputs = Vec::new();
    let mut stats = serde_json::Map::new();
    for s in &sweeps {
        let started = Instant::now();
        let (data, st): (Dataset, SweepStats) = run_sweep_with_stats(s)?;
        let data = split(data, cfg.split_seed())?;
        let name = s.distribution.name();
        let csv = cfg.output_dir.join(format!("{name}.csv"));
        let sidecar = cfg.output_dir.join(format!("{name}.split.json"));
        data.write_csv(&csv)?;
        data.write_split_manifest(&sidecar)?;
        let grid = cfg.output_dir.join(format!("{name}.grid.json"));
        write_text(&grid, &to_json(&s.grid())?)?;
        println!(
            "{name}: {} rows, {} trials ({} not proven optimal) in {:.1}s -> {}",
            data.len(),
            st.trials,
            st.inexact_trials,
            started.elapsed().as_secs_f64(),
            csv.display()
        );
        stats.insert(name.into(), json!(st));
        outputs.extend([csv, sidecar, grid]);
    }
    let manifest = RunManifest {
        tool: "kbarrier",
        version: VERSION,
        command: "simulate",
        config: cfg,
        seeds: seeds(cfg),
        inputs: Vec::new(),
        outputs: display(&outputs),
        warnings: Vec::new(),
        details: json!({ "count_stats": stats }),
    };
    write_manifest(cfg, "simulate", &manifest)?;
    Ok(())
}

fn guess_distribution(path: &Path, flag: Option<Distribution>) -> Distribution {
    flag.or_else(|| {
        let stem = path.file_stem()?.to_str()?.to_ascii_lowercase();
        if stem.contains("uniform") {
            Some(Distribution::Uniform)
        } else if stem.contains("gauss") || stem.contains("normal") {
            Some(Distribution::Gaussian)
        } else {
            None
        }
    })
    .unwrap_or(Distribution::Gaussian)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string()
}

/// Loads a dataset and its split: the `<stem>.split.json` sidecar when one
/// sits next to the CSV, otherwise a fresh split from the configured seed.
fn load_split(cfg: &ExperimentConfig, path: &Path, dist: Distribution) -> Result<(Dataset, Option<PathBuf>), CliError> {
    let data = ingest_csv(path, dist)?;
    let sidecar = path.with_file_name(format!("{}.split.json", stem(path)));
    if sidecar.exists() {
        let text = std::fs::read_to_string(&sidecar)
            .map_err(|e| kbarrier::Error::Io { path: sidecar.clone(), source: e })?;
        let mut data = data;
        data.apply_split_manifest(&text)?;
        return Ok((data, Some(sidecar)));
    }
    Ok((split(data, cfg.split_seed())?, None))
}

fn architecture(sizes: &[usize]) -> String {
    sizes.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

fn predict_all(model: &MlpModel, data: &Dataset, idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
    idx.iter()
        .map(|&i| {
            let s = &data.samples[i];
            (s.barriers, model.predict_row(&s.features()))
        })
        .unzip()
}

pub fn train(cfg: &ExperimentConfig, dataset: &Path, dist: Option<Distribution>) -> Result<(), CliError> {
    cfg.validate()?;
    let dist = guess_distribution(dataset, dist);
    let (data, sidecar) = load_split(cfg, dataset, dist)?;
    ensure_dir(&cfg.output_dir)?;
    let tc = cfg.train_config();
    let started = Instant::now();
    let (model, report) = train_lm(&data, &tc)?;

    let mut panels = serde_json::Map::new();
    let all: Vec<usize> = (0..data.len()).collect();
    let sets = [
        ("train", data.indices(SplitTag::Train)),
        ("val", data.indices(SplitTag::Val)),
        ("test", data.indices(SplitTag::Test)),
        ("overall", all.clone()),
    ];
    for (name, idx) in &sets {
        let (obs, pred) = predict_all(&model, &data, idx);
        let m: MetricsReport = metrics(&obs, &pred)?;
        panels.insert((*name).into(), json!(m));
    }
    let (obs, pred) = predict_all(&model, &data, &all);
    let hist = error_histogram(&obs, &pred, cfg.analysis.histogram_bins)?;

    let base = format!("{}.{}", stem(dataset), architecture(&model.layer_sizes));
    let out = |suffix: &str| cfg.output_dir.join(format!("{base}.{suffix}"));
    let paths = [
        out("model.json"),
        out("train_report.json"),
        out("metrics.json"),
        out("errors.csv"),
    ];
    model.save(&paths[0])?;
    write_text(&paths[1], &to_json(&report)?)?;
    write_text(&paths[2], &to_json(&panels)?)?;
    write_text(&paths[3], &hist.to_csv())?;

    let overall = &panels["overall"];
    println!(
        "{}: {} epochs ({:?}), overall R={:.4} RMSE={:.4} bias={:.4} in {:.1}s -> {}",
        architecture(&model.layer_sizes),
        report.epochs_run,
        report.stop_reason,
        overall["r"].as_f64().unwrap_or(f64::NAN),
        overall["rmse"].as_f64().unwrap_or(f64::NAN),
        overall["bias"].as_f64().unwrap_or(f64::NAN),
        started.elapsed().as_secs_f64(),
        paths[0].display()
    );
    let mut inputs = vec![dataset.display().to_string()];
    inputs.extend(sidecar.map(|p| p.display().to_string()));
    let manifest = RunManifest {
        tool: "kbarrier",
        version: VERSION,
        command: "train",
        config: cfg,
        seeds: seeds(cfg),
        inputs,
        outputs: display(&paths),
        warnings: Vec::new(),
        details: json!({ "distribution": dist, "rows": data.len(), "stop_reason": report.stop_reason }),
    };
    write_manifest(cfg, &format!("{base}.train"), &manifest)?;
    Ok(())
}

pub fn explain(
    cfg: &ExperimentConfig,
    dataset: &Path,
    model_path: &Path,
    dist: Option<Distribution>,
) -> Result<(), CliError> {
    cfg.validate()?;
    let dist = guess_distribution(dataset, dist);
    let model = MlpModel::load(model_path)?;
    let data = ingest_csv(dataset, dist)?;
    if model.input_dim() != FEATURE_NAMES.len() {
        return Err(CliError::new(
            "shape",
            format!(
                "model {} takes {} features, datasets have {}",
                model_path.display(),
                model.input_dim(),
                FEATURE_NAMES.len()
            ),
        ));
    }
    ensure_dir(&cfg.output_dir)?;
    let a = &cfg.analysis;
    let base = stem(dataset);
    let mut outputs = Vec::new();
    let mut warnings = Vec::new();

    let ensemble = fit_lsboost(&data, a.boost_stumps, a.boost_rate)?;
    let scores = feature_importance(&ensemble);
    let imp = cfg.output_dir.join(format!("{base}.importance.csv"));
    write_text(&imp, &importance_csv(&scores))?;
    outputs.push(imp);

    let rows: Vec<Vec<f64>> = data.features().iter().map(|f| f.to_vec()).collect();
    for (i, j) in feature_pairs(FEATURE_NAMES.len()) {
        let surface = pdp_surface(&model, &rows, (i, j), a.pdp_grid)?;
        for &f in &surface.degenerate_axes {
            let w = format!("feature {} is constant; its PDP axis has a single point", FEATURE_NAMES[f]);
            eprintln!("warning: {w}");
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        let path = cfg
            .output_dir
            .join(format!("{base}.pdp.{}__{}.csv", FEATURE_NAMES[i], FEATURE_NAMES[j]));
        write_text(&path, &surface.to_csv())?;
        outputs.push(path);
    }

    let mut slopes = serde_json::Map::new();
    for (f, name) in FEATURE_NAMES.iter().enumerate() {
        let (grid, values) = pdp_curve(&model, &rows, f, a.pdp_grid)?;
        slopes.insert((*name).into(), json!(mean_slope(&grid, &values)));
    }
    let slope_path = cfg.output_dir.join(format!("{base}.pdp_slopes.json"));
    write_text(&slope_path, &to_json(&slopes)?)?;
    outputs.push(slope_path);

    for (name, s) in FEATURE_NAMES.iter().zip(&scores) {
        println!("importance {name}: {s:.4}");
    }
    let manifest = RunManifest {
        tool: "kbarrier",
        version: VERSION,
        command: "explain",
        config: cfg,
        seeds: seeds(cfg),
        inputs: vec![dataset.display().to_string(), model_path.display().to_string()],
        outputs: display(&outputs),
        warnings,
        details: json!({ "distribution": dist, "pdp_slopes": slopes }),
    };
    write_manifest(cfg, &format!("{base}.explain"), &manifest)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub task: &'static str,
    pub n_sensors: Option<usize>,
    pub seconds: f64,
}

/// Average wall-clock seconds per Monte Carlo field (sampling, graph and
/// count) for each sensor count, then per surrogate prediction.
pub fn bench_rows(cfg: &ExperimentConfig, model: &MlpModel) -> Result<Vec<BenchRow>, CliError> {
    let b = &cfg.bench;
    let count = CountOptions {
        node_budget: cfg.sweep.node_budget,
        enumeration_budget: cfg.sweep.enumeration_budget,
    };
    let mut rows = Vec::new();
    for (ci, &n) in b.sensor_counts.iter().enumerate() {
        let started = Instant::now();
        for t in 0..b.trials {
            let spec = DeploymentSpec::new(
                RegionSpec::new(b.radius_m),
                n,
                b.distribution,
                SensorRanges::new(b.sensing_range_m, b.tx_range_m),
                seed::derive(cfg.master_seed, &[3, ci as u64, t as u64]),
            );
            let field = sample(&spec)?;
            std::hint::black_box(count_barriers_with(&build_coverage_graph(&field)?, &count));
        }
        rows.push(BenchRow {
            task: "monte_carlo",
            n_sensors: Some(n),
            seconds: started.elapsed().as_secs_f64() / b.trials as f64,
        });
    }
    let area = RegionSpec::new(b.radius_m).area();
    let x = [area, b.sensing_range_m, b.tx_range_m, b.sensor_counts[0] as f64];
    let started = Instant::now();
    for _ in 0..b.predictions {
        std::hint::black_box(model.predict_row(std::hint::black_box(&x)));
    }
    rows.push(BenchRow {
        task: "surrogate",
        n_sensors: None,
        seconds: started.elapsed().as_secs_f64() / b.predictions as f64,
    });
    Ok(rows)
}

pub fn bench(cfg: &ExperimentConfig, model_path: Option<&Path>) -> Result<(), CliError> {
    cfg.validate()?;
    let model = match model_path {
        Some(p) => MlpModel::load(p)?,
        None => default_model(cfg)?,
    };
    ensure_dir(&cfg.output_dir)?;
    let rows = bench_rows(cfg, &model)?;
    let mut csv = String::from("task,n_sensors,seconds\n");
    for r in &rows {
        let n = r.n_sensors.map(|n| n.to_string()).unwrap_or_default();
        csv.push_str(&format!("{},{},{}\n", r.task, n, r.seconds));
        println!("{:<12} {:>6} {:.3e} s", r.task, n, r.seconds);
    }
    let path = cfg.output_dir.join("bench.csv");
    write_text(&path, &csv)?;
    let manifest = RunManifest {
        tool: "kbarrier",
        version: VERSION,
        command: "bench",
        config: cfg,
        seeds: seeds(cfg),
        inputs: model_path.map(|p| vec![p.display().to_string()]).unwrap_or_default(),
        outputs: vec![path.display().to_string()],
        warnings: Vec::new(),
        details: json!({ "rows": rows }),
    };
    write_manifest(cfg, "bench", &manifest)?;
    Ok(())
}

/// Untrained network of the configured shape; a forward pass costs the same.
fn default_model(cfg: &ExperimentConfig) -> Result<MlpModel, CliError> {
    let sizes = cfg.train_config().layer_sizes(FEATURE_NAMES.len());
    let input = AffineMap {
        min: vec![0.0; FEATURE_NAMES.len()],
        max: vec![1.0; FEATURE_NAMES.len()],
    };
    let output = AffineMap {
        min: vec![0.0],
        max: vec![1.0],
    };
    Ok(MlpModel::random(&sizes, input, output, cfg.init_seed())?)
}

pub fn predict(model_path: &Path, x: [f64; 4]) -> Result<(), CliError> {
    let model = MlpModel::load(model_path)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CliError::new("validation", "features must be finite"));
    }
    println!("{}", model.predict(&x)?);
    Ok(())
}
