//! Feature/label tables: Monte Carlo sweeps, CSV ingest and emit, and the
//! seeded train/validation/test split.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{build_coverage_graph, count_barriers_with, CountOptions};
use crate::deployment::{sample, DeploymentSpec, Distribution, RegionSpec, SensorRanges};
use crate::error::{Error, Result};
use crate::mt::Mt19937;
use crate::seed;

pub const CSV_HEADER: &str = "area,sensing_range,transmission_range,sensors,barriers";

pub const FEATURE_NAMES: [&str; 4] = ["area", "sensing_range", "transmission_range", "sensors"];

/// Slack allowed on `Rtx ≥ 2·Rs` for values that went through a text file.
const TX_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub area_m2: f64,
    pub sensing_range_m: f64,
    pub tx_range_m: f64,
    pub n_sensors: usize,
    /// Mean barrier count over the simulated trials.
    pub barriers: f64,
}

impl Sample {
    pub fn features(&self) -> [f64; 4] {
        [
            self.area_m2,
            self.sensing_range_m,
            self.tx_range_m,
            self.n_sensors as f64,
        ]
    }

    pub fn radius_m(&self) -> f64 {
        (self.area_m2 / PI).sqrt()
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive, got {v}"))
            }
        };
        positive("area", self.area_m2)?;
        positive("sensing range", self.sensing_range_m)?;
        positive("transmission range", self.tx_range_m)?;
        if self.n_sensors == 0 {
            return Err("sensor count must be positive".into());
        }
        if self.tx_range_m < 2.0 * self.sensing_range_m - TX_SLACK {
            return Err(format!(
                "transmission range {} is below twice the sensing range {}",
                self.tx_range_m, self.sensing_range_m
            ));
        }
        if !(self.barriers.is_finite() && self.barriers >= 0.0) {
            return Err(format!("barrier count must be non-negative, got {}", self.barriers));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Val,
    Test,
}

impl SplitTag {
    pub fn name(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Simulated,
    Ingested,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    /// Per-row split assignment, absent until [`split`] runs.
    pub split: Option<Vec<SplitTag>>,
    pub distribution: Distribution,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, distribution: Distribution, provenance: Provenance) -> Self {
        Dataset {
            samples,
            split: None,
            distribution,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Row indices carrying `tag`. Empty when the dataset is not split.
    pub fn indices(&self, tag: SplitTag) -> Vec<usize> {
        match &self.split {
            Some(tags) => (0..tags.len()).filter(|&i| tags[i] == tag).collect(),
            None => Vec::new(),
        }
    }

    /// Features and labels for the given rows.
    pub fn rows(&self, idx: &[usize]) -> (Vec<[f64; 4]>, Vec<f64>) {
        idx.iter()
            .map(|&i| (self.samples[i].features(), self.samples[i].barriers))
            .unzip()
    }

    pub fn features(&self) -> Vec<[f64; 4]> {
        self.samples.iter().map(Sample::features).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.barriers).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.area_m2, s.sensing_range_m, s.tx_range_m, s.n_sensors, s.barriers
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Sidecar JSON mapping row index to split tag.
    pub fn split_manifest(&self) -> Result<String> {
        let tags = self
            .split
            .as_ref()
            .ok_or_else(|| Error::Validation("dataset has not been split".into()))?;
        let map: BTreeMap<usize, &str> = tags.iter().enumerate().map(|(i, t)| (i, t.name())).collect();
        Ok(serde_json::to_string_pretty(&map)?)
    }

    pub fn write_split_manifest(&self, path: &Path) -> Result<()> {
        let text = self.split_manifest()?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Applies a manifest produced by [`Dataset::split_manifest`].
    pub fn apply_split_manifest(&mut self, json: &str) -> Result<()> {
        let map: BTreeMap<usize, SplitTag> = serde_json::from_str(json)?;
        if map.len() != self.len() || map.keys().enumerate().any(|(i, &k)| i != k) {
            return Err(Error::Validation(format!(
                "split manifest covers {} rows, dataset has {}",
                map.len(),
                self.len()
            )));
        }
        self.split = Some(map.into_values().collect());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TxRule {
    /// Rtx = 2·Rs.
    Double,
    /// Every listed Rtx for every Rs; each must be at least 2·Rs.
    Explicit(Vec<f64>),
    /// Rtx = 2·Rs plus every listed value strictly above it.
    DoubleAndAbove(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub radius_m: f64,
    pub sensing_range_m: f64,
    pub tx_range_m: f64,
    pub n_sensors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub radii_m: Vec<f64>,
    pub sensor_counts: Vec<usize>,
    pub sensing_ranges_m: Vec<f64>,
    pub tx_rule: TxRule,
    pub trials_per_config: usize,
    pub distribution: Distribution,
    pub master_seed: u64,
    /// Evenly thinned to this many grid points when the full grid is larger.
    pub max_rows: Option<usize>,
    /// Skips the check that every value sits inside the studied ranges.
    pub allow_out_of_range: bool,
    /// Search budget of the barrier counter for each trial.
    pub count: CountOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            radii_m: vec![40.0, 60.0, 80.0, 100.0, 127.0],
            sensor_counts: vec![100, 200, 300, 400],
            sensing_ranges_m: vec![15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            tx_rule: TxRule::DoubleAndAbove(vec![30.0, 40.0, 50.0, 60.0, 70.0, 80.0]),
            trials_per_config: 50,
            distribution: Distribution::Gaussian,
            master_seed: 0,
            max_rows: Some(182),
            allow_out_of_range: false,
            count: CountOptions::sweep(),
        }
    }
}

fn check_range(name: &str, values: &[f64], lo: f64, hi: f64, out: &mut Vec<String>) {
    for &v in values {
        if !(v.is_finite() && (lo..=hi).contains(&v)) {
            out.push(format!("{name} {v} outside [{lo}, {hi}]"));
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radii_m.is_empty() || self.sensor_counts.is_empty() || self.sensing_ranges_m.is_empty()
        {
            return Err(Error::Validation("sweep grids must be non-empty".into()));
        }
        if self.trials_per_config == 0 {
            return Err(Error::Validation("trials_per_config must be at least 1".into()));
        }
        if self.max_rows == Some(0) {
            return Err(Error::Validation("max_rows must be at least 1".into()));
        }
        let mut problems = Vec::new();
        for &r in &self.radii_m {
            if !(r.is_finite() && r > 0.0) {
                problems.push(format!("radius {r} is not positive"));
            }
        }
        for &rs in &self.sensing_ranges_m {
            if !(rs.is_finite() && rs > 0.0) {
                problems.push(format!("sensing range {rs} is not positive"));
            }
        }
        if self.sensor_counts.contains(&0) {
            problems.push("sensor count 0".into());
        }
        if let TxRule::Explicit(list) = &self.tx_rule {
            for &rs in &self.sensing_ranges_m {
                for &tx in list {
                    if tx < 2.0 * rs {
                        problems.push(format!("Rs={rs} with Rtx={tx} violates Rtx >= 2*Rs"));
                    }
                }
            }
        }
        if !self.allow_out_of_range {
            check_range("radius", &self.radii_m, 40.0, 127.0, &mut problems);
            check_range("sensing range", &self.sensing_ranges_m, 15.0, 40.0, &mut problems);
            let counts: Vec<f64> = self.sensor_counts.iter().map(|&n| n as f64).collect();
            check_range("sensor count", &counts, 100.0, 400.0, &mut problems);
            if let TxRule::Explicit(list) | TxRule::DoubleAndAbove(list) = &self.tx_rule {
                check_range("transmission range", list, 30.0, 80.0, &mut problems);
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems.join("; ")))
        }
    }

    /// Grid points in sweep order: radius, then Rs, then Rtx, then N.
    pub fn grid(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &radius_m in &self.radii_m {
            for &rs in &self.sensing_ranges_m {
                let txs: Vec<f64> = match &self.tx_rule {
                    TxRule::Double => vec![2.0 * rs],
                    TxRule::Explicit(list) => list.clone(),
                    TxRule::DoubleAndAbove(list) => std::iter::once(2.0 * rs)
                        .chain(list.iter().copied().filter(|&t| t > 2.0 * rs))
                        .collect(),
                };
                for tx in txs {
                    for &n in &self.sensor_counts {
                        out.push(GridPoint {
                            radius_m,
                            sensing_range_m: rs,
                            tx_range_m: tx,
                            n_sensors: n,
                        });
                    }
                }
            }
        }
        match self.max_rows {
            Some(m) if m < out.len() => {
                let total = out.len();
                (0..m).map(|i| out[i * total / m].clone()).collect()
            }
            _ => out,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepStats {
    pub trials: usize,
    /// Trials whose count was not proven optimal within the search budget.
    pub inexact_trials: usize,
    /// Sum over inexact trials of (upper bound − count).
    pub total_gap: usize,
}

pub fn run_sweep(config: &SweepConfig) -> Result<Dataset> {
    run_sweep_with_stats(config).map(|(d, _)| d)
}

pub fn run_sweep_with_stats(config: &SweepConfig) -> Result<(Dataset, SweepStats)> {
    config.validate()?;
    let grid = config.grid();
    let trials = config.trials_per_config;
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|row| (0..trials).map(move |t| (row, t)))
        .collect();
    let results: Vec<Result<(usize, usize, bool)>> = jobs
        .par_iter()
        .map(|&(row, t)| {
            let p = &grid[row];
            let spec = DeploymentSpec::new(
                RegionSpec::new(p.radius_m),
                p.n_sensors,
                config.distribution,
                SensorRanges::new(p.sensing_range_m, p.tx_range_m),
                seed::derive(config.master_seed, &[row as u64, t as u64]),
            );
            let field = sample(&spec)?;
            let bc = count_barriers_with(&build_coverage_graph(&field)?, &config.count);
            Ok((bc.k, bc.upper_bound, bc.exact))
        })
        .collect();

    let mut stats = SweepStats::default();
    let mut sums = vec![0usize; grid.len()];
    for (&(row, _), r) in jobs.iter().zip(results) {
        let (k, ub, exact) = r?;
        sums[row] += k;
        stats.trials += 1;
        if !exact {
            stats.inexact_trials += 1;
            stats.total_gap += ub - k;
        }
    }
    let samples = grid
        .iter()
        .zip(sums)
        .map(|(p, sum)| Sample {
            area_m2: RegionSpec::new(p.radius_m).area(),
            sensing_range_m: p.sensing_range_m,
            tx_range_m: p.tx_range_m,
            n_sensors: p.n_sensors,
            barriers: sum as f64 / trials as f64,
        })
        .collect();
    Ok((
        Dataset::new(samples, config.distribution, Provenance::Simulated),
        stats,
    ))
}

/// Accepted header spellings per column, after lower-casing and dropping
/// everything but letters and digits.
const HEADER_SYNONYMS: [(usize, &[&str]); 5] = [
    (0, &["area", "aream2", "regionarea", "areaofregion", "a"]),
    (1, &["sensingrange", "sensingrangem", "rs", "sensing"]),
    (2, &["transmissionrange", "transmissionrangem", "txrangem", "txrange", "rtx", "tx", "transmission"]),
    (3, &["sensors", "nsensors", "numberofsensors", "sensorcount", "nodes", "n"]),
    (4, &["barriers", "kbarriers", "numberofbarriers", "numberofkbarriers", "barrier", "k"]),
];

fn header_key(s: &str) -> String {
    s.chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

/// Column position of each canonical field, or `None` if no header cell is
/// recognised (the file is then read in canonical order).
fn map_header(cells: &[String]) -> std::result::Result<Option<[usize; 5]>, String> {
    let mut slots = [None; 5];
    let mut recognised = 0;
    for (col, cell) in cells.iter().enumerate() {
        let key = header_key(cell);
        if let Some(&(field, _)) = HEADER_SYNONYMS.iter().find(|(_, names)| names.contains(&key.as_str())) {
            if slots[field].is_some() {
                return Err(format!("column {:?} duplicates field {}", cell, CSV_HEADER.split(',').nth(field).unwrap_or("?")));
            }
            slots[field] = Some(col);
            recognised += 1;
        }
    }
    if recognised == 0 {
        return Ok(None);
    }
    let mut out = [0; 5];
    for (field, slot) in slots.iter().enumerate() {
        out[field] = slot.ok_or_else(|| {
            format!(
                "header lacks a column for {}",
                CSV_HEADER.split(',').nth(field).unwrap_or("?")
            )
        })?;
    }
    Ok(Some(out))
}

pub fn ingest_csv(path: &Path, distribution: Distribution) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path, distribution)
}

/// Parses dataset CSV text; `path` only labels diagnostics.
pub fn parse_csv(text: &str, path: &Path, distribution: Distribution) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        None => return Err(err(1, "empty file, expected a header".into())),
        Some(r) => r.map_err(|e| err(1, e.to_string()))?,
    };
    let cells: Vec<String> = header.iter().map(str::to_owned).collect();
    if cells.len() != 5 {
        return Err(err(1, format!("expected 5 columns, found {}", cells.len())));
    }
    let order = map_header(&cells).map_err(|m| err(1, m))?.unwrap_or([0, 1, 2, 3, 4]);

    let mut samples = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            err(line, e.to_string())
        })?;
        let line = rec.position().map_or(samples.len() + 2, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 5 {
            return Err(err(line, format!("expected 5 columns, found {}", rec.len())));
        }
        let mut v = [0.0; 5];
        for (field, &col) in order.iter().enumerate() {
            let cell = &rec[col];
            v[field] = cell
                .parse::<f64>()
                .map_err(|_| err(line, format!("not a number: {cell:?}")))?;
        }
        let n = v[3];
        if !(n.is_finite() && n >= 1.0 && n.fract() == 0.0) {
            return Err(err(line, format!("sensor count must be a positive integer, got {n}")));
        }
        let s = Sample {
            area_m2: v[0],
            sensing_range_m: v[1],
            tx_range_m: v[2],
            n_sensors: n as usize,
            barriers: v[4],
        };
        s.validate().map_err(|m| err(line, m))?;
        samples.push(s);
    }
    if samples.is_empty() {
        return Err(err(2, "no data rows".into()));
    }
    Ok(Dataset::new(samples, distribution, Provenance::Ingested))
}

/// Train/validation/test row counts for `n` rows: validation and test get
/// 15% and 30% rounded to nearest, train takes the remainder.
pub fn split_counts(n: usize) -> (usize, usize, usize) {
    let val = (n as f64 * 0.15).round() as usize;
    let test = (n as f64 * 0.30).round() as usize;
    (n - val - test, val, test)
}

pub const MIN_SPLIT_ROWS: usize = 10;

/// Shuffles rows with a Mersenne Twister seeded by `seed` and tags the first
/// 55% train, the next 15% validation and the last 30% test.
pub fn split(mut dataset: Dataset, seed: u32) -> Result<Dataset> {
    let n = dataset.len();
    if n < MIN_SPLIT_ROWS {
        return Err(Error::Validation(format!(
            "need at least {MIN_SPLIT_ROWS} rows to split, got {n}"
        )));
    }
    let (train, val, _) = split_counts(n);
    let perm = Mt19937::new(seed).permutation(n);
    let mut tags = vec![SplitTag::Test; n];
    for (pos, &row) in perm.iter().enumerate() {
        tags[row] = if pos < train {
            SplitTag::Train
        } else if pos < train + val {
            SplitTag::Val
        } else {
            SplitTag::Test
        };
    }
    dataset.split = Some(tags);
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> Dataset {
        let samples = (0..n)
            .map(|i| Sample {
                area_m2: 5026.548245743669 + i as f64,
                sensing_range_m: 15.0,
                tx_range_m: 30.0,
                n_sensors: 100 + i,
                barriers: i as f64 / 3.0,
            })
            .collect();
        Dataset::new(samples, Distribution::Uniform, Provenance::Simulated)
    }

    #[test]
    fn split_count_examples() {
        assert_eq!(split_counts(182), (100, 27, 55));
        assert_eq!(split_counts(100), (55, 15, 30));
    }

    #[test]
    fn split_is_seeded() {
        let a = split(rows(50), 3).unwrap();
        let b = split(rows(50), 3).unwrap();
        let c = split(rows(50), 4).unwrap();
        assert_eq!(a.split, b.split);
        assert_ne!(a.split, c.split);
        assert_eq!(a.indices(SplitTag::Val).len(), 8);
        assert!(split(rows(9), 1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let d = rows(12);
        let back = parse_csv(&d.to_csv(), Path::new("x.csv"), Distribution::Uniform).unwrap();
        assert_eq!(back.samples, d.samples);
    }

    #[test]
    fn empty_file_names_line_one() {
        match parse_csv("", Path::new("e.csv"), Distribution::Uniform) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_row_is_named() {
        let text = format!("{CSV_HEADER}\n5026.5,15,30,100,3\n5026.5,20,30,100,3\n");
        match parse_csv(&text, Path::new("bad.csv"), Distribution::Uniform) {
            Err(Error::Parse { line: 3, message, .. }) => assert!(message.contains("twice")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn header_synonyms_and_order() {
        let text = "N,Rs,Rtx,Area,Barriers\n100,15,30,5026.5,4.5\n";
        let d = parse_csv(text, Path::new("p.csv"), Distribution::Gaussian).unwrap();
        assert_eq!(d.samples[0].n_sensors, 100);
        assert_eq!(d.samples[0].area_m2, 5026.5);
        assert_eq!(d.samples[0].barriers, 4.5);

        let text = "c1,c2,c3,c4,c5\n5026.5,15,30,100,2\n";
        let d = parse_csv(text, Path::new("p.csv"), Distribution::Gaussian).unwrap();
        assert_eq!(d.samples[0].n_sensors, 100);
    }

    #[test]
    fn malformed_cells() {
        let text = format!("{CSV_HEADER}\n5026.5,15,30,abc,2\n");
        assert!(matches!(
            parse_csv(&text, Path::new("m.csv"), Distribution::Gaussian),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = format!("{CSV_HEADER}\n5026.5,15,30,100\n");
        assert!(matches!(
            parse_csv(&text, Path::new("m.csv"), Distribution::Gaussian),
            Err(Error::Parse { line: 2, .. })
        ));
        let text = format!("{CSV_HEADER}\n5026.5,15,30,100.5,2\n");
        assert!(parse_csv(&text, Path::new("m.csv"), Distribution::Gaussian).is_err());
    }

    #[test]
    fn default_grid_has_182_rows() {
        let cfg = SweepConfig::default();
        cfg.validate().unwrap();
        let grid = cfg.grid();
        assert_eq!(grid.len(), 182);
        assert!(grid.iter().all(|p| p.tx_range_m >= 2.0 * p.sensing_range_m));
        let mut full = cfg.clone();
        full.max_rows = None;
        assert_eq!(full.grid().len(), 420);
    }

    #[test]
    fn sweep_validation() {
        let mut cfg = SweepConfig::default();
        cfg.trials_per_config = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = SweepConfig::default();
        cfg.tx_rule = TxRule::Explicit(vec![30.0]);
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("Rs=20") && !msg.contains("Rs=15 "));
        let mut cfg = SweepConfig::default();
        cfg.radii_m = vec![10.0];
        assert!(cfg.validate().is_err());
        cfg.allow_out_of_range = true;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn edgeless_single_row() {
        let cfg = SweepConfig {
            radii_m: vec![127.0],
            sensor_counts: vec![3],
            sensing_ranges_m: vec![1.0],
            tx_rule: TxRule::Double,
            trials_per_config: 1,
            distribution: Distribution::Uniform,
            master_seed: 1,
            max_rows: None,
            allow_out_of_range: true,
            count: CountOptions::default(),
        };
        let d = run_sweep(&cfg).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.samples[0].barriers, 0.0);
        assert!((d.samples[0].area_m2 - PI * 127.0 * 127.0).abs() < 1e-9);
    }

    #[test]
    fn manifest_round_trip() {
        let d = split(rows(20), 9).unwrap();
        let json = d.split_manifest().unwrap();
        let mut e = rows(20);
        e.apply_split_manifest(&json).unwrap();
        assert_eq!(e.split, d.split);
        assert!(rows(21).apply_split_manifest(&json).is_err());
    }
}
