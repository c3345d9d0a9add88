//! Experiment configuration file. Every key is optional; missing keys take
//! the defaults below, and command-line flags override what the file says.

use std::path::{Path, PathBuf};

use kbarrier::coverage::CountOptions;
use kbarrier::dataset::{SweepConfig, TxRule};
use kbarrier::deployment::Distribution;
use kbarrier::mlp::TrainConfig;
use kbarrier::seed;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const OUTPUT_DIR_ENV: &str = "KBARRIER_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub distributions: Vec<Distribution>,
    pub sweep: SweepSettings,
    pub train: TrainSettings,
    pub analysis: AnalysisSettings,
    pub bench: BenchSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 0,
            output_dir: PathBuf::from("out"),
            distributions: vec![Distribution::Gaussian, Distribution::Uniform],
            sweep: SweepSettings::default(),
            train: TrainSettings::default(),
            analysis: AnalysisSettings::default(),
            bench: BenchSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    pub radii_m: Vec<f64>,
    pub sensor_counts: Vec<usize>,
    pub sensing_ranges_m: Vec<f64>,
    pub tx_rule: TxRule,
    pub trials_per_config: usize,
    pub max_rows: Option<usize>,
    pub allow_out_of_range: bool,
    pub node_budget: usize,
    pub enumeration_budget: usize,
    /// Defaults to the master seed.
    pub seed: Option<u64>,
}

impl Default for SweepSettings {
    fn default() -> Self {
        let s = SweepConfig::default();
        SweepSettings {
            radii_m: s.radii_m,
            sensor_counts: s.sensor_counts,
            sensing_ranges_m: s.sensing_ranges_m,
            tx_rule: s.tx_rule,
            trials_per_config: s.trials_per_config,
            max_rows: s.max_rows,
            allow_out_of_range: s.allow_out_of_range,
            node_budget: s.count.node_budget,
            enumeration_budget: s.count.enumeration_budget,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub hidden_layers: Vec<usize>,
    pub mu_init: f64,
    pub mu_inc: f64,
    pub mu_dec: f64,
    pub mu_max: f64,
    pub max_epochs: usize,
    pub max_val_failures: usize,
    pub min_gradient: f64,
    pub restarts: usize,
    /// Defaults to a value derived from the master seed.
    pub init_seed: Option<u64>,
    /// Defaults to a value derived from the master seed.
    pub split_seed: Option<u32>,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSettings {
            hidden_layers: t.hidden_layers,
            mu_init: t.mu_init,
            mu_inc: t.mu_inc,
            mu_dec: t.mu_dec,
            mu_max: t.mu_max,
            max_epochs: t.max_epochs,
            max_val_failures: t.max_val_failures,
            min_gradient: t.min_gradient,
            restarts: t.restarts,
            init_seed: None,
            split_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub pdp_grid: usize,
    pub histogram_bins: usize,
    pub boost_stumps: usize,
    pub boost_rate: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            pdp_grid: 20,
            histogram_bins: 20,
            boost_stumps: 100,
            boost_rate: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSettings {
    pub radius_m: f64,
    pub sensing_range_m: f64,
    pub tx_range_m: f64,
    pub sensor_counts: Vec<usize>,
    /// Fields simulated per sensor count.
    pub trials: usize,
    /// Surrogate forward passes timed.
    pub predictions: usize,
    pub distribution: Distribution,
}

impl Default for BenchSettings {
    fn default() -> Self {
        BenchSettings {
            radius_m: 40.0,
            sensing_range_m: 15.0,
            tx_range_m: 30.0,
            sensor_counts: vec![100, 200, 300],
            trials: 5,
            predictions: 10_000,
            distribution: Distribution::Gaussian,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::from(kbarrier::Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::new("config", format!("{}: {}", path.display(), e.message())))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    /// Output directory: the flag, else the environment variable, else the
    /// config value.
    pub fn resolve_output_dir(&mut self, flag: Option<PathBuf>) {
        if let Some(dir) = flag {
            self.output_dir = dir;
        } else if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV) {
            self.output_dir = PathBuf::from(dir);
        }
    }

    pub fn sweep_seed(&self) -> u64 {
        self.sweep.seed.unwrap_or(self.master_seed)
    }

    pub fn split_seed(&self) -> u32 {
        self.train
            .split_seed
            .unwrap_or(seed::derive(self.master_seed, &[1]) as u32)
    }

    pub fn init_seed(&self) -> u64 {
        self.train
            .init_seed
            .unwrap_or_else(|| seed::derive(self.master_seed, &[2]))
    }

    pub fn sweep_config(&self, distribution: Distribution) -> SweepConfig {
        let s = &self.sweep;
        SweepConfig {
            radii_m: s.radii_m.clone(),
            sensor_counts: s.sensor_counts.clone(),
            sensing_ranges_m: s.sensing_ranges_m.clone(),
            tx_rule: s.tx_rule.clone(),
            trials_per_config: s.trials_per_config,
            distribution,
            master_seed: self.sweep_seed(),
            max_rows: s.max_rows,
            allow_out_of_range: s.allow_out_of_range,
            count: CountOptions {
                node_budget: s.node_budget,
                enumeration_budget: s.enumeration_budget,
            },
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.train;
        TrainConfig {
            hidden_layers: t.hidden_layers.clone(),
            mu_init: t.mu_init,
            mu_inc: t.mu_inc,
            mu_dec: t.mu_dec,
            mu_max: t.mu_max,
            max_epochs: t.max_epochs,
            max_val_failures: t.max_val_failures,
            min_gradient: t.min_gradient,
            init_seed: self.init_seed(),
            restarts: t.restarts,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.distributions.is_empty() {
            return Err(CliError::new("validation", "distributions must not be empty"));
        }
        self.train_config().validate()?;
        if self.analysis.pdp_grid == 0 || self.analysis.histogram_bins == 0 {
            return Err(CliError::new("validation", "pdp_grid and histogram_bins must be at least 1"));
        }
        if self.analysis.boost_stumps == 0 {
            return Err(CliError::new("validation", "boost_stumps must be at least 1"));
        }
        let b = &self.bench;
        if b.sensor_counts.is_empty() || b.trials == 0 || b.predictions == 0 {
            return Err(CliError::new(
                "validation",
                "bench needs sensor counts, trials >= 1 and predictions >= 1",
            ));
        }
        Ok(())
    }
}
