use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kbarrier::deployment::Distribution;

mod commands;
mod config;

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "kbarrier", version = commands::VERSION, about = "k-barrier simulation and neural surrogate")]
struct Cli {
    /// Experiment config (TOML). Omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; beats KBARRIER_OUTPUT_DIR and the config file.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Master seed; every other seed is derived from it unless set explicitly.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo sweep and write one dataset per distribution.
    Simulate(SimulateArgs),
    /// Train the surrogate on a dataset CSV.
    Train(TrainArgs),
    /// Feature importance and partial dependence for a trained model.
    Explain(ExplainArgs),
    /// Time Monte Carlo counting against one surrogate prediction.
    Bench(BenchArgs),
    /// Predict the barrier count for one parameter set.
    Predict(PredictArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Only this distribution (default: those in the config).
    #[arg(long)]
    distribution: Option<Distribution>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset CSV; a `<name>.split.json` next to it fixes the split.
    dataset: PathBuf,
    /// Deployment the data came from (default: guessed from the file name).
    #[arg(long)]
    distribution: Option<Distribution>,
    /// Hidden layer sizes, comma separated, e.g. `20,20`.
    #[arg(long, value_delimiter = ',')]
    hidden_layers: Option<Vec<usize>>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Args)]
struct ExplainArgs {
    dataset: PathBuf,
    model: PathBuf,
    #[arg(long)]
    distribution: Option<Distribution>,
}

#[derive(Args)]
struct BenchArgs {
    /// Model to time (default: a freshly initialised 4:20:20:1 network).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct PredictArgs {
    model: PathBuf,
    /// Region area in m².
    #[arg(long)]
    area: f64,
    /// Sensing range in m.
    #[arg(long)]
    rs: f64,
    /// Transmission range in m.
    #[arg(long)]
    rtx: f64,
    /// Number of sensors.
    #[arg(long)]
    sensors: f64,
}

/// A failure reported as one JSON line on stderr.
#[derive(Debug)]
pub struct CliError {
    pub class: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(class: &'static str, message: impl Into<String>) -> Self {
        CliError {
            class,
            message: message.into(),
        }
    }
}

impl From<kbarrier::Error> for CliError {
    fn from(e: kbarrier::Error) -> Self {
        CliError::new(e.class(), e.to_string())
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::load_or_default(cli.config.as_deref())?;
    cfg.resolve_output_dir(cli.output_dir);
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    match cli.command {
        Command::Simulate(a) => {
            if let Some(d) = a.distribution {
                cfg.distributions = vec![d];
            }
            if let Some(t) = a.trials {
                cfg.sweep.trials_per_config = t;
            }
            commands::simulate(&cfg)
        }
        Command::Train(a) => {
            if let Some(h) = a.hidden_layers {
                cfg.train.hidden_layers = h;
            }
            if let Some(r) = a.restarts {
                cfg.train.restarts = r;
            }
            commands::train(&cfg, &a.dataset, a.distribution)
        }
        Command::Explain(a) => commands::explain(&cfg, &a.dataset, &a.model, a.distribution),
        Command::Bench(a) => {
            if let Some(t) = a.trials {
                cfg.bench.trials = t;
            }
            commands::bench(&cfg, a.model.as_deref())
        }
        Command::Predict(a) => commands::predict(&a.model, [a.area, a.rs, a.rtx, a.sensors]),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.class, "message": e.message });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
