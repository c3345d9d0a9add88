//! Fully connected feed-forward regressor with tansig hidden layers and a
//! linear output, trained full-batch with Levenberg–Marquardt.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, SplitTag};
use crate::error::{Error, Result};
use crate::seed;

/// Beyond this |n| the exponential in [`tansig`] would overflow long before
/// the result stops being ±1 in double precision.
const TANSIG_CLAMP: f64 = 350.0;

/// `2 / (1 + exp(-2n)) - 1`, i.e. tanh.
pub fn tansig(n: f64) -> f64 {
    let n = n.clamp(-TANSIG_CLAMP, TANSIG_CLAMP);
    2.0 / (1.0 + (-2.0 * n).exp()) - 1.0
}

/// Per-dimension affine map of `[min, max]` onto `[-1, 1]`. A constant
/// dimension is only shifted, so it maps to 0 and stays invertible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl AffineMap {
    pub fn fit(columns: &[Vec<f64>]) -> Result<Self> {
        let mut min = Vec::with_capacity(columns.len());
        let mut max = Vec::with_capacity(columns.len());
        for (d, col) in columns.iter().enumerate() {
            if col.is_empty() || col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "dimension {d} is empty or has non-finite values"
                )));
            }
            min.push(col.iter().copied().fold(f64::INFINITY, f64::min));
            max.push(col.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(AffineMap { min, max })
    }

    pub fn dims(&self) -> usize {
        self.min.len()
    }

    fn scale(&self, d: usize) -> f64 {
        let range = self.max[d] - self.min[d];
        if range > 0.0 {
            2.0 / range
        } else {
            1.0
        }
    }

    fn offset(&self, d: usize) -> f64 {
        if self.max[d] > self.min[d] {
            1.0
        } else {
            0.0
        }
    }

    pub fn apply(&self, d: usize, x: f64) -> f64 {
        (x - self.min[d]) * self.scale(d) - self.offset(d)
    }

    pub fn invert(&self, d: usize, y: f64) -> f64 {
        (y + self.offset(d)) / self.scale(d) + self.min[d]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out × in`.
    pub weights: DMatrix<f64>,
    pub biases: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layer_sizes: Vec<usize>,
    pub layers: Vec<Layer>,
    pub input_map: AffineMap,
    pub output_map: AffineMap,
}

pub const MODEL_FORMAT: &str = "kbarrier-mlp";
pub const MODEL_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct StoredModel {
    format: String,
    version: u32,
    layer_sizes: Vec<usize>,
    /// Row-major, one array per layer.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    input_map: AffineMap,
    output_map: AffineMap,
}

impl MlpModel {
    /// A model with every weight and bias zero.
    pub fn zeros(layer_sizes: &[usize], input_map: AffineMap, output_map: AffineMap) -> Result<Self> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(Error::Shape(format!(
                "layer sizes {layer_sizes:?} need an input and an output, all non-zero"
            )));
        }
        if *layer_sizes.last().unwrap() != 1 {
            return Err(Error::Shape("the output layer must have one neuron".into()));
        }
        if input_map.dims() != layer_sizes[0] || output_map.dims() != 1 {
            return Err(Error::Shape(format!(
                "normalization maps have {} inputs and {} outputs for layers {layer_sizes:?}",
                input_map.dims(),
                output_map.dims()
            )));
        }
        let layers = layer_sizes
            .windows(2)
            .map(|w| Layer {
                weights: DMatrix::zeros(w[1], w[0]),
                biases: DVector::zeros(w[1]),
            })
            .collect();
        Ok(MlpModel {
            layer_sizes: layer_sizes.to_vec(),
            layers,
            input_map,
            output_map,
        })
    }

    /// Uniform weights and biases in `[-0.5, 0.5] / sqrt(fan_in)`.
    pub fn random(
        layer_sizes: &[usize],
        input_map: AffineMap,
        output_map: AffineMap,
        seed: u64,
    ) -> Result<Self> {
        let mut m = Self::zeros(layer_sizes, input_map, output_map)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in &mut m.layers {
            let s = 1.0 / (layer.weights.ncols() as f64).sqrt();
            for w in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                *w = rng.random_range(-0.5..=0.5) * s;
            }
        }
        Ok(m)
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Parameters layer by layer: weights row-major, then biases.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            for r in 0..l.weights.nrows() {
                out.extend(l.weights.row(r).iter());
            }
            out.extend(l.biases.iter());
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params());
        let mut i = 0;
        for l in &mut self.layers {
            for r in 0..l.weights.nrows() {
                for c in 0..l.weights.ncols() {
                    l.weights[(r, c)] = p[i];
                    i += 1;
                }
            }
            for b in l.biases.iter_mut() {
                *b = p[i];
                i += 1;
            }
        }
    }

    pub fn normalize_input(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(x.len(), x.iter().enumerate().map(|(d, &v)| self.input_map.apply(d, v)))
    }

    /// Network output on an already normalized input.
    pub fn forward_normalized(&self, x: &DVector<f64>) -> f64 {
        let mut a = x.clone();
        let last = self.layers.len() - 1;
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = &l.weights * &a + &l.biases;
            if i < last {
                z.apply(|v| *v = tansig(*v));
            }
            a = z;
        }
        a[0]
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "model takes {} features, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(self.output_map.invert(0, self.forward_normalized(&self.normalize_input(x))))
    }

    /// Gradient of the normalized output with respect to [`MlpModel::params`],
    /// by backpropagation. Returns the output too.
    pub fn output_gradient(&self, x: &DVector<f64>, grad: &mut [f64]) -> f64 {
        let last = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.clone());
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = &l.weights * acts.last().unwrap() + &l.biases;
            if i < last {
                z.apply(|v| *v = tansig(*v));
            }
            acts.push(z);
        }

        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |acc, l| {
                let start = *acc;
                *acc += l.weights.len() + l.biases.len();
                Some(start)
            })
            .collect();
        let mut delta = DVector::from_element(1, 1.0);
        for i in (0..self.layers.len()).rev() {
            let l = &self.layers[i];
            let input = &acts[i];
            let (rows, cols) = l.weights.shape();
            let base = offsets[i];
            for r in 0..rows {
                for c in 0..cols {
                    grad[base + r * cols + c] = delta[r] * input[c];
                }
                grad[base + rows * cols + r] = delta[r];
            }
            if i > 0 {
                let mut back = l.weights.tr_mul(&delta);
                for (b, a) in back.iter_mut().zip(acts[i].iter()) {
                    *b *= 1.0 - a * a;
                }
                delta = back;
            }
        }
        acts[last + 1][0]
    }

    /// Errors `target - output` on the normalized scale and their Jacobian
    /// with respect to the parameters (one row per sample).
    pub fn errors_and_jacobian(
        &self,
        xs: &[DVector<f64>],
        ys: &[f64],
    ) -> (DVector<f64>, DMatrix<f64>) {
        let p = self.n_params();
        let mut jac = DMatrix::zeros(xs.len(), p);
        let mut err = DVector::zeros(xs.len());
        let mut g = vec![0.0; p];
        for (i, (x, &y)) in xs.iter().zip(ys).enumerate() {
            let out = self.output_gradient(x, &mut g);
            err[i] = y - out;
            for (k, v) in g.iter().enumerate() {
                jac[(i, k)] = -v;
            }
        }
        (err, jac)
    }

    fn sse(&self, xs: &[DVector<f64>], ys: &[f64]) -> f64 {
        xs.iter()
            .zip(ys)
            .map(|(x, &y)| (y - self.forward_normalized(x)).powi(2))
            .sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let stored = StoredModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            layer_sizes: self.layer_sizes.clone(),
            weights: self
                .layers
                .iter()
                .map(|l| {
                    (0..l.weights.nrows())
                        .flat_map(|r| l.weights.row(r).iter().copied().collect::<Vec<_>>())
                        .collect()
                })
                .collect(),
            biases: self.layers.iter().map(|l| l.biases.iter().copied().collect()).collect(),
            input_map: self.input_map.clone(),
            output_map: self.output_map.clone(),
        };
        Ok(serde_json::to_string_pretty(&stored)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: StoredModel = serde_json::from_str(text)?;
        if s.format != MODEL_FORMAT || s.version != MODEL_VERSION {
            return Err(Error::Validation(format!(
                "unsupported model file {} v{}",
                s.format, s.version
            )));
        }
        let mut m = Self::zeros(&s.layer_sizes, s.input_map, s.output_map)?;
        if s.weights.len() != m.layers.len() || s.biases.len() != m.layers.len() {
            return Err(Error::Shape("layer count does not match layer_sizes".into()));
        }
        for ((l, w), b) in m.layers.iter_mut().zip(&s.weights).zip(&s.biases) {
            let (rows, cols) = l.weights.shape();
            if w.len() != rows * cols || b.len() != rows {
                return Err(Error::Shape(format!(
                    "layer expects {rows}x{cols} weights and {rows} biases"
                )));
            }
            l.weights = DMatrix::from_row_slice(rows, cols, w);
            l.biases = DVector::from_column_slice(b);
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden_layers: Vec<usize>,
    pub mu_init: f64,
    pub mu_inc: f64,
    pub mu_dec: f64,
    /// Training stops (or fails, if the system is singular) once μ would
    /// exceed this.
    pub mu_max: f64,
    pub max_epochs: usize,
    pub max_val_failures: usize,
    pub min_gradient: f64,
    pub init_seed: u64,
    pub restarts: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_layers: vec![20, 20],
            mu_init: 1e-3,
            mu_inc: 10.0,
            mu_dec: 0.1,
            mu_max: 1e10,
            max_epochs: 1000,
            max_val_failures: 6,
            min_gradient: 1e-7,
            init_seed: 0,
            restarts: 10,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return bad(format!(
                "hidden_layers must be non-empty with sizes >= 1, got {:?}",
                self.hidden_layers
            ));
        }
        if !(self.mu_init > 0.0 && self.mu_inc > 1.0 && self.mu_dec > 0.0 && self.mu_dec < 1.0) {
            return bad("need mu_init > 0, mu_inc > 1 and 0 < mu_dec < 1".into());
        }
        if !(self.mu_max >= self.mu_init) {
            return bad("mu_max must be at least mu_init".into());
        }
        if self.restarts == 0 || self.max_epochs == 0 {
            return bad("restarts and max_epochs must be at least 1".into());
        }
        if !(self.min_gradient >= 0.0) {
            return bad("min_gradient must be non-negative".into());
        }
        Ok(())
    }

    pub fn layer_sizes(&self, inputs: usize) -> Vec<usize> {
        std::iter::once(inputs)
            .chain(self.hidden_layers.iter().copied())
            .chain(std::iter::once(1))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ValFailures,
    MaxEpochs,
    MinGradient,
    /// No step lowered the training error even at the largest μ.
    MuMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_mu: f64,
    /// Mean squared error on the normalized scale after each epoch.
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub stop_reason: StopReason,
    /// Epoch whose weights were kept (0 = the initial weights).
    pub best_epoch: usize,
    pub best_val_loss: f64,
    /// Which restart produced the returned model.
    pub restart: usize,
    /// Best validation loss of every restart.
    pub restart_val_losses: Vec<f64>,
}

/// One damped Gauss–Newton step: `-(JᵀJ + μI)⁻¹ Jᵀe`. `None` when the
/// system is not positive definite.
pub fn lm_step(jac: &DMatrix<f64>, err: &DVector<f64>, mu: f64) -> Option<DVector<f64>> {
    let mut h = jac.tr_mul(jac);
    for i in 0..h.nrows() {
        h[(i, i)] += mu;
    }
    let g = jac.tr_mul(err);
    h.cholesky().map(|c| -c.solve(&g))
}

/// Training data on the normalized scale.
struct Normalized {
    train_x: Vec<DVector<f64>>,
    train_y: Vec<f64>,
    val_x: Vec<DVector<f64>>,
    val_y: Vec<f64>,
}

pub fn train_lm(dataset: &Dataset, config: &TrainConfig) -> Result<(MlpModel, TrainReport)> {
    let (tx, ty) = dataset.rows(&dataset.indices(SplitTag::Train));
    let (vx, vy) = dataset.rows(&dataset.indices(SplitTag::Val));
    let tx: Vec<Vec<f64>> = tx.iter().map(|r| r.to_vec()).collect();
    let vx: Vec<Vec<f64>> = vx.iter().map(|r| r.to_vec()).collect();
    train_lm_rows(&tx, &ty, &vx, &vy, config)
}

/// Trains on explicit train and validation rows. Normalization ranges come
/// from the training rows only.
pub fn train_lm_rows(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    val_x: &[Vec<f64>],
    val_y: &[f64],
    config: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    config.validate()?;
    if train_x.is_empty() || val_x.is_empty() {
        return Err(Error::Validation(
            "training needs non-empty train and validation splits".into(),
        ));
    }
    if train_x.len() != train_y.len() || val_x.len() != val_y.len() {
        return Err(Error::Shape("feature and label counts differ".into()));
    }
    let dims = train_x[0].len();
    if train_x.iter().chain(val_x).any(|r| r.len() != dims) {
        return Err(Error::Shape("rows have differing feature counts".into()));
    }
    let columns: Vec<Vec<f64>> = (0..dims).map(|d| train_x.iter().map(|r| r[d]).collect()).collect();
    let input_map = AffineMap::fit(&columns)?;
    let output_map = AffineMap::fit(&[train_y.to_vec()])?;
    let sizes = config.layer_sizes(dims);
    let template = MlpModel::zeros(&sizes, input_map, output_map)?;
    let data = Normalized {
        train_x: train_x.iter().map(|r| template.normalize_input(r)).collect(),
        train_y: train_y.iter().map(|&y| template.output_map.apply(0, y)).collect(),
        val_x: val_x.iter().map(|r| template.normalize_input(r)).collect(),
        val_y: val_y.iter().map(|&y| template.output_map.apply(0, y)).collect(),
    };

    let runs: Vec<Result<(MlpModel, TrainReport)>> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut model = template.clone();
            let init = MlpModel::random(
                &sizes,
                template.input_map.clone(),
                template.output_map.clone(),
                seed::derive(config.init_seed, &[r as u64]),
            )?;
            model.set_params(&init.params());
            let mut report = train_once(&mut model, &data, config)?;
            report.restart = r;
            Ok((model, report))
        })
        .collect();
    let runs: Vec<(MlpModel, TrainReport)> = runs.into_iter().collect::<Result<_>>()?;
    let losses: Vec<f64> = runs.iter().map(|(_, r)| r.best_val_loss).collect();
    let (mut model, mut report) = runs
        .into_iter()
        .min_by(|a, b| a.1.best_val_loss.total_cmp(&b.1.best_val_loss))
        .expect("at least one restart");
    report.restart_val_losses = losses;
    model.layer_sizes = sizes;
    Ok((model, report))
}

fn train_once(model: &mut MlpModel, data: &Normalized, config: &TrainConfig) -> Result<TrainReport> {
    let n_train = data.train_x.len() as f64;
    let n_val = data.val_x.len() as f64;
    let mut w = DVector::from_vec(model.params());
    let mut sse = model.sse(&data.train_x, &data.train_y);
    let mut best_val = model.sse(&data.val_x, &data.val_y) / n_val;
    let mut best_w = w.clone();
    let mut best_epoch = 0;
    let mut mu = config.mu_init;
    let mut val_failures = 0;
    let mut train_loss = Vec::new();
    let mut val_loss = Vec::new();

    let stop = 'epochs: loop {
        if train_loss.len() >= config.max_epochs {
            break StopReason::MaxEpochs;
        }
        let (err, jac) = model.errors_and_jacobian(&data.train_x, &data.train_y);
        let grad = jac.tr_mul(&err);
        if grad.norm() < config.min_gradient {
            break StopReason::MinGradient;
        }
        loop {
            let Some(step) = lm_step(&jac, &err, mu) else {
                mu *= config.mu_inc;
                if mu > config.mu_max {
                    return Err(Error::Training(format!(
                        "JᵀJ + μI stayed singular up to μ = {:e}",
                        config.mu_max
                    )));
                }
                continue;
            };
            let trial = &w + &step;
            model.set_params(trial.as_slice());
            let trial_sse = model.sse(&data.train_x, &data.train_y);
            if trial_sse < sse {
                w = trial;
                sse = trial_sse;
                mu *= config.mu_dec;
                break;
            }
            mu *= config.mu_inc;
            if mu > config.mu_max {
                model.set_params(w.as_slice());
                break 'epochs StopReason::MuMax;
            }
        }

        let val = model.sse(&data.val_x, &data.val_y) / n_val;
        train_loss.push(sse / n_train);
        val_loss.push(val);
        if val < best_val {
            best_val = val;
            best_w = w.clone();
            best_epoch = train_loss.len();
            val_failures = 0;
        } else {
            val_failures += 1;
            if val_failures >= config.max_val_failures {
                break StopReason::ValFailures;
            }
        }
    };

    model.set_params(best_w.as_slice());
    Ok(TrainReport {
        epochs_run: train_loss.len(),
        final_mu: mu,
        train_loss,
        val_loss,
        stop_reason: stop,
        best_epoch,
        best_val_loss: best_val,
        restart: 0,
        restart_val_losses: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_maps(dims: usize) -> (AffineMap, AffineMap) {
        (
            AffineMap {
                min: vec![-1.0; dims],
                max: vec![1.0; dims],
            },
            AffineMap {
                min: vec![-1.0],
                max: vec![1.0],
            },
        )
    }

    #[test]
    fn tansig_values() {
        assert_eq!(tansig(0.0), 0.0);
        assert!((tansig(0.5) - 0.5f64.tanh()).abs() < 1e-15);
        assert!((tansig(0.5) - 0.46212).abs() < 1e-5);
        assert_eq!(tansig(1e6), 1.0);
        assert_eq!(tansig(-1e6), -1.0);
        assert!(tansig(f64::MAX).is_finite());
    }

    #[test]
    fn zero_model_predicts_label_midpoint() {
        let input = AffineMap {
            min: vec![0.0; 4],
            max: vec![1.0; 4],
        };
        let output = AffineMap {
            min: vec![10.0],
            max: vec![30.0],
        };
        let m = MlpModel::zeros(&[4, 20, 20, 1], input, output).unwrap();
        assert_eq!(m.predict(&[0.3, 0.1, 5.0, 2.0]).unwrap(), 20.0);
        assert!(m.predict(&[1.0]).is_err());
    }

    #[test]
    fn shape_checks() {
        let (i, o) = unit_maps(4);
        assert!(MlpModel::zeros(&[4, 3, 2], i.clone(), o.clone()).is_err());
        assert!(MlpModel::zeros(&[4], i.clone(), o.clone()).is_err());
        assert!(MlpModel::zeros(&[3, 2, 1], i, o).is_err());
    }

    #[test]
    fn params_round_trip() {
        let (i, o) = unit_maps(4);
        let m = MlpModel::random(&[4, 3, 2, 1], i.clone(), o.clone(), 5).unwrap();
        assert_eq!(m.n_params(), 4 * 3 + 3 + 3 * 2 + 2 + 2 + 1);
        let mut z = MlpModel::zeros(&[4, 3, 2, 1], i, o).unwrap();
        z.set_params(&m.params());
        assert_eq!(z, m);
    }

    #[test]
    fn json_round_trip() {
        let (i, o) = unit_maps(4);
        let m = MlpModel::random(&[4, 5, 1], i, o, 8).unwrap();
        let back = MlpModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let bad = m.to_json().unwrap().replace("\"version\": 1", "\"version\": 99");
        assert!(MlpModel::from_json(&bad).is_err());
    }

    #[test]
    fn constant_dimension_map_is_invertible() {
        let m = AffineMap::fit(&[vec![3.0, 3.0], vec![0.0, 4.0]]).unwrap();
        assert_eq!(m.apply(0, 3.0), 0.0);
        assert_eq!(m.invert(0, m.apply(0, 7.5)), 7.5);
        assert_eq!(m.apply(1, 0.0), -1.0);
        assert_eq!(m.apply(1, 4.0), 1.0);
    }

    #[test]
    fn lm_step_limits() {
        let jac = DMatrix::from_row_slice(4, 2, &[1.0, 2.0, -1.0, 0.5, 3.0, 1.0, 0.0, 2.0]);
        let err = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.7]);
        // Gauss–Newton: least-squares solution of J·s = -e.
        let gn = lm_step(&jac, &err, 0.0).unwrap();
        let qr = jac.clone().qr();
        let ls = qr.r().solve_upper_triangular(&(qr.q().transpose() * -&err)).unwrap();
        assert!((&gn - &ls).norm() / ls.norm() < 1e-8);

        let sd = lm_step(&jac, &err, 1e8).unwrap();
        let g = jac.tr_mul(&err);
        let cos = -sd.dot(&g) / (sd.norm() * g.norm());
        assert!(cos >= 0.999);
    }

    #[test]
    fn rejects_bad_config() {
        let mut c = TrainConfig::default();
        c.hidden_layers.clear();
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.mu_dec = 1.5;
        assert!(c.validate().is_err());
    }
}
