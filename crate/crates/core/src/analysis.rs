//! Goodness-of-fit metrics, error histograms and partial dependence.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlp::MlpModel;

/// Anything that maps a feature row to a prediction.
pub trait Predictor: Sync {
    fn input_dim(&self) -> usize;
    fn predict_row(&self, x: &[f64]) -> f64;
}

impl Predictor for MlpModel {
    fn input_dim(&self) -> usize {
        MlpModel::input_dim(self)
    }

    fn predict_row(&self, x: &[f64]) -> f64 {
        self.output_map
            .invert(0, self.forward_normalized(&self.normalize_input(x)))
    }
}

/// Wraps a closure as a [`Predictor`].
pub struct FnPredictor<F> {
    pub dims: usize,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Predictor for FnPredictor<F> {
    fn input_dim(&self) -> usize {
        self.dims
    }

    fn predict_row(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Pearson correlation between observed and predicted.
    pub r: f64,
    pub rmse: f64,
    /// mean(predicted − observed); positive means overestimation.
    pub bias: f64,
    pub n: usize,
}

fn check_pair(observed: &[f64], predicted: &[f64], min: usize) -> Result<()> {
    if observed.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "{} observations against {} predictions",
            observed.len(),
            predicted.len()
        )));
    }
    if observed.len() < min {
        return Err(Error::Validation(format!(
            "need at least {min} values, got {}",
            observed.len()
        )));
    }
    Ok(())
}

pub fn metrics(observed: &[f64], predicted: &[f64]) -> Result<MetricsReport> {
    check_pair(observed, predicted, 2)?;
    let n = observed.len() as f64;
    let mo = observed.iter().sum::<f64>() / n;
    let mp = predicted.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    let (mut sq, mut diff) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(predicted) {
        sxy += (o - mo) * (p - mp);
        sxx += (o - mo) * (o - mo);
        syy += (p - mp) * (p - mp);
        sq += (p - o) * (p - o);
        diff += p - o;
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedCorrelation("observed values are constant".into()));
    }
    if syy == 0.0 {
        return Err(Error::UndefinedCorrelation("predicted values are constant".into()));
    }
    Ok(MetricsReport {
        r: (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0),
        rmse: (sq / n).sqrt(),
        bias: diff / n,
        n: observed.len(),
    })
}

/// `observed − predicted`.
pub fn residuals(observed: &[f64], predicted: &[f64]) -> Result<Vec<f64>> {
    check_pair(observed, predicted, 0)?;
    Ok(observed.iter().zip(predicted).map(|(o, p)| o - p).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// All errors were equal; everything sits in one zero-width bin.
    pub degenerate: bool,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// First bin with the largest count.
    pub fn modal_bin(&self) -> usize {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        self.counts.iter().position(|&c| c == max).unwrap_or(0)
    }

    /// Index of the bin containing 0, if 0 is inside the range.
    pub fn zero_bin(&self) -> Option<usize> {
        let last = self.counts.len() - 1;
        (0..=last).find(|&i| {
            self.edges[i] <= 0.0 && (0.0 < self.edges[i + 1] || (i == last && self.edges[i + 1] >= 0.0))
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lower,upper,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.edges[i], self.edges[i + 1], c);
        }
        out
    }
}

/// Bins `observed − predicted` into `bins` equal-width bins over the error
/// range. Negative errors (left of zero) are overestimates.
pub fn error_histogram(observed: &[f64], predicted: &[f64], bins: usize) -> Result<Histogram> {
    check_pair(observed, predicted, 1)?;
    if bins == 0 {
        return Err(Error::Validation("need at least one bin".into()));
    }
    let e = residuals(observed, predicted)?;
    if e.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("errors must be finite".into()));
    }
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(Histogram {
            edges: vec![lo, hi],
            counts: vec![e.len()],
            degenerate: true,
        });
    }
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0; bins];
    for v in e {
        let i = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    Ok(Histogram {
        edges,
        counts,
        degenerate: false,
    })
}

/// `n` evenly spaced points over the observed range of one feature; a
/// constant feature gives a single point.
fn axis(rows: &[Vec<f64>], feature: usize, n: usize) -> Vec<f64> {
    let lo = rows.iter().map(|r| r[feature]).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r[feature]).fold(f64::NEG_INFINITY, f64::max);
    if lo == hi || n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn check_rows(model: &dyn Predictor, rows: &[Vec<f64>], features: &[usize]) -> Result<()> {
    let dims = model.input_dim();
    if rows.is_empty() {
        return Err(Error::Validation("partial dependence needs at least one row".into()));
    }
    if rows.iter().any(|r| r.len() != dims) {
        return Err(Error::Shape(format!("model takes {dims} features per row")));
    }
    if let Some(&f) = features.iter().find(|&&f| f >= dims) {
        return Err(Error::Shape(format!("feature {f} out of range for {dims} features")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdpSurface {
    pub feature_pair: (usize, usize),
    pub grid_x: Vec<f64>,
    pub grid_y: Vec<f64>,
    /// `values[a][b]` is the average prediction at `(grid_x[a], grid_y[b])`.
    pub values: Vec<Vec<f64>>,
    /// Features of the pair that were constant, so their axis has one point.
    pub degenerate_axes: Vec<usize>,
}

impl PdpSurface {
    /// Long-format `x,y,value` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,value\n");
        for (a, x) in self.grid_x.iter().enumerate() {
            for (b, y) in self.grid_y.iter().enumerate() {
                let _ = writeln!(out, "{x},{y},{}", self.values[a][b]);
            }
        }
        out
    }

    /// Mean finite-difference slope along the first (`axis = 0`) or second
    /// feature of the pair, averaged over the other axis. Zero on a
    /// single-point axis.
    pub fn mean_slope(&self, axis: usize) -> f64 {
        let (ga, gb) = if axis == 0 {
            (&self.grid_x, &self.grid_y)
        } else {
            (&self.grid_y, &self.grid_x)
        };
        if ga.len() < 2 {
            return 0.0;
        }
        let at = |i: usize, j: usize| {
            if axis == 0 {
                self.values[i][j]
            } else {
                self.values[j][i]
            }
        };
        let mut total = 0.0;
        for j in 0..gb.len() {
            for i in 0..ga.len() - 1 {
                total += (at(i + 1, j) - at(i, j)) / (ga[i + 1] - ga[i]);
            }
        }
        total / ((ga.len() - 1) * gb.len()) as f64
    }
}

/// Average prediction over `rows` with features `pair.0` and `pair.1`
/// overwritten by each point of a `grid_n × grid_n` grid spanning their
/// observed ranges.
pub fn pdp_surface(
    model: &dyn Predictor,
    rows: &[Vec<f64>],
    pair: (usize, usize),
    grid_n: usize,
) -> Result<PdpSurface> {
    check_rows(model, rows, &[pair.0, pair.1])?;
    if pair.0 == pair.1 {
        return Err(Error::Validation("partial dependence pair needs two distinct features".into()));
    }
    if grid_n == 0 {
        return Err(Error::Validation("grid needs at least one point".into()));
    }
    let grid_x = axis(rows, pair.0, grid_n);
    let grid_y = axis(rows, pair.1, grid_n);
    let degenerate_axes = [(pair.0, &grid_x), (pair.1, &grid_y)]
        .iter()
        .filter(|(_, g)| g.len() == 1 && grid_n > 1)
        .map(|(f, _)| *f)
        .collect();
    let t = rows.len() as f64;
    let values = grid_x
        .par_iter()
        .map(|&a| {
            let mut row = vec![0.0; rows[0].len()];
            grid_y
                .iter()
                .map(|&b| {
                    let mut sum = 0.0;
                    for r in rows {
                        row.copy_from_slice(r);
                        row[pair.0] = a;
                        row[pair.1] = b;
                        sum += model.predict_row(&row);
                    }
                    sum / t
                })
                .collect()
        })
        .collect();
    Ok(PdpSurface {
        feature_pair: pair,
        grid_x,
        grid_y,
        values,
        degenerate_axes,
    })
}

/// One-feature partial dependence: grid and average prediction.
pub fn pdp_curve(
    model: &dyn Predictor,
    rows: &[Vec<f64>],
    feature: usize,
    grid_n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_rows(model, rows, &[feature])?;
    if grid_n == 0 {
        return Err(Error::Validation("grid needs at least one point".into()));
    }
    let grid = axis(rows, feature, grid_n);
    let t = rows.len() as f64;
    let values = grid
        .par_iter()
        .map(|&a| {
            let mut row = vec![0.0; rows[0].len()];
            rows.iter()
                .map(|r| {
                    row.copy_from_slice(r);
                    row[feature] = a;
                    model.predict_row(&row)
                })
                .sum::<f64>()
                / t
        })
        .collect();
    Ok((grid, values))
}

/// Mean of adjacent finite-difference slopes of a curve.
pub fn mean_slope(grid: &[f64], values: &[f64]) -> f64 {
    if grid.len() < 2 {
        return 0.0;
    }
    let total: f64 = grid
        .windows(2)
        .zip(values.windows(2))
        .map(|(g, v)| (v[1] - v[0]) / (g[1] - g[0]))
        .sum();
    total / (grid.len() - 1) as f64
}

/// The six unordered pairs of four features, in lexicographic order.
pub fn feature_pairs(dims: usize) -> Vec<(usize, usize)> {
    (0..dims)
        .flat_map(|i| (i + 1..dims).map(move |j| (i, j)))
        .collect()
}
