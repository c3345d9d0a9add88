//! Least-squares boosting over decision stumps, and the node-risk feature
//! importance read off the fitted stumps.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::Predictor;
use crate::dataset::{Dataset, FEATURE_NAMES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature_index: usize,
    /// Rows with `feature < threshold` go left.
    pub threshold: f64,
    pub left_value: f64,
    pub right_value: f64,
    /// Risk of the parent, left child and right child.
    pub node_risks: (f64, f64, f64),
    /// False when no split was possible; both leaves then hold the mean.
    pub splits: bool,
}

impl Stump {
    pub fn predict(&self, x: &[f64]) -> f64 {
        if x[self.feature_index] < self.threshold {
            self.left_value
        } else {
            self.right_value
        }
    }

    /// Risk removed by the split. Never negative for a least-squares split;
    /// clamped so rounding cannot make it so.
    pub fn risk_drop(&self) -> f64 {
        let (p, l, r) = self.node_risks;
        (p - (l + r)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StumpEnsemble {
    pub base_value: f64,
    pub stumps: Vec<Stump>,
    pub learning_rate: f64,
    /// Risk drop per feature, each divided by the number of branch nodes.
    pub importance: Vec<f64>,
    /// Training SSE after each stump.
    pub train_sse: Vec<f64>,
}

impl StumpEnsemble {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.base_value + self.learning_rate * self.stumps.iter().map(|s| s.predict(x)).sum::<f64>()
    }
}

impl Predictor for StumpEnsemble {
    fn input_dim(&self) -> usize {
        self.importance.len()
    }

    fn predict_row(&self, x: &[f64]) -> f64 {
        self.predict(x)
    }
}

/// Probability of reaching a node times the node's mean squared error.
pub fn node_risk(probability: f64, mse: f64) -> f64 {
    probability * mse
}

/// Boosts on every row of the dataset.
pub fn fit_lsboost(dataset: &Dataset, r: usize, alpha: f64) -> Result<StumpEnsemble> {
    let xs: Vec<Vec<f64>> = dataset.features().iter().map(|f| f.to_vec()).collect();
    fit_lsboost_rows(&xs, &dataset.targets(), r, alpha)
}

pub fn fit_lsboost_rows(xs: &[Vec<f64>], ys: &[f64], r: usize, alpha: f64) -> Result<StumpEnsemble> {
    if r == 0 {
        return Err(Error::Validation("need at least one stump".into()));
    }
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::Shape(format!(
            "{} feature rows for {} labels",
            xs.len(),
            ys.len()
        )));
    }
    if !alpha.is_finite() {
        return Err(Error::Validation(format!("learning rate {alpha} is not finite")));
    }
    let dims = xs[0].len();
    if dims == 0 || xs.iter().any(|x| x.len() != dims) {
        return Err(Error::Shape("rows need the same, non-zero feature count".into()));
    }

    let n = ys.len() as f64;
    let base_value = ys.iter().sum::<f64>() / n;
    let mut resid: Vec<f64> = ys.iter().map(|y| y - base_value).collect();
    let orders: Vec<Vec<usize>> = (0..dims)
        .map(|d| {
            let mut idx: Vec<usize> = (0..xs.len()).collect();
            idx.sort_by(|&a, &b| xs[a][d].total_cmp(&xs[b][d]));
            idx
        })
        .collect();

    let mut stumps = Vec::with_capacity(r);
    let mut train_sse = Vec::with_capacity(r);
    for _ in 0..r {
        let stump = best_stump(xs, &resid, &orders);
        for (x, e) in xs.iter().zip(resid.iter_mut()) {
            *e -= alpha * stump.predict(x);
        }
        train_sse.push(resid.iter().map(|e| e * e).sum());
        stumps.push(stump);
    }

    let branches = stumps.iter().filter(|s| s.splits).count();
    let mut importance = vec![0.0; dims];
    if branches > 0 {
        for s in stumps.iter().filter(|s| s.splits) {
            importance[s.feature_index] += s.risk_drop() / branches as f64;
        }
    }
    Ok(StumpEnsemble {
        base_value,
        stumps,
        learning_rate: alpha,
        importance,
        train_sse,
    })
}

/// Exact least-squares stump on the residuals: every feature, every midpoint
/// between consecutive distinct values. Ties keep the earlier feature and the
/// lower threshold.
fn best_stump(xs: &[Vec<f64>], resid: &[f64], orders: &[Vec<usize>]) -> Stump {
    let n = resid.len() as f64;
    let total: f64 = resid.iter().sum();
    let mean = total / n;
    let sse_parent: f64 = resid.iter().map(|e| (e - mean).powi(2)).sum();

    // (sse, feature, threshold, left count, left sum)
    let mut best: Option<(f64, usize, f64, usize, f64)> = None;
    let total_sq: f64 = resid.iter().map(|e| e * e).sum();
    for (d, order) in orders.iter().enumerate() {
        let mut left_sum = 0.0;
        let mut left_sq = 0.0;
        for (k, pair) in order.windows(2).enumerate() {
            let e = resid[pair[0]];
            left_sum += e;
            left_sq += e * e;
            let (a, b) = (xs[pair[0]][d], xs[pair[1]][d]);
            if a == b {
                continue;
            }
            let nl = (k + 1) as f64;
            let nr = n - nl;
            let right_sum = total - left_sum;
            let sse = (left_sq - left_sum * left_sum / nl)
                + ((total_sq - left_sq) - right_sum * right_sum / nr);
            if best.is_none_or(|b| sse < b.0) {
                let mid = a + (b - a) / 2.0;
                let threshold = if mid > a { mid } else { b };
                best = Some((sse, d, threshold, k + 1, left_sum));
            }
        }
    }

    match best {
        None => Stump {
            feature_index: 0,
            threshold: xs[0][0],
            left_value: mean,
            right_value: mean,
            node_risks: (sse_parent / n, 0.0, sse_parent / n),
            splits: false,
        },
        Some((_, d, threshold, nl, left_sum)) => {
            let nl_f = nl as f64;
            let left_value = left_sum / nl_f;
            let right_value = (total - left_sum) / (n - nl_f);
            let (mut sse_l, mut sse_r) = (0.0, 0.0);
            for (x, e) in xs.iter().zip(resid) {
                if x[d] < threshold {
                    sse_l += (e - left_value).powi(2);
                } else {
                    sse_r += (e - right_value).powi(2);
                }
            }
            // Risk = (rows reaching node / n) · (node SSE / rows) = SSE / n.
            let risks = (
                node_risk(1.0, sse_parent / n),
                node_risk(nl_f / n, sse_l / nl_f),
                node_risk((n - nl_f) / n, sse_r / (n - nl_f)),
            );
            Stump {
                feature_index: d,
                threshold,
                left_value,
                right_value,
                node_risks: risks,
                splits: true,
            }
        }
    }
}

/// Importance rescaled so the largest entry is 1 (all zeros stay zeros).
pub fn feature_importance(ensemble: &StumpEnsemble) -> Vec<f64> {
    let max = ensemble.importance.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        ensemble.importance.iter().map(|v| v / max).collect()
    } else {
        vec![0.0; ensemble.importance.len()]
    }
}

/// `feature,score` CSV using the dataset's feature names when there are four.
pub fn importance_csv(scores: &[f64]) -> String {
    let mut out = String::from("feature,score\n");
    for (i, s) in scores.iter().enumerate() {
        let name = if scores.len() == FEATURE_NAMES.len() {
            FEATURE_NAMES[i].to_string()
        } else {
            format!("x{i}")
        };
        let _ = writeln!(out, "{name},{s}");
    }
    out
}
