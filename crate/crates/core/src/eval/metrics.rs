use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cluster::{affine, Assignment, ClusterParams};
use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::greedy::svm::predict_class;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    R2,
    Accuracy,
    Rmse,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::R2 => "r2",
            Metric::Accuracy => "accuracy",
            Metric::Rmse => "rmse",
        }
    }

    /// Whether larger values are better.
    pub fn maximize(&self) -> bool {
        !matches!(self, Metric::Rmse)
    }

    pub fn default_for(task: Task) -> Metric {
        match task {
            Task::Regression => Metric::R2,
            Task::Classification { .. } => Metric::Accuracy,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Predictions {
    Values(Vec<f64>),
    Classes(Vec<usize>),
}

/// `1 - SS_res / SS_tot`. A constant `y_true` gives 1 for a perfect fit and
/// 0 otherwise.
pub fn r2_score(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum();
    if ss_tot == 0.0 {
        return Ok(if ss_res == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(1.0 - ss_res / ss_tot)
}

pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    let ss: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum();
    Ok((ss / y_true.len() as f64).sqrt())
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a == 0 {
        return Err(Error::Empty("metric over zero rows".into()));
    }
    if a != b {
        return Err(Error::Dimension(format!("{a} targets vs {b} predictions")));
    }
    Ok(())
}

/// Evaluates `metric` for predictions on `ds`.
pub fn evaluate(ds: &Dataset, preds: &Predictions, metric: Metric) -> Result<f64> {
    match (metric, preds, ds.y(), ds.labels()) {
        (Metric::R2, Predictions::Values(p), Some(y), _) => r2_score(y, p),
        (Metric::Rmse, Predictions::Values(p), Some(y), _) => rmse(y, p),
        (Metric::Accuracy, Predictions::Classes(p), _, Some(y)) => accuracy(y, p),
        _ => Err(Error::Unsupported(format!("metric {} does not match the task", metric.name()))),
    }
}

/// Default metric (R² or accuracy) with its name.
pub fn score(ds: &Dataset, preds: &Predictions) -> Result<(&'static str, f64)> {
    let m = Metric::default_for(ds.task());
    Ok((m.name(), evaluate(ds, preds, m)?))
}

/// Predictions using each row's own (training) cluster.
pub fn predict_assigned(ds: &Dataset, asg: &Assignment, params: &ClusterParams) -> Predictions {
    match ds.task() {
        Task::Regression => Predictions::Values(
            (0..ds.n())
                .map(|i| affine(&params.weights[asg.cluster_of(i)], ds.row(i)))
                .collect(),
        ),
        Task::Classification { .. } => Predictions::Classes(
            (0..ds.n())
                .map(|i| predict_class(&params.weights[asg.cluster_of(i)], ds.row(i)))
                .collect(),
        ),
    }
}

fn choose2(n: u64) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Chance-corrected pair agreement between two labelings.
///
/// Degenerate cases where the expected index equals its maximum (e.g. both
/// labelings put everything in one cluster) return 1.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    check_lengths(a.len(), b.len())?;
    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut ra: HashMap<usize, u64> = HashMap::new();
    let mut rb: HashMap<usize, u64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *ra.entry(x).or_default() += 1;
        *rb.entry(y).or_default() += 1;
    }
    let index: f64 = joint.values().map(|&c| choose2(c)).sum();
    let sa: f64 = ra.values().map(|&c| choose2(c)).sum();
    let sb: f64 = rb.values().map(|&c| choose2(c)).sum();
    let expected = sa * sb / choose2(a.len() as u64).max(1.0);
    let max = 0.5 * (sa + sb);
    if (max - expected).abs() < 1e-12 {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}
