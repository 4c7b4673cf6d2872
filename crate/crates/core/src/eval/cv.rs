//! Cross-validation with K selection on a validation split.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, Metric};
use super::predict::predict;
use super::split::{k_fold, train_val_test_split};
use crate::cluster::ClusterType;
use crate::data::{Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::greedy::{self, FitReport, GreedyConfig};
use crate::loss::LossSpec;
use crate::solve::{fit_exact, ExactConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitScheme {
    Holdout { train: f64, val: f64, test: f64 },
    KFold { folds: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalProtocol {
    pub split: SplitScheme,
    /// Defaults to R² for regression and accuracy for classification.
    pub metric: Option<Metric>,
    pub k_grid: Vec<usize>,
    pub seed: u64,
    /// Share of each fold's training rows held out to choose K.
    pub val_fraction: f64,
    /// Fit the feature transform on training rows only.
    pub standardize: bool,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        EvalProtocol {
            split: SplitScheme::KFold { folds: 5 },
            metric: None,
            k_grid: (2..=7).collect(),
            seed: 0,
            val_fraction: 0.15 / 0.80,
            standardize: true,
        }
    }
}

impl EvalProtocol {
    pub fn holdout(seed: u64) -> Self {
        EvalProtocol {
            split: SplitScheme::Holdout {
                train: 0.65,
                val: 0.15,
                test: 0.20,
            },
            seed,
            ..EvalProtocol::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.split {
            SplitScheme::Holdout { train, val, test } => {
                if [train, val, test].iter().any(|f| !(*f >= 0.0)) || (train + val + test - 1.0).abs() > 1e-9 {
                    return Err(Error::Config("holdout fractions must be nonnegative and sum to 1".into()));
                }
                if !(test > 0.0 && train > 0.0) {
                    return Err(Error::Config("holdout needs training and test rows".into()));
                }
            }
            SplitScheme::KFold { folds } => {
                if folds < 2 {
                    return Err(Error::Config("at least 2 folds are required".into()));
                }
            }
        }
        if self.k_grid.is_empty() || self.k_grid.contains(&0) {
            return Err(Error::Config("K grid must be nonempty and positive".into()));
        }
        if !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::Config("val_fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Solver used inside the protocol; its own K is replaced by the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    Greedy(GreedyConfig),
    Exact(ExactConfig),
}

impl Method {
    pub fn cluster_type(&self) -> ClusterType {
        match self {
            Method::Greedy(c) => c.cluster_type,
            Method::Exact(c) => c.cluster_type,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            Method::Greedy(c) => c.k,
            Method::Exact(c) => c.k,
        }
    }

    pub fn with_k(&self, k: usize) -> Method {
        match self {
            Method::Greedy(c) => Method::Greedy(GreedyConfig { k, ..c.clone() }),
            Method::Exact(c) => Method::Exact(ExactConfig { k, ..c.clone() }),
        }
    }

    pub fn fit(&self, ds: &Dataset, spec: &LossSpec) -> Result<FitReport> {
        match self {
            Method::Greedy(c) => greedy::fit(ds, spec, c),
            Method::Exact(c) => fit_exact(ds, spec, c).map(|f| f.report),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub val_scores: Vec<KScore>,
    pub selected_k: usize,
    pub test_score: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CvReport {
    pub config: serde_json::Value,
    pub metric: Metric,
    pub per_fold: Vec<FoldResult>,
    pub mean: f64,
    pub std: f64,
    /// Mean validation score of each K across folds.
    pub per_k_val_mean: Vec<KScore>,
    pub selected_k: usize,
    pub wall_time: f64,
}

/// Index of the best score; ties keep the earliest entry.
pub fn select_best(scores: &[KScore], metric: Metric) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, s) in scores.iter().enumerate() {
        let better = match best {
            None => true,
            Some(b) => {
                let cur = scores[b].score;
                if metric.maximize() {
                    s.score > cur
                } else {
                    s.score < cur
                }
            }
        };
        if better && !s.score.is_nan() {
            best = Some(i);
        }
    }
    best
}

struct Parts {
    fit: Vec<usize>,
    train: Vec<usize>,
    val: Vec<usize>,
    test: Vec<usize>,
}

fn score_on(
    ds: &Dataset,
    train: &[usize],
    eval_rows: &[usize],
    method: &Method,
    spec: &LossSpec,
    metric: Metric,
    standardize: bool,
) -> Result<f64> {
    let mut tr = ds.subset(train);
    let mut te = ds.subset(eval_rows);
    if standardize && ds.standardizer.is_none() {
        let s = Standardizer::fit(tr.features(), tr.d());
        tr.apply_standardizer(s.clone());
        te.apply_standardizer(s);
    }
    let report = method.fit(&tr, spec)?;
    let preds = predict(&te, &report.params, method.cluster_type())?;
    evaluate(&te, &preds, metric)
}

/// Runs the protocol: per fold, choose K on the validation rows (smaller K
/// wins ties), refit on training plus validation rows and score the test
/// rows. Folds run concurrently.
pub fn cross_validate(ds: &Dataset, protocol: &EvalProtocol, method: &Method, spec: &LossSpec) -> Result<CvReport> {
    protocol.validate()?;
    let start = Instant::now();
    let metric = protocol.metric.unwrap_or_else(|| Metric::default_for(ds.task()));
    let mut grid = protocol.k_grid.clone();
    grid.sort_unstable();
    grid.dedup();

    let parts: Vec<Parts> = match protocol.split {
        SplitScheme::Holdout { train, val, test } => {
            let s = train_val_test_split(ds.n(), [train, val, test], protocol.seed)?;
            let mut fit: Vec<usize> = s.train.iter().chain(&s.val).copied().collect();
            fit.sort_unstable();
            vec![Parts {
                fit,
                train: s.train,
                val: s.val,
                test: s.test,
            }]
        }
        SplitScheme::KFold { folds } => {
            let fs = k_fold(ds.n(), folds, protocol.seed)?;
            (0..folds)
                .map(|f| {
                    let fit: Vec<usize> = (0..folds).filter(|&g| g != f).flat_map(|g| fs[g].iter().copied()).collect();
                    let mut fit = fit;
                    fit.sort_unstable();
                    let inner = train_val_test_split(
                        fit.len(),
                        [1.0 - protocol.val_fraction, protocol.val_fraction, 0.0],
                        protocol.seed.wrapping_add(1 + f as u64),
                    )?;
                    Ok(Parts {
                        train: inner.train.iter().map(|&i| fit[i]).collect(),
                        val: inner.val.iter().chain(&inner.test).map(|&i| fit[i]).collect(),
                        fit,
                        test: fs[f].clone(),
                    })
                })
                .collect::<Result<_>>()?
        }
    };

    let run = |(fold, p): (usize, &Parts)| -> Result<FoldResult> {
        let t0 = Instant::now();
        let mut val_scores = Vec::new();
        if !p.val.is_empty() && (grid.len() > 1 || p.train.len() >= grid[0]) {
            for &k in &grid {
                if k > p.train.len() {
                    continue;
                }
                let score = score_on(ds, &p.train, &p.val, &method.with_k(k), spec, metric, protocol.standardize)?;
                val_scores.push(KScore { k, score });
            }
        }
        let selected_k = select_best(&val_scores, metric).map_or(grid[0], |i| val_scores[i].k);
        let test_score = score_on(ds, &p.fit, &p.test, &method.with_k(selected_k), spec, metric, protocol.standardize)?;
        Ok(FoldResult {
            fold,
            n_train: p.train.len(),
            n_val: p.val.len(),
            n_test: p.test.len(),
            val_scores,
            selected_k,
            test_score,
            seconds: t0.elapsed().as_secs_f64(),
        })
    };
    let per_fold: Vec<FoldResult> = parts.par_iter().enumerate().map(run).collect::<Result<_>>()?;

    let scores: Vec<f64> = per_fold.iter().map(|f| f.test_score).collect();
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    let std = if scores.len() > 1 {
        (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (scores.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    let per_k_val_mean: Vec<KScore> = grid
        .iter()
        .filter_map(|&k| {
            let v: Vec<f64> = per_fold
                .iter()
                .flat_map(|f| f.val_scores.iter().filter(|s| s.k == k).map(|s| s.score))
                .collect();
            (!v.is_empty()).then(|| KScore {
                k,
                score: v.iter().sum::<f64>() / v.len() as f64,
            })
        })
        .collect();
    let selected_k = select_best(&per_k_val_mean, metric).map_or(grid[0], |i| per_k_val_mean[i].k);
    let config = serde_json::json!({
        "protocol": protocol,
        "method": method,
        "loss": spec,
        "n": ds.n(),
        "d": ds.d(),
    });
    Ok(CvReport {
        config,
        metric,
        per_fold,
        mean,
        std,
        per_k_val_mean,
        selected_k,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ties_prefer_the_smaller_k() {
        let s = vec![KScore { k: 2, score: 0.5 }, KScore { k: 3, score: 0.7 }, KScore { k: 4, score: 0.7 }];
        assert_eq!(select_best(&s, Metric::R2), Some(1));
        assert_eq!(select_best(&s, Metric::Rmse), Some(0));
        assert_eq!(select_best(&[], Metric::R2), None);
    }

    #[test]
    fn protocol_validation() {
        assert!(EvalProtocol::default().validate().is_ok());
        assert!(EvalProtocol::holdout(0).validate().is_ok());
        let bad = EvalProtocol {
            split: SplitScheme::KFold { folds: 1 },
            ..EvalProtocol::default()
        };
        assert!(bad.validate().is_err());
        let bad = EvalProtocol {
            k_grid: vec![],
            ..EvalProtocol::default()
        };
        assert!(bad.validate().is_err());
    }
}
