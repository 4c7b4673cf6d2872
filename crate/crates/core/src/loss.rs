//! Per-datum losses and the overall clustered objective.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::{affine, Assignment, ClusterParams};
use crate::data::{Dataset, Response};
use crate::error::{Error, Result};

/// Margin required between the true-class score and every other class score.
pub const WW_MARGIN: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mae,
    Mse,
    /// Weston-Watkins multi-class hinge.
    HingeWw,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Mae => "mae",
            LossKind::Mse => "mse",
            LossKind::HingeWw => "hinge",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mae" => Ok(LossKind::Mae),
            "mse" => Ok(LossKind::Mse),
            "hinge" | "hinge_ww" | "ww" | "svm" => Ok(LossKind::HingeWw),
            other => Err(Error::Config(format!("unknown loss {other:?}"))),
        }
    }
}

/// Per-cluster weight penalty, added once per cluster by [`total_loss`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "strength")]
pub enum Regularization {
    None,
    /// `strength * sum |w|`
    L1(f64),
    /// `0.5 * strength * sum w^2`
    L2(f64),
}

impl Regularization {
    pub fn penalty(&self, w: &[f64]) -> f64 {
        match *self {
            Regularization::None => 0.0,
            Regularization::L1(s) => s * w.iter().map(|v| v.abs()).sum::<f64>(),
            Regularization::L2(s) => 0.5 * s * w.iter().map(|v| v * v).sum::<f64>(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    /// Weight on the summed hinge slacks; ignored for regression losses.
    pub svm_c: f64,
    pub regularization: Regularization,
}

impl LossSpec {
    pub fn mae() -> Self {
        LossSpec {
            kind: LossKind::Mae,
            svm_c: 1.0,
            regularization: Regularization::None,
        }
    }

    pub fn mse() -> Self {
        LossSpec {
            kind: LossKind::Mse,
            ..Self::mae()
        }
    }

    /// Hinge objective of the exact path: `||theta||_1 + C * sum(slacks)`.
    pub fn hinge_l1(svm_c: f64) -> Self {
        LossSpec {
            kind: LossKind::HingeWw,
            svm_c,
            regularization: Regularization::L1(1.0),
        }
    }

    /// Hinge objective of the greedy path: `0.5 * l2 * ||theta||^2 + C * sum(slacks)`.
    pub fn hinge_l2(svm_c: f64, l2: f64) -> Self {
        LossSpec {
            kind: LossKind::HingeWw,
            svm_c,
            regularization: Regularization::L2(l2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == LossKind::HingeWw && !(self.svm_c > 0.0 && self.svm_c.is_finite()) {
            return Err(Error::Config(format!("svm C must be positive, got {}", self.svm_c)));
        }
        match self.regularization {
            Regularization::L1(s) | Regularization::L2(s) if !(s >= 0.0 && s.is_finite()) => {
                Err(Error::Config(format!("regularization strength must be nonnegative, got {s}")))
            }
            _ => Ok(()),
        }
    }

    /// Multiplier applied to the summed per-datum losses in the objective.
    pub fn data_weight(&self) -> f64 {
        match self.kind {
            LossKind::HingeWw => self.svm_c,
            _ => 1.0,
        }
    }
}

/// Loss of one row under one cluster's weights.
///
/// `x` holds the d raw features; `theta` holds `d + 1` weights for
/// regression or `M * (d + 1)` for the hinge loss. Regularization is not
/// included.
pub fn per_datum_loss(x: &[f64], y: Response, theta: &[f64], spec: &LossSpec) -> Result<f64> {
    let w = x.len() + 1;
    match (spec.kind, y) {
        (LossKind::Mae | LossKind::Mse, Response::Value(_)) => {
            if theta.len() != w {
                return Err(Error::Dimension(format!("{} weights for {} features", theta.len(), x.len())));
            }
        }
        (LossKind::HingeWw, Response::Class(c)) => {
            if theta.is_empty() || theta.len() % w != 0 {
                return Err(Error::Dimension(format!("{} weights for {} features", theta.len(), x.len())));
            }
            let m = theta.len() / w;
            if c >= m {
                return Err(Error::ClassOutOfRange { class: c, n_classes: m });
            }
        }
        (kind, _) => {
            return Err(Error::Unsupported(format!("loss {kind} does not match the target type")));
        }
    }
    Ok(datum_loss(x, y, theta, spec.kind))
}

/// Unchecked per-datum loss; callers guarantee shapes.
#[inline]
pub(crate) fn datum_loss(x: &[f64], y: Response, theta: &[f64], kind: LossKind) -> f64 {
    match (kind, y) {
        (LossKind::Mae, Response::Value(y)) => (y - affine(theta, x)).abs(),
        (LossKind::Mse, Response::Value(y)) => {
            let r = y - affine(theta, x);
            r * r
        }
        (LossKind::HingeWw, Response::Class(c)) => ww_hinge(x, c, theta),
        _ => f64::NAN,
    }
}

/// `sum_{m != y} max(0, 2 - (s_y - s_m))` with class scores `s`.
pub(crate) fn ww_hinge(x: &[f64], class: usize, theta: &[f64]) -> f64 {
    let w = x.len() + 1;
    let m = theta.len() / w;
    let s_true = affine(&theta[class * w..(class + 1) * w], x);
    (0..m)
        .filter(|&o| o != class)
        .map(|o| (WW_MARGIN - (s_true - affine(&theta[o * w..(o + 1) * w], x))).max(0.0))
        .sum()
}

/// `sum_i w * l(x_i, y_i, theta_{k(i)}) + sum_k penalty(theta_k)` where `w`
/// is [`LossSpec::data_weight`].
pub fn total_loss(ds: &Dataset, asg: &Assignment, params: &ClusterParams, spec: &LossSpec) -> Result<f64> {
    if asg.n() != ds.n() {
        return Err(Error::Dimension(format!("assignment covers {} rows, dataset has {}", asg.n(), ds.n())));
    }
    if asg.k() != params.k() {
        return Err(Error::Dimension(format!("assignment has K = {}, params have {}", asg.k(), params.k())));
    }
    if params.d != ds.d() {
        return Err(Error::Dimension(format!("params for d = {}, dataset has d = {}", params.d, ds.d())));
    }
    let mut data = 0.0;
    for i in 0..ds.n() {
        data += per_datum_loss(ds.row(i), ds.response(i), &params.weights[asg.cluster_of(i)], spec)?;
    }
    let reg: f64 = params.weights.iter().map(|w| spec.regularization.penalty(w)).sum();
    Ok(spec.data_weight() * data + reg)
}

/// [`total_loss`] without shape checks, for solver inner loops.
pub(crate) fn total_loss_fast(ds: &Dataset, labels: &[usize], params: &ClusterParams, spec: &LossSpec) -> f64 {
    let data: f64 = (0..ds.n())
        .map(|i| datum_loss(ds.row(i), ds.response(i), &params.weights[labels[i]], spec.kind))
        .sum();
    let reg: f64 = params.weights.iter().map(|w| spec.regularization.penalty(w)).sum();
    spec.data_weight() * data + reg
}
