//! Cluster assignments, cluster geometries and per-cluster parameters.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};

/// Rule that decides which points may share a cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterType {
    Arbitrary,
    #[serde(alias = "cc")]
    ClosestCenter,
    #[serde(alias = "bb")]
    BoundingBox,
}

impl ClusterType {
    pub const ALL: [ClusterType; 3] = [ClusterType::Arbitrary, ClusterType::ClosestCenter, ClusterType::BoundingBox];

    pub fn short_name(&self) -> &'static str {
        match self {
            ClusterType::Arbitrary => "arbitrary",
            ClusterType::ClosestCenter => "cc",
            ClusterType::BoundingBox => "bb",
        }
    }
}

impl fmt::Display for ClusterType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for ClusterType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "arbitrary" | "arbit" => Ok(ClusterType::Arbitrary),
            "cc" | "closest_center" => Ok(ClusterType::ClosestCenter),
            "bb" | "bounding_box" => Ok(ClusterType::BoundingBox),
            other => Err(Error::Config(format!("unknown cluster type {other:?}"))),
        }
    }
}

/// Hard partition of N rows into K clusters, stored as one label per row.
///
/// This is the compact form of a one-hot indicator matrix; every row has
/// exactly one cluster by construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    labels: Vec<usize>,
    k: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("K must be positive".into()));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
            return Err(Error::Dimension(format!("row {i} assigned to cluster {l} but K = {k}")));
        }
        Ok(Assignment { labels, k })
    }

    /// Validates a one-hot indicator matrix (rows of 0/1 with a single 1).
    pub fn from_one_hot(c: &[Vec<u8>]) -> Result<Self> {
        let k = c.first().map(Vec::len).unwrap_or(0);
        let mut labels = Vec::with_capacity(c.len());
        for (i, row) in c.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Dimension(format!("indicator row {i} has length {}", row.len())));
            }
            if row.iter().any(|&v| v > 1) || row.iter().filter(|&&v| v == 1).count() != 1 {
                return Err(Error::Dimension(format!("indicator row {i} is not one-hot")));
            }
            labels.push(row.iter().position(|&v| v == 1).unwrap());
        }
        Assignment::new(labels, k)
    }

    pub fn to_one_hot(&self) -> Vec<Vec<u8>> {
        self.labels
            .iter()
            .map(|&l| (0..self.k).map(|k| u8::from(k == l)).collect())
            .collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cluster_of(&self, i: usize) -> usize {
        self.labels[i]
    }

    /// Indicator c_ik.
    pub fn c(&self, i: usize, k: usize) -> u8 {
        u8::from(self.labels[i] == k)
    }

    pub(crate) fn set(&mut self, i: usize, k: usize) {
        debug_assert!(k < self.k);
        self.labels[i] = k;
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }

    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == k).collect()
    }

    pub fn empty_clusters(&self) -> Vec<usize> {
        self.sizes()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0)
            .map(|(k, _)| k)
            .collect()
    }

    /// Coordinate-wise mean of each cluster's members; empty clusters get
    /// `None`.
    pub fn centroids(&self, ds: &Dataset) -> Vec<Option<Vec<f64>>> {
        let d = ds.d();
        let mut sums = vec![vec![0.0; d]; self.k];
        let sizes = self.sizes();
        for (i, row) in ds.rows().enumerate() {
            for (s, &x) in sums[self.labels[i]].iter_mut().zip(row) {
                *s += x;
            }
        }
        sums.into_iter()
            .zip(sizes)
            .map(|(s, n)| (n > 0).then(|| s.into_iter().map(|v| v / n as f64).collect()))
            .collect()
    }
}

/// Axis-parallel box `lower[j] <= x[j] <= upper[j]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxBounds {
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol)
    }

    /// L1 distance from `x` to the box (zero inside).
    pub fn exterior_l1(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| (lo - v).max(0.0) + (v - hi).max(0.0))
            .sum()
    }

    pub fn volume(&self) -> f64 {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| hi - lo).product()
    }
}

/// Smallest side length given to a materialized box, so that every box has
/// `upper > lower` even for single-point clusters.
pub const MIN_BOX_WIDTH: f64 = 1e-6;

/// Per-cluster model weights plus optional geometry artifacts.
///
/// Regression clusters hold `d + 1` weights (the last multiplies a constant
/// 1 feature). Classification clusters hold `M * (d + 1)` weights, class `m`
/// occupying `m * (d + 1) .. (m + 1) * (d + 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub task: Task,
    pub d: usize,
    pub weights: Vec<Vec<f64>>,
    pub centers: Option<Vec<Vec<f64>>>,
    pub boxes: Option<Vec<BoxBounds>>,
}

impl ClusterParams {
    pub fn zeros(task: Task, d: usize, k: usize) -> Self {
        let width = task.n_classes().unwrap_or(1) * (d + 1);
        ClusterParams {
            task,
            d,
            weights: vec![vec![0.0; width]; k],
            centers: None,
            boxes: None,
        }
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    /// Weight block of class `m` in cluster `k`.
    pub fn class_weights(&self, k: usize, m: usize) -> &[f64] {
        let w = self.d + 1;
        &self.weights[k][m * w..(m + 1) * w]
    }

    pub fn validate(&self) -> Result<()> {
        let width = self.task.n_classes().unwrap_or(1) * (self.d + 1);
        for (k, w) in self.weights.iter().enumerate() {
            if w.len() != width {
                return Err(Error::Dimension(format!("cluster {k} has {} weights, expected {width}", w.len())));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::Model(format!("cluster {k} has non-finite weights")));
            }
        }
        if let Some(boxes) = &self.boxes {
            for (k, b) in boxes.iter().enumerate() {
                if b.lower.iter().zip(&b.upper).any(|(lo, hi)| hi <= lo) {
                    return Err(Error::Model(format!("box {k} has an empty side")));
                }
            }
        }
        Ok(())
    }

    /// Tight member boxes, each side widened to at least [`MIN_BOX_WIDTH`].
    /// Empty clusters get a degenerate box at the origin.
    pub fn materialize_boxes(ds: &Dataset, asg: &Assignment) -> Vec<BoxBounds> {
        let d = ds.d();
        let mut boxes = vec![
            BoxBounds {
                lower: vec![f64::INFINITY; d],
                upper: vec![f64::NEG_INFINITY; d],
            };
            asg.k()
        ];
        for (i, row) in ds.rows().enumerate() {
            let b = &mut boxes[asg.cluster_of(i)];
            for j in 0..d {
                b.lower[j] = b.lower[j].min(row[j]);
                b.upper[j] = b.upper[j].max(row[j]);
            }
        }
        for b in &mut boxes {
            for j in 0..d {
                if !b.lower[j].is_finite() {
                    b.lower[j] = 0.0;
                    b.upper[j] = 0.0;
                }
                if b.upper[j] - b.lower[j] < MIN_BOX_WIDTH {
                    b.upper[j] = b.lower[j] + MIN_BOX_WIDTH;
                }
            }
        }
        boxes
    }
}

/// `theta[..d] . x + theta[d]`.
#[inline]
pub fn affine(theta: &[f64], x: &[f64]) -> f64 {
    let d = x.len();
    theta[..d].iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + theta[d]
}

pub(crate) fn sq_l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Index of the smallest value; ties go to the lowest index.
pub(crate) fn argmin(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v < best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_round_trip() {
        let a = Assignment::new(vec![0, 2, 1, 2], 3).unwrap();
        let c = a.to_one_hot();
        assert!(c.iter().all(|r| r.iter().map(|&v| v as u32).sum::<u32>() == 1));
        assert_eq!(Assignment::from_one_hot(&c).unwrap(), a);
        assert_eq!(a.sizes(), vec![1, 1, 2]);
        assert_eq!(a.members(2), vec![1, 3]);
    }

    #[test]
    fn rejects_bad_indicators() {
        assert!(Assignment::from_one_hot(&[vec![1, 1]]).is_err());
        assert!(Assignment::from_one_hot(&[vec![0, 0]]).is_err());
        assert!(Assignment::new(vec![0, 2], 2).is_err());
    }

    #[test]
    fn box_helpers() {
        let b = BoxBounds {
            lower: vec![0.0, 0.0],
            upper: vec![1.0, 2.0],
        };
        assert!(b.contains(&[0.5, 2.0], 0.0));
        assert!(!b.contains(&[1.5, 1.0], 0.0));
        assert_eq!(b.exterior_l1(&[2.0, -1.0]), 2.0);
        assert_eq!(b.volume(), 2.0);
    }

    #[test]
    fn argmin_ties_to_lowest() {
        assert_eq!(argmin([3.0, 1.0, 1.0]), 1);
        assert_eq!(argmin([2.0, 2.0]), 0);
    }

    #[test]
    fn parses_cluster_types() {
        assert_eq!("CC".parse::<ClusterType>().unwrap(), ClusterType::ClosestCenter);
        assert_eq!("bounding-box".parse::<ClusterType>().unwrap(), ClusterType::BoundingBox);
        assert!("dbscan".parse::<ClusterType>().is_err());
    }
}
