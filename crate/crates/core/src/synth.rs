//! Synthetic clusterwise data: well-separated Gaussian blobs, each with its
//! own regression plane or separating hyperplane, with the generating
//! labels kept for recovery checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cluster::{affine, Assignment};
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthTask {
    Regression,
    Classification,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub task: SynthTask,
    pub k_true: usize,
    pub n: usize,
    pub d: usize,
    /// Minimum distance between blob centers, in blob standard deviations.
    pub separation: f64,
    pub noise_sigma: f64,
    pub label_flip_prob: f64,
    /// Plane weights and intercepts are drawn from `[-w, w]`.
    pub weight_range: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            task: SynthTask::Regression,
            k_true: 3,
            n: 600,
            d: 2,
            separation: 8.0,
            noise_sigma: 0.5,
            label_flip_prob: 0.0,
            weight_range: 5.0,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k_true == 0 || self.d == 0 {
            return Err(Error::Config("k_true and d must be positive".into()));
        }
        if self.n < self.k_true {
            return Err(Error::Config(format!("N = {} is smaller than k_true = {}", self.n, self.k_true)));
        }
        if !(self.noise_sigma >= 0.0) || !(self.separation >= 0.0) || !(self.weight_range > 0.0) {
            return Err(Error::Config("noise, separation and weight range must be nonnegative".into()));
        }
        if !(0.0..=1.0).contains(&self.label_flip_prob) {
            return Err(Error::Config("label_flip_prob must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Synthetic {
    pub dataset: Dataset,
    pub true_labels: Assignment,
    pub centers: Vec<Vec<f64>>,
    /// Regression: plane weights with the intercept last. Classification:
    /// hyperplane normal with the offset last; class 1 lies on the positive
    /// side.
    pub true_weights: Vec<Vec<f64>>,
}

fn blob_centers(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let mut half = (spec.separation * spec.k_true as f64).max(1.0);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.k_true);
    let mut attempts = 0;
    while centers.len() < spec.k_true {
        let c: Vec<f64> = (0..spec.d).map(|_| rng.random_range(-half..=half)).collect();
        let ok = centers
            .iter()
            .all(|o| o.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() >= spec.separation);
        if ok {
            centers.push(c);
            continue;
        }
        attempts += 1;
        if attempts % 1000 == 0 {
            half *= 2.0;
        }
        if attempts > 100_000 {
            return Err(Error::Config("could not place separated blob centers".into()));
        }
    }
    Ok(centers)
}

fn blobs(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<usize>)> {
    spec.validate()?;
    let centers = blob_centers(spec, rng)?;
    let labels: Vec<usize> = (0..spec.n).map(|i| i % spec.k_true).collect();
    let rows = labels
        .iter()
        .map(|&k| {
            centers[k]
                .iter()
                .map(|c| c + Distribution::<f64>::sample(&StandardNormal, rng))
                .collect::<Vec<f64>>()
        })
        .collect();
    Ok((centers, rows, labels))
}

/// Blobs with one random plane each; `y = w'x + b + N(0, sigma^2)`.
pub fn gen_regression(spec: &SynthSpec) -> Result<Synthetic> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (centers, rows, labels) = blobs(spec, &mut rng)?;
    let w = spec.weight_range;
    let planes: Vec<Vec<f64>> = (0..spec.k_true)
        .map(|_| (0..=spec.d).map(|_| rng.random_range(-w..=w)).collect())
        .collect();
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Config(e.to_string()))?;
    let y: Vec<f64> = rows
        .iter()
        .zip(&labels)
        .map(|(x, &k)| affine(&planes[k], x) + noise.sample(&mut rng))
        .collect();
    Ok(Synthetic {
        dataset: Dataset::regression(rows, y)?,
        true_labels: Assignment::new(labels, spec.k_true)?,
        centers,
        true_weights: planes,
    })
}

/// Blobs split into two classes by a random hyperplane through each blob
/// center; each label is flipped with probability `label_flip_prob`.
pub fn gen_classification(spec: &SynthSpec) -> Result<Synthetic> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (centers, rows, labels) = blobs(spec, &mut rng)?;
    let planes: Vec<Vec<f64>> = centers
        .iter()
        .map(|c| {
            let mut normal: Vec<f64> = (0..spec.d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            normal.iter_mut().for_each(|v| *v /= len);
            let offset = -normal.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
            normal.push(offset);
            normal
        })
        .collect();
    let classes: Vec<usize> = rows
        .iter()
        .zip(&labels)
        .map(|(x, &k)| {
            let side = usize::from(affine(&planes[k], x) > 0.0);
            if rng.random::<f64>() < spec.label_flip_prob {
                1 - side
            } else {
                side
            }
        })
        .collect();
    Ok(Synthetic {
        dataset: Dataset::classification(rows, classes, 2)?,
        true_labels: Assignment::new(labels, spec.k_true)?,
        centers,
        true_weights: planes,
    })
}

/// Dispatches on `spec.task`.
pub fn generate(spec: &SynthSpec) -> Result<Synthetic> {
    match spec.task {
        SynthTask::Regression => gen_regression(spec),
        SynthTask::Classification => gen_classification(spec),
    }
}
