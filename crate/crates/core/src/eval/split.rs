//! Seeded row splits.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

/// Train/validation/test split with the given fractions; each part is
/// returned in ascending row order.
pub fn train_val_test_split(n: usize, fractions: [f64; 3], seed: u64) -> Result<Split> {
    if fractions.iter().any(|f| !(*f >= 0.0)) || (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("split fractions {fractions:?} must be nonnegative and sum to 1")));
    }
    let idx = shuffled(n, seed);
    let n_train = (fractions[0] * n as f64).round() as usize;
    let n_val = ((fractions[1] * n as f64).round() as usize).min(n - n_train);
    let mut parts = [
        idx[..n_train].to_vec(),
        idx[n_train..n_train + n_val].to_vec(),
        idx[n_train + n_val..].to_vec(),
    ];
    for p in &mut parts {
        p.sort_unstable();
    }
    let [train, val, test] = parts;
    Ok(Split { train, val, test })
}

/// `k` disjoint folds covering `0..n`, sizes differing by at most one.
pub fn k_fold(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::Config(format!("{k} folds for {n} rows")));
    }
    let idx = shuffled(n, seed);
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    for (p, &i) in idx.iter().enumerate() {
        folds[p % k].push(i);
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}
