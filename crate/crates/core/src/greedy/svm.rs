//! One-vs-rest linear SVM (L2-regularized hinge) trained by dual coordinate
//! descent over a fixed row order.
//!
//! Each binary problem is `min 0.5 ||w||^2 + U * sum max(0, 1 - s_i w'x_i)`
//! over the augmented input `x = (features, 1)`, solved in the box-constrained
//! dual `0 <= alpha_i <= U`.

use crate::cluster::affine;
use crate::data::Dataset;

#[derive(Clone, Copy, Debug)]
pub struct DualCdSettings {
    /// Box bound on the dual variables (`C / l2`).
    pub upper: f64,
    /// Stop when the projected-gradient spread drops below this.
    pub tol: f64,
    pub max_epochs: usize,
}

/// Trains one binary classifier per class on `members`.
///
/// `alphas` holds the dual variables row-major as `members.len() x M` and is
/// used as a warm start; it is updated in place. Returns `M * (d + 1)` weights.
pub fn train_ovr(ds: &Dataset, members: &[usize], n_classes: usize, alphas: &mut [f64], s: &DualCdSettings) -> Vec<f64> {
    let labels = ds.labels().expect("svm training needs class labels");
    let d = ds.d();
    let w_len = d + 1;
    debug_assert_eq!(alphas.len(), members.len() * n_classes);
    let q_diag: Vec<f64> = members
        .iter()
        .map(|&i| ds.row(i).iter().map(|v| v * v).sum::<f64>() + 1.0)
        .collect();

    let mut out = vec![0.0; n_classes * w_len];
    for m in 0..n_classes {
        let w = &mut out[m * w_len..(m + 1) * w_len];
        let sign = |i: usize| if labels[i] == m { 1.0 } else { -1.0 };
        for (r, &i) in members.iter().enumerate() {
            let a = alphas[r * n_classes + m].clamp(0.0, s.upper);
            alphas[r * n_classes + m] = a;
            if a != 0.0 {
                axpy(w, a * sign(i), ds.row(i));
            }
        }
        for _ in 0..s.max_epochs {
            let mut pg_max = f64::NEG_INFINITY;
            let mut pg_min = f64::INFINITY;
            for (r, &i) in members.iter().enumerate() {
                let x = ds.row(i);
                let yi = sign(i);
                let slot = r * n_classes + m;
                let a = alphas[slot];
                let g = yi * affine(w, x) - 1.0;
                let pg = if a <= 0.0 {
                    g.min(0.0)
                } else if a >= s.upper {
                    g.max(0.0)
                } else {
                    g
                };
                pg_max = pg_max.max(pg);
                pg_min = pg_min.min(pg);
                if pg != 0.0 {
                    let a_new = (a - g / q_diag[r]).clamp(0.0, s.upper);
                    if a_new != a {
                        axpy(w, (a_new - a) * yi, x);
                        alphas[slot] = a_new;
                    }
                }
            }
            if members.is_empty() || pg_max - pg_min < s.tol {
                break;
            }
        }
    }
    out
}

fn axpy(w: &mut [f64], a: f64, x: &[f64]) {
    let d = x.len();
    for (wj, xj) in w[..d].iter_mut().zip(x) {
        *wj += a * xj;
    }
    w[d] += a;
}

/// Class with the largest score; ties go to the lowest class index.
pub fn predict_class(theta: &[f64], x: &[f64]) -> usize {
    let w = x.len() + 1;
    let m = theta.len() / w;
    let mut best = 0;
    let mut best_s = f64::NEG_INFINITY;
    for c in 0..m {
        let s = affine(&theta[c * w..(c + 1) * w], x);
        if s > best_s {
            best_s = s;
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> DualCdSettings {
        DualCdSettings {
            upper: 100.0,
            tol: 1e-6,
            max_epochs: 2000,
        }
    }

    #[test]
    fn separates_a_separable_problem() {
        let rows = vec![vec![-2.0, 0.5], vec![-1.0, -0.3], vec![-1.5, 1.0], vec![1.0, 0.2], vec![2.0, -1.0], vec![1.2, 0.7]];
        let labels = vec![0, 0, 0, 1, 1, 1];
        let ds = Dataset::classification(rows, labels.clone(), 2).unwrap();
        let members: Vec<usize> = (0..6).collect();
        let mut alphas = vec![0.0; 12];
        let w = train_ovr(&ds, &members, 2, &mut alphas, &settings());
        for i in 0..6 {
            assert_eq!(predict_class(&w, ds.row(i)), labels[i]);
        }
        // margin constraints hold at the hard-margin-like solution
        for i in 0..6 {
            let s = if labels[i] == 1 { 1.0 } else { -1.0 };
            assert!(s * affine(&w[3..6], ds.row(i)) >= 1.0 - 1e-3);
        }
    }

    #[test]
    fn warm_start_reaches_same_solution() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.91).cos()]).collect();
        let labels: Vec<usize> = rows.iter().map(|r| usize::from(r[0] + 0.3 * r[1] > 0.1)).collect();
        let ds = Dataset::classification(rows, labels, 2).unwrap();
        let members: Vec<usize> = (0..20).collect();
        let s = DualCdSettings {
            upper: 1.0,
            tol: 1e-9,
            max_epochs: 10_000,
        };
        let mut cold = vec![0.0; 40];
        let w1 = train_ovr(&ds, &members, 2, &mut cold, &s);
        let mut warm = cold.clone();
        let w2 = train_ovr(&ds, &members, 2, &mut warm, &s);
        for (a, b) in w1.iter().zip(&w2) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
