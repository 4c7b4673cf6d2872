//! Small dense least-squares solves for per-cluster regression.

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;

/// Relative ridge added when the normal equations are singular.
pub const RIDGE: f64 = 1e-8;

const REFINE_STEPS: usize = 8;

/// Least squares with intercept over the rows in `members`, minimizing
/// `sum r_i^2 + 0.5 * l2 * ||w||^2` (intercept included in the penalty).
///
/// Returns `d + 1` weights, intercept last. Rank-deficient designs fall back
/// to iterated ridge, which converges to the minimum-norm solution.
pub fn least_squares(ds: &Dataset, members: &[usize], l2: f64) -> Vec<f64> {
    let y = ds.y().expect("least squares needs a real-valued target");
    let p = ds.d() + 1;
    let mut gram = DMatrix::<f64>::zeros(p, p);
    let mut rhs = DVector::<f64>::zeros(p);
    let mut xa = vec![1.0; p];
    for &i in members {
        xa[..p - 1].copy_from_slice(ds.row(i));
        for a in 0..p {
            rhs[a] += xa[a] * y[i];
            for b in 0..=a {
                gram[(a, b)] += xa[a] * xa[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            gram[(b, a)] = gram[(a, b)];
        }
        gram[(a, a)] += 0.5 * l2;
    }
    solve_normal(gram, rhs)
}

/// Solves `G w = b` for a symmetric positive semidefinite Gram matrix.
pub fn solve_normal(gram: DMatrix<f64>, rhs: DVector<f64>) -> Vec<f64> {
    let p = gram.nrows();
    let scale = (0..p).map(|a| gram[(a, a)]).fold(0.0_f64, f64::max).max(1.0);
    if let Some(ch) = gram.clone().cholesky() {
        let l = ch.l_dirty();
        let min_pivot = (0..p).map(|a| l[(a, a)] * l[(a, a)]).fold(f64::INFINITY, f64::min);
        if min_pivot > 1e-10 * scale {
            let mut w = ch.solve(&rhs);
            // one refinement step against the unfactored system
            let r = &rhs - &gram * &w;
            w += ch.solve(&r);
            return w.iter().copied().collect();
        }
    }
    let mut reg = gram.clone();
    for a in 0..p {
        reg[(a, a)] += RIDGE * scale;
    }
    let ch = reg.cholesky().expect("ridge-regularized Gram matrix is positive definite");
    let mut w = DVector::<f64>::zeros(p);
    for _ in 0..REFINE_STEPS {
        let r = &rhs - &gram * &w;
        w += ch.solve(&r);
    }
    w.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::affine;

    #[test]
    fn two_points_determine_a_line() {
        let ds = Dataset::regression(vec![vec![0.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
        let w = least_squares(&ds, &[0, 1], 0.0);
        assert!((w[0] - 2.0).abs() < 1e-10 && (w[1] - 1.0).abs() < 1e-10, "{w:?}");
    }

    #[test]
    fn identical_inputs_predict_the_mean() {
        let ds = Dataset::regression(vec![vec![2.0, -1.0]; 3], vec![1.0, 2.0, 6.0]).unwrap();
        let w = least_squares(&ds, &[0, 1, 2], 0.0);
        assert!((affine(&w, &[2.0, -1.0]) - 3.0).abs() < 1e-6, "{w:?}");
        // minimum-norm solution is proportional to the augmented input (2, -1, 1)
        assert!((w[0] / w[2] - 2.0).abs() < 1e-4 && (w[1] / w[2] + 1.0).abs() < 1e-4, "{w:?}");
    }

    #[test]
    fn ridge_shrinks_toward_zero() {
        let ds = Dataset::regression(vec![vec![0.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
        let w = least_squares(&ds, &[0, 1], 2.0);
        // (G + I) w = b with G = [[1, 1], [1, 2]], b = (3, 4)
        assert!((w[0] - 1.0).abs() < 1e-10 && (w[1] - 1.0).abs() < 1e-10, "{w:?}");
    }

    #[test]
    fn single_point_is_interpolated() {
        let ds = Dataset::regression(vec![vec![0.3, 0.7]], vec![-4.0]).unwrap();
        let w = least_squares(&ds, &[0], 0.0);
        assert!((affine(&w, &[0.3, 0.7]) + 4.0).abs() < 1e-9);
    }
}
