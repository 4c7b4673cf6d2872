//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use predclust::cluster::{Assignment, ClusterParams, ClusterType};
use predclust::data::Dataset;
use predclust::loss::{total_loss, LossSpec};
use predclust::milp::{Integrality, MilpModel, ModelMetadata, Sense};
use predclust::solve::{solve_lp, LpStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_regression(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    Dataset::regression(rows, y).unwrap()
}

pub fn random_classification(rng: &mut ChaCha8Rng, n: usize, d: usize, m: usize) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let labels: Vec<usize> = (0..n).map(|i| if i < m { i } else { rng.random_range(0..m) }).collect();
    Dataset::classification(rows, labels, m).unwrap()
}

/// Least absolute deviations with `|theta_j| <= bound`, written as
/// `theta'x + p - q = y` with `p, q >= 0`.
pub fn lad_fit(ds: &Dataset, members: &[usize], bound: f64) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let d = ds.d();
    let y = ds.y().unwrap();
    let mut m = MilpModel::new("lad");
    let theta: Vec<usize> = (0..=d)
        .map(|j| m.add_var(format!("w{j}"), -bound, bound, Integrality::Continuous))
        .collect();
    for (r, &i) in members.iter().enumerate() {
        let p = m.add_var(format!("p{r}"), 0.0, f64::INFINITY, Integrality::Continuous);
        let q = m.add_var(format!("q{r}"), 0.0, f64::INFINITY, Integrality::Continuous);
        m.set_objective(p, 1.0);
        m.set_objective(q, 1.0);
        let mut coefs = vec![(p, 1.0), (q, -1.0), (theta[d], 1.0)];
        for j in 0..d {
            coefs.push((theta[j], ds.row(i)[j]));
        }
        m.add_constraint(format!("fit{r}"), coefs, Sense::Eq, y[i]);
    }
    let s = solve_lp(&m);
    assert_eq!(s.status, LpStatus::Optimal);
    s.objective
}

/// Minimum over all two-cluster assignments of the summed per-cluster LAD
/// losses, with the labeling that attains it.
pub fn brute_force_two_cluster_lad(ds: &Dataset, bound: f64) -> (f64, Vec<usize>) {
    let n = ds.n();
    let mut best = (f64::INFINITY, Vec::new());
    // row 0 stays in cluster 0; the swapped labelings are mirror images
    for mask in 0..(1u32 << (n - 1)) {
        let labels: Vec<usize> = (0..n).map(|i| if i == 0 { 0 } else { ((mask >> (i - 1)) & 1) as usize }).collect();
        let a: Vec<usize> = (0..n).filter(|&i| labels[i] == 0).collect();
        let b: Vec<usize> = (0..n).filter(|&i| labels[i] == 1).collect();
        let v = lad_fit(ds, &a, bound) + lad_fit(ds, &b, bound);
        if v < best.0 - 1e-12 {
            best = (v, labels);
        }
    }
    best
}

/// MILP objective implied by a decoded solution: the clustered loss plus
/// the weighted L1 distance of every row to its own center.
pub fn objective_from_decoded(ds: &Dataset, asg: &Assignment, params: &ClusterParams, spec: &LossSpec, meta: &ModelMetadata) -> f64 {
    let mut v = total_loss(ds, asg, params, spec).unwrap();
    if meta.geometry == ClusterType::ClosestCenter {
        let centers = params.centers.as_ref().unwrap();
        for i in 0..ds.n() {
            let c = &centers[asg.cluster_of(i)];
            v += meta.lambda * ds.row(i).iter().zip(c).map(|(a, b)| (a - b).abs()).sum::<f64>();
        }
    }
    v
}

/// Textbook two-phase tableau simplex for `min c'x, A x <= b, 0 <= x`,
/// with `b` of any sign, using Bland's rule throughout.
/// Returns `None` when infeasible or unbounded.
pub fn dense_lp_oracle(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let m = a.len();
    let n = c.len();
    // columns: x (n), slacks (m), artificials (m)
    let cols = n + 2 * m;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    for i in 0..m {
        let sgn = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sgn * a[i][j];
        }
        t[i][n + i] = sgn;
        t[i][n + m + i] = 1.0;
        t[i][cols] = sgn * b[i];
        basis[i] = n + m + i;
    }
    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| -> bool {
        loop {
            let mut enter = None;
            for j in 0..allowed {
                if basis.contains(&j) {
                    continue;
                }
                let red = cost[j] - (0..m).map(|i| cost[basis[i]] * t[i][j]).sum::<f64>();
                if red < -1e-10 {
                    enter = Some(j);
                    break;
                }
            }
            let Some(q) = enter else { return true };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                if t[i][q] > 1e-12 {
                    let r = t[i][cols] / t[i][q];
                    if leave.is_none_or(|(li, lr)| r < lr - 1e-12 || (r <= lr + 1e-12 && basis[i] < basis[li])) {
                        leave = Some((i, r));
                    }
                }
            }
            let Some((p, _)) = leave else { return false };
            let piv = t[p][q];
            for v in t[p].iter_mut() {
                *v /= piv;
            }
            for i in 0..m {
                if i != p {
                    let f = t[i][q];
                    if f != 0.0 {
                        for j in 0..=cols {
                            t[i][j] -= f * t[p][j];
                        }
                    }
                }
            }
            basis[p] = q;
        }
    };
    let mut phase1 = vec![0.0; cols];
    for j in n + m..cols {
        phase1[j] = 1.0;
    }
    run(&mut t, &mut basis, &phase1, cols);
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= n + m).map(|i| t[i][cols]).sum();
    if infeas > 1e-8 {
        return None;
    }
    // drive remaining zero-level artificials out where possible
    for i in 0..m {
        if basis[i] >= n + m {
            if let Some(q) = (0..n + m).find(|&j| t[i][j].abs() > 1e-9 && !basis.contains(&j)) {
                let piv = t[i][q];
                for v in t[i].iter_mut() {
                    *v /= piv;
                }
                for r in 0..m {
                    if r != i {
                        let f = t[r][q];
                        if f != 0.0 {
                            for j in 0..=cols {
                                t[r][j] -= f * t[i][j];
                            }
                        }
                    }
                }
                basis[i] = q;
            }
        }
    }
    let mut phase2 = vec![0.0; cols];
    phase2[..n].copy_from_slice(c);
    if !run(&mut t, &mut basis, &phase2, n + m) {
        return None;
    }
    Some((0..m).map(|i| phase2[basis[i]] * t[i][cols]).sum())
}
