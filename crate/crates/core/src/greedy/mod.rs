//! Alternating (majorization-minimization style) solver.
//!
//! Each iteration fits every cluster's model with the assignment held fixed,
//! then reassigns rows: first to the cluster whose model fits them best,
//! then, for the closest-center and bounding-box geometries, to the nearest
//! centroid of those tentative clusters (Euclidean or L1 respectively).
//! Several random restarts run independently and the lowest final loss wins.

pub mod svm;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{argmin, l1, sq_l2, Assignment, ClusterParams, ClusterType};
use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::eval::metrics;
use crate::linalg::least_squares;
use crate::loss::{datum_loss, total_loss_fast, LossKind, LossSpec, Regularization};

use self::svm::DualCdSettings;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreedyConfig {
    pub k: usize,
    pub cluster_type: ClusterType,
    pub restarts: usize,
    pub max_iters: usize,
    /// Relative loss-change threshold.
    pub tol: f64,
    pub seed: u64,
    /// Worker threads for restarts; 0 uses every available core.
    pub workers: usize,
    /// Reject MAE instead of substituting MSE.
    pub strict_loss: bool,
    pub svm_tol: f64,
    pub svm_max_epochs: usize,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            k: 2,
            cluster_type: ClusterType::ClosestCenter,
            restarts: 10,
            max_iters: 100,
            tol: 1e-6,
            seed: 0,
            workers: 0,
            strict_loss: false,
            svm_tol: 1e-3,
            svm_max_epochs: 200,
        }
    }
}

impl GreedyConfig {
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("K must be positive".into()));
        }
        if self.k > n {
            return Err(Error::Config(format!("K = {} exceeds the number of rows N = {n}", self.k)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::Config("restarts and max_iters must be positive".into()));
        }
        if !(self.svm_tol > 0.0) || self.svm_max_epochs == 0 {
            return Err(Error::Config("svm_tol and svm_max_epochs must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a fit, from either solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub cluster_type: ClusterType,
    pub loss: LossSpec,
    pub assignment: Assignment,
    pub params: ClusterParams,
    /// Objective after each model-fitting step.
    pub loss_trace: Vec<f64>,
    pub final_loss: f64,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: f64,
    pub restart_index_of_best: usize,
    pub metrics: BTreeMap<String, f64>,
}

/// Runs the alternating solver with `cfg.restarts` random starts.
pub fn fit(ds: &Dataset, spec: &LossSpec, cfg: &GreedyConfig) -> Result<FitReport> {
    let start = Instant::now();
    cfg.validate(ds.n())?;
    let spec = resolve_loss(ds, spec, cfg.strict_loss)?;

    let run = |r: usize| run_restart(ds, &spec, cfg, r);
    let results: Vec<Result<Restart>> = match cfg.workers {
        1 => (0..cfg.restarts).map(run).collect(),
        0 => (0..cfg.restarts).into_par_iter().map(run).collect(),
        w => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            pool.install(|| (0..cfg.restarts).into_par_iter().map(run).collect())
        }
    };
    let mut best: Option<(usize, Restart)> = None;
    for (r, res) in results.into_iter().enumerate() {
        let res = res?;
        let better = match &best {
            None => true,
            Some((_, b)) => res.final_loss < b.final_loss,
        };
        if better {
            best = Some((r, res));
        }
    }
    let (r, best) = best.expect("at least one restart");

    let mut metrics_map = BTreeMap::new();
    let preds = metrics::predict_assigned(ds, &best.assignment, &best.params);
    let (name, value) = metrics::score(ds, &preds)?;
    metrics_map.insert(format!("train_{name}"), value);
    Ok(FitReport {
        cluster_type: cfg.cluster_type,
        loss: spec,
        assignment: best.assignment,
        params: best.params,
        final_loss: best.final_loss,
        loss_trace: best.loss_trace,
        iterations: best.iterations,
        converged: best.converged,
        wall_time: start.elapsed().as_secs_f64(),
        restart_index_of_best: r,
        metrics: metrics_map,
    })
}

/// Checks the loss against the task. MAE regression is replaced by MSE
/// unless `strict`.
fn resolve_loss(ds: &Dataset, spec: &LossSpec, strict: bool) -> Result<LossSpec> {
    spec.validate()?;
    match (ds.task(), spec.kind) {
        (Task::Regression, _) if matches!(spec.regularization, Regularization::L1(_)) => {
            Err(Error::Unsupported("greedy regression supports no or L2 regularization".into()))
        }
        (Task::Regression, LossKind::Mse) => Ok(*spec),
        (Task::Regression, LossKind::Mae) if !strict => {
            log::warn!("greedy solver minimizes squared error; substituting MSE for MAE");
            Ok(LossSpec { kind: LossKind::Mse, ..*spec })
        }
        (Task::Classification { .. }, LossKind::HingeWw) => {
            if let Regularization::L2(s) = spec.regularization {
                if s <= 0.0 {
                    return Err(Error::Config("greedy classifier needs a positive L2 strength".into()));
                }
                Ok(*spec)
            } else {
                Err(Error::Unsupported("greedy classifier uses L2 regularization".into()))
            }
        }
        (task, kind) => Err(Error::Unsupported(format!("greedy solver cannot fit {kind} loss on {task:?} data"))),
    }
}

struct Restart {
    assignment: Assignment,
    params: ClusterParams,
    loss_trace: Vec<f64>,
    final_loss: f64,
    iterations: usize,
    converged: bool,
}

/// Mutable per-restart state carried between model fits.
struct FitState {
    /// Dual variables for the one-vs-rest classifiers, `N x M`.
    alphas: Vec<f64>,
    /// Cluster each row's dual variables were last trained in.
    alpha_owner: Vec<usize>,
}

fn run_restart(ds: &Dataset, spec: &LossSpec, cfg: &GreedyConfig, r: usize) -> Result<Restart> {
    let n = ds.n();
    let k = cfg.k;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(r as u64));
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let mut asg = Assignment::new(labels, k)?;
    let mut params = ClusterParams::zeros(ds.task(), ds.d(), k);
    if !asg.empty_clusters().is_empty() {
        asg = repair_empty_clusters(ds, &asg, &params, spec)?;
    }
    let m = ds.task().n_classes().unwrap_or(0);
    let mut state = FitState {
        alphas: vec![0.0; n * m],
        alpha_owner: asg.labels().to_vec(),
    };
    let mut centers: Option<Vec<Vec<f64>>> = None;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..cfg.max_iters {
        iterations = it + 1;
        params = fit_models(ds, &asg, spec, cfg, &mut state);
        let loss = total_loss_fast(ds, asg.labels(), &params, spec);
        trace.push(loss);
        if it > 0 {
            let prev = trace[it - 1];
            if (loss - prev).abs() / prev.max(1e-12) < cfg.tol {
                converged = true;
                break;
            }
        }
        if it + 1 == cfg.max_iters {
            break;
        }
        let (mut next, z) = assign(ds, &params, spec, cfg.cluster_type)?;
        if !next.empty_clusters().is_empty() {
            next = repair_empty_clusters(ds, &next, &params, spec)?;
        }
        if next == asg {
            converged = true;
            break;
        }
        asg = next;
        centers = z;
    }

    params.centers = Some(match (cfg.cluster_type, centers) {
        (ClusterType::Arbitrary, _) | (_, None) => asg.centroids(ds).into_iter().map(Option::unwrap).collect(),
        (_, Some(z)) => z,
    });
    if cfg.cluster_type == ClusterType::BoundingBox {
        params.boxes = Some(ClusterParams::materialize_boxes(ds, &asg));
    }
    Ok(Restart {
        final_loss: *trace.last().unwrap(),
        assignment: asg,
        params,
        loss_trace: trace,
        iterations,
        converged,
    })
}

fn svm_settings(spec: &LossSpec, cfg: &GreedyConfig) -> DualCdSettings {
    let l2 = match spec.regularization {
        Regularization::L2(s) => s,
        _ => 1.0,
    };
    DualCdSettings {
        upper: spec.svm_c / l2,
        tol: cfg.svm_tol,
        max_epochs: cfg.svm_max_epochs,
    }
}

fn fit_models(ds: &Dataset, asg: &Assignment, spec: &LossSpec, cfg: &GreedyConfig, state: &mut FitState) -> ClusterParams {
    let mut params = ClusterParams::zeros(ds.task(), ds.d(), asg.k());
    match ds.task() {
        Task::Regression => {
            let l2 = match spec.regularization {
                Regularization::L2(s) => s,
                _ => 0.0,
            };
            for k in 0..asg.k() {
                params.weights[k] = least_squares(ds, &asg.members(k), l2);
            }
        }
        Task::Classification { n_classes } => {
            // rows that changed cluster restart from zero duals
            for i in 0..ds.n() {
                if state.alpha_owner[i] != asg.cluster_of(i) {
                    state.alphas[i * n_classes..(i + 1) * n_classes].fill(0.0);
                    state.alpha_owner[i] = asg.cluster_of(i);
                }
            }
            let settings = svm_settings(spec, cfg);
            for k in 0..asg.k() {
                let members = asg.members(k);
                let mut local: Vec<f64> = members
                    .iter()
                    .flat_map(|&i| state.alphas[i * n_classes..(i + 1) * n_classes].iter().copied())
                    .collect();
                params.weights[k] = svm::train_ovr(ds, &members, n_classes, &mut local, &settings);
                for (r, &i) in members.iter().enumerate() {
                    state.alphas[i * n_classes..(i + 1) * n_classes]
                        .copy_from_slice(&local[r * n_classes..(r + 1) * n_classes]);
                }
            }
        }
    }
    params
}

/// Fits every cluster's model with the assignment held fixed: exact least
/// squares for MSE, one-vs-rest hinge classifiers for the hinge loss.
pub fn optimize_per_cluster(ds: &Dataset, asg: &Assignment, spec: &LossSpec, cfg: &GreedyConfig) -> Result<ClusterParams> {
    if asg.n() != ds.n() {
        return Err(Error::Dimension("assignment and dataset sizes differ".into()));
    }
    if let Some(&k) = asg.empty_clusters().first() {
        return Err(Error::Config(format!("cluster {k} is empty")));
    }
    let spec = resolve_loss(ds, spec, cfg.strict_loss)?;
    let m = ds.task().n_classes().unwrap_or(0);
    let mut state = FitState {
        alphas: vec![0.0; ds.n() * m],
        alpha_owner: asg.labels().to_vec(),
    };
    Ok(fit_models(ds, asg, &spec, cfg, &mut state))
}

/// Reassigns every row given fixed cluster models.
pub fn assignment_step(ds: &Dataset, params: &ClusterParams, spec: &LossSpec, cluster_type: ClusterType) -> Result<Assignment> {
    if params.d != ds.d() {
        return Err(Error::Dimension("params and dataset dimensions differ".into()));
    }
    assign(ds, params, spec, cluster_type).map(|(a, _)| a)
}

/// Tentative loss-based assignment followed by the geometry-specific
/// centroid reassignment. Also returns the centroids used, if any.
fn assign(ds: &Dataset, params: &ClusterParams, spec: &LossSpec, cluster_type: ClusterType) -> Result<(Assignment, Option<Vec<Vec<f64>>>)> {
    let k = params.k();
    let labels: Vec<usize> = (0..ds.n())
        .map(|i| {
            let (x, y) = (ds.row(i), ds.response(i));
            argmin((0..k).map(|c| datum_loss(x, y, &params.weights[c], spec.kind)))
        })
        .collect();
    let mut tentative = Assignment::new(labels, k)?;
    if cluster_type == ClusterType::Arbitrary {
        return Ok((tentative, None));
    }
    if !tentative.empty_clusters().is_empty() {
        tentative = repair_empty_clusters(ds, &tentative, params, spec)?;
    }
    let z: Vec<Vec<f64>> = tentative.centroids(ds).into_iter().map(Option::unwrap).collect();
    let labels = ds
        .rows()
        .map(|x| match cluster_type {
            ClusterType::ClosestCenter => argmin(z.iter().map(|c| sq_l2(x, c))),
            _ => argmin(z.iter().map(|c| l1(x, c))),
        })
        .collect();
    Ok((Assignment::new(labels, k)?, Some(z)))
}

/// Moves the worst-fitting rows into empty clusters.
///
/// Each empty cluster, in index order, takes the row with the largest loss
/// under its current cluster among rows whose cluster has at least two
/// members (ties to the lowest row index).
pub fn repair_empty_clusters(ds: &Dataset, asg: &Assignment, params: &ClusterParams, spec: &LossSpec) -> Result<Assignment> {
    let mut out = asg.clone();
    let empty = out.empty_clusters();
    if empty.is_empty() {
        return Ok(out);
    }
    if asg.k() > ds.n() {
        return Err(Error::Config(format!("cannot fill {} clusters from {} rows", asg.k(), ds.n())));
    }
    let losses: Vec<f64> = (0..ds.n())
        .map(|i| datum_loss(ds.row(i), ds.response(i), &params.weights[asg.cluster_of(i)], spec.kind))
        .collect();
    let mut sizes = out.sizes();
    for k in empty {
        let mut pick: Option<usize> = None;
        for i in 0..ds.n() {
            if sizes[out.cluster_of(i)] < 2 {
                continue;
            }
            // NaN losses (diverged fits) rank as worst
            let li = if losses[i].is_nan() { f64::INFINITY } else { losses[i] };
            if pick.map_or(true, |p| li > losses[p]) {
                pick = Some(i);
            }
        }
        let i = pick.ok_or_else(|| Error::Config("no donor row available for an empty cluster".into()))?;
        sizes[out.cluster_of(i)] -= 1;
        sizes[k] += 1;
        out.set(i, k);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Response;

    fn reg_params(weights: Vec<Vec<f64>>) -> ClusterParams {
        let d = weights[0].len() - 1;
        ClusterParams {
            task: Task::Regression,
            d,
            weights,
            centers: None,
            boxes: None,
        }
    }

    #[test]
    fn arbitrary_assigns_to_lowest_loss() {
        // theta_1 = (1, 0), theta_2 = (0, 1), no intercepts
        let ds = Dataset::regression(vec![vec![2.0, 3.0]], vec![2.0]).unwrap();
        let p = reg_params(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let a = assignment_step(&ds, &p, &LossSpec::mse(), ClusterType::Arbitrary).unwrap();
        assert_eq!(a.labels(), &[0]);
    }

    #[test]
    fn closest_center_uses_l2_and_bounding_box_uses_l1() {
        // two tight groups; model 0 fits the first, model 1 the second
        let rows = vec![vec![0.0, 0.0], vec![0.0, 0.0], vec![10.0, 10.0], vec![10.0, 10.0], vec![1.0, 1.0]];
        let y = vec![0.0, 0.0, 5.0, 5.0, 5.0];
        let ds = Dataset::regression(rows, y).unwrap();
        let p = reg_params(vec![vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 5.0]]);
        // stage 1 puts row 4 with the (10,10) group; its centroid is (7,7)
        let a = assignment_step(&ds, &p, &LossSpec::mse(), ClusterType::ClosestCenter).unwrap();
        assert_eq!(a.labels(), &[0, 0, 1, 1, 0]);

        // tentative clusters {(-1,0), (1,0)} and {(1.9,0), (6.1,0)}: centroids
        // (0,0) and (4,0); (1.9,0) is 1.9 from the first and 2.1 from the second
        let rows = vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![1.9, 0.0], vec![6.1, 0.0]];
        let ds = Dataset::regression(rows, vec![0.0, 0.0, 5.0, 5.0]).unwrap();
        let a = assignment_step(&ds, &p, &LossSpec::mse(), ClusterType::BoundingBox).unwrap();
        assert_eq!(a.labels(), &[0, 0, 0, 1]);
    }

    #[test]
    fn centroid_ties_go_to_lowest_index() {
        // centroids 0 and 2; rows at x = 1 are equidistant
        let rows = vec![vec![-1.0], vec![1.0], vec![1.0], vec![3.0]];
        let ds = Dataset::regression(rows, vec![0.0, 0.0, 5.0, 5.0]).unwrap();
        let p = reg_params(vec![vec![0.0, 0.0], vec![0.0, 5.0]]);
        let a = assignment_step(&ds, &p, &LossSpec::mse(), ClusterType::ClosestCenter).unwrap();
        assert_eq!(a.labels(), &[0, 0, 0, 1]);
        let a = assignment_step(&ds, &p, &LossSpec::mse(), ClusterType::BoundingBox).unwrap();
        assert_eq!(a.labels(), &[0, 0, 0, 1]);
    }

    #[test]
    fn repair_moves_worst_point() {
        let ds = Dataset::regression(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0.0, 0.0, 9.0]).unwrap();
        let p = reg_params(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        let asg = Assignment::new(vec![0, 0, 0], 2).unwrap();
        let fixed = repair_empty_clusters(&ds, &asg, &p, &LossSpec::mse()).unwrap();
        assert_eq!(fixed.labels(), &[0, 0, 1]);
        // already complete: identity
        assert_eq!(repair_empty_clusters(&ds, &fixed, &p, &LossSpec::mse()).unwrap(), fixed);
    }

    #[test]
    fn repair_fills_two_clusters_with_distinct_rows() {
        let ds = Dataset::regression(vec![vec![0.0]; 4], vec![1.0, 4.0, 2.0, 3.0]).unwrap();
        let p = reg_params(vec![vec![0.0, 0.0]; 3]);
        let asg = Assignment::new(vec![0; 4], 3).unwrap();
        let fixed = repair_empty_clusters(&ds, &asg, &p, &LossSpec::mse()).unwrap();
        assert_eq!(fixed.labels(), &[0, 1, 0, 2]);
        assert!(fixed.empty_clusters().is_empty());
    }

    #[test]
    fn each_point_its_own_cluster_fits_exactly() {
        let rows = vec![vec![0.0], vec![1.0], vec![3.0], vec![7.0]];
        let ds = Dataset::regression(rows, vec![4.0, -1.0, 2.0, 0.5]).unwrap();
        let cfg = GreedyConfig {
            k: 4,
            cluster_type: ClusterType::Arbitrary,
            restarts: 3,
            ..Default::default()
        };
        let rep = fit(&ds, &LossSpec::mse(), &cfg).unwrap();
        assert!(rep.final_loss < 1e-12, "{}", rep.final_loss);
    }

    #[test]
    fn optimize_fits_line_through_two_points() {
        let ds = Dataset::regression(vec![vec![0.0], vec![1.0], vec![5.0]], vec![1.0, 3.0, 0.0]).unwrap();
        let asg = Assignment::new(vec![0, 0, 1], 2).unwrap();
        let p = optimize_per_cluster(&ds, &asg, &LossSpec::mse(), &GreedyConfig::default()).unwrap();
        assert!((p.weights[0][0] - 2.0).abs() < 1e-10 && (p.weights[0][1] - 1.0).abs() < 1e-10);
        let y = match ds.response(2) {
            Response::Value(v) => v,
            _ => unreachable!(),
        };
        assert!((crate::cluster::affine(&p.weights[1], ds.row(2)) - y).abs() < 1e-9);
    }

    #[test]
    fn optimize_rejects_empty_cluster() {
        let ds = Dataset::regression(vec![vec![0.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
        let asg = Assignment::new(vec![0, 0], 2).unwrap();
        assert!(optimize_per_cluster(&ds, &asg, &LossSpec::mse(), &GreedyConfig::default()).is_err());
    }

    #[test]
    fn config_and_loss_validation() {
        let ds = Dataset::regression(vec![vec![0.0], vec![1.0]], vec![1.0, 3.0]).unwrap();
        let cfg = GreedyConfig { k: 3, ..Default::default() };
        assert!(fit(&ds, &LossSpec::mse(), &cfg).is_err());
        let cfg = GreedyConfig {
            k: 1,
            strict_loss: true,
            ..Default::default()
        };
        assert!(matches!(fit(&ds, &LossSpec::mae(), &cfg), Err(Error::Unsupported(_))));
        let cfg = GreedyConfig { k: 1, ..Default::default() };
        let rep = fit(&ds, &LossSpec::mae(), &cfg).unwrap();
        assert_eq!(rep.loss.kind, LossKind::Mse);
        assert!(matches!(fit(&ds, &LossSpec::hinge_l2(1.0, 1.0), &cfg), Err(Error::Unsupported(_))));
    }
}
