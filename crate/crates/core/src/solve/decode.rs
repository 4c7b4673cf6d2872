use crate::cluster::{Assignment, BoxBounds, ClusterParams, ClusterType};
use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::milp::model::MilpModel;

/// Binaries must lie this close to 0 or 1 to be read as integral.
pub const BINARY_TOL: f64 = 1e-6;

/// Coordinate used as the center of an empty arbitrary cluster, far enough
/// away that test-time routing never selects it.
const FAR: f64 = 1e150;

/// Reads the assignment and per-cluster parameters out of a solution of a
/// model built by [`crate::milp::build_milp`].
pub fn decode(model: &MilpModel, x: &[f64], ds: &Dataset) -> Result<(Assignment, ClusterParams)> {
    let meta = model.metadata.as_ref().ok_or_else(|| Error::Decode("model has no metadata".into()))?;
    let (n, d, k) = (meta.n, meta.d, meta.k);
    if x.len() != model.num_vars() {
        return Err(Error::Decode(format!("{} values for {} columns", x.len(), model.num_vars())));
    }
    if ds.n() != n || ds.d() != d {
        return Err(Error::Decode(format!("model is for {n} x {d} data, got {} x {}", ds.n(), ds.d())));
    }
    let get = |name: String| -> Result<f64> {
        model
            .var(&name)
            .map(|j| x[j])
            .ok_or_else(|| Error::Decode(format!("column {name} missing")))
    };

    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let mut chosen = None;
        for kk in 0..k {
            let v = get(format!("c_{i}_{kk}"))?;
            if (v - 1.0).abs() <= BINARY_TOL {
                if chosen.is_some() {
                    return Err(Error::Decode(format!("row {i} is assigned to more than one cluster")));
                }
                chosen = Some(kk);
            } else if v.abs() > BINARY_TOL {
                return Err(Error::Decode(format!("c_{i}_{kk} = {v} is not integral")));
            }
        }
        labels.push(chosen.ok_or_else(|| Error::Decode(format!("row {i} is not assigned")))?);
    }
    let asg = Assignment::new(labels, k)?;

    let task = ds.task();
    let mut params = ClusterParams::zeros(task, d, k);
    match (meta.loss, task) {
        (LossKind::Mae, Task::Regression) => {
            for kk in 0..k {
                for j in 0..=d {
                    params.weights[kk][j] = get(format!("theta_{kk}_{j}"))?;
                }
            }
        }
        (LossKind::HingeWw, Task::Classification { n_classes }) => {
            for kk in 0..k {
                for m in 0..n_classes {
                    for j in 0..=d {
                        params.weights[kk][m * (d + 1) + j] = get(format!("tp_{kk}_{m}_{j}"))? - get(format!("tn_{kk}_{m}_{j}"))?;
                    }
                }
            }
        }
        (loss, _) => return Err(Error::Decode(format!("{loss} model does not match the data task"))),
    }

    match meta.geometry {
        ClusterType::Arbitrary => {
            params.centers = Some(
                asg.centroids(ds)
                    .into_iter()
                    .map(|c| c.unwrap_or_else(|| vec![FAR; d]))
                    .collect(),
            );
        }
        ClusterType::ClosestCenter => {
            let mut centers = vec![vec![0.0; d]; k];
            for (kk, c) in centers.iter_mut().enumerate() {
                for (j, v) in c.iter_mut().enumerate() {
                    *v = get(format!("beta_{kk}_{j}"))?;
                }
            }
            params.centers = Some(centers);
        }
        ClusterType::BoundingBox => {
            let mut boxes = Vec::with_capacity(k);
            for kk in 0..k {
                let mut b = BoxBounds {
                    lower: vec![0.0; d],
                    upper: vec![0.0; d],
                };
                for j in 0..d {
                    b.lower[j] = get(format!("bmin_{kk}_{j}"))?;
                    b.upper[j] = get(format!("bmax_{kk}_{j}"))?.max(b.lower[j] + meta.epsilon);
                }
                boxes.push(b);
            }
            params.boxes = Some(boxes);
            params.centers = Some(
                asg.centroids(ds)
                    .into_iter()
                    .map(|c| c.unwrap_or_else(|| vec![FAR; d]))
                    .collect(),
            );
        }
    }
    Ok((asg, params))
}
