//! Test-time routing of new points to clusters.

use crate::cluster::{argmin, sq_l2, ClusterParams, ClusterType};
use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::eval::metrics::Predictions;
use crate::greedy::svm::predict_class;

/// Cluster that serves `x`.
///
/// Arbitrary and closest-center clusters route to the nearest center (L2).
/// Bounding-box clusters route to the smallest containing box, or to the
/// box with the smallest L1 distance when no box contains `x`. Ties go to
/// the lowest index.
pub fn route(x: &[f64], params: &ClusterParams, cluster_type: ClusterType) -> Result<usize> {
    match cluster_type {
        ClusterType::Arbitrary | ClusterType::ClosestCenter => {
            let centers = params
                .centers
                .as_ref()
                .ok_or_else(|| Error::Model("routing needs cluster centers".into()))?;
            Ok(argmin(centers.iter().map(|c| sq_l2(c, x))))
        }
        ClusterType::BoundingBox => {
            let boxes = params
                .boxes
                .as_ref()
                .ok_or_else(|| Error::Model("routing needs cluster boxes".into()))?;
            let inside = boxes.iter().map(|b| if b.contains(x, 0.0) { b.volume() } else { f64::INFINITY });
            let k = argmin(inside);
            if boxes[k].contains(x, 0.0) {
                return Ok(k);
            }
            Ok(argmin(boxes.iter().map(|b| b.exterior_l1(x))))
        }
    }
}

/// Predicted value or class for one point.
pub fn predict_row(x: &[f64], params: &ClusterParams, cluster_type: ClusterType) -> Result<(usize, f64)> {
    let k = route(x, params, cluster_type)?;
    let w = &params.weights[k];
    Ok(match params.task {
        Task::Regression => (k, crate::cluster::affine(w, x)),
        Task::Classification { .. } => (k, predict_class(w, x) as f64),
    })
}

/// Routes every row of `ds` and applies the selected cluster's model.
pub fn predict(ds: &Dataset, params: &ClusterParams, cluster_type: ClusterType) -> Result<Predictions> {
    if ds.d() != params.d {
        return Err(Error::Dimension(format!("data has {} features, model {}", ds.d(), params.d)));
    }
    let rows: Result<Vec<(usize, f64)>> = ds.rows().map(|x| predict_row(x, params, cluster_type)).collect();
    let rows = rows?;
    Ok(match params.task {
        Task::Regression => Predictions::Values(rows.into_iter().map(|(_, v)| v).collect()),
        Task::Classification { .. } => Predictions::Classes(rows.into_iter().map(|(_, v)| v as usize).collect()),
    })
}

/// Cluster index chosen for every row of `ds`.
pub fn route_all(ds: &Dataset, params: &ClusterParams, cluster_type: ClusterType) -> Result<Vec<usize>> {
    ds.rows().map(|x| route(x, params, cluster_type)).collect()
}
