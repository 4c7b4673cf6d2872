use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::bnb::{solve_milp, SolveConfig, SolveResult, SolveStatus};
use super::decode::decode;
use crate::cluster::ClusterType;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::eval::metrics;
use crate::greedy::FitReport;
use crate::loss::{total_loss, LossSpec};
use crate::milp::model::{build_milp, MilpHyper};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExactConfig {
    pub k: usize,
    pub cluster_type: ClusterType,
    pub hyper: MilpHyper,
    pub solve: SolveConfig,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            k: 2,
            cluster_type: ClusterType::ClosestCenter,
            hyper: MilpHyper::default(),
            solve: SolveConfig::default(),
        }
    }
}

/// Solver statistics without the raw incumbent vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub status: SolveStatus,
    pub objective: f64,
    pub best_bound: f64,
    pub gap: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
    pub wall_time: f64,
}

impl From<&SolveResult> for SolveSummary {
    fn from(r: &SolveResult) -> Self {
        SolveSummary {
            status: r.status,
            objective: r.objective,
            best_bound: r.best_bound,
            gap: r.gap,
            nodes: r.nodes,
            lp_iterations: r.lp_iterations,
            wall_time: r.wall_time,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExactFit {
    pub report: FitReport,
    pub solve: SolveSummary,
}

/// Builds, solves and decodes the exact formulation.
///
/// Fails with [`Error::NoSolution`] when the search ends without a feasible
/// point.
pub fn fit_exact(ds: &Dataset, spec: &LossSpec, cfg: &ExactConfig) -> Result<ExactFit> {
    let model = build_milp(ds, spec, cfg.cluster_type, cfg.k, &cfg.hyper)?;
    let res = solve_milp(&model, &cfg.solve)?;
    let x = res
        .incumbent
        .as_ref()
        .ok_or_else(|| Error::NoSolution(format!("search ended with status {:?}", res.status)))?;
    let (assignment, params) = decode(&model, x, ds)?;
    let final_loss = total_loss(ds, &assignment, &params, spec)?;
    let mut m = BTreeMap::new();
    let (name, value) = metrics::score(ds, &metrics::predict_assigned(ds, &assignment, &params))?;
    m.insert(format!("train_{name}"), value);
    let report = FitReport {
        cluster_type: cfg.cluster_type,
        loss: *spec,
        assignment,
        params,
        loss_trace: vec![final_loss],
        final_loss,
        iterations: res.nodes,
        converged: res.status == SolveStatus::Optimal,
        wall_time: res.wall_time,
        restart_index_of_best: 0,
        metrics: m,
    };
    Ok(ExactFit {
        report,
        solve: SolveSummary::from(&res),
    })
}
