//! Greedy versus exact runs over a grid of synthetic problem sizes.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics;
use crate::cluster::ClusterType;
use crate::error::{Error, Result};
use crate::greedy::{self, GreedyConfig};
use crate::loss::LossSpec;
use crate::milp::MilpHyper;
use crate::solve::{fit_exact, ExactConfig, SolveConfig};
use crate::synth::{gen_regression, SynthSpec};

pub const CSV_HEADER: &str = "N,method,geometry,loss,metric_name,metric_value,seconds";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkGrid {
    pub sizes: Vec<usize>,
    pub geometries: Vec<ClusterType>,
    pub k: usize,
    /// Largest N given to the exact solver.
    pub milp_cap: usize,
    pub synth: SynthSpec,
    pub greedy: GreedyConfig,
    pub hyper: MilpHyper,
    pub solve: SolveConfig,
}

impl Default for BenchmarkGrid {
    fn default() -> Self {
        BenchmarkGrid {
            sizes: vec![20, 50, 100, 250, 1000, 10_000],
            geometries: ClusterType::ALL.to_vec(),
            k: 2,
            milp_cap: 50,
            synth: SynthSpec {
                k_true: 2,
                ..SynthSpec::default()
            },
            greedy: GreedyConfig::default(),
            hyper: MilpHyper::default(),
            solve: SolveConfig {
                time_limit: 60.0,
                ..SolveConfig::default()
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub n: usize,
    pub method: String,
    pub geometry: ClusterType,
    pub loss: String,
    pub metric_name: String,
    pub metric_value: f64,
    pub seconds: f64,
}

/// Runs greedy at every size and the exact solver at sizes up to
/// `milp_cap`, reporting the in-sample R² of each fit.
///
/// The greedy solver minimizes squared error and the exact solver absolute
/// error; an exact run that finds no feasible point reports `NaN`.
pub fn benchmark_fig2(grid: &BenchmarkGrid) -> Result<Vec<BenchmarkRow>> {
    if grid.sizes.is_empty() || grid.geometries.is_empty() {
        return Err(Error::Config("benchmark grid is empty".into()));
    }
    let mut rows = Vec::new();
    for &n in &grid.sizes {
        let data = gen_regression(&SynthSpec { n, ..grid.synth.clone() })?;
        let ds = &data.dataset;
        for &g in &grid.geometries {
            let cfg = GreedyConfig {
                k: grid.k,
                cluster_type: g,
                ..grid.greedy.clone()
            };
            let t0 = Instant::now();
            let rep = greedy::fit(ds, &LossSpec::mse(), &cfg)?;
            let secs = t0.elapsed().as_secs_f64();
            let (name, value) = metrics::score(ds, &metrics::predict_assigned(ds, &rep.assignment, &rep.params))?;
            rows.push(BenchmarkRow {
                n,
                method: "greedy".into(),
                geometry: g,
                loss: "mse".into(),
                metric_name: name.into(),
                metric_value: value,
                seconds: secs,
            });
            if n > grid.milp_cap {
                continue;
            }
            let ecfg = ExactConfig {
                k: grid.k,
                cluster_type: g,
                hyper: grid.hyper,
                solve: grid.solve.clone(),
            };
            let t0 = Instant::now();
            let value = match fit_exact(ds, &LossSpec::mae(), &ecfg) {
                Ok(f) => metrics::score(ds, &metrics::predict_assigned(ds, &f.report.assignment, &f.report.params))?.1,
                Err(Error::NoSolution(msg)) => {
                    log::warn!("exact run at N = {n}, {g}: {msg}");
                    f64::NAN
                }
                Err(e) => return Err(e),
            };
            rows.push(BenchmarkRow {
                n,
                method: "milp".into(),
                geometry: g,
                loss: "mae".into(),
                metric_name: name.into(),
                metric_value: value,
                seconds: t0.elapsed().as_secs_f64(),
            });
        }
    }
    Ok(rows)
}

pub fn benchmark_csv(rows: &[BenchmarkRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.6}\n",
            r.n,
            r.method,
            r.geometry.short_name(),
            r.loss,
            r.metric_name,
            r.metric_value,
            r.seconds
        ));
    }
    out
}

pub fn write_benchmark_csv(rows: &[BenchmarkRow], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(benchmark_csv(rows).as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn milp_rows_only_below_cap() {
        let grid = BenchmarkGrid {
            sizes: vec![8, 30],
            geometries: vec![ClusterType::Arbitrary],
            milp_cap: 10,
            greedy: GreedyConfig {
                restarts: 2,
                workers: 1,
                ..GreedyConfig::default()
            },
            solve: SolveConfig {
                time_limit: 5.0,
                ..SolveConfig::default()
            },
            ..BenchmarkGrid::default()
        };
        let rows = benchmark_fig2(&grid).unwrap();
        let methods: Vec<(usize, &str)> = rows.iter().map(|r| (r.n, r.method.as_str())).collect();
        assert_eq!(methods, vec![(8, "greedy"), (8, "milp"), (30, "greedy")]);
        let csv = benchmark_csv(&rows);
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 4);
    }
}
