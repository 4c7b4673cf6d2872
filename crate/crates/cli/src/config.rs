//! TOML run configuration: one section per module, unknown keys rejected.
//!
//! ```toml
//! [run]
//! seed = 3
//! method = "greedy"
//! k = 6
//! geometry = "cc"
//!
//! [loss]
//! kind = "mse"
//! regularization = { kind = "l2", strength = 1.0 }
//!
//! [greedy]
//! restarts = 20
//!
//! [solver]
//! time_limit = 120.0
//! ```

use std::path::Path;

use predclust::eval::{BenchmarkGrid, EvalProtocol};
use predclust::greedy::GreedyConfig;
use predclust::milp::MilpHyper;
use predclust::solve::{ExactConfig, SolveConfig};
use predclust::synth::SynthSpec;
use predclust::{ClusterType, Error, LossKind, LossSpec, Regularization, Result, TaskKind};
use serde::{Deserialize, Serialize};

pub const SEED_ENV: &str = "PREDCLUST_SEED";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    Greedy,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Falls back to `PREDCLUST_SEED`, then 0.
    pub seed: Option<u64>,
    pub method: MethodKind,
    pub task: TaskKind,
    /// Defaults to the last CSV column.
    pub target: Option<String>,
    pub k: usize,
    pub geometry: ClusterType,
    /// Standardize features before fitting.
    pub standardize: bool,
    /// Largest N accepted by the exact method.
    pub exact_max_n: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: None,
            method: MethodKind::Greedy,
            task: TaskKind::Regression,
            target: None,
            k: 2,
            geometry: ClusterType::ClosestCenter,
            standardize: true,
            exact_max_n: 100,
        }
    }
}

/// Loss choice. Unset fields take method-dependent defaults: MSE for greedy
/// regression, MAE for exact regression, hinge for classification; L2(1)
/// for the greedy classifier and L1(1) for the exact one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossSection {
    pub kind: Option<LossKind>,
    pub svm_c: Option<f64>,
    pub regularization: Option<Regularization>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreedySection {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    /// 0 uses every available core.
    pub workers: usize,
    pub strict_loss: bool,
    pub svm_tol: f64,
    pub svm_max_epochs: usize,
}

impl Default for GreedySection {
    fn default() -> Self {
        let g = GreedyConfig::default();
        GreedySection {
            restarts: g.restarts,
            max_iters: g.max_iters,
            tol: g.tol,
            workers: g.workers,
            strict_loss: g.strict_loss,
            svm_tol: g.svm_tol,
            svm_max_epochs: g.svm_max_epochs,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub loss: LossSection,
    pub greedy: GreedySection,
    pub milp: MilpHyper,
    pub solver: SolveConfig,
    pub eval: EvalProtocol,
    pub synth: SynthSpec,
    pub benchmark: BenchmarkGrid,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn seed(&self) -> Result<u64> {
        if let Some(s) = self.run.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
            Err(_) => Ok(0),
        }
    }

    pub fn loss_spec(&self, classification: bool) -> Result<LossSpec> {
        let exact = self.run.method == MethodKind::Exact;
        let kind = self.loss.kind.unwrap_or(match (classification, exact) {
            (true, _) => LossKind::HingeWw,
            (false, true) => LossKind::Mae,
            (false, false) => LossKind::Mse,
        });
        let regularization = self.loss.regularization.unwrap_or(match (kind, exact) {
            (LossKind::HingeWw, true) => Regularization::L1(1.0),
            (LossKind::HingeWw, false) => Regularization::L2(1.0),
            _ => Regularization::None,
        });
        let spec = LossSpec {
            kind,
            svm_c: self.loss.svm_c.unwrap_or(1.0),
            regularization,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn greedy_config(&self) -> Result<GreedyConfig> {
        let g = &self.greedy;
        Ok(GreedyConfig {
            k: self.run.k,
            cluster_type: self.run.geometry,
            restarts: g.restarts,
            max_iters: g.max_iters,
            tol: g.tol,
            seed: self.seed()?,
            workers: g.workers,
            strict_loss: g.strict_loss,
            svm_tol: g.svm_tol,
            svm_max_epochs: g.svm_max_epochs,
        })
    }

    pub fn exact_config(&self) -> ExactConfig {
        ExactConfig {
            k: self.run.k,
            cluster_type: self.run.geometry,
            hyper: self.milp,
            solve: self.solver.clone(),
        }
    }

    /// Checks everything that does not depend on the data.
    pub fn validate(&self) -> Result<()> {
        if self.run.k == 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        self.solver.validate()?;
        self.eval.validate()?;
        self.synth.validate()?;
        self.seed()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_parse_and_unknown_keys_fail() {
        let cfg: RunConfig = toml::from_str(
            "[run]\nk = 6\ngeometry = \"bounding_box\"\n[greedy]\nrestarts = 3\n[solver]\ntime_limit = 5.0\n",
        )
        .unwrap();
        assert_eq!(cfg.run.k, 6);
        assert_eq!(cfg.run.geometry, ClusterType::BoundingBox);
        assert_eq!(cfg.greedy.restarts, 3);
        assert_eq!(cfg.solver.time_limit, 5.0);
        assert!(toml::from_str::<RunConfig>("[run]\nkk = 1\n").is_err());
        assert!(toml::from_str::<RunConfig>("[nope]\n").is_err());
    }

    #[test]
    fn loss_defaults_follow_method() {
        let mut cfg = RunConfig::default();
        assert_eq!(cfg.loss_spec(false).unwrap().kind, LossKind::Mse);
        assert_eq!(cfg.loss_spec(true).unwrap().regularization, Regularization::L2(1.0));
        cfg.run.method = MethodKind::Exact;
        assert_eq!(cfg.loss_spec(false).unwrap().kind, LossKind::Mae);
        assert_eq!(cfg.loss_spec(true).unwrap().regularization, Regularization::L1(1.0));
    }
}
