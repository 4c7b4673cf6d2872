//! Predictive clustering: partition rows into K clusters while fitting one
//! supervised model per cluster, so that the partition serves prediction
//! rather than feature-space compactness alone.
//!
//! Two solvers share one data model:
//! - [`greedy::fit`] alternates per-cluster fitting with reassignment and
//!   restarts from random partitions;
//! - [`milp::build_milp`] compiles the same objective into a mixed-integer
//!   program that [`solve::solve_milp`] solves by branch-and-bound.

pub mod cluster;
pub mod data;
pub mod error;
pub mod eval;
pub mod greedy;
mod linalg;
pub mod loss;
pub mod milp;
pub mod solve;
pub mod synth;

pub use cluster::{affine, Assignment, BoxBounds, ClusterParams, ClusterType};
pub use data::{load_csv, Dataset, Response, Standardizer, Target, Task, TaskKind};
pub use error::{Error, Result};
pub use greedy::{fit, FitReport, GreedyConfig};
pub use loss::{per_datum_loss, total_loss, LossKind, LossSpec, Regularization};
