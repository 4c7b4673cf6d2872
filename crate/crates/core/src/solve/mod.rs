//! Exact solution of [`MilpModel`](crate::milp::MilpModel)s: LP
//! relaxations, branch-and-bound and decoding of the result back into
//! clusters.

mod bnb;
mod decode;
mod fit;
mod simplex;

pub use bnb::{relative_gap, solve_milp, BranchRule, SearchOrder, SolveConfig, SolveResult, SolveStatus, INTEGRALITY_TOL};
pub use decode::{decode, BINARY_TOL};
pub use fit::{fit_exact, ExactConfig, ExactFit, SolveSummary};
pub use simplex::{solve_lp, LpSolution, LpStatus, FEAS_TOL, OPT_TOL};
