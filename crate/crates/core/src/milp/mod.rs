//! Mixed-integer formulation of the clustered objective and MPS exchange.

pub mod model;
pub mod mps;

pub use model::{
    build_milp, check_solution, compute_big_m, encode_point, BigM, Constraint, Integrality, MilpHyper, MilpModel, ModelMetadata,
    Sense, SolutionCheck, Variable, FEASIBILITY_TOL,
};
pub use mps::{export_mps, from_mps_str, import_mps, to_lp_string, to_mps_string};
