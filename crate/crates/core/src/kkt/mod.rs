//! Optimality system of the tracking problem: benchmark data, assembly of
//! the saddle-point operator, preconditioned MINRES and Schur-complement
//! condition estimates.
//!
//! The state is split as `y + lift` with `y` in the reduced space. The
//! internal sign convention is `L y + M u = 0`, so `u` is the negative of
//! the source term of the heat equation.

mod config;
pub mod data;
mod sample;
mod system;

pub use config::{Formulation, ProblemConfig};
pub use data::{build_lift, manufacture_desired_state, project_initial_state, project_spatial};
pub use sample::{sample_control, sample_field, FieldSample};
pub use system::{
    assemble_kkt, discretize, estimate_schur_condition, evaluate_cost, extend_state, resolve_geometry, solve,
    CostBreakdown, KktProblem, KktSystem, PhaseTimings, SchurOperator, SolutionFields, SolveReport,
};
