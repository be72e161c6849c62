//! Block-diagonal preconditioner and its fast-diagonalization core.

mod block;
mod fastdiag;
mod multigrid;

pub use block::{BlockDiagPreconditioner, KronCholesky};
pub use fastdiag::{ApplyMode, FastDiagOptions, FastDiagSolver, SpatialBackend, TimePencilEigen};
pub use multigrid::{MultigridHierarchy, MultigridOperator, SmootherSteps};
