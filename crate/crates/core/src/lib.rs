//! Space-time isogeometric solvers for tracking-type optimal control of the
//! heat equation.

pub mod assembly;
pub mod error;
pub mod geometry;
pub mod kkt;
pub mod linalg;
pub mod precond;
pub mod spline;

pub use error::{Error, Result};
