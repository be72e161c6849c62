//! Univariate B-spline spaces, Gauss quadrature and the two-scale relation.

mod knots;
mod quad;
mod space;

pub use knots::{uniform_breaks, KnotVector};
pub use quad::{gauss_legendre, QuadCell, QuadRule};
pub use space::{BasisTable, SplineSpace};
