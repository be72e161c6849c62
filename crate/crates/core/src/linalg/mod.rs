//! Sparse, Kronecker and dense linear algebra plus Krylov solvers.

mod cholesky;
pub mod dense;
mod kron;
pub mod krylov;
mod mmio;
mod operator;
pub mod ordering;
mod sparse;

pub use cholesky::{SparseCholesky, SymbolicCholesky};
pub use dense::{generalized_eig, GeneralizedEigen};
pub use kron::{KronOperator, KronTerm};
pub use krylov::{cg, lanczos_condition, minres, ConditionEstimate, KrylovOptions, KrylovReport, ResidualReference, Tridiagonal};
pub use mmio::{read_matrix_market, write_matrix_market};
pub use operator::{axpy, dot, norm2, Block, BlockOperator, IdentityOperator, LinearOperator, ScaledOperator};
pub use sparse::CsrMatrix;
