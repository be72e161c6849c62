//! Small dense kernels on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::CsrMatrix;

/// `A U = B U diag(d)` with `U^T B U = I`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct GeneralizedEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

/// Symmetric-definite generalized eigenproblem via Cholesky reduction.
/// `a` must be symmetric, `b` symmetric positive definite.
pub fn generalized_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<GeneralizedEigen> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch("generalized eigenproblem shapes".into()));
    }
    let chol = b.clone().cholesky().ok_or(Error::NotSpd {
        index: 0,
        value: f64::NAN,
    })?;
    let l = chol.l();
    // C = L^{-1} A L^{-T}
    let linv_a = l
        .solve_lower_triangular(a)
        .ok_or_else(|| Error::Breakdown("triangular solve".into()))?;
    let c = l
        .solve_lower_triangular(&linv_a.transpose())
        .ok_or_else(|| Error::Breakdown("triangular solve".into()))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let q = DMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    let u = l
        .transpose()
        .solve_upper_triangular(&q)
        .ok_or_else(|| Error::Breakdown("triangular solve".into()))?;
    Ok(GeneralizedEigen {
        eigenvalues: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        eigenvectors: u,
    })
}

/// Eigenvalues of `B^{-1} A` for symmetric `a` and SPD `b`, ascending.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(generalized_eig(a, b)?.eigenvalues)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Dense LU solve.
pub fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>> {
    a.clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
        .ok_or_else(|| Error::Breakdown("singular dense matrix".into()))
}

pub fn csr_to_dmatrix(a: &CsrMatrix) -> DMatrix<f64> {
    a.to_nalgebra()
}
