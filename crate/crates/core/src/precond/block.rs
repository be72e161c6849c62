use std::sync::Arc;

use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::{BlockOperator, CsrMatrix, LinearOperator, ScaledOperator, SparseCholesky};

/// `(A (x) B)^{-1} = A^{-1} (x) B^{-1}` from two sparse Cholesky factors.
#[derive(Clone, Debug)]
pub struct KronCholesky {
    time: SparseCholesky,
    space: SparseCholesky,
}

impl KronCholesky {
    pub fn new(time: &CsrMatrix, space: &CsrMatrix) -> Result<Self> {
        Ok(Self {
            time: SparseCholesky::factor(time)?,
            space: SparseCholesky::factor(space)?,
        })
    }

    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        let (nt, nx) = (self.time.dim(), self.space.dim());
        assert_eq!(r.len(), nt * nx);
        let mut w = r.to_vec();
        w.par_chunks_mut(nx).for_each(|row| self.space.solve_in_place(row));
        // transpose, solve in time along each spatial index, transpose back
        let mut wt = vec![0.0; nt * nx];
        wt.par_chunks_mut(nt).enumerate().for_each(|(x, col)| {
            for (t, c) in col.iter_mut().enumerate() {
                *c = w[t * nx + x];
            }
            self.time.solve_in_place(col);
        });
        w.par_chunks_mut(nx).enumerate().for_each(|(t, row)| {
            for (x, v) in row.iter_mut().enumerate() {
                *v = wt[x * nt + t];
            }
        });
        w
    }
}

impl LinearOperator for KronCholesky {
    fn nrows(&self) -> usize {
        self.time.dim() * self.space.dim()
    }
    fn ncols(&self) -> usize {
        self.nrows()
    }
    fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for (yi, si) in y.iter_mut().zip(self.solve(x)) {
            *yi += alpha * si;
        }
    }
    fn apply_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        self.apply_add(alpha, x, y)
    }
}

/// Inverse action of the block-diagonal preconditioner
/// `diag(P, alpha M, alpha^{-1} M)` (three blocks) or
/// `diag(P, alpha^{-1} M)` (two blocks).
pub struct BlockDiagPreconditioner {
    pub p_inv: Arc<dyn LinearOperator>,
    pub m_inv: Arc<KronCholesky>,
    pub alpha: f64,
    op: BlockOperator,
}

impl BlockDiagPreconditioner {
    pub fn three_by_three(p_inv: Arc<dyn LinearOperator>, m_inv: Arc<KronCholesky>, alpha: f64) -> Self {
        let m: Arc<dyn LinearOperator> = m_inv.clone();
        let op = BlockOperator::diagonal(vec![
            p_inv.clone(),
            Arc::new(ScaledOperator {
                scale: 1.0 / alpha,
                inner: m.clone(),
            }),
            Arc::new(ScaledOperator { scale: alpha, inner: m }),
        ]);
        Self {
            p_inv,
            m_inv,
            alpha,
            op,
        }
    }

    pub fn two_by_two(p_inv: Arc<dyn LinearOperator>, m_inv: Arc<KronCholesky>, alpha: f64) -> Self {
        let m: Arc<dyn LinearOperator> = m_inv.clone();
        let op = BlockOperator::diagonal(vec![p_inv.clone(), Arc::new(ScaledOperator { scale: alpha, inner: m })]);
        Self {
            p_inv,
            m_inv,
            alpha,
            op,
        }
    }

    pub fn block_sizes(&self) -> &[usize] {
        self.op.row_sizes()
    }
}

impl LinearOperator for BlockDiagPreconditioner {
    fn nrows(&self) -> usize {
        self.op.nrows()
    }
    fn ncols(&self) -> usize {
        self.op.ncols()
    }
    fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        self.op.apply_add(alpha, x, y)
    }
    fn apply_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        self.op.apply_add(alpha, x, y)
    }
}
