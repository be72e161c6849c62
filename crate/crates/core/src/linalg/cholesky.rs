//! Up-looking sparse Cholesky factorization `P A P^T = L L^T`.
//!
//! The symbolic phase (ordering, elimination tree, column counts) is split
//! from the numeric phase so that a family of matrices sharing one sparsity
//! pattern, such as `d_j M + s B`, is analyzed once.

use crate::error::{Error, Result};

use super::ordering::reverse_cuthill_mckee;
use super::{CsrMatrix, LinearOperator};

const NONE: usize = usize::MAX;

/// Ordering and elimination structure of a symmetric sparsity pattern.
#[derive(Clone, Debug)]
pub struct SymbolicCholesky {
    n: usize,
    perm: Vec<usize>,
    parent: Vec<usize>,
    col_ptr: Vec<usize>,
    ordering: &'static str,
}

impl SymbolicCholesky {
    /// Analyze the pattern of `a` (full symmetric storage) with RCM ordering.
    pub fn analyze(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Cholesky of a {}x{} matrix",
                a.nrows(),
                a.ncols()
            )));
        }
        let perm = reverse_cuthill_mckee(a);
        let pa = a.permute_symmetric(&perm);
        let n = a.nrows();
        let parent = etree(&pa);
        let mut counts = vec![1usize; n];
        let mut stack = vec![0usize; n];
        let mut mark = vec![false; n];
        for k in 0..n {
            let top = ereach(&pa, k, &parent, &mut stack, &mut mark);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + counts[j];
        }
        Ok(Self {
            n,
            perm,
            parent,
            col_ptr,
            ordering: "rcm",
        })
    }

    pub fn nnz_l(&self) -> usize {
        self.col_ptr[self.n]
    }

    pub fn ordering(&self) -> &'static str {
        self.ordering
    }
}

/// Elimination tree of the upper triangle of a symmetric matrix.
fn etree(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &i0 in a.row(k).0 {
            let mut i = i0;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Pattern of row `k` of `L` (excluding the diagonal) in topological order,
/// returned as `stack[top..]`.
fn ereach(a: &CsrMatrix, k: usize, parent: &[usize], stack: &mut [usize], mark: &mut [bool]) -> usize {
    let n = a.nrows();
    let mut top = n;
    mark[k] = true;
    let mut path = Vec::new();
    for &i0 in a.row(k).0 {
        if i0 >= k {
            continue;
        }
        let mut i = i0;
        path.clear();
        while !mark[i] {
            path.push(i);
            mark[i] = true;
            i = parent[i];
        }
        while let Some(v) = path.pop() {
            top -= 1;
            stack[top] = v;
        }
    }
    for &v in &stack[top..] {
        mark[v] = false;
    }
    mark[k] = false;
    top
}

/// Numeric Cholesky factor; as a [`LinearOperator`] it applies `A^{-1}`.
#[derive(Clone, Debug)]
pub struct SparseCholesky {
    symbolic: SymbolicCholesky,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCholesky {
    /// Analyze and factor in one step.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let sym = SymbolicCholesky::analyze(a)?;
        Self::factor_with(sym, a)
    }

    /// Numeric factorization reusing a symbolic analysis. The pattern of `a`
    /// must be contained in the analyzed pattern.
    pub fn factor_with(symbolic: SymbolicCholesky, a: &CsrMatrix) -> Result<Self> {
        let n = symbolic.n;
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} does not match analysis of size {n}",
                a.nrows(),
                a.ncols()
            )));
        }
        let pa = a.permute_symmetric(&symbolic.perm);
        let lp = &symbolic.col_ptr;
        let nnz = lp[n];
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0; nnz];
        let mut next: Vec<usize> = lp[..n].to_vec();
        let mut x = vec![0.0; n];
        let mut stack = vec![0usize; n];
        let mut mark = vec![false; n];
        for k in 0..n {
            let top = ereach(&pa, k, &symbolic.parent, &mut stack, &mut mark);
            let (cols, vals) = pa.row(k);
            for (&i, &v) in cols.iter().zip(vals) {
                if i <= k {
                    x[i] = v;
                }
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..] {
                let lki = x[i] / lx[lp[i]];
                x[i] = 0.0;
                for p in lp[i] + 1..next[i] {
                    x[li[p]] -= lx[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                if p >= lp[i + 1] {
                    return Err(Error::DimensionMismatch(
                        "matrix pattern exceeds symbolic analysis".into(),
                    ));
                }
                next[i] += 1;
                li[p] = k;
                lx[p] = lki;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotSpd {
                    index: symbolic.perm[k],
                    value: d,
                });
            }
            let p = next[k];
            next[k] += 1;
            li[p] = k;
            lx[p] = d.sqrt();
        }
        Ok(Self {
            symbolic,
            row_idx: li,
            values: lx,
        })
    }

    pub fn dim(&self) -> usize {
        self.symbolic.n
    }

    pub fn symbolic(&self) -> &SymbolicCholesky {
        &self.symbolic
    }

    pub fn nnz_l(&self) -> usize {
        self.symbolic.nnz_l()
    }

    pub fn ordering(&self) -> &'static str {
        self.symbolic.ordering
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.symbolic.n;
        assert_eq!(b.len(), n);
        let perm = &self.symbolic.perm;
        let lp = &self.symbolic.col_ptr;
        let mut y: Vec<f64> = perm.iter().map(|&o| b[o]).collect();
        for j in 0..n {
            let yj = y[j] / self.values[lp[j]];
            y[j] = yj;
            for p in lp[j] + 1..lp[j + 1] {
                y[self.row_idx[p]] -= self.values[p] * yj;
            }
        }
        for j in (0..n).rev() {
            let mut s = y[j];
            for p in lp[j] + 1..lp[j + 1] {
                s -= self.values[p] * y[self.row_idx[p]];
            }
            y[j] = s / self.values[lp[j]];
        }
        for (k, &o) in perm.iter().enumerate() {
            b[o] = y[k];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

impl LinearOperator for SparseCholesky {
    fn nrows(&self) -> usize {
        self.symbolic.n
    }
    fn ncols(&self) -> usize {
        self.symbolic.n
    }
    fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        let s = self.solve(x);
        for (yi, si) in y.iter_mut().zip(s) {
            *yi += alpha * si;
        }
    }
    fn apply_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        self.apply_add(alpha, x, y)
    }
}
