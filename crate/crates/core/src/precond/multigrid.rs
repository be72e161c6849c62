//! Geometric multigrid for `d M + s B` on the Dirichlet-reduced spatial
//! spline space, with knot-insertion prolongation and Galerkin coarsening.

use crate::assembly::DofMap;
use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, SparseCholesky};
use crate::spline::SplineSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SmootherSteps {
    pub pre: usize,
    pub post: usize,
    /// number of recursive coarse visits (2 for a W-cycle)
    pub gamma: usize,
}

impl Default for SmootherSteps {
    fn default() -> Self {
        Self {
            pre: 2,
            post: 2,
            gamma: 2,
        }
    }
}

/// Mass and biharmonic matrices on every level, finest last.
#[derive(Clone, Debug)]
pub struct MultigridHierarchy {
    mass: Vec<CsrMatrix>,
    biharm: Vec<CsrMatrix>,
    /// `prolong[l]` maps level `l` to level `l + 1`
    prolong: Vec<CsrMatrix>,
    restrict: Vec<CsrMatrix>,
}

/// Interior-to-interior two-scale matrix of one direction.
fn interior_prolongation(coarse: &SplineSpace, fine: &SplineSpace) -> Result<CsrMatrix> {
    let t = coarse.knot_insertion_matrix(fine)?;
    let rc = DofMap::drop_ends(coarse.dim());
    let rf = DofMap::drop_ends(fine.dim());
    Ok(t.submatrix(rf.retained(), rc.retained()))
}

impl MultigridHierarchy {
    /// Coarsen `fine` (the finest reduced spatial space, uniform level
    /// `level`, degree `p`, smoothness `k`) down to a single element.
    pub fn build(degree: usize, smoothness: i32, level: u32, mass: &CsrMatrix, biharm: &CsrMatrix) -> Result<Self> {
        let spaces: Vec<SplineSpace> = (0..=level)
            .map(|l| SplineSpace::uniform(degree, smoothness, l))
            .collect::<Result<_>>()?;
        let nf = DofMap::drop_ends(spaces[level as usize].dim()).dim();
        if mass.nrows() != nf * nf || biharm.nrows() != nf * nf {
            return Err(Error::DimensionMismatch(format!(
                "multigrid: fine matrices have {} rows, spaces give {}",
                mass.nrows(),
                nf * nf
            )));
        }
        let mut prolong = Vec::with_capacity(level as usize);
        for l in 0..level as usize {
            let t = interior_prolongation(&spaces[l], &spaces[l + 1])?;
            prolong.push(CsrMatrix::kron(&t, &t));
        }
        let restrict: Vec<CsrMatrix> = prolong.iter().map(|p| p.transpose()).collect();
        let mut m = vec![mass.clone()];
        let mut b = vec![biharm.clone()];
        for p in prolong.iter().rev() {
            m.push(m.last().unwrap().galerkin(p));
            b.push(b.last().unwrap().galerkin(p));
        }
        m.reverse();
        b.reverse();
        Ok(Self {
            mass: m,
            biharm: b,
            prolong,
            restrict,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.mass.len()
    }

    pub fn level_dims(&self) -> Vec<usize> {
        self.mass.iter().map(|m| m.nrows()).collect()
    }

    /// Operators `d M_l + s B_l` on all levels with a factored coarse level.
    pub fn operator(&self, d: f64, s: f64, steps: SmootherSteps) -> Result<MultigridOperator> {
        let ops: Vec<CsrMatrix> = self
            .mass
            .iter()
            .zip(&self.biharm)
            .map(|(m, b)| CsrMatrix::linear_combination(&[(d, m), (s, b)]))
            .collect();
        let coarse = SparseCholesky::factor(&ops[0])?;
        Ok(MultigridOperator {
            ops,
            coarse,
            steps,
        })
    }

    pub(crate) fn prolong(&self, l: usize) -> &CsrMatrix {
        &self.prolong[l]
    }

    pub(crate) fn restrict(&self, l: usize) -> &CsrMatrix {
        &self.restrict[l]
    }
}

/// One shifted system `d M + s B` across the hierarchy.
#[derive(Clone, Debug)]
pub struct MultigridOperator {
    ops: Vec<CsrMatrix>,
    coarse: SparseCholesky,
    steps: SmootherSteps,
}

fn gauss_seidel(a: &CsrMatrix, b: &[f64], x: &mut [f64], forward: bool) {
    let n = a.nrows();
    let mut sweep = |i: usize| {
        let (cols, vals) = a.row(i);
        let mut s = b[i];
        let mut diag = 0.0;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                diag = v;
            } else {
                s -= v * x[j];
            }
        }
        x[i] = s / diag;
    };
    if forward {
        (0..n).for_each(&mut sweep);
    } else {
        (0..n).rev().for_each(&mut sweep);
    }
}

impl MultigridOperator {
    pub fn fine_matrix(&self) -> &CsrMatrix {
        self.ops.last().unwrap()
    }

    /// One cycle for `A x = b` starting from `x`.
    pub fn cycle(&self, h: &MultigridHierarchy, b: &[f64], x: &mut [f64]) {
        self.cycle_level(h, self.ops.len() - 1, b, x);
    }

    /// One cycle from a zero initial guess.
    pub fn apply_cycle(&self, h: &MultigridHierarchy, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        self.cycle(h, b, &mut x);
        x
    }

    fn cycle_level(&self, h: &MultigridHierarchy, l: usize, b: &[f64], x: &mut [f64]) {
        if l == 0 {
            x.copy_from_slice(&self.coarse.solve(b));
            return;
        }
        let a = &self.ops[l];
        for _ in 0..self.steps.pre {
            gauss_seidel(a, b, x, true);
        }
        let mut r = b.to_vec();
        a.matvec_add(-1.0, x, &mut r);
        let rc = h.restrict(l - 1).matvec(&r);
        let mut ec = vec![0.0; rc.len()];
        for _ in 0..self.steps.gamma.max(1) {
            self.cycle_level(h, l - 1, &rc, &mut ec);
        }
        h.prolong(l - 1).matvec_add(1.0, &ec, x);
        for _ in 0..self.steps.post {
            gauss_seidel(a, b, x, false);
        }
    }
}
