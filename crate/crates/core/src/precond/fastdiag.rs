//! Fast diagonalization in time for
//! `P = (M_q + alpha K_t) (x) M_x + alpha kappa^2 M_t (x) B_x`.
//!
//! With `U^T M_t U = I` and `U^T (M_q + alpha K_t) U = D` the inverse is
//! `(U (x) I) (D (x) M_x + alpha kappa^2 I (x) B_x)^{-1} (U^T (x) I)`, i.e.
//! one dense time transform on each side and `N_t` independent spatial
//! solves.

use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::{SpaceMatrices, TimeMatrices};
use crate::error::{Error, Result};
use crate::linalg::{generalized_eig, CsrMatrix, LinearOperator, SparseCholesky, SymbolicCholesky};

use super::multigrid::{MultigridHierarchy, MultigridOperator, SmootherSteps};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpatialBackend {
    /// sparse Cholesky per slice
    Cholesky,
    /// one multigrid cycle per slice
    Multigrid,
}

impl FromStr for SpatialBackend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" | "direct" => Ok(Self::Cholesky),
            "multigrid" | "mg" => Ok(Self::Multigrid),
            o => Err(Error::Config(format!("backend must be 'cholesky' or 'multigrid', got '{o}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ApplyMode {
    Serial,
    #[default]
    Parallel,
}

/// Generalized eigendecomposition of the time pencil, `U` stored row-major.
#[derive(Clone, Debug)]
pub struct TimePencilEigen {
    pub n: usize,
    pub u: Vec<f64>,
    pub d: Vec<f64>,
}

impl TimePencilEigen {
    pub fn compute(a: &CsrMatrix, m: &CsrMatrix) -> Result<Self> {
        let g = generalized_eig(&a.to_nalgebra(), &m.to_nalgebra())?;
        let n = g.eigenvalues.len();
        let u = (0..n * n).map(|k| g.eigenvectors[(k / n, k % n)]).collect();
        Ok(Self {
            n,
            u,
            d: g.eigenvalues,
        })
    }

    #[inline]
    pub fn u(&self, i: usize, j: usize) -> f64 {
        self.u[i * self.n + j]
    }
}

enum SliceSolver {
    Direct(SparseCholesky),
    Multigrid(MultigridOperator),
}

pub struct FastDiagSolver {
    eig: TimePencilEigen,
    nx: usize,
    slices: Vec<SliceSolver>,
    hierarchy: Option<Arc<MultigridHierarchy>>,
    backend: SpatialBackend,
    mode: ApplyMode,
    eigendecompositions: usize,
    factorizations: usize,
    eig_seconds: f64,
    factor_seconds: f64,
    last_slice_seconds: Mutex<Vec<f64>>,
}

impl std::fmt::Debug for FastDiagSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FastDiagSolver")
            .field("nt", &self.eig.n)
            .field("nx", &self.nx)
            .field("backend", &self.backend)
            .finish()
    }
}

/// Options for [`FastDiagSolver::build`].
#[derive(Clone, Copy, Debug)]
pub struct FastDiagOptions {
    pub backend: SpatialBackend,
    pub smoother: SmootherSteps,
    pub mode: ApplyMode,
}

impl Default for FastDiagOptions {
    fn default() -> Self {
        Self {
            backend: SpatialBackend::Cholesky,
            smoother: SmootherSteps::default(),
            mode: ApplyMode::Parallel,
        }
    }
}

impl FastDiagSolver {
    /// Step 1 plus preparation of the spatial solvers for `P` with the
    /// pencil `(M_q + alpha K_t, M_t)` and spatial shift `alpha kappa^2`.
    /// `mg_space` gives degree, smoothness and level of the spatial space,
    /// needed only by the multigrid backend.
    pub fn build(
        tm: &TimeMatrices,
        sm: &SpaceMatrices,
        alpha: f64,
        kappa: f64,
        mg_space: Option<(usize, i32, u32)>,
        opts: FastDiagOptions,
    ) -> Result<Self> {
        if !(alpha > 0.0 && kappa > 0.0) {
            return Err(Error::Config("alpha and kappa must be positive".into()));
        }
        let a = CsrMatrix::linear_combination(&[(1.0, &tm.obs_mass), (alpha, &tm.stiff)]);
        Self::from_pencil(&a, &tm.mass, &sm.mass, &sm.biharm, alpha * kappa * kappa, mg_space, opts)
    }

    /// Inverse of `A_t (x) M_x + s M_t (x) B_x` for SPD `M_t` and
    /// semidefinite `A_t` with `d_j M_x + s B_x` SPD.
    pub fn from_pencil(
        time_a: &CsrMatrix,
        time_m: &CsrMatrix,
        space_m: &CsrMatrix,
        space_b: &CsrMatrix,
        s: f64,
        mg_space: Option<(usize, i32, u32)>,
        opts: FastDiagOptions,
    ) -> Result<Self> {
        let t0 = Instant::now();
        let eig = TimePencilEigen::compute(time_a, time_m)?;
        let eig_seconds = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let nx = space_m.nrows();
        let mut factorizations = 0;
        let (slices, hierarchy) = match opts.backend {
            SpatialBackend::Cholesky => {
                let pattern = CsrMatrix::linear_combination(&[(1.0, space_m), (1.0, space_b)]);
                let sym = SymbolicCholesky::analyze(&pattern)?;
                let slices = eig
                    .d
                    .iter()
                    .enumerate()
                    .map(|(j, &d)| {
                        let m = CsrMatrix::linear_combination(&[(d, space_m), (s, space_b)]);
                        SparseCholesky::factor_with(sym.clone(), &m)
                            .map(SliceSolver::Direct)
                            .map_err(|e| Error::SliceSolve {
                                slice: j,
                                eigenvalue: d,
                                source: Box::new(e),
                            })
                    })
                    .collect::<Result<Vec<_>>>()?;
                factorizations = slices.len();
                (slices, None)
            }
            SpatialBackend::Multigrid => {
                let (p, k, level) = mg_space
                    .ok_or_else(|| Error::Config("multigrid backend needs the spatial space".into()))?;
                let h = Arc::new(MultigridHierarchy::build(p, k, level, space_m, space_b)?);
                let slices = eig
                    .d
                    .iter()
                    .enumerate()
                    .map(|(j, &d)| {
                        h.operator(d, s, opts.smoother)
                            .map(SliceSolver::Multigrid)
                            .map_err(|e| Error::SliceSolve {
                                slice: j,
                                eigenvalue: d,
                                source: Box::new(e),
                            })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (slices, Some(h))
            }
        };
        let nt = eig.n;
        Ok(Self {
            eig,
            nx,
            slices,
            hierarchy,
            backend: opts.backend,
            mode: opts.mode,
            eigendecompositions: 1,
            factorizations,
            eig_seconds,
            factor_seconds: t1.elapsed().as_secs_f64(),
            last_slice_seconds: Mutex::new(vec![0.0; nt]),
        })
    }

    /// Seconds spent in the eigendecomposition and in spatial setup.
    pub fn setup_seconds(&self) -> (f64, f64) {
        (self.eig_seconds, self.factor_seconds)
    }

    /// Name of the fill-reducing ordering used by the direct backend.
    pub fn ordering(&self) -> Option<&'static str> {
        match self.slices.first() {
            Some(SliceSolver::Direct(c)) => Some(c.ordering()),
            _ => None,
        }
    }

    pub fn eigen(&self) -> &TimePencilEigen {
        &self.eig
    }

    pub fn backend(&self) -> SpatialBackend {
        self.backend
    }

    /// Number of time-pencil eigendecompositions performed so far.
    pub fn eigendecompositions(&self) -> usize {
        self.eigendecompositions
    }

    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    pub fn set_mode(&mut self, mode: ApplyMode) {
        self.mode = mode;
    }

    /// Wall time of each spatial solve during the last application.
    pub fn slice_timings(&self) -> Vec<f64> {
        self.last_slice_seconds.lock().unwrap().clone()
    }

    fn solve_slice(&self, j: usize, r: &[f64]) -> Vec<f64> {
        match &self.slices[j] {
            SliceSolver::Direct(c) => c.solve(r),
            SliceSolver::Multigrid(op) => op.apply_cycle(self.hierarchy.as_ref().unwrap(), r),
        }
    }

    /// `s = P^{-1} r` (exact for the Cholesky backend).
    pub fn solve(&self, r: &[f64]) -> Vec<f64> {
        let (nt, nx) = (self.eig.n, self.nx);
        assert_eq!(r.len(), nt * nx);
        let eig = &self.eig;
        // step 2: rt_j = sum_i U_ij r_i
        let step2 = |j: usize, out: &mut [f64]| {
            out.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..nt {
                let c = eig.u(i, j);
                for (o, v) in out.iter_mut().zip(&r[i * nx..(i + 1) * nx]) {
                    *o += c * v;
                }
            }
        };
        let mut rt = vec![0.0; nt * nx];
        let mut st = vec![0.0; nt * nx];
        let mut times = vec![0.0; nt];
        // step 3: independent spatial solves
        let step3 = |j: usize, rj: &[f64], sj: &mut [f64], tj: &mut f64| {
            let t0 = Instant::now();
            sj.copy_from_slice(&self.solve_slice(j, rj));
            *tj = t0.elapsed().as_secs_f64();
        };
        let mut s = vec![0.0; nt * nx];
        // step 4: s_i = sum_j U_ij st_j
        let step4 = |i: usize, out: &mut [f64], st: &[f64]| {
            for j in 0..nt {
                let c = eig.u(i, j);
                for (o, v) in out.iter_mut().zip(&st[j * nx..(j + 1) * nx]) {
                    *o += c * v;
                }
            }
        };
        match self.mode {
            ApplyMode::Serial => {
                rt.chunks_mut(nx).enumerate().for_each(|(j, o)| step2(j, o));
                rt.chunks(nx)
                    .zip(st.chunks_mut(nx))
                    .zip(times.iter_mut())
                    .enumerate()
                    .for_each(|(j, ((rj, sj), tj))| step3(j, rj, sj, tj));
                s.chunks_mut(nx).enumerate().for_each(|(i, o)| step4(i, o, &st));
            }
            ApplyMode::Parallel => {
                rt.par_chunks_mut(nx).enumerate().for_each(|(j, o)| step2(j, o));
                rt.par_chunks(nx)
                    .zip(st.par_chunks_mut(nx))
                    .zip(times.par_iter_mut())
                    .enumerate()
                    .for_each(|(j, ((rj, sj), tj))| step3(j, rj, sj, tj));
                s.par_chunks_mut(nx).enumerate().for_each(|(i, o)| step4(i, o, &st));
            }
        }
        *self.last_slice_seconds.lock().unwrap() = times;
        s
    }
}

impl LinearOperator for FastDiagSolver {
    fn nrows(&self) -> usize {
        self.eig.n * self.nx
    }
    fn ncols(&self) -> usize {
        self.nrows()
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
