//! Preconditioned Krylov solvers: MINRES, CG, and a Lanczos eigenvalue
//! estimator. All preconditioners are passed as the inverse action `M^{-1}`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::operator::{axpy, dot};
use super::LinearOperator;

/// What the preconditioned residual norm is compared against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualReference {
    /// its own initial value (scale invariant)
    #[default]
    Preconditioned,
    /// the Euclidean norm of the right-hand side, as some IGA libraries do
    RhsEuclidean,
}

impl std::str::FromStr for ResidualReference {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "preconditioned" => Ok(Self::Preconditioned),
            "rhs_euclidean" => Ok(Self::RhsEuclidean),
            o => Err(Error::Config(format!(
                "residual_reference must be 'preconditioned' or 'rhs_euclidean', got '{o}'"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    /// Relative reduction of the preconditioned residual norm.
    pub tol: f64,
    pub max_iter: usize,
    pub reference: ResidualReference,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 1000,
            reference: ResidualReference::Preconditioned,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct KrylovReport {
    pub iterations: usize,
    pub converged: bool,
    /// Preconditioned residual norm relative to the initial one, per iteration
    /// (entry 0 is the start).
    pub history: Vec<f64>,
}

impl KrylovReport {
    pub fn final_relative_residual(&self) -> f64 {
        self.history.last().copied().unwrap_or(0.0)
    }
}

fn check_square(op: &dyn LinearOperator, pc: &dyn LinearOperator, b: &[f64]) -> Result<()> {
    let n = b.len();
    if op.nrows() != n || op.ncols() != n || pc.nrows() != n || pc.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator {}x{}, preconditioner {}x{}, rhs {n}",
            op.nrows(),
            op.ncols(),
            pc.nrows(),
            pc.ncols()
        )));
    }
    Ok(())
}

/// Preconditioned MINRES for symmetric `op` and SPD `precond` (`M^{-1}`),
/// started from zero. Stops when the `M^{-1}`-norm of the residual has
/// dropped by `tol` relative to `opts.reference`.
pub fn minres(
    op: &dyn LinearOperator,
    precond: &dyn LinearOperator,
    b: &[f64],
    opts: KrylovOptions,
) -> Result<(Vec<f64>, KrylovReport)> {
    check_square(op, precond, b)?;
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut report = KrylovReport {
        history: vec![1.0],
        ..Default::default()
    };
    let mut v = b.to_vec();
    let mut z = precond.apply_vec(&v);
    let zv = dot(&z, &v);
    if zv < 0.0 {
        return Err(Error::Breakdown("preconditioner is not positive definite".into()));
    }
    let mut gamma = zv.sqrt();
    if gamma == 0.0 {
        report.converged = true;
        return Ok((x, report));
    }
    let gamma1 = gamma;
    let target = opts.tol
        * match opts.reference {
            ResidualReference::Preconditioned => gamma1,
            ResidualReference::RhsEuclidean => dot(b, b).sqrt(),
        };
    let mut gamma_prev = 1.0;
    let mut v_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w_prev = vec![0.0; n];
    let (mut c, mut c_prev) = (1.0, 1.0);
    let (mut s, mut s_prev) = (0.0, 0.0);
    let mut eta = gamma;
    let mut az = vec![0.0; n];

    for it in 1..=opts.max_iter {
        z.iter_mut().for_each(|e| *e /= gamma);
        op.apply(&z, &mut az);
        let delta = dot(&az, &z);
        // v_next = A z - (delta/gamma) v - (gamma/gamma_prev) v_prev
        let mut v_next = az.clone();
        axpy(-delta / gamma, &v, &mut v_next);
        axpy(-gamma / gamma_prev, &v_prev, &mut v_next);
        let z_next = precond.apply_vec(&v_next);
        let zv = dot(&z_next, &v_next);
        if zv < -1e-14 * gamma1 * gamma1 {
            return Err(Error::Breakdown("preconditioner is not positive definite".into()));
        }
        let gamma_next = zv.max(0.0).sqrt();

        let a0 = c * delta - c_prev * s * gamma;
        let a1 = a0.hypot(gamma_next);
        let a2 = s * delta + c_prev * c * gamma;
        let a3 = s_prev * gamma;
        if a1 == 0.0 {
            return Err(Error::Breakdown(format!("MINRES breakdown at iteration {it}")));
        }
        let c_next = a0 / a1;
        let s_next = gamma_next / a1;
        // w_next = (z - a3 w_prev - a2 w) / a1
        let mut w_next = z.clone();
        axpy(-a3, &w_prev, &mut w_next);
        axpy(-a2, &w, &mut w_next);
        w_next.iter_mut().for_each(|e| *e /= a1);
        axpy(c_next * eta, &w_next, &mut x);
        eta *= -s_next;

        report.iterations = it;
        report.history.push(eta.abs() / gamma1);
        if eta.abs() <= target || gamma_next == 0.0 {
            report.converged = true;
            break;
        }

        v_prev = std::mem::replace(&mut v, v_next);
        z = z_next;
        w_prev = std::mem::replace(&mut w, w_next);
        gamma_prev = gamma;
        gamma = gamma_next;
        c_prev = c;
        c = c_next;
        s_prev = s;
        s = s_next;
    }
    Ok((x, report))
}

/// Lanczos tridiagonal recovered from CG coefficients.
#[derive(Clone, Debug, Default)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Ritz values, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let k = self.diag.len();
        if k == 0 {
            return Vec::new();
        }
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                self.diag[i]
            } else if i + 1 == j {
                self.offdiag[i]
            } else if j + 1 == i {
                self.offdiag[j]
            } else {
                0.0
            }
        });
        let mut ev: Vec<f64> = t.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Preconditioned conjugate gradients from zero. The residual measure is the
/// `M^{-1}`-norm, as in [`minres`].
pub fn cg(
    op: &dyn LinearOperator,
    precond: &dyn LinearOperator,
    b: &[f64],
    opts: KrylovOptions,
) -> Result<(Vec<f64>, KrylovReport, Tridiagonal)> {
    check_square(op, precond, b)?;
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = precond.apply_vec(&r);
    let mut rz = dot(&r, &z);
    let mut report = KrylovReport {
        history: vec![1.0],
        ..Default::default()
    };
    let mut tri = Tridiagonal::default();
    if rz <= 0.0 {
        report.converged = rz == 0.0;
        return Ok((x, report, tri));
    }
    let rz0 = rz;
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut alpha_prev = 0.0;
    let mut beta_prev = 0.0;
    for it in 1..=opts.max_iter {
        op.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Breakdown(format!("CG: operator not positive definite at iteration {it}")));
        }
        let alpha = rz / pap;
        let t_kk = if it == 1 {
            1.0 / alpha
        } else {
            1.0 / alpha + beta_prev / alpha_prev
        };
        tri.diag.push(t_kk);
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        z = precond.apply_vec(&r);
        let rz_next = dot(&r, &z);
        report.iterations = it;
        report.history.push((rz_next.max(0.0) / rz0).sqrt());
        if rz_next.max(0.0).sqrt() <= opts.tol * rz0.sqrt() {
            report.converged = true;
            break;
        }
        let beta = rz_next / rz;
        tri.offdiag.push(beta.sqrt() / alpha);
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rz = rz_next;
        alpha_prev = alpha;
        beta_prev = beta;
    }
    Ok((x, report, tri))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConditionEstimate {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub condition: f64,
    pub iterations: usize,
}

/// Extreme eigenvalues of `precond^{-1} op` (pass `precond` as its inverse
/// action) by Lanczos in the preconditioner inner product with full
/// reorthogonalization. Ritz values interlace, so the result is a lower
/// bound on the true condition number.
pub fn lanczos_condition(
    op: &dyn LinearOperator,
    precond_inv: &dyn LinearOperator,
    n_iters: usize,
    seed: u64,
) -> Result<ConditionEstimate> {
    let n = op.nrows();
    if op.ncols() != n || precond_inv.nrows() != n || precond_inv.ncols() != n {
        return Err(Error::DimensionMismatch("Lanczos operator shapes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let v0 = precond_inv.apply_vec(&q0);
    let b0 = dot(&q0, &v0).sqrt();
    // q lives in the dual space, v = P^{-1} q in the primal one
    let mut qs: Vec<Vec<f64>> = vec![q0.iter().map(|e| e / b0).collect()];
    let mut vs: Vec<Vec<f64>> = vec![v0.iter().map(|e| e / b0).collect()];
    let mut tri = Tridiagonal::default();
    let mut beta = 0.0;
    let steps = n_iters.min(n);
    for k in 0..steps {
        let mut r = op.apply_vec(&vs[k]);
        if k > 0 {
            axpy(-beta, &qs[k - 1], &mut r);
        }
        let alpha = dot(&vs[k], &r);
        axpy(-alpha, &qs[k], &mut r);
        for _ in 0..2 {
            for (qi, vi) in qs.iter().zip(&vs) {
                let h = dot(vi, &r);
                axpy(-h, qi, &mut r);
            }
        }
        tri.diag.push(alpha);
        let z = precond_inv.apply_vec(&r);
        let zr = dot(&z, &r);
        if !alpha.is_finite() || zr < -1e-12 * alpha.abs() {
            if k < 2 {
                return Err(Error::Breakdown(format!("Lanczos broke down at step {k}")));
            }
            tri.diag.pop();
            break;
        }
        // an (almost) invariant subspace is an exact termination
        if k + 1 == steps || zr <= 1e-28 * alpha.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        beta = zr.sqrt();
        tri.offdiag.push(beta);
        qs.push(r.iter().map(|e| e / beta).collect());
        vs.push(z.iter().map(|e| e / beta).collect());
    }
    let ev = tri.eigenvalues();
    let lambda_min = ev[0];
    let lambda_max = *ev.last().unwrap();
    Ok(ConditionEstimate {
        lambda_min,
        lambda_max,
        condition: lambda_max / lambda_min,
        iterations: tri.len(),
    })
}
