//! Benchmark data: projected initial state, homogenization lift and the
//! desired state.

use rayon::prelude::*;

use crate::assembly::{spatial_points, ynorm_gram, Discretization};
use crate::error::{Error, Result};
use crate::linalg::{cg, CsrMatrix, KrylovOptions, SparseCholesky};
use crate::precond::{FastDiagOptions, FastDiagSolver};
use crate::spline::{uniform_breaks, BasisTable, QuadRule};

/// Radius of the three disks carrying the initial state.
pub const DISK_RADIUS: f64 = 0.2;

/// Disk centers `1.5 (cos(i pi/8), sin(i pi/8))`, `i = 1, 2, 3`.
pub fn disk_centers() -> [[f64; 2]; 3] {
    let c = |i: f64| {
        let a = i * std::f64::consts::PI / 8.0;
        [1.5 * a.cos(), 1.5 * a.sin()]
    };
    [c(1.0), c(2.0), c(3.0)]
}

/// Characteristic function of the union of the three disks.
pub fn initial_indicator(x: [f64; 2]) -> f64 {
    let inside = disk_centers().iter().any(|c| {
        let (dx, dy) = (x[0] - c[0], x[1] - c[1]);
        dx * dx + dy * dy < DISK_RADIUS * DISK_RADIUS
    });
    if inside {
        1.0
    } else {
        0.0
    }
}

/// Sub-cells per knot span used for discontinuous data.
pub const INDICATOR_SUBDIVISIONS: usize = 8;

/// Load vector `(f, phi_i)` over the full (unreduced) spatial state basis.
/// Each knot span is split into `subdivisions` sub-cells per direction, so
/// discontinuous `f` is integrated to good accuracy.
pub fn spatial_load<F>(disc: &Discretization, f: F, subdivisions: usize) -> Result<Vec<f64>>
where
    F: Fn([f64; 2]) -> f64 + Sync,
{
    let s = subdivisions.max(1);
    let space = &disc.spaces.space_y;
    let n_points = spatial_points(&disc.geometry, disc.spaces.degree);
    let mut rules = Vec::with_capacity(2);
    for d in 0..2 {
        let sp = &space.dirs[d];
        let mut splits = uniform_breaks(0.0, 1.0, sp.num_elements() * s);
        splits.extend_from_slice(disc.geometry.spaces()[d].breaks());
        rules.push(QuadRule::gauss(sp.breaks(), n_points, &splits)?);
    }
    let tabs = [
        BasisTable::new(&space.dirs[0], &rules[0], 0),
        BasisTable::new(&space.dirs[1], &rules[1], 0),
    ];
    let nv = space.dirs[1].dim();
    let p1 = disc.spaces.degree + 1;
    let geo = &disc.geometry;
    let tabs = &tabs;
    let f = &f;
    let partial: Vec<Result<Vec<(usize, f64)>>> = (0..tabs[0].num_cells())
        .into_par_iter()
        .map(|cu| {
            let mut out = Vec::new();
            let mut local = vec![0.0; p1 * p1];
            for cv in 0..tabs[1].num_cells() {
                local.iter_mut().for_each(|v| *v = 0.0);
                let mut any = false;
                for qu in 0..tabs[0].n_points() {
                    let u = tabs[0].point(cu, qu);
                    for qv in 0..tabs[1].n_points() {
                        let v = tabs[1].point(cv, qv);
                        let g = geo.eval_map(u, v)?;
                        let fv = f(g.point);
                        if fv == 0.0 {
                            continue;
                        }
                        any = true;
                        let w = tabs[0].weight(cu, qu) * tabs[1].weight(cv, qv) * g.abs_det() * fv;
                        for a in 0..p1 {
                            let na = tabs[0].value(cu, qu, 0, a) * w;
                            for b in 0..p1 {
                                local[a * p1 + b] += na * tabs[1].value(cv, qv, 0, b);
                            }
                        }
                    }
                }
                if any {
                    let (fa, fb) = (tabs[0].first(cu), tabs[1].first(cv));
                    for a in 0..p1 {
                        for b in 0..p1 {
                            out.push(((fa + a) * nv + fb + b, local[a * p1 + b]));
                        }
                    }
                }
            }
            Ok(out)
        })
        .collect();
    let mut load = vec![0.0; space.dim()];
    for part in partial {
        for (i, v) in part? {
            load[i] += v;
        }
    }
    Ok(load)
}

/// L2 projection of `f` onto the Dirichlet-reduced spatial state space.
pub fn project_spatial<F>(disc: &Discretization, f: F, subdivisions: usize) -> Result<Vec<f64>>
where
    F: Fn([f64; 2]) -> f64 + Sync,
{
    let load = disc.spaces.space_map.restrict(&spatial_load(disc, f, subdivisions)?);
    Ok(SparseCholesky::factor(&disc.space.mass)?.solve(&load))
}

/// Projected initial state `y0_h` (reduced spatial coefficients).
pub fn project_initial_state(disc: &Discretization) -> Result<Vec<f64>> {
    project_spatial(disc, initial_indicator, INDICATOR_SUBDIVISIONS)
}

/// Lift `theta_0(t) y0_h(x)` on the full space-time state basis
/// (time-major), where `theta_0` is the first time basis function.
pub fn build_lift(disc: &Discretization, y0: &[f64]) -> Vec<f64> {
    let nx_full = disc.spaces.space_map.full_dim();
    let nt_full = disc.spaces.time_map.full_dim();
    let mut lift = vec![0.0; nt_full * nx_full];
    lift[..nx_full].copy_from_slice(&disc.spaces.space_map.extend(y0));
    lift
}

/// Column 0 of a full univariate time matrix restricted to the retained rows.
fn first_column(full: &CsrMatrix, rows: &[usize]) -> Vec<f64> {
    rows.iter().map(|&i| full.get(i, 0)).collect()
}

/// Column 0 of a control-by-full-state time matrix.
fn first_column_all(full: &CsrMatrix) -> Vec<f64> {
    (0..full.nrows()).map(|i| full.get(i, 0)).collect()
}

fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &ai in a {
        out.extend(b.iter().map(|&bj| ai * bj));
    }
    out
}

/// `L (lift)` on the control rows: `D_t[:,0] (x) G_x y0 - kappa G_t[:,0] (x) A_x y0`.
pub fn lift_constraint_action(disc: &Discretization, y0: &[f64], kappa: f64) -> Vec<f64> {
    let d0 = first_column_all(&disc.time.deriv_yu_full);
    let g0 = first_column_all(&disc.time.mass_yu_full);
    let gx = disc.space.mass_yu.matvec(y0);
    let ax = disc.space.lap_yu.matvec(y0);
    let mut out = kron_vec(&d0, &gx);
    for (o, v) in out.iter_mut().zip(kron_vec(&g0, &ax)) {
        *o -= kappa * v;
    }
    out
}

/// Reduced-row action of the Y-norm Gram on the lift.
pub fn lift_gram_action(disc: &Discretization, y0: &[f64], kappa: f64) -> Vec<f64> {
    let rows = disc.spaces.time_map.retained();
    let tm = &disc.time;
    let sm = &disc.space;
    let k0 = first_column(&tm.stiff_full, rows);
    let m0 = first_column(&tm.mass_full, rows);
    let w0: Vec<f64> = rows
        .iter()
        .map(|&i| tm.cross_full.get(i, 0) + tm.cross_full.get(0, i))
        .collect();
    let mut out = kron_vec(&k0, &sm.mass.matvec(y0));
    let b = kron_vec(&m0, &sm.biharm.matvec(y0));
    let w = kron_vec(&w0, &sm.stiff.matvec(y0));
    for ((o, bi), wi) in out.iter_mut().zip(b).zip(w) {
        *o += kappa * kappa * bi + kappa * wi;
    }
    out
}

/// Reduced-space dimension up to which the Gram system is materialized and
/// factored; larger systems use preconditioned CG.
pub const DIRECT_GRAM_LIMIT: usize = 6000;

/// Reduced part `y~` of the desired state `y_d = lift + y~`: the minimizer
/// of `|| (d/dt - kappa lap)(lift + y~) ||` over the reduced state space.
pub fn manufacture_desired_state(disc: &Discretization, y0: &[f64], kappa: f64) -> Result<Vec<f64>> {
    let rhs: Vec<f64> = lift_gram_action(disc, y0, kappa).iter().map(|v| -v).collect();
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; rhs.len()]);
    }
    let gram = ynorm_gram(&disc.time, &disc.space, kappa);
    if disc.spaces.dim_y() <= DIRECT_GRAM_LIMIT {
        let n = gram.to_csr();
        let chol = SparseCholesky::factor(&n).map_err(|e| match e {
            Error::NotSpd { index, value } => {
                Error::Breakdown(format!("Y-norm Gram not SPD at row {index} (pivot {value:e})"))
            }
            other => other,
        })?;
        return Ok(chol.solve(&rhs));
    }
    let prec = FastDiagSolver::from_pencil(
        &disc.time.stiff,
        &disc.time.mass,
        &disc.space.mass,
        &disc.space.biharm,
        kappa * kappa,
        None,
        FastDiagOptions::default(),
    )?;
    let (x, report, _) = cg(
        &gram,
        &prec,
        &rhs,
        KrylovOptions {
            tol: 1e-12,
            max_iter: 500,
            ..Default::default()
        },
    )?;
    if !report.converged {
        return Err(Error::Breakdown(format!(
            "desired-state CG stalled after {} iterations",
            report.iterations
        )));
    }
    Ok(x)
}
