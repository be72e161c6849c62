//! Independent test oracles: recursive Cox–de Boor splines, closed-form
//! geometries, tabulated Gauss rules and a monolithic dense space-time
//! assembly that never touches the Kronecker code paths.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let n: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / n.max(1e-300)
}

/// Gauss–Legendre nodes and weights on [-1, 1] from tables.
pub fn gauss(n: usize) -> (Vec<f64>, Vec<f64>) {
    match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let a = 1.0 / 3f64.sqrt();
            (vec![-a, a], vec![1.0, 1.0])
        }
        3 => {
            let a = (0.6f64).sqrt();
            (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let (a, b) = (0.339_981_043_584_856_3, 0.861_136_311_594_052_6);
            let (wa, wb) = (0.652_145_154_862_546_1, 0.347_854_845_137_453_9);
            (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
        }
        5 => {
            let (a, b) = (0.538_469_310_105_683_1, 0.906_179_845_938_664);
            let (w0, wa, wb) = (128.0 / 225.0, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1);
            (vec![-b, -a, 0.0, a, b], vec![wb, wa, w0, wa, wb])
        }
        _ => panic!("no tabulated rule with {n} points"),
    }
}

/// Gauss rule mapped to [a, b].
pub fn gauss_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss(n);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (0.5 * (a + b) + 0.5 * (b - a) * xi, 0.5 * (b - a) * wi))
        .collect()
}

/// B-spline basis from the textbook recursion.
#[derive(Clone, Debug)]
pub struct NaiveSpline {
    pub p: usize,
    pub knots: Vec<f64>,
}

impl NaiveSpline {
    /// Open knot vector on `2^level` uniform elements, interior knots
    /// repeated `p - k` times.
    pub fn uniform(p: usize, k: i32, level: u32) -> Self {
        let n = 1usize << level;
        let mult = (p as i32 - k) as usize;
        let mut knots = vec![0.0; p + 1];
        for e in 1..n {
            for _ in 0..mult {
                knots.push(e as f64 / n as f64);
            }
        }
        knots.extend(std::iter::repeat_n(1.0, p + 1));
        Self { p, knots }
    }

    pub fn dim(&self) -> usize {
        self.knots.len() - self.p - 1
    }

    fn n(&self, i: usize, p: usize, x: f64) -> f64 {
        let t = &self.knots;
        if p == 0 {
            let last = t[t.len() - 1];
            // right end belongs to the last nonempty span
            if x == last {
                return if t[i] < t[i + 1] && t[i + 1] == last { 1.0 } else { 0.0 };
            }
            return if t[i] <= x && x < t[i + 1] { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = t[i + p] - t[i];
        if d1 > 0.0 {
            v += (x - t[i]) / d1 * self.n(i, p - 1, x);
        }
        let d2 = t[i + p + 1] - t[i + 1];
        if d2 > 0.0 {
            v += (t[i + p + 1] - x) / d2 * self.n(i + 1, p - 1, x);
        }
        v
    }

    fn d(&self, i: usize, p: usize, x: f64, der: usize) -> f64 {
        if der == 0 {
            return self.n(i, p, x);
        }
        if p == 0 {
            return 0.0;
        }
        let t = &self.knots;
        let mut v = 0.0;
        let d1 = t[i + p] - t[i];
        if d1 > 0.0 {
            v += p as f64 / d1 * self.d(i, p - 1, x, der - 1);
        }
        let d2 = t[i + p + 1] - t[i + 1];
        if d2 > 0.0 {
            v -= p as f64 / d2 * self.d(i + 1, p - 1, x, der - 1);
        }
        v
    }

    /// `der`-th derivative of basis function `i` at `x`.
    pub fn eval(&self, i: usize, x: f64, der: usize) -> f64 {
        self.d(i, self.p, x, der)
    }

    pub fn all(&self, x: f64, der: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.eval(i, x, der)).collect()
    }
}

/// Closed-form geometry: value, Jacobian `jac[i][j] = dG_i/dx_j` and
/// Hessians `hess[i][a][b]`.
#[derive(Clone, Copy, Debug)]
pub enum OracleGeo {
    Identity,
    /// `(1 + v) (1 - u^2, 2u - u^2)`
    Annulus,
}

pub struct GeoPoint {
    pub x: [f64; 2],
    pub jac: Matrix2<f64>,
    pub hess: [Matrix2<f64>; 2],
}

impl OracleGeo {
    pub fn eval(&self, u: f64, v: f64) -> GeoPoint {
        match self {
            OracleGeo::Identity => GeoPoint {
                x: [u, v],
                jac: Matrix2::identity(),
                hess: [Matrix2::zeros(), Matrix2::zeros()],
            },
            OracleGeo::Annulus => {
                let r = 1.0 + v;
                let a = [1.0 - u * u, 2.0 * u - u * u];
                let da = [-2.0 * u, 2.0 - 2.0 * u];
                let dda = [-2.0, -2.0];
                GeoPoint {
                    x: [r * a[0], r * a[1]],
                    jac: Matrix2::new(r * da[0], a[0], r * da[1], a[1]),
                    hess: [
                        Matrix2::new(r * dda[0], da[0], da[0], 0.0),
                        Matrix2::new(r * dda[1], da[1], da[1], 0.0),
                    ],
                }
            }
        }
    }

    pub fn library(&self) -> stocp::geometry::GeometryMap {
        match self {
            OracleGeo::Identity => stocp::geometry::GeometryMap::identity(),
            OracleGeo::Annulus => stocp::geometry::GeometryMap::quarter_annulus(),
        }
    }
}

/// Physical gradient and Laplacian from parametric derivatives
/// `g = (f_u, f_v)` and `h = [[f_uu, f_uv], [f_uv, f_vv]]`, by solving the
/// chain rule `h = J^T H J + sum_i hess_i (grad f)_i` for the physical
/// Hessian `H`.
pub fn physical(gp: &GeoPoint, g: [f64; 2], h: Matrix2<f64>) -> ([f64; 2], f64) {
    let jinv = gp.jac.try_inverse().expect("regular map");
    let gp_vec = jinv.transpose() * nalgebra::Vector2::new(g[0], g[1]);
    let r = h - gp.hess[0] * gp_vec[0] - gp.hess[1] * gp_vec[1];
    let hp = jinv.transpose() * r * jinv;
    ([gp_vec[0], gp_vec[1]], hp[(0, 0)] + hp[(1, 1)])
}

/// Dense reduced space-time matrices assembled point by point.
pub struct Monolithic {
    pub l: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub mq: DMatrix<f64>,
    pub p: DMatrix<f64>,
    /// `int (y_t - kappa lap y)(z_t - kappa lap z)`
    pub gram: DMatrix<f64>,
    /// `int y_t z_t`
    pub c: DMatrix<f64>,
    /// `int lap y lap z`
    pub b: DMatrix<f64>,
}

pub struct OracleSpaces {
    pub ty: NaiveSpline,
    pub sy: NaiveSpline,
    pub tu: NaiveSpline,
    pub su: NaiveSpline,
}

impl OracleSpaces {
    pub fn new(p: usize, level: u32, tilde: bool) -> Self {
        let k = p as i32 - 1;
        let (kt, ks) = if tilde { (k, k) } else { (p as i32 - 2, p as i32 - 3) };
        Self {
            ty: NaiveSpline::uniform(p, k, level),
            sy: NaiveSpline::uniform(p, k, level),
            tu: NaiveSpline::uniform(p, kt, level),
            su: NaiveSpline::uniform(p, ks, level),
        }
    }

    /// Reduced state index list `(time, a, b)` in library order.
    pub fn y_indices(&self) -> Vec<(usize, usize, usize)> {
        let (nt, ns) = (self.ty.dim(), self.sy.dim());
        let mut v = Vec::new();
        for i in 1..nt {
            for a in 1..ns - 1 {
                for b in 1..ns - 1 {
                    v.push((i, a, b));
                }
            }
        }
        v
    }

    pub fn u_indices(&self) -> Vec<(usize, usize, usize)> {
        let (nt, ns) = (self.tu.dim(), self.su.dim());
        let mut v = Vec::new();
        for i in 0..nt {
            for a in 0..ns {
                for b in 0..ns {
                    v.push((i, a, b));
                }
            }
        }
        v
    }
}

/// Monolithic assembly on `2^level` elements per direction; `p + 1` Gauss
/// points per element in time, `p + 1` (identity) or `p + 2` (annulus) in
/// space, which makes the annulus mass integrand exact.
pub fn monolithic(
    geo: OracleGeo,
    p: usize,
    level: u32,
    tilde: bool,
    obs: &[(f64, f64)],
    alpha: f64,
    kappa: f64,
) -> Monolithic {
    let sp = OracleSpaces::new(p, level, tilde);
    let yi = sp.y_indices();
    let ui = sp.u_indices();
    let (ny, nu) = (yi.len(), ui.len());
    let ne = 1usize << level;
    let h = 1.0 / ne as f64;
    let nq = p + 1;
    let mut l = DMatrix::zeros(nu, ny);
    let mut m = DMatrix::zeros(nu, nu);
    let mut mq = DMatrix::zeros(ny, ny);
    let mut c = DMatrix::zeros(ny, ny);
    let mut b = DMatrix::zeros(ny, ny);
    let mut gram = DMatrix::zeros(ny, ny);

    // time points over the whole interval, and the observation subset
    let t_pts: Vec<(f64, f64)> = (0..ne).flat_map(|e| gauss_on(e as f64 * h, (e + 1) as f64 * h, nq)).collect();
    let mut o_pts = Vec::new();
    for &(a, bb) in obs {
        // split observation windows at knots
        let mut cuts = vec![a, bb];
        for e in 1..ne {
            let k = e as f64 * h;
            if k > a && k < bb {
                cuts.push(k);
            }
        }
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            o_pts.extend(gauss_on(w[0], w[1], nq));
        }
    }
    let nqs = match geo {
        OracleGeo::Identity => p + 1,
        OracleGeo::Annulus => p + 2,
    };
    let s_pts: Vec<(f64, f64)> = (0..ne).flat_map(|e| gauss_on(e as f64 * h, (e + 1) as f64 * h, nqs)).collect();

    for &(u, wu) in &s_pts {
        for &(v, wv) in &s_pts {
            let gp = geo.eval(u, v);
            let wx = wu * wv * gp.jac.determinant().abs();
            // spatial Y values and Laplacians, spatial U values
            let (nyu, dyu, ddyu) = (sp.sy.all(u, 0), sp.sy.all(u, 1), sp.sy.all(u, 2));
            let (nyv, dyv, ddyv) = (sp.sy.all(v, 0), sp.sy.all(v, 1), sp.sy.all(v, 2));
            let (nuu, nuv) = (sp.su.all(u, 0), sp.su.all(v, 0));
            let ns = sp.sy.dim();
            let mut yval = vec![0.0; ns * ns];
            let mut ylap = vec![0.0; ns * ns];
            for a in 0..ns {
                for bb in 0..ns {
                    let g = [dyu[a] * nyv[bb], nyu[a] * dyv[bb]];
                    let hm = Matrix2::new(ddyu[a] * nyv[bb], dyu[a] * dyv[bb], dyu[a] * dyv[bb], nyu[a] * ddyv[bb]);
                    yval[a * ns + bb] = nyu[a] * nyv[bb];
                    ylap[a * ns + bb] = physical(&gp, g, hm).1;
                }
            }
            let nsu = sp.su.dim();
            for &(t, wt) in &t_pts {
                let w = wx * wt;
                let (ty, dty) = (sp.ty.all(t, 0), sp.ty.all(t, 1));
                let tu = sp.tu.all(t, 0);
                let yv: Vec<f64> = yi.iter().map(|&(i, a, bb)| ty[i] * yval[a * ns + bb]).collect();
                let yt: Vec<f64> = yi.iter().map(|&(i, a, bb)| dty[i] * yval[a * ns + bb]).collect();
                let yl: Vec<f64> = yi.iter().map(|&(i, a, bb)| ty[i] * ylap[a * ns + bb]).collect();
                let uv: Vec<f64> = ui.iter().map(|&(i, a, bb)| tu[i] * nuu[a] * nuv[bb]).collect();
                for r in 0..nu {
                    if uv[r] == 0.0 {
                        continue;
                    }
                    for s in 0..ny {
                        l[(r, s)] += w * uv[r] * (yt[s] - kappa * yl[s]);
                    }
                    for s in 0..nu {
                        m[(r, s)] += w * uv[r] * uv[s];
                    }
                }
                for r in 0..ny {
                    for s in 0..ny {
                        c[(r, s)] += w * yt[r] * yt[s];
                        b[(r, s)] += w * yl[r] * yl[s];
                        gram[(r, s)] += w * (yt[r] - kappa * yl[r]) * (yt[s] - kappa * yl[s]);
                    }
                }
                let _ = (yv, nsu);
            }
            for &(t, wt) in &o_pts {
                let w = wx * wt;
                let ty = sp.ty.all(t, 0);
                let yv: Vec<f64> = yi.iter().map(|&(i, a, bb)| ty[i] * yval[a * ns + bb]).collect();
                for r in 0..ny {
                    for s in 0..ny {
                        mq[(r, s)] += w * yv[r] * yv[s];
                    }
                }
            }
        }
    }
    let p_mat = &mq + (&c + &b * (kappa * kappa)) * alpha;
    Monolithic {
        l,
        m,
        mq,
        p: p_mat,
        gram,
        c,
        b,
    }
}

/// Dense matrix of a library operator.
pub fn dense_of(op: &dyn stocp::linalg::LinearOperator) -> DMatrix<f64> {
    let d = op.to_dense();
    DMatrix::from_fn(op.nrows(), op.ncols(), |i, j| d[i][j])
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).abs().max()
}

/// Eigenvalues of the pencil `(a, b)` for symmetric `a` and SPD `b`.
pub fn pencil_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let l = b.clone().cholesky().expect("SPD pencil matrix").l();
    let li = l.try_inverse().expect("regular factor");
    let c = &li * a * li.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Dense `(L^T M^{-1} L, C + kappa^2 B)` eigenvalues of a discretization.
pub fn schur_part_eigenvalues(disc: &stocp::assembly::Discretization, kappa: f64) -> Vec<f64> {
    let ops = disc.operators(1.0, kappa).expect("operators");
    let l = dense_of(&ops.l);
    let m = dense_of(&ops.m);
    let x = m.cholesky().expect("SPD mass").solve(&l);
    let ltl = l.transpose() * x;
    let ltl = (&ltl + ltl.transpose()) * 0.5;
    let ref_ = dense_of(&ops.c) + dense_of(&ops.b) * (kappa * kappa);
    pencil_eigenvalues(&ltl, &ref_)
}

/// Spectral condition number `max |mu| / min |mu|` of `B^{-1} A` from the
/// dense KKT matrix and the dense action of the preconditioner inverse.
pub fn dense_preconditioned_condition(sys: &stocp::kkt::KktSystem) -> f64 {
    let a = dense_of(&sys.operator);
    let binv = dense_of(&sys.preconditioner);
    let binv = (&binv + binv.transpose()) * 0.5;
    let g = binv.cholesky().expect("SPD preconditioner").l();
    let c = g.transpose() * a * &g;
    let c = (&c + c.transpose()) * 0.5;
    let ev = c.symmetric_eigenvalues();
    let abs: Vec<f64> = ev.iter().map(|v| v.abs()).collect();
    let hi = abs.iter().cloned().fold(0.0, f64::max);
    let lo = abs.iter().cloned().fold(f64::MAX, f64::min);
    hi / lo
}
