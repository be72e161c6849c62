mod common;

use common::{dense_of, gauss_on, max_abs_diff, monolithic, NaiveSpline, OracleGeo};
use stocp::assembly::{
    assemble_spatial, assemble_univariate, ynorm_gram, ControlSpace, Discretization, ObservationSpec, SpatialForm,
    Spaces, TensorSpace,
};
use stocp::geometry::GeometryMap;
use stocp::linalg::{CsrMatrix, LinearOperator};
use stocp::spline::SplineSpace;

fn disc(geo: OracleGeo, p: usize, level: u32, control: ControlSpace, obs: ObservationSpec) -> Discretization {
    Discretization::new(geo.library(), p, level, control, obs).unwrap()
}

/// Kronecker-composed operators against point-by-point space-time assembly.
fn check_against_monolithic(geo: OracleGeo, p: usize, control: ControlSpace, obs: ObservationSpec) {
    let (alpha, kappa) = (1e-3, 1e-2);
    let d = disc(geo, p, 1, control, obs.clone());
    let ops = d.operators(alpha, kappa).unwrap();
    let o = monolithic(geo, p, 1, control == ControlSpace::Tilde, obs.intervals(), alpha, kappa);
    let pairs = [
        ("L", dense_of(&ops.l), &o.l),
        ("M", dense_of(&ops.m), &o.m),
        ("Mq", dense_of(&ops.mq), &o.mq),
        ("P", dense_of(&ops.p), &o.p),
        ("C", dense_of(&ops.c), &o.c),
        ("B", dense_of(&ops.b), &o.b),
        ("N", dense_of(&ynorm_gram(&d.time, &d.space, kappa)), &o.gram),
    ];
    for (name, lib, oracle) in pairs {
        let scale = oracle.abs().max().max(1.0);
        let err = max_abs_diff(&lib, oracle);
        // N uses integration by parts in space, exact only for exact quadrature
        let tol = match (name, geo) {
            ("N", OracleGeo::Annulus) => 1e-6,
            _ => 1e-11,
        };
        assert!(err <= tol * scale, "{name}: {geo:?} p={p} {control:?} err {err:e}");
    }
}

#[test]
fn monolithic_annulus_benchmark_observation() {
    check_against_monolithic(OracleGeo::Annulus, 2, ControlSpace::Paper, ObservationSpec::benchmark());
}

#[test]
fn monolithic_annulus_tilde_full_observation() {
    check_against_monolithic(OracleGeo::Annulus, 2, ControlSpace::Tilde, ObservationSpec::full(1.0));
}

#[test]
fn monolithic_identity_cubic() {
    check_against_monolithic(OracleGeo::Identity, 3, ControlSpace::Paper, ObservationSpec::benchmark());
}

#[test]
fn hat_function_mass() {
    let s = SplineSpace::uniform(1, 0, 0).unwrap();
    let m = assemble_univariate(&s, &s, 0, 0, None).unwrap().to_dense();
    let want = [[1.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 3.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((m[i][j] - want[i][j]).abs() < 1e-15);
        }
    }
}

#[test]
fn subdomain_extremes() {
    let s = SplineSpace::uniform(2, 1, 2).unwrap();
    let full = assemble_univariate(&s, &s, 1, 0, None).unwrap();
    let whole = assemble_univariate(&s, &s, 1, 0, Some(&[(0.0, 1.0)])).unwrap();
    assert!(CsrMatrix::linear_combination(&[(1.0, &full), (-1.0, &whole)]).max_abs() < 1e-15);
    let empty = assemble_univariate(&s, &s, 1, 0, Some(&[])).unwrap();
    assert_eq!(empty.max_abs(), 0.0);
}

#[test]
fn unaligned_window_is_integrated_exactly() {
    // window (0.3, 0.45) cuts through a knot span at level 1
    let s = SplineSpace::uniform(2, 1, 1).unwrap();
    let lib = assemble_univariate(&s, &s, 0, 0, Some(&[(0.3, 0.45)])).unwrap().to_dense();
    let n = NaiveSpline::uniform(2, 1, 1);
    for i in 0..n.dim() {
        for j in 0..n.dim() {
            let v: f64 = gauss_on(0.3, 0.45, 4).iter().map(|&(t, w)| w * n.eval(i, t, 0) * n.eval(j, t, 0)).sum();
            assert!((lib[i][j] - v).abs() < 1e-15);
        }
    }
}

#[test]
fn annulus_mass_matches_high_order_quadrature() {
    let s = SplineSpace::uniform(2, 1, 1).unwrap();
    let ts = TensorSpace::new(s.clone(), s);
    let m = assemble_spatial(&GeometryMap::quarter_annulus(), &ts, &ts, SpatialForm::Mass).unwrap().to_dense();
    let n = NaiveSpline::uniform(2, 1, 1);
    let nd = n.dim();
    // 8 points per span, well above the degree of the polynomial integrand
    let pts: Vec<_> = [(0.0, 0.5), (0.5, 1.0)].iter().flat_map(|&(a, b)| {
        let h = (b - a) / 2.0;
        gauss_on(a, a + h, 4).into_iter().chain(gauss_on(a + h, b, 4))
    }).collect();
    let mut o = vec![vec![0.0; nd * nd]; nd * nd];
    for &(u, wu) in &pts {
        for &(v, wv) in &pts {
            let g = OracleGeo::Annulus.eval(u, v);
            let w = wu * wv * g.jac.determinant().abs();
            let (a, b) = (n.all(u, 0), n.all(v, 0));
            for i in 0..nd * nd {
                for j in 0..nd * nd {
                    o[i][j] += w * a[i / nd] * b[i % nd] * a[j / nd] * b[j % nd];
                }
            }
        }
    }
    for i in 0..nd * nd {
        for j in 0..nd * nd {
            assert!((o[i][j] - m[i][j]).abs() < 1e-10, "({i},{j})");
        }
    }
}

#[test]
fn full_observation_mass_is_plain_mass() {
    let d = disc(OracleGeo::Annulus, 2, 2, ControlSpace::Paper, ObservationSpec::full(1.0));
    let ops = d.operators(1e-3, 1e-2).unwrap();
    let mut r = common::rng(3);
    for _ in 0..20 {
        let v = common::random_vec(&mut r, ops.mq.ncols());
        let a = ops.mq.apply_vec(&v);
        let b = CsrMatrix::kron(&d.time.mass, &d.space.mass).matvec(&v);
        assert!(common::rel_err(&a, &b) < 1e-13);
    }
}

#[test]
fn zero_diffusion_limits() {
    let d = disc(OracleGeo::Annulus, 2, 1, ControlSpace::Paper, ObservationSpec::benchmark());
    let ops = d.operators(1e-3, 0.0).unwrap();
    let l = dense_of(&ops.l);
    let dg = common::dense_of(&CsrMatrix::kron(&d.time.deriv_yu, &d.space.mass_yu));
    assert_eq!(max_abs_diff(&l, &dg), 0.0);
    let n = dense_of(&ynorm_gram(&d.time, &d.space, 0.0));
    assert!(max_abs_diff(&n, &dense_of(&ops.c)) < 1e-15);
}

#[test]
fn gram_equals_direct_quadrature() {
    let (p, kappa) = (2, 0.7);
    let d = disc(OracleGeo::Identity, p, 1, ControlSpace::Paper, ObservationSpec::benchmark());
    let o = monolithic(OracleGeo::Identity, p, 1, false, &[], 1.0, kappa);
    let n = ynorm_gram(&d.time, &d.space, kappa);
    let mut r = common::rng(8);
    let y = common::random_vec(&mut r, n.nrows());
    let lib: f64 = y.iter().zip(n.apply_vec(&y)).map(|(a, b)| a * b).sum();
    let yv = nalgebra::DVector::from_vec(y);
    let direct = (yv.transpose() * &o.gram * &yv)[(0, 0)];
    assert!((lib - direct).abs() < 1e-10 * direct.abs());
}

#[test]
fn dof_counts_at_level_seven() {
    // 2 113 536 state unknowns; control 257 in time by 147 456 in space
    let s = Spaces::new(2, 7, ControlSpace::Paper).unwrap();
    assert_eq!(s.dim_y(), 2_113_536);
    assert_eq!(s.n_time_u(), 257);
    assert_eq!(s.n_space_u(), 147_456);
    assert_eq!(s.dim_u(), 257 * 147_456);
}
