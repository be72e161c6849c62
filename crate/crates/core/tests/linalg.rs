mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use stocp::linalg::{
    cg, generalized_eig, lanczos_condition, minres, CsrMatrix, IdentityOperator, KrylovOptions, LinearOperator,
    SparseCholesky,
};

fn opts(tol: f64, max_iter: usize) -> KrylovOptions {
    KrylovOptions {
        tol,
        max_iter,
        ..Default::default()
    }
}

fn random_spd(seed: u64, n: usize) -> DMatrix<f64> {
    let mut r = common::rng(seed);
    let a = DMatrix::from_vec(n, n, common::random_vec(&mut r, n * n));
    &a * a.transpose() + DMatrix::identity(n, n) * (n as f64 * 0.1)
}

fn csr(a: &DMatrix<f64>) -> CsrMatrix {
    let rows: Vec<Vec<f64>> = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
    CsrMatrix::from_dense(&rows)
}

/// Sparse symmetric indefinite saddle point matrix with a banded SPD block.
fn saddle(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
    let mut r = common::rng(seed);
    let mut a = DMatrix::zeros(n + m, n + m);
    for i in 0..n {
        a[(i, i)] = 4.0;
        if i + 1 < n {
            a[(i, i + 1)] = -1.0;
            a[(i + 1, i)] = -1.0;
        }
    }
    for j in 0..m {
        for i in 0..n {
            if (i + j) % 7 == 0 || i == j {
                let v = 0.5 + common::random_vec(&mut r, 1)[0].abs();
                a[(n + j, i)] = v;
                a[(i, n + j)] = v;
            }
        }
    }
    a
}

#[test]
fn minres_trivial_cases() {
    let b = vec![1.0, -2.0, 3.0];
    let (x, rep) = minres(&IdentityOperator(3), &IdentityOperator(3), &b, opts(1e-12, 10)).unwrap();
    assert_eq!(rep.iterations, 1);
    assert!(common::rel_err(&x, &b) < 1e-15);
    let d = CsrMatrix::from_diagonal(&[1.0, -2.0, 3.0]);
    let (x, rep) = minres(&d, &IdentityOperator(3), &[1.0, 1.0, 1.0], opts(1e-12, 10)).unwrap();
    assert!(rep.iterations <= 3);
    assert!(common::rel_err(&x, &[1.0, -0.5, 1.0 / 3.0]) < 1e-12);
}

#[test]
fn minres_matches_dense_solve() {
    for (n, m, seed) in [(60, 20, 1), (150, 50, 2)] {
        let a = saddle(n, m, seed);
        let mut r = common::rng(seed + 10);
        let b = common::random_vec(&mut r, n + m);
        let exact = a.clone().lu().solve(&nalgebra::DVector::from_vec(b.clone())).unwrap();
        let (x, rep) = minres(&csr(&a), &IdentityOperator(n + m), &b, opts(1e-14, 2000)).unwrap();
        assert!(rep.converged);
        assert!(common::rel_err(&x, exact.as_slice()) < 1e-8);
        // an SPD preconditioner must not change the answer
        let pd: Vec<f64> = (0..n + m).map(|i| 1.0 / a[(i, i)].abs().max(1.0)).collect();
        let (x, _) = minres(&csr(&a), &CsrMatrix::from_diagonal(&pd), &b, opts(1e-14, 2000)).unwrap();
        assert!(common::rel_err(&x, exact.as_slice()) < 1e-8);
    }
}

#[test]
fn cg_matches_dense_solve() {
    let a = random_spd(4, 50);
    let mut r = common::rng(5);
    let b = common::random_vec(&mut r, 50);
    let exact = a.clone().cholesky().unwrap().solve(&nalgebra::DVector::from_vec(b.clone()));
    let (x, rep, _) = cg(&csr(&a), &IdentityOperator(50), &b, opts(1e-14, 1000)).unwrap();
    assert!(rep.converged);
    assert!(common::rel_err(&x, exact.as_slice()) < 1e-8);
}

#[test]
fn cg_perfect_preconditioner() {
    let d: Vec<f64> = (1..=10).map(|i| i as f64).collect();
    let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let (_, rep, _) = cg(
        &CsrMatrix::from_diagonal(&d),
        &CsrMatrix::from_diagonal(&inv),
        &[1.0; 10],
        opts(1e-12, 10),
    )
    .unwrap();
    assert_eq!(rep.iterations, 1);
    let (_, rep, _) = cg(&IdentityOperator(4), &IdentityOperator(4), &[1.0; 4], opts(1e-12, 10)).unwrap();
    assert_eq!(rep.iterations, 1);
}

#[test]
fn cholesky_small_examples() {
    let a = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
    let x = SparseCholesky::factor(&a).unwrap().solve(&[1.0, 2.0]);
    assert!((x[0] - 1.0 / 11.0).abs() < 1e-15 && (x[1] - 7.0 / 11.0).abs() < 1e-15);
    let x = SparseCholesky::factor(&CsrMatrix::identity(5)).unwrap().solve(&[1.0, 2.0, 3.0, 4.0, 5.0]);
    assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
}

#[test]
fn cholesky_on_reduced_biharmonic() {
    let d = stocp::assembly::Discretization::new(
        stocp::geometry::GeometryMap::quarter_annulus(),
        2,
        3,
        stocp::assembly::ControlSpace::Paper,
        stocp::assembly::ObservationSpec::benchmark(),
    )
    .unwrap();
    let bx = &d.space.biharm;
    let c = SparseCholesky::factor(bx).unwrap();
    let mut r = common::rng(6);
    let b = common::random_vec(&mut r, bx.nrows());
    let x = c.solve(&b);
    assert!(common::rel_err(&bx.matvec(&x), &b) < 1e-11);
}

#[test]
fn generalized_eigen_examples() {
    let g = generalized_eig(&DMatrix::from_element(1, 1, 3.0), &DMatrix::from_element(1, 1, 4.0)).unwrap();
    assert!((g.eigenvalues[0] - 0.75).abs() < 1e-15);
    assert!((g.eigenvectors[(0, 0)].abs() - 0.5).abs() < 1e-15);
    let m = random_spd(7, 8);
    let g = generalized_eig(&m, &m).unwrap();
    assert!(g.eigenvalues.iter().all(|d| (d - 1.0).abs() < 1e-12));
    let a = random_spd(8, 8);
    let g = generalized_eig(&a, &m).unwrap();
    for j in 0..8 {
        let u = g.eigenvectors.column(j);
        let res = &a * u - &m * u * g.eigenvalues[j];
        assert!(res.norm() < 1e-10);
    }
    let ortho = g.eigenvectors.transpose() * &m * &g.eigenvectors;
    assert!((ortho - DMatrix::identity(8, 8)).abs().max() < 1e-11);
}

#[test]
fn lanczos_scaling_and_dense_pair() {
    let a = random_spd(9, 30);
    let m = random_spd(10, 30);
    let two_a = csr(&(&a * 2.0));
    let a_inv = a.clone().try_inverse().unwrap();
    let est = lanczos_condition(&two_a, &csr(&a_inv), 10, 1).unwrap();
    assert!((est.condition - 1.0).abs() < 1e-10);
    let m_inv = m.clone().try_inverse().unwrap();
    let est = lanczos_condition(&csr(&a), &csr(&m_inv), 30, 1).unwrap();
    let ev = generalized_eig(&a, &m).unwrap().eigenvalues;
    let (lo, hi) = ev.iter().fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!((est.condition / (hi / lo) - 1.0).abs() < 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cholesky_solves_random_spd(seed in any::<u64>(), n in 1usize..40) {
        let a = random_spd(seed, n);
        let mut r = common::rng(seed ^ 1);
        let b = common::random_vec(&mut r, n);
        let x = SparseCholesky::factor(&csr(&a)).unwrap().solve(&b);
        let ax = &a * nalgebra::DVector::from_vec(x);
        prop_assert!(common::rel_err(ax.as_slice(), &b) < 1e-10);
    }

    #[test]
    fn minres_residual_decreases(seed in any::<u64>()) {
        let a = saddle(30, 10, seed);
        let mut r = common::rng(seed);
        let b = common::random_vec(&mut r, 40);
        let (_, rep) = minres(&csr(&a), &IdentityOperator(40), &b, opts(1e-10, 500)).unwrap();
        prop_assert!(rep.converged);
        prop_assert!(rep.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}
