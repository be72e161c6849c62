//! Lazy sums of Kronecker products `sum_k c_k (A_k ⊗ B_k)`.
//!
//! Vectors are laid out time-major: index `i * n_space + j`. A product
//! `(A ⊗ B) v` is computed as `A V B^T` on the `(time x space)` reshaping of
//! `v`, never forming `A ⊗ B`.

use std::sync::Arc;

use rayon::prelude::*;

use super::{CsrMatrix, LinearOperator};

#[derive(Clone, Debug)]
pub struct KronTerm {
    pub coef: f64,
    pub time: Arc<CsrMatrix>,
    pub space: Arc<CsrMatrix>,
    time_t: Arc<CsrMatrix>,
    space_t: Arc<CsrMatrix>,
}

impl KronTerm {
    pub fn new(coef: f64, time: Arc<CsrMatrix>, space: Arc<CsrMatrix>) -> Self {
        let time_t = Arc::new(time.transpose());
        let space_t = Arc::new(space.transpose());
        Self {
            coef,
            time,
            space,
            time_t,
            space_t,
        }
    }

    fn shape(&self) -> (usize, usize) {
        (
            self.time.nrows() * self.space.nrows(),
            self.time.ncols() * self.space.ncols(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct KronOperator {
    nrows: usize,
    ncols: usize,
    terms: Vec<KronTerm>,
}

impl KronOperator {
    pub fn new(terms: Vec<KronTerm>) -> Self {
        assert!(!terms.is_empty(), "empty Kronecker sum");
        let (nrows, ncols) = terms[0].shape();
        for t in &terms {
            assert_eq!(t.shape(), (nrows, ncols), "Kronecker terms have inconsistent shapes");
        }
        Self { nrows, ncols, terms }
    }

    pub fn single(coef: f64, time: CsrMatrix, space: CsrMatrix) -> Self {
        Self::new(vec![KronTerm::new(coef, Arc::new(time), Arc::new(space))])
    }

    pub fn terms(&self) -> &[KronTerm] {
        &self.terms
    }

    /// Append the terms of another operator of the same shape.
    pub fn plus(mut self, other: &KronOperator) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    /// Scale every term.
    pub fn scaled(mut self, s: f64) -> Self {
        for t in &mut self.terms {
            t.coef *= s;
        }
        self
    }

    /// Materialize as a sparse matrix (small problems and test oracles).
    pub fn to_csr(&self) -> CsrMatrix {
        let parts: Vec<CsrMatrix> = self
            .terms
            .iter()
            .map(|t| CsrMatrix::kron(&t.time, &t.space))
            .collect();
        let combo: Vec<(f64, &CsrMatrix)> =
            self.terms.iter().zip(&parts).map(|(t, m)| (t.coef, m)).collect();
        CsrMatrix::linear_combination(&combo)
    }
}

fn kron_apply(
    coef: f64,
    time: &CsrMatrix,
    space: &CsrMatrix,
    x: &[f64],
    y: &mut [f64],
) {
    let (mt, nt) = (time.nrows(), time.ncols());
    let (ms, ns) = (space.nrows(), space.ncols());
    // W = V B^T, one spatial matvec per time row
    let mut w = vec![0.0; nt * ms];
    w.par_chunks_mut(ms)
        .zip(x.par_chunks(ns))
        .for_each(|(wr, xr)| space.matvec_add(1.0, xr, wr));
    // Y += coef * A W
    y.par_chunks_mut(ms).enumerate().for_each(|(i, yr)| {
        let (cols, vals) = time.row(i);
        for (&k, &a) in cols.iter().zip(vals) {
            let s = coef * a;
            let wk = &w[k * ms..(k + 1) * ms];
            for (yv, wv) in yr.iter_mut().zip(wk) {
                *yv += s * wv;
            }
        }
    });
    debug_assert_eq!(y.len(), mt * ms);
}

impl LinearOperator for KronOperator {
    fn nrows(&self) -> usize {
        self.nrows
    }

    fn ncols(&self) -> usize {
        self.ncols
    }

    fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for t in &self.terms {
            kron_apply(alpha * t.coef, &t.time, &t.space, x, y);
        }
    }

    fn apply_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.nrows);
        assert_eq!(y.len(), self.ncols);
        for t in &self.terms {
            kron_apply(alpha * t.coef, &t.time_t, &t.space_t, x, y);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sparse(rng: &mut ChaCha8Rng, m: usize, n: usize) -> CsrMatrix {
        let mut trip = Vec::new();
        for i in 0..m {
            for j in 0..n {
                if rng.random_bool(0.4) {
                    trip.push((i, j, rng.random_range(-1.0..1.0)));
                }
            }
        }
        CsrMatrix::from_triplets(m, n, trip)
    }

    #[test]
    fn matches_dense_kronecker_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let (mt, nt, ms, ns) = (
                rng.random_range(1..=12),
                rng.random_range(1..=12),
                rng.random_range(1..=12),
                rng.random_range(1..=12),
            );
            let a1 = random_sparse(&mut rng, mt, nt);
            let b1 = random_sparse(&mut rng, ms, ns);
            let a2 = random_sparse(&mut rng, mt, nt);
            let b2 = random_sparse(&mut rng, ms, ns);
            let op = KronOperator::single(0.7, a1.clone(), b1.clone())
                .plus(&KronOperator::single(-1.3, a2.clone(), b2.clone()));
            let dense = CsrMatrix::linear_combination(&[
                (0.7, &CsrMatrix::kron(&a1, &b1)),
                (-1.3, &CsrMatrix::kron(&a2, &b2)),
            ]);
            let x: Vec<f64> = (0..nt * ns).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y1 = op.apply_vec(&x);
            let y2 = dense.matvec(&x);
            for (a, b) in y1.iter().zip(&y2) {
                assert!((a - b).abs() < 1e-12);
            }
            let z: Vec<f64> = (0..mt * ms).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut t1 = vec![0.0; nt * ns];
            op.apply_transpose_add(1.0, &z, &mut t1);
            let t2 = dense.transpose().matvec(&z);
            for (a, b) in t1.iter().zip(&t2) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((op.to_csr().to_dense()[0][0] - dense.to_dense()[0][0]).abs() < 1e-14);
        }
    }
}
