use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;

use super::knots::KnotVector;
use super::quad::QuadRule;

/// Univariate B-spline space `S_{p,k}(Z)` on an open knot vector.
#[derive(Debug)]
pub struct SplineSpace {
    knots: KnotVector,
    table: OnceLock<Arc<BasisTable>>,
}

impl Clone for SplineSpace {
    fn clone(&self) -> Self {
        Self::from_knot_vector(self.knots.clone())
    }
}

impl PartialEq for SplineSpace {
    fn eq(&self, other: &Self) -> bool {
        self.knots == other.knots
    }
}

impl SplineSpace {
    /// `S_{p,k}(Z)`; fails for `k` outside `[-1, p)` or non-increasing `Z`.
    pub fn new(degree: usize, smoothness: i32, breaks: &[f64]) -> Result<Self> {
        Ok(Self::from_knot_vector(KnotVector::new(degree, smoothness, breaks)?))
    }

    pub fn from_knot_vector(knots: KnotVector) -> Self {
        Self {
            knots,
            table: OnceLock::new(),
        }
    }

    /// `S_{p,k}` on `[0,1]` with `2^level` uniform elements.
    pub fn uniform(degree: usize, smoothness: i32, level: u32) -> Result<Self> {
        let n = 1usize << level;
        Self::new(degree, smoothness, &super::uniform_breaks(0.0, 1.0, n))
    }

    pub fn knot_vector(&self) -> &KnotVector {
        &self.knots
    }

    pub fn degree(&self) -> usize {
        self.knots.degree()
    }

    pub fn smoothness(&self) -> i32 {
        self.knots.smoothness()
    }

    pub fn dim(&self) -> usize {
        self.knots.dim()
    }

    pub fn breaks(&self) -> &[f64] {
        self.knots.breaks()
    }

    pub fn num_elements(&self) -> usize {
        self.knots.num_elements()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.knots.domain()
    }

    /// Values (or `r`-th derivatives) of the `p+1` basis functions that may
    /// be nonzero at `x`, together with the index of the first one.
    pub fn eval_basis(&self, x: f64, r: usize) -> Result<(usize, Vec<f64>)> {
        if r > self.degree() {
            return Err(Error::InvalidSpline(format!(
                "derivative order {r} exceeds degree {}",
                self.degree()
            )));
        }
        let (first, ders) = self.eval_ders(x, r)?;
        let p1 = self.degree() + 1;
        Ok((first, ders[r * p1..(r + 1) * p1].to_vec()))
    }

    /// All derivatives `0..=n` of the nonzero basis functions at `x`, flat
    /// row-major `[(n+1) x (p+1)]`. Orders above `p` are zero.
    pub fn eval_ders(&self, x: f64, n: usize) -> Result<(usize, Vec<f64>)> {
        let span = self.knots.find_span(x)?;
        let p = self.degree();
        let mut out = vec![0.0; (n + 1) * (p + 1)];
        basis_ders(self.knots.knots(), p, span, x, n, &mut out);
        Ok((span - p, out))
    }

    /// Same space with every knot span halved.
    pub fn uniform_refine(&self) -> Self {
        let breaks = self.knots.refined_breaks();
        let kv = KnotVector::new(self.degree(), self.smoothness(), &breaks)
            .expect("refinement of a valid knot vector is valid");
        Self::from_knot_vector(kv)
    }

    /// Basis tabulated on the `p+1`-point Gauss rule over the breakpoints,
    /// derivatives up to order 2. Built once and shared.
    pub fn default_table(&self) -> Arc<BasisTable> {
        self.table
            .get_or_init(|| {
                let q = QuadRule::gauss(self.breaks(), self.degree() + 1, &[])
                    .expect("breakpoints validated at construction");
                Arc::new(BasisTable::new(self, &q, 2))
            })
            .clone()
    }

    /// Two-scale matrix `T` (`fine.dim() x self.dim()`): a coarse spline with
    /// coefficients `c` equals the fine spline with coefficients `T c`.
    pub fn knot_insertion_matrix(&self, fine: &SplineSpace) -> Result<CsrMatrix> {
        knot_insertion_matrix(self, fine)
    }
}

/// Cox–de Boor evaluation of all nonzero basis functions and their
/// derivatives on knot span `span` (Piegl–Tiller A2.3).
pub(crate) fn basis_ders(knots: &[f64], p: usize, span: usize, x: f64, n: usize, out: &mut [f64]) {
    let p1 = p + 1;
    let mut ndu = vec![0.0; p1 * p1];
    let mut left = vec![0.0; p1];
    let mut right = vec![0.0; p1];
    ndu[0] = 1.0;
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            // lower triangle holds knot differences
            ndu[j * p1 + r] = right[r + 1] + left[j - r];
            let temp = ndu[r * p1 + j - 1] / ndu[j * p1 + r];
            ndu[r * p1 + j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j * p1 + j] = saved;
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..=p {
        out[j] = ndu[j * p1 + p];
    }
    let nmax = n.min(p);
    if nmax == 0 {
        return;
    }
    let mut a = vec![0.0; 2 * p1];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a.iter_mut().for_each(|v| *v = 0.0);
        a[0] = 1.0;
        for k in 1..=nmax {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                let rk = rk as usize;
                a[s2 * p1] = a[s1 * p1] / ndu[(pk + 1) * p1 + rk];
                d = a[s2 * p1] * ndu[rk * p1 + pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2 * p1 + j] = (a[s1 * p1 + j] - a[s1 * p1 + j - 1]) / ndu[(pk + 1) * p1 + idx];
                d += a[s2 * p1 + j] * ndu[idx * p1 + pk];
            }
            if r <= pk {
                a[s2 * p1 + k] = -a[s1 * p1 + k - 1] / ndu[(pk + 1) * p1 + r];
                d += a[s2 * p1 + k] * ndu[r * p1 + pk];
            }
            out[k * p1 + r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut fac = p as f64;
    for k in 1..=nmax {
        for j in 0..=p {
            out[k * p1 + j] *= fac;
        }
        fac *= (p - k) as f64;
    }
}

/// Basis values and derivatives tabulated on every point of a [`QuadRule`].
#[derive(Debug, Clone)]
pub struct BasisTable {
    degree: usize,
    nders: usize,
    n_points: usize,
    firsts: Vec<usize>,
    points: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl BasisTable {
    /// Tabulate `space` on the cells of `quad`; each cell must lie inside a
    /// single knot span.
    pub fn new(space: &SplineSpace, quad: &QuadRule, nders: usize) -> Self {
        let p = space.degree();
        let np = quad.n_points();
        let stride = (nders + 1) * (p + 1);
        let ncell = quad.cells().len();
        let mut firsts = Vec::with_capacity(ncell);
        let mut points = Vec::with_capacity(ncell * np);
        let mut weights = Vec::with_capacity(ncell * np);
        let mut values = vec![0.0; ncell * np * stride];
        let knots = space.knot_vector().knots();
        for (c, cell) in quad.cells().iter().enumerate() {
            let span = space
                .knot_vector()
                .find_span(0.5 * (cell.lo + cell.hi))
                .expect("quadrature cell inside the spline domain");
            firsts.push(span - p);
            for (q, (&x, &w)) in cell.points.iter().zip(&cell.weights).enumerate() {
                points.push(x);
                weights.push(w);
                let off = (c * np + q) * stride;
                basis_ders(knots, p, span, x, nders, &mut values[off..off + stride]);
            }
        }
        Self {
            degree: p,
            nders,
            n_points: np,
            firsts,
            points,
            weights,
            values,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.firsts.len()
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Index of the first nonzero basis function on `cell`.
    pub fn first(&self, cell: usize) -> usize {
        self.firsts[cell]
    }

    pub fn point(&self, cell: usize, q: usize) -> f64 {
        self.points[cell * self.n_points + q]
    }

    pub fn weight(&self, cell: usize, q: usize) -> f64 {
        self.weights[cell * self.n_points + q]
    }

    /// Derivative of order `der` of local function `a` at point `q` of `cell`.
    #[inline]
    pub fn value(&self, cell: usize, q: usize, der: usize, a: usize) -> f64 {
        let p1 = self.degree + 1;
        let stride = (self.nders + 1) * p1;
        self.values[(cell * self.n_points + q) * stride + der * p1 + a]
    }
}

fn knot_insertion_matrix(coarse: &SplineSpace, fine: &SplineSpace) -> Result<CsrMatrix> {
    let p = coarse.degree();
    if fine.degree() != p {
        return Err(Error::NotNested(format!(
            "degrees differ ({p} vs {})",
            fine.degree()
        )));
    }
    let ck = coarse.knot_vector().knots();
    let fk = fine.knot_vector().knots();
    if ck.first() != fk.first() || ck.last() != fk.last() {
        return Err(Error::NotNested("domains differ".into()));
    }
    // multiset difference fine \ coarse; every coarse knot must appear in fine
    let mut extra = Vec::new();
    let (mut i, mut j) = (0, 0);
    while j < fk.len() {
        if i < ck.len() && ck[i] == fk[j] {
            i += 1;
            j += 1;
        } else if i < ck.len() && ck[i] < fk[j] {
            return Err(Error::NotNested(format!("coarse knot {} missing from fine", ck[i])));
        } else {
            extra.push(fk[j]);
            j += 1;
        }
    }
    if i < ck.len() {
        return Err(Error::NotNested(format!("coarse knot {} missing from fine", ck[i])));
    }

    // Boehm insertion applied to the identity: rows are fine functions,
    // columns coarse functions.
    let nc = coarse.dim();
    let mut knots = ck.to_vec();
    let mut rows: Vec<Vec<f64>> = (0..nc)
        .map(|r| {
            let mut e = vec![0.0; nc];
            e[r] = 1.0;
            e
        })
        .collect();
    for &u in &extra {
        let kv = KnotVector::from_knots(p, knots.clone())
            .map_err(|e| Error::NotNested(e.to_string()))?;
        let k = kv.find_span(u)?;
        let n = rows.len();
        let mut new_rows = Vec::with_capacity(n + 1);
        for r in 0..=n {
            if r + p <= k {
                new_rows.push(rows[r].clone());
            } else if r >= k + 1 {
                new_rows.push(rows[r - 1].clone());
            } else {
                let a = (u - knots[r]) / (knots[r + p] - knots[r]);
                let row: Vec<f64> = rows[r]
                    .iter()
                    .zip(&rows[r - 1])
                    .map(|(&x, &y)| a * x + (1.0 - a) * y)
                    .collect();
                new_rows.push(row);
            }
        }
        rows = new_rows;
        let pos = knots.partition_point(|&t| t <= u);
        knots.insert(pos, u);
    }
    debug_assert_eq!(rows.len(), fine.dim());
    let mut trip = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v != 0.0 {
                trip.push((r, c, v));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(fine.dim(), nc, trip))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_quadratic_span_is_bernstein() {
        let s = SplineSpace::new(2, 1, &[0.0, 1.0]).unwrap();
        let (first, v) = s.eval_basis(0.5, 0).unwrap();
        assert_eq!(first, 0);
        for (a, b) in v.iter().zip([0.25, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = SplineSpace::uniform(3, 1, 3).unwrap();
        let h = 1e-6;
        for &x in &[0.1, 0.33, 0.52, 0.97] {
            let (f0, d) = s.eval_ders(x, 2).unwrap();
            let (fp, vp) = s.eval_ders(x + h, 1).unwrap();
            let (fm, vm) = s.eval_ders(x - h, 1).unwrap();
            assert_eq!(f0, fp);
            assert_eq!(f0, fm);
            for a in 0..4 {
                let fd1 = (vp[a] - vm[a]) / (2.0 * h);
                assert!((fd1 - d[4 + a]).abs() < 1e-6, "first derivative");
                let fd2 = (vp[4 + a] - vm[4 + a]) / (2.0 * h);
                assert!((fd2 - d[8 + a]).abs() < 1e-5, "second derivative");
            }
        }
    }

    #[test]
    fn refinement_preserves_degree_and_smoothness() {
        let s = SplineSpace::uniform(2, 1, 0).unwrap();
        let f = s.uniform_refine();
        assert_eq!(f.num_elements(), 2);
        assert_eq!(f.dim(), 4);
        assert_eq!(f.degree(), 2);
        assert_eq!(f.smoothness(), 1);
        let twice = f.uniform_refine();
        assert_eq!(twice, SplineSpace::uniform(2, 1, 2).unwrap());
    }

    #[test]
    fn insertion_matrix_identity_and_constants() {
        let s = SplineSpace::uniform(3, 2, 2).unwrap();
        let t = s.knot_insertion_matrix(&s).unwrap();
        let d = t.to_dense();
        for i in 0..s.dim() {
            for j in 0..s.dim() {
                assert_eq!(d[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        let fine = s.uniform_refine();
        let t = s.knot_insertion_matrix(&fine).unwrap();
        let ones = t.matvec(&vec![1.0; s.dim()]);
        assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn insertion_matrix_reproduces_random_spline() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, k) in [(2usize, 1i32), (3, 1), (2, -1), (4, 3)] {
            let coarse = SplineSpace::uniform(p, k, 2).unwrap();
            let fine = coarse.uniform_refine().uniform_refine();
            let t = coarse.knot_insertion_matrix(&fine).unwrap();
            let c: Vec<f64> = (0..coarse.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let cf = t.matvec(&c);
            for i in 0..100 {
                let x = (i as f64 + 0.37) / 100.0;
                let eval = |s: &SplineSpace, coef: &[f64]| {
                    let (f, v) = s.eval_basis(x, 0).unwrap();
                    v.iter().enumerate().map(|(a, b)| b * coef[f + a]).sum::<f64>()
                };
                assert!((eval(&coarse, &c) - eval(&fine, &cf)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn insertion_rejects_non_nested() {
        let a = SplineSpace::uniform(2, 1, 1).unwrap();
        let b = SplineSpace::new(2, 1, &[0.0, 0.3, 1.0]).unwrap();
        assert!(a.knot_insertion_matrix(&b).is_err());
        let c = SplineSpace::uniform(3, 1, 2).unwrap();
        assert!(a.knot_insertion_matrix(&c).is_err());
        let fine = a.uniform_refine();
        assert!(fine.knot_insertion_matrix(&a).is_err());
    }
}
