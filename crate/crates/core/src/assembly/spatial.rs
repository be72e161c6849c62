use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{GeometryMap, MappedPointData};
use crate::linalg::CsrMatrix;
use crate::spline::{BasisTable, QuadRule, SplineSpace};

use super::univariate::merged_breaks;

/// Bivariate tensor-product spline space; index `a * n_v + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorSpace {
    pub dirs: [SplineSpace; 2],
}

impl TensorSpace {
    pub fn new(u: SplineSpace, v: SplineSpace) -> Self {
        Self { dirs: [u, v] }
    }

    pub fn dim(&self) -> usize {
        self.dirs[0].dim() * self.dirs[1].dim()
    }

    pub fn max_degree(&self) -> usize {
        self.dirs[0].degree().max(self.dirs[1].degree())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpatialForm {
    /// `(phi_j, psi_i)`
    Mass,
    /// `(grad phi_j, grad psi_i)`
    Grad,
    /// `(lap phi_j, lap psi_i)`
    LaplacePair,
    /// `(lap phi_j, psi_i)`
    LaplaceCross,
}

/// Tensor Gauss rule on the parameter square with the geometry evaluated
/// at every point. Shared by all spatial matrices of one discretization so
/// that they use identical quadrature.
#[derive(Clone, Debug)]
pub struct SpatialQuadrature {
    rules: [QuadRule; 2],
    geo: Vec<MappedPointData>,
}

impl SpatialQuadrature {
    pub fn new(geo: &GeometryMap, breaks: [&[f64]; 2], n_points: usize) -> Result<Self> {
        let gb = geo.spaces();
        let ru = QuadRule::gauss(&merged_breaks(&[breaks[0], gb[0].breaks()]), n_points, &[])?;
        let rv = QuadRule::gauss(&merged_breaks(&[breaks[1], gb[1].breaks()]), n_points, &[])?;
        let mut pts = Vec::with_capacity(ru.cells().len() * rv.cells().len() * n_points * n_points);
        for cu in ru.cells() {
            for cv in rv.cells() {
                for &u in &cu.points {
                    for &v in &cv.points {
                        pts.push(geo.eval_map(u, v)?);
                    }
                }
            }
        }
        Ok(Self {
            rules: [ru, rv],
            geo: pts,
        })
    }

    pub fn rules(&self) -> &[QuadRule; 2] {
        &self.rules
    }

    fn np(&self) -> usize {
        self.rules[0].n_points()
    }

    #[inline]
    fn data(&self, cu: usize, cv: usize, qu: usize, qv: usize) -> &MappedPointData {
        let np = self.np();
        let ncv = self.rules[1].cells().len();
        &self.geo[((cu * ncv + cv) * np + qu) * np + qv]
    }

    /// `sum w |det J| f(point)` over the physical domain.
    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        let np = self.np();
        let mut s = 0.0;
        for (cu, cellu) in self.rules[0].cells().iter().enumerate() {
            for (cv, cellv) in self.rules[1].cells().iter().enumerate() {
                for qu in 0..np {
                    for qv in 0..np {
                        let d = self.data(cu, cv, qu, qv);
                        s += cellu.weights[qu] * cellv.weights[qv] * d.abs_det() * f(d.point);
                    }
                }
            }
        }
        s
    }
}

/// Physical quantities of the local basis functions at one point.
struct LocalEval {
    values: Vec<f64>,
    grads: Vec<[f64; 2]>,
    laps: Vec<f64>,
}

fn local_eval(
    tabs: &[BasisTable; 2],
    cell: (usize, usize),
    q: (usize, usize),
    d: &MappedPointData,
    need_grad: bool,
    need_lap: bool,
    out: &mut LocalEval,
) {
    let (p0, p1) = (tabs[0].degree() + 1, tabs[1].degree() + 1);
    out.values.clear();
    out.grads.clear();
    out.laps.clear();
    for a in 0..p0 {
        let nu = [
            tabs[0].value(cell.0, q.0, 0, a),
            if need_grad || need_lap { tabs[0].value(cell.0, q.0, 1, a) } else { 0.0 },
            if need_lap { tabs[0].value(cell.0, q.0, 2, a) } else { 0.0 },
        ];
        for b in 0..p1 {
            let nv = [
                tabs[1].value(cell.1, q.1, 0, b),
                if need_grad || need_lap { tabs[1].value(cell.1, q.1, 1, b) } else { 0.0 },
                if need_lap { tabs[1].value(cell.1, q.1, 2, b) } else { 0.0 },
            ];
            out.values.push(nu[0] * nv[0]);
            let gh = [nu[1] * nv[0], nu[0] * nv[1]];
            if need_lap {
                let hh = [[nu[2] * nv[0], nu[1] * nv[1]], [nu[1] * nv[1], nu[0] * nv[2]]];
                let (g, l) = d.physical_laplacian(gh, hh);
                out.grads.push(g);
                out.laps.push(l);
            } else if need_grad {
                out.grads.push(d.physical_gradient(gh));
            }
        }
    }
}

/// Gauss points per direction for basis degree `p`: `p + q` with `q` the
/// largest geometry degree, so mass integrands are exact whenever `det J` is
/// polynomial. Reduces to `p + 1` on affine maps.
pub fn spatial_points(geo: &GeometryMap, p: usize) -> usize {
    let gs = geo.spaces();
    p + gs[0].degree().max(gs[1].degree())
}

/// Element-loop assembly of `[A]_{ij} = form(trial_j, test_i)` with weight
/// `|det grad G|`.
pub fn assemble_spatial(
    geo: &GeometryMap,
    trial: &TensorSpace,
    test: &TensorSpace,
    form: SpatialForm,
) -> Result<CsrMatrix> {
    let n = spatial_points(geo, trial.max_degree().max(test.max_degree()));
    let bu = merged_breaks(&[trial.dirs[0].breaks(), test.dirs[0].breaks()]);
    let bv = merged_breaks(&[trial.dirs[1].breaks(), test.dirs[1].breaks()]);
    let sq = SpatialQuadrature::new(geo, [&bu, &bv], n)?;
    assemble_spatial_with(&sq, trial, test, form)
}

/// As [`assemble_spatial`] on a precomputed quadrature, which must refine
/// the breakpoints of both spaces.
pub fn assemble_spatial_with(
    sq: &SpatialQuadrature,
    trial: &TensorSpace,
    test: &TensorSpace,
    form: SpatialForm,
) -> Result<CsrMatrix> {
    for s in [trial, test] {
        for d in 0..2 {
            if s.dirs[d].domain() != (0.0, 1.0) {
                return Err(Error::DimensionMismatch("spatial spaces must live on [0,1]".into()));
            }
        }
    }
    let tab = |s: &TensorSpace| -> [BasisTable; 2] {
        [
            BasisTable::new(&s.dirs[0], &sq.rules[0], 2),
            BasisTable::new(&s.dirs[1], &sq.rules[1], 2),
        ]
    };
    let (tt, ts) = (tab(trial), tab(test));
    let (trial_grad, trial_lap, test_grad, test_lap) = match form {
        SpatialForm::Mass => (false, false, false, false),
        SpatialForm::Grad => (true, false, true, false),
        SpatialForm::LaplacePair => (false, true, false, true),
        SpatialForm::LaplaceCross => (false, true, false, false),
    };
    let nv_trial = trial.dirs[1].dim();
    let nv_test = test.dirs[1].dim();
    let np = sq.np();
    let ncu = sq.rules[0].cells().len();
    let ncv = sq.rules[1].cells().len();
    let chunks: Vec<Vec<(usize, usize, f64)>> = (0..ncu)
        .into_par_iter()
        .map(|cu| {
            let mut trip = Vec::new();
            let mut et = LocalEval { values: vec![], grads: vec![], laps: vec![] };
            let mut es = LocalEval { values: vec![], grads: vec![], laps: vec![] };
            let nloc_t = (tt[0].degree() + 1) * (tt[1].degree() + 1);
            let nloc_s = (ts[0].degree() + 1) * (ts[1].degree() + 1);
            let mut local = vec![0.0; nloc_s * nloc_t];
            for cv in 0..ncv {
                local.iter_mut().for_each(|x| *x = 0.0);
                for qu in 0..np {
                    for qv in 0..np {
                        let d = sq.data(cu, cv, qu, qv);
                        let w = sq.rules[0].cells()[cu].weights[qu] * sq.rules[1].cells()[cv].weights[qv] * d.abs_det();
                        local_eval(&tt, (cu, cv), (qu, qv), d, trial_grad, trial_lap, &mut et);
                        local_eval(&ts, (cu, cv), (qu, qv), d, test_grad, test_lap, &mut es);
                        for i in 0..nloc_s {
                            let row = &mut local[i * nloc_t..(i + 1) * nloc_t];
                            match form {
                                SpatialForm::Mass => {
                                    let s = w * es.values[i];
                                    for j in 0..nloc_t {
                                        row[j] += s * et.values[j];
                                    }
                                }
                                SpatialForm::Grad => {
                                    let g = es.grads[i];
                                    for j in 0..nloc_t {
                                        row[j] += w * (g[0] * et.grads[j][0] + g[1] * et.grads[j][1]);
                                    }
                                }
                                SpatialForm::LaplacePair => {
                                    let s = w * es.laps[i];
                                    for j in 0..nloc_t {
                                        row[j] += s * et.laps[j];
                                    }
                                }
                                SpatialForm::LaplaceCross => {
                                    let s = w * es.values[i];
                                    for j in 0..nloc_t {
                                        row[j] += s * et.laps[j];
                                    }
                                }
                            }
                        }
                    }
                }
                let (ftu, ftv) = (tt[0].first(cu), tt[1].first(cv));
                let (fsu, fsv) = (ts[0].first(cu), ts[1].first(cv));
                let pt1 = tt[1].degree() + 1;
                let ps1 = ts[1].degree() + 1;
                for i in 0..nloc_s {
                    let gi = (fsu + i / ps1) * nv_test + fsv + i % ps1;
                    for j in 0..nloc_t {
                        let gj = (ftu + j / pt1) * nv_trial + ftv + j % pt1;
                        trip.push((gi, gj, local[i * nloc_t + j]));
                    }
                }
            }
            trip
        })
        .collect();
    let trip: Vec<_> = chunks.into_iter().flatten().collect();
    Ok(CsrMatrix::from_triplets(test.dim(), trial.dim(), trip))
}
