//! Time and space matrices of the tensor-product discretization and their
//! composition into space-time Kronecker operators.

mod dofmap;
mod spatial;
mod univariate;

use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use dofmap::DofMap;
pub use spatial::{assemble_spatial, assemble_spatial_with, spatial_points, SpatialForm, SpatialQuadrature, TensorSpace};
pub use univariate::{assemble_univariate, ObservationSpec};

use crate::error::{Error, Result};
use crate::geometry::GeometryMap;
use crate::linalg::{CsrMatrix, KronOperator, KronTerm};
use crate::spline::SplineSpace;

/// Final time of the space-time cylinder.
pub const T_END: f64 = 1.0;

/// Which discrete control space to pair with the state space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlSpace {
    /// Degree p with smoothness p-2 in time and p-3 in space: contains
    /// `(d/dt - kappa Laplacian)` of every state on the parameter square.
    Paper,
    /// Same degrees and smoothness as the state space, nothing removed.
    Tilde,
}

impl FromStr for ControlSpace {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Self::Paper),
            "tilde" => Ok(Self::Tilde),
            o => Err(Error::Config(format!("control space must be 'paper' or 'tilde', got '{o}'"))),
        }
    }
}

/// State and control spline spaces on level `level` (2^level elements per
/// direction) with their constraint maps.
#[derive(Clone, Debug)]
pub struct Spaces {
    pub degree: usize,
    pub level: u32,
    pub control: ControlSpace,
    pub time_y: SplineSpace,
    pub time_u: SplineSpace,
    pub space_y: TensorSpace,
    pub space_u: TensorSpace,
    /// initial-value function removed
    pub time_map: DofMap,
    /// Dirichlet functions removed in both directions
    pub space_map: DofMap,
}

impl Spaces {
    pub fn new(degree: usize, level: u32, control: ControlSpace) -> Result<Self> {
        if degree < 2 {
            return Err(Error::Config(format!("degree must be at least 2, got {degree}")));
        }
        let p = degree as i32;
        let y = SplineSpace::uniform(degree, p - 1, level)?;
        let (tu, su) = match control {
            ControlSpace::Paper => (
                SplineSpace::uniform(degree, p - 2, level)?,
                SplineSpace::uniform(degree, p - 3, level)?,
            ),
            ControlSpace::Tilde => (y.clone(), y.clone()),
        };
        let n = y.dim();
        Ok(Self {
            degree,
            level,
            control,
            time_map: DofMap::drop_first(n),
            space_map: DofMap::tensor(&DofMap::drop_ends(n), &DofMap::drop_ends(n)),
            time_y: y.clone(),
            time_u: tu,
            space_y: TensorSpace::new(y.clone(), y),
            space_u: TensorSpace::new(su.clone(), su),
        })
    }

    pub fn n_time_y(&self) -> usize {
        self.time_map.dim()
    }

    pub fn n_space_y(&self) -> usize {
        self.space_map.dim()
    }

    pub fn n_time_u(&self) -> usize {
        self.time_u.dim()
    }

    pub fn n_space_u(&self) -> usize {
        self.space_u.dim()
    }

    /// Reduced state unknowns.
    pub fn dim_y(&self) -> usize {
        self.n_time_y() * self.n_space_y()
    }

    pub fn dim_u(&self) -> usize {
        self.n_time_u() * self.n_space_u()
    }
}

/// Univariate time matrices. The `*_full` variants keep the initial-value
/// function (needed for the lift); the plain ones are reduced.
#[derive(Clone, Debug)]
pub struct TimeMatrices {
    /// `(phi_j, phi_i)`
    pub mass: Arc<CsrMatrix>,
    /// `(phi_j', phi_i')`
    pub stiff: Arc<CsrMatrix>,
    /// `(phi_j', phi_i)`
    pub cross: Arc<CsrMatrix>,
    /// mass restricted to the observation intervals
    pub obs_mass: Arc<CsrMatrix>,
    /// `(mu_j, mu_i)` on the control space
    pub mass_u: Arc<CsrMatrix>,
    /// `(phi_j', mu_i)`
    pub deriv_yu: Arc<CsrMatrix>,
    /// `(phi_j, mu_i)`
    pub mass_yu: Arc<CsrMatrix>,
    pub mass_full: CsrMatrix,
    pub stiff_full: CsrMatrix,
    pub cross_full: CsrMatrix,
    pub obs_mass_full: CsrMatrix,
    pub deriv_yu_full: CsrMatrix,
    pub mass_yu_full: CsrMatrix,
}

impl TimeMatrices {
    pub fn assemble(spaces: &Spaces, obs: &ObservationSpec) -> Result<Self> {
        let (y, u) = (&spaces.time_y, &spaces.time_u);
        let mass_full = assemble_univariate(y, y, 0, 0, None)?;
        let stiff_full = assemble_univariate(y, y, 1, 1, None)?;
        let cross_full = assemble_univariate(y, y, 1, 0, None)?;
        let obs_mass_full = if obs.is_full(T_END) {
            mass_full.clone()
        } else {
            assemble_univariate(y, y, 0, 0, Some(obs.intervals()))?
        };
        let mass_u = assemble_univariate(u, u, 0, 0, None)?;
        let deriv_yu_full = assemble_univariate(y, u, 1, 0, None)?;
        let mass_yu_full = assemble_univariate(y, u, 0, 0, None)?;
        let r = spaces.time_map.retained();
        let all_u: Vec<usize> = (0..u.dim()).collect();
        Ok(Self {
            mass: Arc::new(mass_full.submatrix(r, r)),
            stiff: Arc::new(stiff_full.submatrix(r, r)),
            cross: Arc::new(cross_full.submatrix(r, r)),
            obs_mass: Arc::new(obs_mass_full.submatrix(r, r)),
            mass_u: Arc::new(mass_u),
            deriv_yu: Arc::new(deriv_yu_full.submatrix(&all_u, r)),
            mass_yu: Arc::new(mass_yu_full.submatrix(&all_u, r)),
            mass_full,
            stiff_full,
            cross_full,
            obs_mass_full,
            deriv_yu_full,
            mass_yu_full,
        })
    }
}

/// Spatial matrices on the physical domain; state matrices are Dirichlet
/// reduced.
#[derive(Clone, Debug)]
pub struct SpaceMatrices {
    /// `(phi_j, phi_i)`
    pub mass: Arc<CsrMatrix>,
    /// `(grad phi_j, grad phi_i)`
    pub stiff: Arc<CsrMatrix>,
    /// `(lap phi_j, lap phi_i)`
    pub biharm: Arc<CsrMatrix>,
    /// `(nu_j, nu_i)`
    pub mass_u: Arc<CsrMatrix>,
    /// `(phi_j, nu_i)`
    pub mass_yu: Arc<CsrMatrix>,
    /// `(lap phi_j, nu_i)`
    pub lap_yu: Arc<CsrMatrix>,
    pub quadrature: Arc<SpatialQuadrature>,
}

impl SpaceMatrices {
    pub fn assemble(geo: &GeometryMap, spaces: &Spaces) -> Result<Self> {
        let (y, u) = (&spaces.space_y, &spaces.space_u);
        let sq = SpatialQuadrature::new(
            geo,
            [y.dirs[0].breaks(), y.dirs[1].breaks()],
            spatial_points(geo, spaces.degree),
        )?;
        let r = spaces.space_map.retained();
        let all_u: Vec<usize> = (0..u.dim()).collect();
        let red = |m: CsrMatrix| Arc::new(m.submatrix(r, r));
        let cross = |m: CsrMatrix| Arc::new(m.submatrix(&all_u, r));
        Ok(Self {
            mass: red(assemble_spatial_with(&sq, y, y, SpatialForm::Mass)?),
            stiff: red(assemble_spatial_with(&sq, y, y, SpatialForm::Grad)?),
            biharm: red(assemble_spatial_with(&sq, y, y, SpatialForm::LaplacePair)?),
            mass_u: Arc::new(assemble_spatial_with(&sq, u, u, SpatialForm::Mass)?),
            mass_yu: cross(assemble_spatial_with(&sq, y, u, SpatialForm::Mass)?),
            lap_yu: cross(assemble_spatial_with(&sq, y, u, SpatialForm::LaplaceCross)?),
            quadrature: Arc::new(sq),
        })
    }
}

/// Everything that does not depend on `alpha` and `kappa`.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub geometry: GeometryMap,
    pub spaces: Spaces,
    pub observation: ObservationSpec,
    pub time: TimeMatrices,
    pub space: SpaceMatrices,
}

impl Discretization {
    pub fn new(
        geometry: GeometryMap,
        degree: usize,
        level: u32,
        control: ControlSpace,
        observation: ObservationSpec,
    ) -> Result<Self> {
        let spaces = Spaces::new(degree, level, control)?;
        let time = TimeMatrices::assemble(&spaces, &observation)?;
        let space = SpaceMatrices::assemble(&geometry, &spaces)?;
        Ok(Self {
            geometry,
            spaces,
            observation,
            time,
            space,
        })
    }

    pub fn operators(&self, alpha: f64, kappa: f64) -> Result<SpaceTimeOperators> {
        compose_operators(&self.time, &self.space, alpha, kappa)
    }
}

/// Space-time operators on reduced state and full control unknowns.
#[derive(Clone, Debug)]
pub struct SpaceTimeOperators {
    /// `D_t (x) G_x - kappa G_t (x) A_x`, control rows by state columns
    pub l: KronOperator,
    /// control mass `M_t^U (x) M_x^U`
    pub m: KronOperator,
    /// observed state mass `M_qt (x) M_x`
    pub mq: KronOperator,
    /// `M_t (x) B_x`
    pub b: KronOperator,
    /// `K_t (x) M_x`
    pub c: KronOperator,
    /// `(M_qt + alpha K_t) (x) M_x + alpha kappa^2 M_t (x) B_x`
    pub p: KronOperator,
}

fn check_dims(tm: &TimeMatrices, sm: &SpaceMatrices) -> Result<()> {
    let ok = tm.deriv_yu.ncols() == tm.mass.nrows()
        && tm.deriv_yu.nrows() == tm.mass_u.nrows()
        && sm.lap_yu.ncols() == sm.mass.nrows()
        && sm.lap_yu.nrows() == sm.mass_u.nrows();
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch("time and space matrices do not fit together".into()))
    }
}

pub fn compose_operators(
    tm: &TimeMatrices,
    sm: &SpaceMatrices,
    alpha: f64,
    kappa: f64,
) -> Result<SpaceTimeOperators> {
    check_dims(tm, sm)?;
    let t = |c: f64, a: &Arc<CsrMatrix>, b: &Arc<CsrMatrix>| KronTerm::new(c, a.clone(), b.clone());
    let mut l_terms = vec![t(1.0, &tm.deriv_yu, &sm.mass_yu)];
    if kappa != 0.0 {
        l_terms.push(t(-kappa, &tm.mass_yu, &sm.lap_yu));
    }
    let p_time = Arc::new(CsrMatrix::linear_combination(&[(1.0, &tm.obs_mass), (alpha, &tm.stiff)]));
    Ok(SpaceTimeOperators {
        l: KronOperator::new(l_terms),
        m: KronOperator::new(vec![t(1.0, &tm.mass_u, &sm.mass_u)]),
        mq: KronOperator::new(vec![t(1.0, &tm.obs_mass, &sm.mass)]),
        b: KronOperator::new(vec![t(1.0, &tm.mass, &sm.biharm)]),
        c: KronOperator::new(vec![t(1.0, &tm.stiff, &sm.mass)]),
        p: KronOperator::new(vec![
            t(1.0, &p_time, &sm.mass),
            t(alpha * kappa * kappa, &tm.mass, &sm.biharm),
        ]),
    })
}

/// Gram operator of `y -> || dy/dt - kappa lap y ||^2` on the reduced state
/// space: `C + kappa^2 B + kappa (W + W^T) (x) K_x`.
pub fn ynorm_gram(tm: &TimeMatrices, sm: &SpaceMatrices, kappa: f64) -> KronOperator {
    let sym = Arc::new(CsrMatrix::linear_combination(&[(1.0, &tm.cross), (1.0, &tm.cross.transpose())]));
    KronOperator::new(vec![
        KronTerm::new(1.0, tm.stiff.clone(), sm.mass.clone()),
        KronTerm::new(kappa * kappa, tm.mass.clone(), sm.biharm.clone()),
        KronTerm::new(kappa, sym, sm.stiff.clone()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dof_counts_at_level_seven() {
        let s = Spaces::new(2, 7, ControlSpace::Paper).unwrap();
        assert_eq!(s.n_space_y(), 16_384);
        assert_eq!(s.n_time_y(), 129);
        assert_eq!(s.time_u.dim(), 257);
        assert_eq!(s.space_u.dirs[0].dim(), 384);
        assert_eq!(s.n_space_u(), 147_456);
        assert_eq!(s.dim_y(), 2_113_536);
        assert_eq!(s.dim_u(), 257 * 147_456);
    }

    #[test]
    fn full_observation_equals_mass() {
        let s = Spaces::new(2, 2, ControlSpace::Paper).unwrap();
        let tm = TimeMatrices::assemble(&s, &ObservationSpec::full(T_END)).unwrap();
        let d = CsrMatrix::linear_combination(&[(1.0, &tm.obs_mass), (-1.0, &tm.mass)]).max_abs();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn symmetric_matrices() {
        let d = Discretization::new(
            GeometryMap::quarter_annulus(),
            2,
            2,
            ControlSpace::Paper,
            ObservationSpec::benchmark(),
        )
        .unwrap();
        for m in [&d.space.mass, &d.space.stiff, &d.space.biharm, &d.space.mass_u, &d.time.mass, &d.time.stiff, &d.time.obs_mass] {
            assert!(m.asymmetry() <= 1e-12 * m.max_abs().max(1.0));
        }
    }
}
