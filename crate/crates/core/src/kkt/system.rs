use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{ControlSpace, Discretization, SpaceTimeOperators};
use crate::error::{Error, Result};
use crate::geometry::GeometryMap;
use crate::linalg::{
    dot, lanczos_condition, minres, Block, BlockOperator, ConditionEstimate, KronOperator, KrylovOptions,
    LinearOperator,
};
use crate::precond::{ApplyMode, BlockDiagPreconditioner, FastDiagOptions, FastDiagSolver, KronCholesky, SmootherSteps};

use super::config::{Formulation, ProblemConfig};
use super::data::{lift_constraint_action, manufacture_desired_state, project_initial_state};

/// Wall-clock seconds per phase.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub assembly: f64,
    pub data: f64,
    pub eigendecomposition: f64,
    pub factorization: f64,
    pub krylov: f64,
    pub condition: f64,
}

/// Resolve a geometry name; `file:<path>` loads a control net.
pub fn resolve_geometry(name: &str) -> Result<GeometryMap> {
    match name.strip_prefix("file:") {
        Some(path) => GeometryMap::load(std::path::Path::new(path)),
        None => GeometryMap::by_name(name),
    }
}

pub fn discretize(config: &ProblemConfig) -> Result<Discretization> {
    config.validate()?;
    Discretization::new(
        resolve_geometry(&config.geometry)?,
        config.degree,
        config.level,
        config.control,
        config.observation.clone(),
    )
}

/// Assembled operators plus benchmark data for one parameter set.
pub struct KktProblem {
    pub config: ProblemConfig,
    pub disc: Arc<Discretization>,
    pub ops: SpaceTimeOperators,
    /// projected initial state, reduced spatial coefficients
    pub y0: Vec<f64>,
    /// reduced part of the desired state; `y_d = lift + yd`
    pub yd: Vec<f64>,
    /// `L (lift)` on the control rows
    pub lift_action: Vec<f64>,
    pub timings: PhaseTimings,
}

impl KktProblem {
    pub fn new(config: &ProblemConfig) -> Result<Self> {
        let t = Instant::now();
        let disc = Arc::new(discretize(config)?);
        let assembly = t.elapsed().as_secs_f64();
        let mut p = Self::with_discretization(config, disc)?;
        p.timings.assembly += assembly;
        Ok(p)
    }

    /// Reuse a discretization; its geometry, degree, level, control space and
    /// observation must match `config`.
    pub fn with_discretization(config: &ProblemConfig, disc: Arc<Discretization>) -> Result<Self> {
        config.validate()?;
        let s = &disc.spaces;
        if s.degree != config.degree
            || s.level != config.level
            || s.control != config.control
            || disc.observation != config.observation
        {
            return Err(Error::Config("discretization does not match the configuration".into()));
        }
        let t = Instant::now();
        let ops = disc.operators(config.alpha, config.kappa)?;
        let assembly = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let y0 = project_initial_state(&disc)?;
        let yd = manufacture_desired_state(&disc, &y0, config.kappa)?;
        let lift_action = lift_constraint_action(&disc, &y0, config.kappa);
        Ok(Self {
            config: config.clone(),
            ops,
            y0,
            yd,
            lift_action,
            timings: PhaseTimings {
                assembly,
                data: t.elapsed().as_secs_f64(),
                ..Default::default()
            },
            disc,
        })
    }

    pub fn dim_y(&self) -> usize {
        self.disc.spaces.dim_y()
    }

    pub fn dim_u(&self) -> usize {
        self.disc.spaces.dim_u()
    }

    fn fastdiag_options(&self) -> FastDiagOptions {
        FastDiagOptions {
            backend: self.config.backend,
            smoother: SmootherSteps {
                pre: self.config.mg_pre,
                post: self.config.mg_post,
                ..SmootherSteps::default()
            },
            mode: ApplyMode::Parallel,
        }
    }

    /// Fast-diagonalization inverse of the state block `P_h`.
    pub fn state_preconditioner(&self) -> Result<FastDiagSolver> {
        let s = &self.disc.spaces;
        FastDiagSolver::build(
            &self.disc.time,
            &self.disc.space,
            self.config.alpha,
            self.config.kappa,
            Some((s.degree, s.degree as i32 - 1, s.level)),
            self.fastdiag_options(),
        )
    }

    /// Exact inverse of the control mass.
    pub fn control_mass_inverse(&self) -> Result<KronCholesky> {
        KronCholesky::new(&self.disc.time.mass_u, &self.disc.space.mass_u)
    }
}

/// Block operator, right-hand side and preconditioner.
pub struct KktSystem {
    pub formulation: Formulation,
    pub operator: BlockOperator,
    pub rhs: Vec<f64>,
    pub preconditioner: BlockDiagPreconditioner,
    pub p_inv: Arc<FastDiagSolver>,
    pub m_inv: Arc<KronCholesky>,
    pub dim_y: usize,
    pub dim_u: usize,
}

fn arc_op(k: &KronOperator) -> Arc<dyn LinearOperator> {
    Arc::new(k.clone())
}

/// Assemble the saddle-point system. Three blocks `(y, u, lambda)`:
/// `[[M_q, 0, L^T], [0, alpha M, M], [L, M, 0]]`; two blocks `(y, lambda)`
/// after eliminating `u = -lambda / alpha`: `[[M_q, L^T], [L, -M / alpha]]`.
pub fn assemble_kkt(problem: &KktProblem) -> Result<(KktSystem, PhaseTimings)> {
    let mut timings = PhaseTimings::default();
    let p_inv = Arc::new(problem.state_preconditioner()?);
    let (eig, fac) = p_inv.setup_seconds();
    timings.eigendecomposition = eig;
    let t = Instant::now();
    let m_inv = Arc::new(problem.control_mass_inverse()?);
    timings.factorization = fac + t.elapsed().as_secs_f64();

    let alpha = problem.config.alpha;
    let (ny, nu) = (problem.dim_y(), problem.dim_u());
    let ops = &problem.ops;
    let (mq, l, m) = (arc_op(&ops.mq), arc_op(&ops.l), arc_op(&ops.m));
    let track = ops.mq.apply_vec(&problem.yd);
    let g: Vec<f64> = problem.lift_action.iter().map(|v| -v).collect();
    let p_dyn: Arc<dyn LinearOperator> = p_inv.clone();
    let (operator, rhs, preconditioner) = match problem.config.formulation {
        Formulation::ThreeByThree => {
            let op = BlockOperator::new(
                vec![ny, nu, nu],
                vec![ny, nu, nu],
                vec![
                    vec![Some(Block::new(mq)), None, Some(Block::transposed(l.clone()))],
                    vec![None, Some(Block::scaled(m.clone(), alpha)), Some(Block::new(m.clone()))],
                    vec![Some(Block::new(l)), Some(Block::new(m)), None],
                ],
            );
            let mut rhs = track;
            rhs.extend(std::iter::repeat_n(0.0, nu));
            rhs.extend(g);
            (op, rhs, BlockDiagPreconditioner::three_by_three(p_dyn, m_inv.clone(), alpha))
        }
        Formulation::TwoByTwo => {
            let op = BlockOperator::new(
                vec![ny, nu],
                vec![ny, nu],
                vec![
                    vec![Some(Block::new(mq)), Some(Block::transposed(l.clone()))],
                    vec![Some(Block::new(l)), Some(Block::scaled(m, -1.0 / alpha))],
                ],
            );
            let mut rhs = track;
            rhs.extend(g);
            (op, rhs, BlockDiagPreconditioner::two_by_two(p_dyn, m_inv.clone(), alpha))
        }
    };
    Ok((
        KktSystem {
            formulation: problem.config.formulation,
            operator,
            rhs,
            preconditioner,
            p_inv,
            m_inv,
            dim_y: ny,
            dim_u: nu,
        },
        timings,
    ))
}

/// Discrete optimal state, control and multiplier.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionFields {
    /// reduced state; the full state is `y + lift`
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    /// initial state carried by the lift
    pub y0: Vec<f64>,
    /// reduced part of the desired state
    pub yd: Vec<f64>,
}

impl SolutionFields {
    /// Full space-time state coefficients, lift included.
    pub fn state_full(&self, disc: &Discretization) -> Vec<f64> {
        let mut full = extend_state(disc, &self.y);
        add_lift(disc, &self.y0, &mut full);
        full
    }

    /// Full coefficients of the desired state.
    pub fn desired_full(&self, disc: &Discretization) -> Vec<f64> {
        let mut full = extend_state(disc, &self.yd);
        add_lift(disc, &self.y0, &mut full);
        full
    }
}

/// Embed a reduced space-time state vector into the full basis.
pub fn extend_state(disc: &Discretization, y: &[f64]) -> Vec<f64> {
    let (tmap, smap) = (&disc.spaces.time_map, &disc.spaces.space_map);
    let (nx, nxf) = (smap.dim(), smap.full_dim());
    let mut full = vec![0.0; tmap.full_dim() * nxf];
    for (i, &ti) in tmap.retained().iter().enumerate() {
        let row = smap.extend(&y[i * nx..(i + 1) * nx]);
        full[ti * nxf..(ti + 1) * nxf].copy_from_slice(&row);
    }
    full
}

fn add_lift(disc: &Discretization, y0: &[f64], full: &mut [f64]) {
    let lift = super::data::build_lift(disc, y0);
    for (f, l) in full.iter_mut().zip(lift) {
        *f += l;
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub tracking: f64,
    pub regularization: f64,
    pub total: f64,
}

/// `J = 1/2 ||y - y_d||^2_{obs} + alpha/2 ||u||^2`.
pub fn evaluate_cost(problem: &KktProblem, y: &[f64], u: &[f64]) -> CostBreakdown {
    let diff: Vec<f64> = y.iter().zip(&problem.yd).map(|(a, b)| a - b).collect();
    let tracking = 0.5 * dot(&diff, &problem.ops.mq.apply_vec(&diff));
    let regularization = 0.5 * problem.config.alpha * dot(u, &problem.ops.m.apply_vec(u));
    CostBreakdown {
        tracking,
        regularization,
        total: tracking + regularization,
    }
}

/// Structured result of one solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub geometry: String,
    pub level: u32,
    pub degree: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub formulation: String,
    pub control: String,
    pub backend: String,
    pub ordering: Option<String>,
    pub dim_y: usize,
    pub dim_u: usize,
    pub total_dofs: usize,
    pub iterations: usize,
    pub converged: bool,
    pub relative_residual: f64,
    pub history: Vec<f64>,
    pub cost: CostBreakdown,
    pub condition: Option<ConditionEstimate>,
    pub timings: PhaseTimings,
}

fn control_name(p: &KktProblem) -> String {
    match p.config.control {
        ControlSpace::Paper => "paper".into(),
        ControlSpace::Tilde => "tilde".into(),
    }
}

impl KktProblem {
    /// Preconditioned MINRES on the assembled system.
    pub fn solve(&self) -> Result<(SolutionFields, SolveReport)> {
        let (sys, setup) = assemble_kkt(self)?;
        let t = Instant::now();
        let (x, kr) = minres(
            &sys.operator,
            &sys.preconditioner,
            &sys.rhs,
            KrylovOptions {
                tol: self.config.tol,
                max_iter: self.config.maxit,
                reference: self.config.residual_reference,
            },
        )?;
        let krylov = t.elapsed().as_secs_f64();
        let (ny, nu) = (sys.dim_y, sys.dim_u);
        let y = x[..ny].to_vec();
        let (u, lambda) = match sys.formulation {
            Formulation::ThreeByThree => (x[ny..ny + nu].to_vec(), x[ny + nu..].to_vec()),
            Formulation::TwoByTwo => {
                let lam = x[ny..].to_vec();
                (lam.iter().map(|v| -v / self.config.alpha).collect(), lam)
            }
        };
        let cost = evaluate_cost(self, &y, &u);
        let fields = SolutionFields {
            y,
            u,
            lambda,
            y0: self.y0.clone(),
            yd: self.yd.clone(),
        };
        let timings = PhaseTimings {
            eigendecomposition: setup.eigendecomposition,
            factorization: setup.factorization,
            krylov,
            ..self.timings.clone()
        };
        let report = SolveReport {
            geometry: self.config.geometry.clone(),
            level: self.config.level,
            degree: self.config.degree,
            alpha: self.config.alpha,
            kappa: self.config.kappa,
            formulation: self.config.formulation.to_string(),
            control: control_name(self),
            backend: format!("{:?}", sys.p_inv.backend()).to_lowercase(),
            ordering: sys.p_inv.ordering().map(str::to_string),
            dim_y: ny,
            dim_u: nu,
            total_dofs: sys.rhs.len(),
            iterations: kr.iterations,
            converged: kr.converged,
            relative_residual: kr.final_relative_residual(),
            history: kr.history,
            cost,
            condition: None,
            timings,
        };
        Ok((fields, report))
    }

    /// Lanczos estimate of the condition number of `P_h^{-1} S_h`.
    pub fn estimate_schur_condition(&self) -> Result<ConditionEstimate> {
        let p_inv = self.state_preconditioner()?;
        let schur = SchurOperator::new(self)?;
        lanczos_condition(&schur, &p_inv, self.config.lanczos_iters, self.config.seed)
    }
}

/// `S_h = M_q + alpha L^T M^{-1} L` applied matrix-free with an exact
/// Kronecker-Cholesky control-mass inverse.
pub struct SchurOperator {
    mq: KronOperator,
    l: KronOperator,
    m_inv: KronCholesky,
    alpha: f64,
}

impl SchurOperator {
    pub fn new(problem: &KktProblem) -> Result<Self> {
        Ok(Self {
            mq: problem.ops.mq.clone(),
            l: problem.ops.l.clone(),
            m_inv: problem.control_mass_inverse()?,
            alpha: problem.config.alpha,
        })
    }
}

impl LinearOperator for SchurOperator {
    fn nrows(&self) -> usize {
        self.mq.nrows()
    }
    fn ncols(&self) -> usize {
        self.mq.ncols()
    }
    fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        self.mq.apply_add(alpha, x, y);
        let w = self.m_inv.solve(&self.l.apply_vec(x));
        self.l.apply_transpose_add(alpha * self.alpha, &w, y);
    }
    fn apply_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        self.apply_add(alpha, x, y)
    }
}

/// Build and solve the problem described by `config`.
pub fn solve(config: &ProblemConfig) -> Result<(SolutionFields, SolveReport)> {
    KktProblem::new(config)?.solve()
}

/// Schur-complement condition estimate for `config`.
pub fn estimate_schur_condition(config: &ProblemConfig) -> Result<ConditionEstimate> {
    KktProblem::new(config)?.estimate_schur_condition()
}
