//! Parameter sweeps that regenerate the published tables side by side with
//! the reference values.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use stocp::assembly::{Discretization, ObservationSpec, T_END};
use stocp::kkt::{discretize, KktProblem, ProblemConfig};
use stocp::{Error, Result};

use crate::reference::{lookup, reference_table, ReferenceRow, KEY_COLUMNS};

pub const DEFAULT_MAX_LEVEL: u32 = 4;

const ALPHAS: [f64; 7] = [1e0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
const KAPPAS_ITER: [f64; 5] = [1e1, 1e0, 1e-1, 1e-2, 1e-3];
const KAPPAS_COND: [f64; 3] = [1e1, 1e-1, 1e-3];
const ALPHAS_MG: [f64; 4] = [1e0, 1e-2, 1e-4, 1e-6];
/// (observation, control) columns of the condition tables
const COND_VARIANTS: [(&str, &str); 3] = [("benchmark", "paper"), ("full", "paper"), ("benchmark", "tilde")];

#[allow(clippy::too_many_arguments)]
fn point(
    table: u8,
    level: u32,
    degree: usize,
    alpha: f64,
    kappa: f64,
    formulation: &str,
    control: &str,
    observation: &str,
    backend: &str,
    metric: &str,
) -> ReferenceRow {
    ReferenceRow {
        table,
        level,
        degree,
        alpha,
        kappa,
        formulation: formulation.into(),
        control: control.into(),
        observation: observation.into(),
        backend: backend.into(),
        metric: metric.into(),
        value: f64::NAN,
    }
}

/// Parameter grid of table `id` capped at `max_level`, in output order.
pub fn table_points(id: u8, max_level: u32) -> Result<Vec<ReferenceRow>> {
    let mut pts = Vec::new();
    match id {
        1 => {
            for f in ["3x3", "2x2"] {
                for &a in &ALPHAS {
                    for &k in &KAPPAS_ITER {
                        pts.push(point(1, max_level, 2, a, k, f, "paper", "benchmark", "cholesky", "iterations"));
                    }
                }
            }
        }
        2 => {
            for f in ["3x3", "2x2"] {
                for p in 2..=5 {
                    for l in 2..=max_level {
                        pts.push(point(2, l, p, 1e-3, 1e-2, f, "paper", "benchmark", "cholesky", "iterations"));
                    }
                }
            }
        }
        3 => {
            for (obs, ctrl) in COND_VARIANTS {
                for &a in &ALPHAS {
                    for &k in &KAPPAS_COND {
                        pts.push(point(3, max_level, 2, a, k, "3x3", ctrl, obs, "cholesky", "condition"));
                    }
                }
            }
        }
        4 => {
            for (obs, ctrl) in COND_VARIANTS {
                for p in 2..=5 {
                    for l in [2, 4, 6].into_iter().filter(|&l| l <= max_level) {
                        pts.push(point(4, l, p, 1e-3, 1e-2, "3x3", ctrl, obs, "cholesky", "condition"));
                    }
                }
            }
        }
        5 => {
            for be in ["cholesky", "multigrid"] {
                for l in 2..=max_level {
                    for &a in &ALPHAS_MG {
                        pts.push(point(5, l, 2, a, 1e-2, "3x3", "paper", "benchmark", be, "iterations"));
                    }
                }
            }
        }
        _ => return Err(Error::Config(format!("table id must be 1 to 5, got {id}"))),
    }
    Ok(pts)
}

/// Solver configuration of one grid point.
pub fn point_config(p: &ReferenceRow, seed: u64) -> Result<ProblemConfig> {
    let mut cfg = ProblemConfig {
        level: p.level,
        degree: p.degree,
        alpha: p.alpha,
        kappa: p.kappa,
        seed,
        ..ProblemConfig::default()
    };
    cfg.formulation = p.formulation.parse()?;
    cfg.control = p.control.parse()?;
    cfg.backend = p.backend.parse()?;
    cfg.observation = match p.observation.as_str() {
        "full" => ObservationSpec::full(T_END),
        _ => ObservationSpec::benchmark(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// One computed cell with its published counterpart.
#[derive(Clone, Debug)]
pub struct TableRow {
    pub computed: ReferenceRow,
    pub converged: Option<bool>,
    pub paper: Option<ReferenceRow>,
}

#[derive(Clone, Debug)]
pub struct TableRun {
    pub id: u8,
    pub max_level: u32,
    pub rows: Vec<TableRow>,
    /// set when the sweep stopped early
    pub incomplete: Option<String>,
}

/// Evaluate one grid point on a (possibly shared) discretization.
pub fn evaluate_point(p: &ReferenceRow, disc: Arc<Discretization>, seed: u64) -> Result<(f64, Option<bool>)> {
    let cfg = point_config(p, seed)?;
    let problem = KktProblem::with_discretization(&cfg, disc)?;
    match p.metric.as_str() {
        "iterations" => {
            let (_, report) = problem.solve()?;
            Ok((report.iterations as f64, Some(report.converged)))
        }
        "condition" => Ok((problem.estimate_schur_condition()?.condition, None)),
        m => Err(Error::Config(format!("unknown metric '{m}'"))),
    }
}

fn disc_key(c: &ProblemConfig) -> String {
    format!("{}|{}|{}|{:?}|{:?}", c.geometry, c.level, c.degree, c.control, c.observation)
}

/// Run the sweep; `progress` sees every finished row. Errors stop the sweep
/// and mark the run incomplete.
pub fn run_table(id: u8, max_level: u32, seed: u64, mut progress: impl FnMut(&TableRow)) -> Result<TableRun> {
    let refs = reference_table(id)?;
    let mut run = TableRun {
        id,
        max_level,
        rows: Vec::new(),
        incomplete: None,
    };
    let mut cache: HashMap<String, Arc<Discretization>> = HashMap::new();
    for p in table_points(id, max_level)? {
        let result = point_config(&p, seed).and_then(|cfg| {
            let key = disc_key(&cfg);
            let disc = match cache.get(&key) {
                Some(d) => d.clone(),
                None => {
                    let d = Arc::new(discretize(&cfg)?);
                    cache.clear();
                    cache.insert(key, d.clone());
                    d
                }
            };
            evaluate_point(&p, disc, seed)
        });
        match result {
            Ok((value, converged)) => {
                let computed = ReferenceRow { value, ..p };
                let row = TableRow {
                    paper: lookup(&refs, &computed).cloned(),
                    computed,
                    converged,
                };
                progress(&row);
                run.rows.push(row);
            }
            Err(e) => {
                run.incomplete = Some(format!(
                    "stopped at level {} degree {} alpha {:e} kappa {:e}: {e}",
                    p.level, p.degree, p.alpha, p.kappa
                ));
                break;
            }
        }
    }
    Ok(run)
}

fn fmt_value(metric: &str, v: f64) -> String {
    if metric == "iterations" {
        format!("{}", v as i64)
    } else {
        format!("{v:.4}")
    }
}

pub const CSV_HEADER_EXTRA: [&str; 4] = ["value", "converged", "paper_level", "paper_value"];

/// CSV with one row per grid point; every row carries the full parameter
/// tuple. Comment lines start with `#`.
pub fn to_csv(run: &TableRun, manifest: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# table {} capped at level {}", run.id, run.max_level);
    if let Some(m) = manifest {
        let _ = writeln!(s, "# manifest: {m}");
    }
    let mut header: Vec<&str> = KEY_COLUMNS.to_vec();
    header.extend(CSV_HEADER_EXTRA);
    let _ = writeln!(s, "{}", header.join(","));
    for r in &run.rows {
        let c = &r.computed;
        let (pl, pv) = match &r.paper {
            Some(p) => (p.level.to_string(), fmt_paper(&p.metric, p.value)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{},{},{},{},{},{},{},{},{}",
            c.table,
            c.level,
            c.degree,
            c.alpha,
            c.kappa,
            c.formulation,
            c.control,
            c.observation,
            c.backend,
            c.metric,
            fmt_value(&c.metric, c.value),
            r.converged.map(|b| b.to_string()).unwrap_or_default(),
            pl,
            pv
        );
    }
    if let Some(msg) = &run.incomplete {
        let _ = writeln!(s, "# incomplete: {msg}");
    }
    s
}

fn fmt_paper(metric: &str, v: f64) -> String {
    if metric == "iterations" {
        format!("{}", v as i64)
    } else {
        format!("{v:.2}")
    }
}
