use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stocp::kkt::{sample_control, sample_field, KktProblem, ProblemConfig};
use stocp::spline::uniform_breaks;
use stocp::{Error, Result};
use stocp_cli::manifest::RunManifest;
use stocp_cli::tables::{run_table, to_csv, DEFAULT_MAX_LEVEL};
use stocp_cli::vtk::StructuredGrid;

/// Space-time isogeometric solver for tracking-type optimal control of the
/// heat equation. Set RAYON_NUM_THREADS to limit the worker threads.
#[derive(Parser)]
#[command(name = "stocp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and print the report as JSON.
    Solve {
        config: PathBuf,
        /// override a config key, `key=value`
        #[arg(long = "set")]
        set: Vec<String>,
        /// write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        /// also estimate the Schur-complement condition number
        #[arg(long)]
        with_condition: bool,
    },
    /// Regenerate a results table (1 to 5) as CSV next to the published values.
    Table {
        id: u8,
        #[arg(long, default_value_t = DEFAULT_MAX_LEVEL)]
        max_level: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Estimate the condition number of the preconditioned Schur complement.
    Cond {
        config: PathBuf,
        #[arg(long = "set")]
        set: Vec<String>,
    },
    /// Solve and write state, desired state, control and multiplier samples
    /// as a legacy VTK structured grid.
    Export {
        config: PathBuf,
        /// samples in t, u and v, e.g. `11,21,21`
        #[arg(long, value_parser = parse_res)]
        res: [usize; 3],
        #[arg(long, default_value = "field.vtk")]
        out: PathBuf,
        #[arg(long = "set")]
        set: Vec<String>,
    },
}

fn parse_res(s: &str) -> std::result::Result<[usize; 3], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad resolution '{s}'")))
        .collect::<std::result::Result<_, _>>()?;
    match v.as_slice() {
        &[t, x, y] if t >= 1 && x >= 2 && y >= 2 => Ok([t, x, y]),
        _ => Err("resolution must be T,NX,NY with T >= 1 and NX, NY >= 2".into()),
    }
}

fn load_config(path: &Path, set: &[String]) -> Result<ProblemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ProblemConfig::parse(&text)?;
    for kv in set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn json<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))
}

fn points(n: usize) -> Vec<f64> {
    if n == 1 {
        vec![0.0]
    } else {
        uniform_breaks(0.0, 1.0, n - 1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            config,
            set,
            out,
            with_condition,
        } => {
            let cfg = load_config(&config, &set)?;
            let problem = KktProblem::new(&cfg)?;
            let (_, mut report) = problem.solve()?;
            if with_condition {
                report.condition = Some(problem.estimate_schur_condition()?);
            }
            let text = json(&report)?;
            match out {
                Some(p) => {
                    std::fs::write(&p, text + "\n")?;
                    let mut m = RunManifest::new("solve", cfg.seed);
                    m.config = Some(cfg);
                    m.outputs.push(p.display().to_string());
                    m.write(&RunManifest::path_for(&p))?;
                }
                None => println!("{text}"),
            }
            if !report.converged {
                eprintln!("MINRES stopped after {} iterations without converging", report.iterations);
                return Ok(ExitCode::from(2));
            }
        }
        Command::Table {
            id,
            max_level,
            out,
            seed,
        } => {
            let run = run_table(id, max_level, seed, |r| {
                eprintln!(
                    "table {id}: level {} degree {} alpha {:e} kappa {:e} {} {} {} -> {}",
                    r.computed.level,
                    r.computed.degree,
                    r.computed.alpha,
                    r.computed.kappa,
                    r.computed.formulation,
                    r.computed.control,
                    r.computed.backend,
                    r.computed.value
                )
            })?;
            match out {
                Some(p) => {
                    let mpath = RunManifest::path_for(&p);
                    let mname = mpath.file_name().map(|s| s.to_string_lossy().into_owned());
                    std::fs::write(&p, to_csv(&run, mname.as_deref()))?;
                    let mut m = RunManifest::new("table", seed);
                    m.table = Some(id);
                    m.max_level = Some(max_level);
                    m.outputs.push(p.display().to_string());
                    m.write(&mpath)?;
                }
                None => print!("{}", to_csv(&run, None)),
            }
            if let Some(msg) = run.incomplete {
                return Err(Error::Breakdown(format!("table incomplete: {msg}")));
            }
        }
        Command::Cond { config, set } => {
            let cfg = load_config(&config, &set)?;
            let c = KktProblem::new(&cfg)?.estimate_schur_condition()?;
            println!("{}", json(&c)?);
        }
        Command::Export { config, res, out, set } => {
            let cfg = load_config(&config, &set)?;
            let problem = KktProblem::new(&cfg)?;
            let (fields, report) = problem.solve()?;
            let disc = &problem.disc;
            let (ts, us, vs) = (points(res[0]), points(res[1]), points(res[2]));
            let y = sample_field(disc, &fields.state_full(disc), &ts, &us, &vs)?;
            let yd = sample_field(disc, &fields.desired_full(disc), &ts, &us, &vs)?;
            let u = sample_control(disc, &fields.u, &ts, &us, &vs)?;
            let lam = sample_control(disc, &fields.lambda, &ts, &us, &vs)?;
            // sample order is t, u, v with v fastest
            let pts = y.iter().map(|s| [s.x[0], s.x[1], s.t]).collect();
            let mut grid = StructuredGrid::new([res[2], res[1], res[0]], pts)?;
            let vals = |f: &[stocp::kkt::FieldSample]| f.iter().map(|s| s.value).collect::<Vec<_>>();
            grid.add_scalar("y", vals(&y))?;
            grid.add_scalar("y_d", vals(&yd))?;
            grid.add_scalar("u", vals(&u))?;
            grid.add_scalar("lambda", vals(&lam))?;
            grid.write(
                &out,
                &format!("state, control and multiplier; level {} degree {}", cfg.level, cfg.degree),
            )?;
            let mut m = RunManifest::new("export", cfg.seed);
            m.config = Some(cfg);
            m.outputs.push(out.display().to_string());
            m.write(&RunManifest::path_for(&out))?;
            if !report.converged {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
