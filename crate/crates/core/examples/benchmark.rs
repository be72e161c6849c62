//! Solve the benchmark with both formulations.
//!
//! `cargo run --release --example benchmark -- <level> <degree>`

use std::time::Instant;

use stocp::kkt::{Formulation, KktProblem, ProblemConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let level: u32 = args.get(1).map_or(2, |s| s.parse().expect("level"));
    let degree: usize = args.get(2).map_or(2, |s| s.parse().expect("degree"));
    for formulation in [Formulation::ThreeByThree, Formulation::TwoByTwo] {
        let cfg = ProblemConfig {
            level,
            degree,
            formulation,
            ..Default::default()
        };
        let t = Instant::now();
        let problem = KktProblem::new(&cfg).unwrap();
        let (_, r) = problem.solve().unwrap();
        println!(
            "{formulation} level {level} degree {degree}: {} iterations (converged {}), J = {:.6e}, dofs {}/{}, {:.2} s",
            r.iterations,
            r.converged,
            r.cost.total,
            r.dim_y,
            r.dim_u,
            t.elapsed().as_secs_f64()
        );
    }
}
