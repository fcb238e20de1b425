mod selftest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hjnet::problem::{solution_from_csv, write_solution_csv};
use hjnet::solvers::{compare, oracle_dp, solve_acct, solve_imz};
use hjnet::verifier::{verify, VerifierOptions};
use hjnet::{NetworkFunction, Problem};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "hjnet",
    version,
    about = "Hamilton-Jacobi equations on star networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file and write the solution as CSV.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_enum)]
        solver: Solver,
        #[arg(long)]
        out: PathBuf,
        /// Run summary; defaults to the CSV path with a `.json` extension.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        max_iterations: Option<usize>,
    },
    /// Audit a solution CSV against every vertex condition.
    Verify {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Defaults to five times the largest grid spacing.
        #[arg(long)]
        tol: Option<f64>,
        /// Report path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refinement study of the gap between the two schemes.
    Compare {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value_t = 0.05)]
        bound: f64,
        /// Table path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the fixture corpus and print a pass/fail table.
    Selftest {
        /// Directory holding `manifest.json`; the bundled corpus if omitted.
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    Imz,
    Acct,
    Oracle,
}

#[derive(Serialize)]
struct RunSummary {
    problem: String,
    solver: Solver,
    iterations: usize,
    residual: Option<f64>,
    converged: bool,
    wall_time_s: f64,
    nodes: usize,
}

pub struct Run {
    pub solution: NetworkFunction,
    pub iterations: usize,
    pub residual: Option<f64>,
    pub converged: bool,
}

pub fn run_solver(p: &Problem, solver: Solver) -> hjnet::Result<Run> {
    match solver {
        Solver::Imz | Solver::Acct => {
            let f = if solver == Solver::Imz {
                solve_imz
            } else {
                solve_acct
            };
            let r = f(&p.hamiltonian, &p.grid, &p.options)?;
            Ok(Run {
                solution: r.solution,
                iterations: r.iterations_used,
                residual: Some(r.final_residual),
                converged: r.converged,
            })
        }
        Solver::Oracle => {
            let iterations = p.oracle.iterations();
            let solution = oracle_dp(
                &p.hamiltonian,
                &p.grid,
                p.oracle.time_step,
                iterations,
                &p.options.boundary,
            )?;
            Ok(Run {
                solution,
                iterations,
                residual: None,
                converged: true,
            })
        }
    }
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(
    problem: &Path,
    solver: Solver,
    out: &Path,
    summary: Option<PathBuf>,
    max_iterations: Option<usize>,
) -> Result<u8> {
    let mut p = Problem::load(problem)?;
    if let Some(k) = max_iterations {
        p.options.max_iterations = k;
    }
    let start = Instant::now();
    let run = run_solver(&p, solver)?;
    let elapsed = start.elapsed().as_secs_f64();
    let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_solution_csv(&run.solution, std::io::BufWriter::new(file))?;
    let s = RunSummary {
        problem: p.metadata.name.clone(),
        solver,
        iterations: run.iterations,
        residual: run.residual,
        converged: run.converged,
        wall_time_s: elapsed,
        nodes: p.grid.total_nodes(),
    };
    let path = summary.unwrap_or_else(|| out.with_extension("json"));
    write_json(Some(&path), &s)?;
    eprintln!(
        "{} {}: {} iterations, residual {}, {}",
        p.metadata.name,
        serde_json::to_value(solver)?.as_str().unwrap_or_default(),
        run.iterations,
        run.residual.map_or("n/a".into(), |r| format!("{r:.3e}")),
        if run.converged {
            "converged"
        } else {
            "NOT converged"
        }
    );
    Ok(if run.converged { 0 } else { 2 })
}

fn cmd_verify(
    problem: &Path,
    solution: &Path,
    tol: Option<f64>,
    out: Option<PathBuf>,
) -> Result<u8> {
    let p = Problem::load(problem)?;
    let text =
        fs::read_to_string(solution).with_context(|| format!("reading {}", solution.display()))?;
    let u = solution_from_csv(&p.grid, &text)
        .with_context(|| format!("reading {}", solution.display()))?;
    let tol = tol.unwrap_or(5.0 * p.grid.max_spacing());
    let report = verify(&u, &p.hamiltonian, &VerifierOptions::with_tolerance(tol))?;
    for c in &report.checks {
        eprintln!(
            "{:<5} {:<6} {:<15} {}",
            format!("{:?}", c.definition).to_lowercase(),
            format!("{:?}", c.role).to_lowercase(),
            format!("{:?}", c.status).to_lowercase(),
            c.violation
                .map_or(String::new(), |v| format!("violation {v:.3e}"))
        );
    }
    write_json(out.as_deref(), &report)?;
    Ok(if report.all_passed() { 0 } else { 3 })
}

fn cmd_compare(problem: &Path, levels: usize, bound: f64, out: Option<PathBuf>) -> Result<u8> {
    if levels == 0 {
        bail!("--levels must be at least 1");
    }
    let base = Problem::load(problem)?;
    if !base.hamiltonian.is_control() {
        bail!("control form required for a scheme comparison");
    }
    let mut table = String::from("level,dy,sup_diff,ratio\n");
    let mut gaps: Vec<f64> = Vec::new();
    for level in 0..levels {
        let p = base.refined(1 << level)?;
        let dy = p.grid.max_spacing();
        let a = solve_imz(&p.hamiltonian, &p.grid, &p.options)?;
        let b = solve_acct(
            &p.hamiltonian,
            &p.grid,
            &p.options.clone().with_time_step(dy),
        )?;
        if !(a.converged && b.converged) {
            bail!("a solver did not converge at level {level}");
        }
        let gap = compare(&a.solution, &b.solution)?.sup_norm;
        let ratio = gaps
            .last()
            .map_or(String::new(), |g| format!("{:.6}", g / gap));
        table += &format!("{level},{dy:.16e},{gap:.16e},{ratio}\n");
        gaps.push(gap);
    }
    match &out {
        Some(path) => {
            fs::write(path, &table).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{table}"),
    }
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let last = *gaps.last().unwrap();
    eprintln!("monotone: {monotone}, final gap {last:.3e} (bound {bound})");
    Ok(if monotone && last <= bound { 0 } else { 3 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve {
            problem,
            solver,
            out,
            summary,
            max_iterations,
        } => cmd_solve(&problem, solver, &out, summary, max_iterations),
        Command::Verify {
            problem,
            solution,
            tol,
            out,
        } => cmd_verify(&problem, &solution, tol, out),
        Command::Compare {
            problem,
            levels,
            bound,
            out,
        } => cmd_compare(&problem, levels, bound, out),
        Command::Selftest { fixtures } => selftest::run(fixtures.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
