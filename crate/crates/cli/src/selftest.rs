//! Fixture corpus: a manifest of solver runs with expected point values.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use hjnet::verifier::{verify, VerifierOptions};
use hjnet::Problem;
use serde::Deserialize;

use crate::{run_solver, Solver};

const BUNDLED_MANIFEST: &str = include_str!("../../../fixtures/manifest.json");
const BUNDLED: [(&str, &str); 8] = [
    (
        "eikonal3.json",
        include_str!("../../../fixtures/eikonal3.json"),
    ),
    (
        "eikonal3_control.json",
        include_str!("../../../fixtures/eikonal3_control.json"),
    ),
    (
        "two_star.json",
        include_str!("../../../fixtures/two_star.json"),
    ),
    (
        "three_star_mixed.json",
        include_str!("../../../fixtures/three_star_mixed.json"),
    ),
    (
        "five_star_mixed.json",
        include_str!("../../../fixtures/five_star_mixed.json"),
    ),
    (
        "sym_two_star.json",
        include_str!("../../../fixtures/sym_two_star.json"),
    ),
    (
        "sym_three_star.json",
        include_str!("../../../fixtures/sym_three_star.json"),
    ),
    (
        "shifted_abs2.json",
        include_str!("../../../fixtures/shifted_abs2.json"),
    ),
];

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    cases: Vec<Case>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Case {
    name: String,
    problem: String,
    solver: Solver,
    tolerance: f64,
    #[serde(default)]
    expect: Vec<Expected>,
    /// Whether every applicable verifier check must pass at five grid spacings.
    #[serde(default)]
    verify: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Expected {
    edge: usize,
    y: f64,
    u: f64,
}

enum Source<'a> {
    Bundled,
    Dir(&'a Path),
}

impl Source<'_> {
    fn read(&self, file: &str) -> Result<String> {
        match self {
            Source::Bundled => BUNDLED
                .iter()
                .find(|(n, _)| *n == file)
                .map(|(_, t)| t.to_string())
                .with_context(|| format!("no bundled fixture {file}")),
            Source::Dir(d) => {
                let path = d.join(file);
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))
            }
        }
    }
}

struct Row {
    name: String,
    error: f64,
    tolerance: f64,
    verified: Option<bool>,
}

impl Row {
    fn passed(&self) -> bool {
        self.error <= self.tolerance && self.verified != Some(false)
    }
}

fn run_case(src: &Source, case: &Case) -> Result<Row> {
    let problem =
        Problem::from_json(&src.read(&case.problem)?).with_context(|| case.problem.clone())?;
    let run = run_solver(&problem, case.solver).with_context(|| case.name.clone())?;
    let u = &run.solution;
    let error = case
        .expect
        .iter()
        .map(|e| (u.interpolate(e.edge, e.y) - e.u).abs())
        .fold(if run.converged { 0.0 } else { f64::INFINITY }, f64::max);
    let verified = if case.verify {
        let opts = VerifierOptions::with_tolerance(5.0 * problem.grid.max_spacing());
        Some(verify(u, &problem.hamiltonian, &opts)?.all_passed())
    } else {
        None
    };
    Ok(Row {
        name: case.name.clone(),
        error,
        tolerance: case.tolerance,
        verified,
    })
}

pub fn run(dir: Option<&Path>) -> Result<u8> {
    let src = dir.map_or(Source::Bundled, Source::Dir);
    let manifest: Manifest = match &src {
        Source::Bundled => serde_json::from_str(BUNDLED_MANIFEST)?,
        Source::Dir(_) => {
            serde_json::from_str(&src.read("manifest.json")?).context("manifest.json")?
        }
    };
    let mut failed = Vec::new();
    let mut broken = false;
    println!(
        "{:<28} {:>10} {:>10} {:>8}  result",
        "case", "max error", "tolerance", "audit"
    );
    for case in &manifest.cases {
        match run_case(&src, case) {
            Ok(row) => {
                let audit = row
                    .verified
                    .map_or("-", |v| if v { "pass" } else { "fail" });
                let verdict = if row.passed() { "PASS" } else { "FAIL" };
                println!(
                    "{:<28} {:>10.3e} {:>10.1e} {:>8}  {verdict}",
                    row.name, row.error, row.tolerance, audit
                );
                if !row.passed() {
                    failed.push(row.name);
                }
            }
            Err(e) => {
                println!("{:<28} error: {e:#}", case.name);
                broken = true;
            }
        }
    }
    if broken {
        return Ok(1);
    }
    if failed.is_empty() {
        println!("all {} cases pass", manifest.cases.len());
        Ok(0)
    } else {
        println!("failed: {}", failed.join(", "));
        Ok(3)
    }
}
