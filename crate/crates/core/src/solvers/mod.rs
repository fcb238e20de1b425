//! Numerical solvers for `u + H(x, Du) = 0` on a star.
//!
//! * [`solve_imz`]: monotone Godunov finite differences in the edges, with the
//!   flux-limited junction condition `u(v) + max_j H^-_j(D_j u) = 0`.
//! * [`solve_acct`]: semi-Lagrangian value iteration for the control problem,
//!   using the outgoing action sets `FL_j(v)` at the vertex.
//! * [`oracle_dp`]: plain dynamic programming on the raw action list, used as
//!   an independent reference.

mod godunov;
mod oracle;
mod semi_lagrangian;

use serde::{Deserialize, Serialize};

pub use godunov::{godunov_flux, godunov_flux_with, solve_imz};
pub use oracle::{default_oracle_iterations, oracle_dp};
pub use semi_lagrangian::solve_acct;

use crate::error::{Error, Result};
use crate::hamiltonian::{Assumption, Hamiltonian};
use crate::network::{NetworkFunction, NetworkGrid};

/// Outer-end condition at `y = l_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet { value: f64 },
    StateConstraint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// In-place sweeps, alternating outward and inward order.
    #[default]
    GaussSeidel,
    /// Every node updated from the previous iterate; edges processed in parallel.
    Jacobi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub max_iterations: usize,
    pub residual_tolerance: f64,
    pub damping: f64,
    /// Time step of the semi-Lagrangian scheme; defaults to the largest step
    /// allowed by the one-cell bound.
    pub sl_time_step: Option<f64>,
    /// One entry per edge; empty means state constraint everywhere.
    pub boundary: Vec<Boundary>,
    pub sweep: SweepMode,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            residual_tolerance: 1e-10,
            damping: 1.0,
            sl_time_step: None,
            boundary: Vec::new(),
            sweep: SweepMode::GaussSeidel,
        }
    }
}

impl SolveOptions {
    pub fn with_boundary(mut self, boundary: Vec<Boundary>) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_time_step(mut self, h: f64) -> Self {
        self.sl_time_step = Some(h);
        self
    }

    pub fn boundary_at(&self, j: usize) -> Boundary {
        self.boundary
            .get(j)
            .copied()
            .unwrap_or(Boundary::StateConstraint)
    }

    pub(crate) fn validate(&self, num_edges: usize) -> Result<()> {
        if !(self.residual_tolerance > 0.0) {
            return Err(Error::BadOptions(
                "residual_tolerance must be positive".into(),
            ));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::BadOptions(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        if !self.boundary.is_empty() && self.boundary.len() != num_edges {
            return Err(Error::BadOptions(format!(
                "{} boundary conditions for {} edges",
                self.boundary.len(),
                num_edges
            )));
        }
        for b in &self.boundary {
            if let Boundary::Dirichlet { value } = b {
                if !value.is_finite() {
                    return Err(Error::BadOptions("non-finite Dirichlet value".into()));
                }
            }
        }
        if let Some(h) = self.sl_time_step {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::BadOptions(format!(
                    "sl_time_step must lie in (0, 1), got {h}"
                )));
            }
        }
        Ok(())
    }

    fn dirichlet_scale(&self) -> f64 {
        self.boundary
            .iter()
            .map(|b| match b {
                Boundary::Dirichlet { value } => value.abs(),
                Boundary::StateConstraint => 0.0,
            })
            .fold(0.0, f64::max)
    }

    fn initial_guess(&self, grid: &NetworkGrid, level: f64) -> NetworkFunction {
        let mut u = NetworkFunction::constant(grid.clone(), level);
        for j in 0..grid.num_edges() {
            if let Boundary::Dirichlet { value } = self.boundary_at(j) {
                u.set(j, grid.nodes(j), value);
            }
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub solution: NetworkFunction,
    pub iterations_used: usize,
    pub final_residual: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Imz,
    Acct,
}

/// Nodal residuals, laid out like a [`NetworkFunction`] but allowed to be non-finite.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalResidual {
    pub vertex: f64,
    pub edges: Vec<Vec<f64>>,
}

impl NodalResidual {
    pub fn sup_norm(&self) -> f64 {
        self.edges
            .iter()
            .flatten()
            .chain(std::iter::once(&self.vertex))
            .map(|r| r.abs())
            .fold(0.0, f64::max)
    }

    /// `(edge, node, residual)` of the largest residual in absolute value.
    pub fn worst(&self) -> (usize, usize, f64) {
        let mut best = (0, 0, self.vertex);
        for (j, vals) in self.edges.iter().enumerate() {
            for (i, &r) in vals.iter().enumerate() {
                if r.abs() > best.2.abs() {
                    best = (j, i + 1, r);
                }
            }
        }
        best
    }
}

/// Residual of `u` in the discrete equations of either scheme.
pub fn residual(
    u: &NetworkFunction,
    h: &Hamiltonian,
    scheme: Scheme,
    opts: &SolveOptions,
) -> Result<NodalResidual> {
    check_sizes(h, u.grid())?;
    opts.validate(u.grid().num_edges())?;
    match scheme {
        Scheme::Imz => godunov::imz_residual(u, h, opts),
        Scheme::Acct => semi_lagrangian::acct_residual(u, h, opts),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub sup_norm: f64,
    pub l1_norm: f64,
}

/// Sup norm and grid-weighted (trapezoidal) L1 norm of `u1 - u2`.
pub fn compare(u1: &NetworkFunction, u2: &NetworkFunction) -> Result<Comparison> {
    if u1.grid() != u2.grid() {
        return Err(Error::GridMismatch(
            "compared functions live on different grids".into(),
        ));
    }
    let grid = u1.grid();
    let dv = (u1.vertex_value() - u2.vertex_value()).abs();
    let mut sup = dv;
    let mut l1 = 0.0;
    for j in 0..grid.num_edges() {
        let dy = grid.spacing(j);
        let m = grid.nodes(j);
        l1 += 0.5 * dy * dv;
        for i in 1..=m {
            let d = (u1.value(j, i) - u2.value(j, i)).abs();
            sup = sup.max(d);
            l1 += if i == m { 0.5 * dy * d } else { dy * d };
        }
    }
    Ok(Comparison {
        sup_norm: sup,
        l1_norm: l1,
    })
}

fn check_sizes(h: &Hamiltonian, grid: &NetworkGrid) -> Result<()> {
    if h.num_edges() != grid.num_edges() {
        return Err(Error::GridMismatch(format!(
            "Hamiltonian has {} edges, grid has {}",
            h.num_edges(),
            grid.num_edges()
        )));
    }
    Ok(())
}

/// Preconditions shared by both solvers: quasiconvex vertex profiles and
/// computable minimizers.
fn solver_preconditions(h: &Hamiltonian, grid: &NetworkGrid) -> Result<Vec<f64>> {
    check_sizes(h, grid)?;
    let report = h.check_assumptions(grid.network(), &[Assumption::Quasiconvexity]);
    if !report.all_passed() {
        return Err(Error::Assumption("quasiconvexity".into()));
    }
    h.minimizers()
}

/// Root of a nondecreasing `f` on `[-bound, bound]`, to full double precision.
fn bisect_root(
    f: impl Fn(f64) -> f64,
    bound: f64,
    location: impl FnOnce() -> String,
) -> Result<f64> {
    let (mut lo, mut hi) = (-bound, bound);
    if f(lo) > 0.0 || f(hi) < 0.0 {
        return Err(Error::BracketFailure {
            location: location(),
            bound,
        });
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let v = f(mid);
        if v == 0.0 {
            return Ok(mid);
        }
        if v > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
}
