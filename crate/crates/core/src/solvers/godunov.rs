use rayon::prelude::*;

use super::{
    bisect_root, solver_preconditions, Boundary, NodalResidual, SolveOptions, SolveResult,
    SweepMode,
};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::network::{NetworkFunction, NetworkGrid};

/// Godunov numerical Hamiltonian for a quasiconvex `H^j(x, .)` with minimizer `p0`:
/// `max(H(max(p_left, p0)), H(min(p_right, p0)))`.
#[inline]
pub fn godunov_flux_with(
    h: &Hamiltonian,
    j: usize,
    x: f64,
    p_left: f64,
    p_right: f64,
    p0: f64,
) -> f64 {
    h.eval(j, x, p_left.max(p0))
        .max(h.eval(j, x, p_right.min(p0)))
}

pub fn godunov_flux(h: &Hamiltonian, j: usize, x: f64, p_left: f64, p_right: f64) -> Result<f64> {
    Ok(godunov_flux_with(h, j, x, p_left, p_right, h.p0(j)?))
}

/// Discrete equations of the flux-limited scheme. Every `F(u_node; neighbours)`
/// is strictly increasing in `u_node`.
struct ImzEquations<'a> {
    h: &'a Hamiltonian,
    grid: &'a NetworkGrid,
    opts: &'a SolveOptions,
    p0: Vec<f64>,
}

impl<'a> ImzEquations<'a> {
    fn new(
        h: &'a Hamiltonian,
        grid: &'a NetworkGrid,
        opts: &'a SolveOptions,
        p0: Vec<f64>,
    ) -> Result<Self> {
        let eqs = Self { h, grid, opts, p0 };
        let vertex_ok =
            (0..grid.num_edges()).any(|j| h.h_minus_with(j, 0.0, eqs.p0[j]) > f64::NEG_INFINITY);
        if !vertex_ok {
            return Err(Error::Assumption(
                "no edge carries a finite flux limiter at the vertex".into(),
            ));
        }
        for j in 0..grid.num_edges() {
            if opts.boundary_at(j) == Boundary::StateConstraint
                && eqs.state_constraint(j, 0.0, 0.0) == f64::NEG_INFINITY
            {
                return Err(Error::Assumption(format!(
                    "state constraint is infeasible at the outer end of edge {j}"
                )));
            }
        }
        Ok(eqs)
    }

    /// Smallest constant that is a discrete supersolution. The interior flux
    /// of a constant is `H(x, 0)`, so the level is the largest of `-H(x_i, 0)`,
    /// the vertex and state-constraint equivalents and the Dirichlet data.
    fn supersolution_level(&self) -> f64 {
        let mut c = -(0..self.grid.num_edges())
            .map(|j| self.h.h_minus_with(j, 0.0, self.p0[j]))
            .fold(f64::NEG_INFINITY, f64::max);
        for j in 0..self.grid.num_edges() {
            let m = self.grid.nodes(j);
            for i in 1..m {
                c = c.max(-self.h.eval(j, self.grid.position(j, i), 0.0));
            }
            c = c.max(match self.opts.boundary_at(j) {
                Boundary::Dirichlet { value } => value,
                Boundary::StateConstraint => {
                    -self.h.eval(j, self.grid.length(j), self.p0[j].max(0.0))
                }
            });
        }
        c
    }

    fn vertex(&self, uv: f64, u: &NetworkFunction) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for j in 0..self.grid.num_edges() {
            let slope = (u.value(j, 1) - uv) / self.grid.spacing(j);
            worst = worst.max(self.h.h_minus_with(j, slope, self.p0[j]));
        }
        uv + worst
    }

    fn interior(&self, j: usize, i: usize, ui: f64, u: &NetworkFunction) -> f64 {
        let dy = self.grid.spacing(j);
        let pl = (ui - u.value(j, i - 1)) / dy;
        let pr = (u.value(j, i + 1) - ui) / dy;
        ui + godunov_flux_with(self.h, j, self.grid.position(j, i), pl, pr, self.p0[j])
    }

    fn state_constraint(&self, j: usize, um: f64, prev: f64) -> f64 {
        let pl = (um - prev) / self.grid.spacing(j);
        um + self.h.eval(j, self.grid.length(j), pl.max(self.p0[j]))
    }

    /// Residual at node `(j, i)` for the current values.
    fn residual_at(&self, j: usize, i: usize, u: &NetworkFunction) -> f64 {
        let m = self.grid.nodes(j);
        let ui = u.value(j, i);
        if i < m {
            return self.interior(j, i, ui, u);
        }
        match self.opts.boundary_at(j) {
            Boundary::Dirichlet { value } => ui - value,
            Boundary::StateConstraint => self.state_constraint(j, ui, u.value(j, m - 1)),
        }
    }

    /// New value at `(j, i)` solving the local equation with neighbours frozen.
    fn solve_node(&self, j: usize, i: usize, u: &NetworkFunction, bound: f64) -> Result<f64> {
        let m = self.grid.nodes(j);
        let here = || format!("edge {j}, node {i}");
        if i < m {
            return bisect_root(|x| self.interior(j, i, x, u), bound, here);
        }
        match self.opts.boundary_at(j) {
            Boundary::Dirichlet { value } => Ok(value),
            Boundary::StateConstraint => {
                let prev = u.value(j, m - 1);
                bisect_root(|x| self.state_constraint(j, x, prev), bound, here)
            }
        }
    }

    fn solve_vertex(&self, u: &NetworkFunction, bound: f64) -> Result<f64> {
        bisect_root(|x| self.vertex(x, u), bound, || "vertex".into())
    }

    fn residual(&self, u: &NetworkFunction) -> NodalResidual {
        NodalResidual {
            vertex: self.vertex(u.vertex_value(), u),
            edges: (0..self.grid.num_edges())
                .map(|j| {
                    (1..=self.grid.nodes(j))
                        .map(|i| self.residual_at(j, i, u))
                        .collect()
                })
                .collect(),
        }
    }
}

pub(super) fn imz_residual(
    u: &NetworkFunction,
    h: &Hamiltonian,
    opts: &SolveOptions,
) -> Result<NodalResidual> {
    let p0 = h.minimizers()?;
    Ok(ImzEquations::new(h, u.grid(), opts, p0)?.residual(u))
}

/// Godunov scheme with the flux-limited junction condition.
///
/// Iteration starts from the smallest constant supersolution, so the iterates
/// decrease monotonically. Each sweep solves every local equation exactly by
/// bisection on `[-B, B]`, `B = 1 + max(|H(., 0)|, |min H^j(v, .)|, |Dirichlet data|)`
/// (widened to hold the starting level). Gauss-Seidel sweeps alternate between
/// the outward order (vertex, then edges in index order from the vertex) and
/// the reverse order.
pub fn solve_imz(h: &Hamiltonian, grid: &NetworkGrid, opts: &SolveOptions) -> Result<SolveResult> {
    opts.validate(grid.num_edges())?;
    let p0 = solver_preconditions(h, grid)?;
    let eqs = ImzEquations::new(h, grid, opts, p0)?;
    let lengths: Vec<f64> = grid.network().edges().iter().map(|e| e.length).collect();
    let start = eqs.supersolution_level();
    let bound = 1.0
        + h.value_scale(&lengths)
            .max(opts.dirichlet_scale())
            .max(start.abs());
    let omega = opts.damping;
    let relax = |old: f64, new: f64| {
        if omega == 1.0 {
            new
        } else {
            old + omega * (new - old)
        }
    };

    let mut u = opts.initial_guess(grid, start);
    let mut res = eqs.residual(&u).sup_norm();
    let mut it = 0;
    while res > opts.residual_tolerance && it < opts.max_iterations {
        match opts.sweep {
            SweepMode::GaussSeidel => {
                let outward = it % 2 == 0;
                if outward {
                    let v = eqs.solve_vertex(&u, bound)?;
                    u.set_vertex_value(relax(u.vertex_value(), v));
                }
                let edges: Vec<usize> = if outward {
                    (0..grid.num_edges()).collect()
                } else {
                    (0..grid.num_edges()).rev().collect()
                };
                for j in edges {
                    let m = grid.nodes(j);
                    let nodes: Vec<usize> = if outward {
                        (1..=m).collect()
                    } else {
                        (1..=m).rev().collect()
                    };
                    for i in nodes {
                        let v = eqs.solve_node(j, i, &u, bound)?;
                        u.set(j, i, relax(u.value(j, i), v));
                    }
                }
                if !outward {
                    let v = eqs.solve_vertex(&u, bound)?;
                    u.set_vertex_value(relax(u.vertex_value(), v));
                }
            }
            SweepMode::Jacobi => {
                let old = &u;
                let new_edges: Vec<Vec<f64>> = (0..grid.num_edges())
                    .into_par_iter()
                    .map(|j| {
                        (1..=grid.nodes(j))
                            .map(|i| {
                                eqs.solve_node(j, i, old, bound)
                                    .map(|v| relax(old.value(j, i), v))
                            })
                            .collect::<Result<Vec<f64>>>()
                    })
                    .collect::<Result<_>>()?;
                let v = relax(old.vertex_value(), eqs.solve_vertex(old, bound)?);
                u = NetworkFunction::new(grid.clone(), v, new_edges)?;
            }
        }
        it += 1;
        res = eqs.residual(&u).sup_norm();
    }
    Ok(SolveResult {
        solution: u,
        iterations_used: it,
        final_residual: res,
        converged: res <= opts.residual_tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::EdgeHamiltonian;
    use crate::network::StarNetwork;
    use crate::solvers::{residual, Scheme};

    fn eikonal(n: usize) -> Hamiltonian {
        Hamiltonian::uniform(EdgeHamiltonian::eikonal(1.0), n, 10.0).unwrap()
    }

    #[test]
    fn flux_examples() {
        let h = eikonal(2);
        assert_eq!(godunov_flux(&h, 0, 0.5, 0.0, 0.0).unwrap(), -1.0);
        // brute-force max / min of |p| - 1 over [-2, 2]
        let samples: Vec<f64> = (0..=4000).map(|k| -2.0 + k as f64 * 1e-3).collect();
        let hi = samples
            .iter()
            .map(|p| p.abs() - 1.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let lo = samples
            .iter()
            .map(|p| p.abs() - 1.0)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(godunov_flux(&h, 0, 0.5, 2.0, -2.0).unwrap(), hi);
        assert_eq!(godunov_flux(&h, 0, 0.5, -2.0, 2.0).unwrap(), lo);
    }

    #[test]
    fn constant_solution_on_three_star() {
        let grid = NetworkGrid::uniform(StarNetwork::symmetric(3, 1.0).unwrap(), 100).unwrap();
        let h = eikonal(3);
        let r = solve_imz(&h, &grid, &SolveOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.final_residual <= 1e-10);
        assert!(r
            .solution
            .iter_nodes()
            .all(|(_, _, v)| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn residual_examples() {
        let grid = NetworkGrid::uniform(StarNetwork::symmetric(3, 1.0).unwrap(), 20).unwrap();
        let h = eikonal(3);
        let opts = SolveOptions::default();
        let one = residual(
            &NetworkFunction::constant(grid.clone(), 1.0),
            &h,
            Scheme::Imz,
            &opts,
        )
        .unwrap();
        assert_eq!(one.sup_norm(), 0.0);
        let zero = residual(
            &NetworkFunction::constant(grid, 0.0),
            &h,
            Scheme::Imz,
            &opts,
        )
        .unwrap();
        assert_eq!(zero.vertex, -1.0);
        assert!(zero.edges.iter().flatten().all(|&r| r == -1.0));
    }

    #[test]
    fn forced_non_convergence_is_reported() {
        let grid = NetworkGrid::uniform(StarNetwork::symmetric(2, 1.0).unwrap(), 50).unwrap();
        let h = eikonal(2);
        let opts = SolveOptions {
            max_iterations: 1,
            ..Default::default()
        }
        .with_boundary(vec![Boundary::Dirichlet { value: 0.0 }; 2]);
        let r = solve_imz(&h, &grid, &opts).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations_used, 1);
        assert!(r.final_residual > opts.residual_tolerance);
    }

    #[test]
    fn jacobi_and_damping_reach_the_same_solution() {
        let grid = NetworkGrid::uniform(StarNetwork::symmetric(3, 1.0).unwrap(), 12).unwrap();
        let h = Hamiltonian::new(
            vec![
                EdgeHamiltonian::eikonal(1.0),
                EdgeHamiltonian::eikonal(2.0),
                EdgeHamiltonian::quadratic(1.0, 0.0, -1.5),
            ],
            10.0,
        )
        .unwrap();
        let gs = solve_imz(&h, &grid, &SolveOptions::default()).unwrap();
        let jac = solve_imz(
            &h,
            &grid,
            &SolveOptions {
                sweep: SweepMode::Jacobi,
                ..Default::default()
            },
        )
        .unwrap();
        let damped = solve_imz(
            &h,
            &grid,
            &SolveOptions {
                damping: 0.7,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(gs.converged && jac.converged && damped.converged);
        for other in [&jac, &damped] {
            let d = crate::solvers::compare(&gs.solution, &other.solution).unwrap();
            assert!(d.sup_norm < 1e-9, "{}", d.sup_norm);
        }
    }

    #[test]
    fn rejects_non_quasiconvex() {
        let grid = NetworkGrid::uniform(StarNetwork::symmetric(2, 1.0).unwrap(), 10).unwrap();
        let h = Hamiltonian::uniform(EdgeHamiltonian::quadratic(-1.0, 0.0, 0.0), 2, 10.0).unwrap();
        assert!(matches!(
            solve_imz(&h, &grid, &SolveOptions::default()),
            Err(Error::Assumption(_))
        ));
    }
}
