use rayon::prelude::*;

use super::{check_sizes, Boundary, NodalResidual, SolveOptions, SolveResult, SweepMode};
use crate::error::{Error, Result};
use crate::hamiltonian::hull::{clip_nonnegative_x, convex_hull, sampled_boundary, Point};
use crate::hamiltonian::Hamiltonian;
use crate::network::{NetworkFunction, NetworkGrid};

/// Extra samples on every boundary segment of a candidate hull.
pub const BOUNDARY_SAMPLES: usize = 33;

/// Discrete dynamic programming operator with discount `1 - h`.
struct DpOperator<'a> {
    grid: &'a NetworkGrid,
    opts: &'a SolveOptions,
    h: f64,
    /// Per edge: `(speed, cost at the vertex)` candidates.
    edge_candidates: Vec<Vec<Point>>,
    /// Per edge: candidates at a state-constrained outer end (speeds `<= 0`).
    end_candidates: Vec<Vec<Point>>,
    cost_slopes: Vec<f64>,
    /// `(edge, outgoing speed, cost)` candidates at the vertex.
    vertex_candidates: Vec<(usize, f64, f64)>,
}

impl<'a> DpOperator<'a> {
    fn new(ham: &Hamiltonian, grid: &'a NetworkGrid, opts: &'a SolveOptions) -> Result<Self> {
        check_sizes(ham, grid)?;
        let mut edge_candidates = Vec::new();
        let mut end_candidates = Vec::new();
        let mut cost_slopes = Vec::new();
        let mut vertex_candidates = Vec::new();
        let mut max_speed: f64 = 0.0;
        for j in 0..grid.num_edges() {
            let c = ham.control(j)?;
            max_speed = c
                .actions
                .iter()
                .fold(max_speed, |s, a| s.max(a.speed.abs()));
            let hull = convex_hull(&c.vertex_pairs());
            let mirrored: Vec<Point> = hull.iter().map(|&[z, xi]| [-z, xi]).collect();
            let inward: Vec<Point> = clip_nonnegative_x(&mirrored)
                .into_iter()
                .map(|[z, xi]| [-z, xi])
                .collect();
            if inward.is_empty() && opts.boundary_at(j) == Boundary::StateConstraint {
                return Err(Error::Assumption(format!(
                    "no action keeps edge {j} inside at its outer end"
                )));
            }
            edge_candidates.push(sampled_boundary(&hull, BOUNDARY_SAMPLES));
            end_candidates.push(sampled_boundary(&convex_hull(&inward), BOUNDARY_SAMPLES));
            cost_slopes.push(c.cost_slope);
            let fl = ham.fl_set(j)?;
            vertex_candidates.extend(
                sampled_boundary(&fl.extreme_points, BOUNDARY_SAMPLES)
                    .into_iter()
                    .map(|[z, xi]| (j, z, xi)),
            );
        }
        if vertex_candidates.is_empty() {
            return Err(Error::Assumption(
                "every outgoing action set at the vertex is empty".into(),
            ));
        }
        let min_dy = grid.min_spacing();
        let h = match opts.sl_time_step {
            Some(h) => h,
            None if max_speed > 0.0 => (min_dy / max_speed).min(0.5),
            None => 0.5,
        };
        if h * max_speed > min_dy * (1.0 + 1e-12) {
            return Err(Error::BadOptions(format!(
                "time step {h} with speed {max_speed} leaves the cell (min spacing {min_dy})"
            )));
        }
        Ok(Self {
            grid,
            opts,
            h,
            edge_candidates,
            end_candidates,
            cost_slopes,
            vertex_candidates,
        })
    }

    /// Smallest constant `C` with `T C <= C`: every node needs a candidate
    /// costing at most `C`, and `C` must dominate the Dirichlet data.
    fn supersolution_level(&self) -> f64 {
        let cheapest = |cands: &[Point], extra: f64| {
            cands
                .iter()
                .map(|p| p[1] + extra)
                .fold(f64::INFINITY, f64::min)
        };
        let mut c = self
            .vertex_candidates
            .iter()
            .map(|v| v.2)
            .fold(f64::INFINITY, f64::min);
        for j in 0..self.grid.num_edges() {
            let m = self.grid.nodes(j);
            for i in 1..m {
                c = c.max(cheapest(
                    &self.edge_candidates[j],
                    self.cost_slopes[j] * self.grid.position(j, i),
                ));
            }
            c = c.max(match self.opts.boundary_at(j) {
                Boundary::Dirichlet { value } => value,
                Boundary::StateConstraint => cheapest(
                    &self.end_candidates[j],
                    self.cost_slopes[j] * self.grid.length(j),
                ),
            });
        }
        c
    }

    /// Foot of the characteristic from node `i` as `(neighbour, weight on node i)`.
    #[inline]
    fn foot(&self, j: usize, i: usize, speed: f64) -> (usize, f64) {
        let m = self.grid.nodes(j);
        let shift = (self.h * speed / self.grid.spacing(j)).clamp(-1.0, 1.0);
        if shift > 0.0 && i < m {
            (i + 1, 1.0 - shift)
        } else if shift < 0.0 {
            (i - 1, 1.0 + shift)
        } else {
            (i, 1.0)
        }
    }

    /// Local update at node `(j, i)`. With `exact`, the self-referencing part
    /// of the interpolation is solved for: each candidate contributes the fixed
    /// point of `u -> (1-h)(w u + (1-w) u_nb) + h c`, and the minimum of those
    /// is the fixed point of the minimum. Without it this is one application
    /// of the plain operator.
    fn update_node(&self, j: usize, i: usize, u: &NetworkFunction, exact: bool) -> f64 {
        let m = self.grid.nodes(j);
        let mut candidates = &self.edge_candidates[j];
        if i == m {
            match self.opts.boundary_at(j) {
                Boundary::Dirichlet { value } => return value,
                Boundary::StateConstraint => candidates = &self.end_candidates[j],
            }
        }
        let y = self.grid.position(j, i);
        let extra = self.cost_slopes[j] * y;
        let ui = u.value(j, i);
        let mut best = f64::INFINITY;
        for &[speed, cost] in candidates {
            let (nb, w) = self.foot(j, i, speed);
            best = best.min(self.candidate(w, u.value(j, nb), ui, cost + extra, exact));
        }
        best
    }

    fn update_vertex(&self, u: &NetworkFunction, exact: bool) -> f64 {
        let uv = u.vertex_value();
        let mut best = f64::INFINITY;
        for &(j, speed, cost) in &self.vertex_candidates {
            let w = 1.0 - (self.h * speed / self.grid.spacing(j)).min(1.0);
            best = best.min(self.candidate(w, u.value(j, 1), uv, cost, exact));
        }
        best
    }

    #[inline]
    fn candidate(&self, w: f64, u_nb: f64, u_self: f64, cost: f64, exact: bool) -> f64 {
        let h = self.h;
        if exact {
            ((1.0 - h) * (1.0 - w) * u_nb + h * cost) / (1.0 - (1.0 - h) * w)
        } else {
            (1.0 - h) * (w * u_self + (1.0 - w) * u_nb) + h * cost
        }
    }

    /// `(u - T u) / h` at every node.
    fn residual(&self, u: &NetworkFunction) -> NodalResidual {
        NodalResidual {
            vertex: (u.vertex_value() - self.update_vertex(u, false)) / self.h,
            edges: (0..self.grid.num_edges())
                .map(|j| {
                    (1..=self.grid.nodes(j))
                        .map(|i| (u.value(j, i) - self.update_node(j, i, u, false)) / self.h)
                        .collect()
                })
                .collect(),
        }
    }
}

pub(super) fn acct_residual(
    u: &NetworkFunction,
    ham: &Hamiltonian,
    opts: &SolveOptions,
) -> Result<NodalResidual> {
    Ok(DpOperator::new(ham, u.grid(), opts)?.residual(u))
}

/// Semi-Lagrangian value iteration for the control problem on the star.
///
/// Candidate controls on an edge are the extreme points of the convex hull of
/// its `(speed, cost)` pairs plus [`BOUNDARY_SAMPLES`] points per hull segment;
/// at the vertex they are the points of every `FL_j(v)` sampled the same way,
/// each moving out along its own edge. A state-constrained outer end only
/// offers the part of the hull with speed `<= 0`, the mirror image of the
/// vertex sets; other feet are clamped to the edge.
/// Iteration starts from the smallest constant supersolution and stops once a sweep moves no value by more than `tolerance * h`
/// and the residual `(u - T u) / h` is within tolerance.
pub fn solve_acct(
    ham: &Hamiltonian,
    grid: &NetworkGrid,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    opts.validate(grid.num_edges())?;
    let op = DpOperator::new(ham, grid, opts)?;
    let tol = opts.residual_tolerance;
    let mut u = opts.initial_guess(grid, op.supersolution_level());
    let mut it = 0;
    let mut res = f64::INFINITY;
    while it < opts.max_iterations {
        let delta = match opts.sweep {
            SweepMode::GaussSeidel => gauss_seidel_sweep(&op, &mut u, it % 2 == 0),
            SweepMode::Jacobi => {
                let next = jacobi_step(&op, &u)?;
                let d = super::compare(&u, &next)?.sup_norm;
                u = next;
                d
            }
        };
        it += 1;
        if delta <= tol * op.h {
            res = op.residual(&u).sup_norm();
            if res <= tol {
                break;
            }
        }
    }
    if !res.is_finite() || it == opts.max_iterations {
        res = op.residual(&u).sup_norm();
    }
    Ok(SolveResult {
        solution: u,
        iterations_used: it,
        final_residual: res,
        converged: res <= tol,
    })
}

fn gauss_seidel_sweep(op: &DpOperator, u: &mut NetworkFunction, outward: bool) -> f64 {
    let grid = op.grid;
    let mut delta: f64 = 0.0;
    let mut set = |u: &mut NetworkFunction, j: usize, i: usize, v: f64| {
        delta = delta.max((u.value(j, i) - v).abs());
        u.set(j, i, v);
    };
    if outward {
        let v = op.update_vertex(u, true);
        set(u, 0, 0, v);
    }
    for jj in 0..grid.num_edges() {
        let j = if outward {
            jj
        } else {
            grid.num_edges() - 1 - jj
        };
        let m = grid.nodes(j);
        for ii in 1..=m {
            let i = if outward { ii } else { m + 1 - ii };
            let v = op.update_node(j, i, u, true);
            set(u, j, i, v);
        }
    }
    if !outward {
        let v = op.update_vertex(u, true);
        set(u, 0, 0, v);
    }
    delta
}

/// One application of the plain operator `T`.
fn jacobi_step(op: &DpOperator, u: &NetworkFunction) -> Result<NetworkFunction> {
    let grid = op.grid;
    let edges: Vec<Vec<f64>> = (0..grid.num_edges())
        .into_par_iter()
        .map(|j| {
            (1..=grid.nodes(j))
                .map(|i| op.update_node(j, i, u, false))
                .collect()
        })
        .collect();
    NetworkFunction::new(grid.clone(), op.update_vertex(u, false), edges)
}
