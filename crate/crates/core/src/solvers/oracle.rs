use super::{check_sizes, Boundary};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::network::{NetworkFunction, NetworkGrid};

/// Sweeps needed for `(1 - h)^k` to drop below `1e-10`.
pub fn default_oracle_iterations(h: f64) -> usize {
    (1e-10f64.ln() / (1.0 - h).ln()).ceil() as usize
}

/// Reference value function by brute-force dynamic programming: raw actions
/// only, linear interpolation, feet clamped to the edge, a fixed number of
/// in-place sweeps and no stopping test. A state-constrained outer end only
/// uses actions with speed `<= 0`.
pub fn oracle_dp(
    ham: &Hamiltonian,
    grid: &NetworkGrid,
    h: f64,
    iterations: usize,
    boundary: &[Boundary],
) -> Result<NetworkFunction> {
    check_sizes(ham, grid)?;
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::BadOptions(format!(
            "oracle time step must lie in (0, 1), got {h}"
        )));
    }
    let controls = (0..grid.num_edges())
        .map(|j| ham.control(j))
        .collect::<Result<Vec<_>>>()?;
    if !controls
        .iter()
        .any(|c| c.actions.iter().any(|a| a.speed >= 0.0))
    {
        return Err(Error::Assumption("no action leaves the vertex".into()));
    }
    let pinned = |j: usize| match boundary.get(j) {
        Some(Boundary::Dirichlet { value }) => Some(*value),
        _ => None,
    };
    for (j, c) in controls.iter().enumerate() {
        if pinned(j).is_none() && !c.actions.iter().any(|a| a.speed <= 0.0) {
            return Err(Error::Assumption(format!(
                "no action keeps edge {j} inside at its outer end"
            )));
        }
    }
    let mut u = NetworkFunction::constant(grid.clone(), 0.0);
    for j in 0..grid.num_edges() {
        if let Some(g) = pinned(j) {
            u.set(j, grid.nodes(j), g);
        }
    }
    for _ in 0..iterations {
        let mut best = f64::INFINITY;
        for (j, c) in controls.iter().enumerate() {
            for a in c.actions.iter().filter(|a| a.speed >= 0.0) {
                best = best.min((1.0 - h) * u.interpolate(j, h * a.speed) + h * a.cost);
            }
        }
        u.set_vertex_value(best);
        for (j, c) in controls.iter().enumerate() {
            let last = if pinned(j).is_some() {
                grid.nodes(j) - 1
            } else {
                grid.nodes(j)
            };
            let m = grid.nodes(j);
            for i in 1..=last {
                let y = grid.position(j, i);
                let run = c.cost_slope * y;
                let v = c
                    .actions
                    .iter()
                    .filter(|a| i < m || a.speed <= 0.0)
                    .map(|a| (1.0 - h) * u.interpolate(j, y + h * a.speed) + h * (a.cost + run));
                u.set(j, i, v.fold(f64::INFINITY, f64::min));
            }
        }
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::EdgeHamiltonian;
    use crate::network::StarNetwork;

    #[test]
    fn geometric_sum_identity() {
        let ham = Hamiltonian::uniform(
            EdgeHamiltonian::control(&[(1.0, 1.0), (-1.0, 1.0)]),
            3,
            10.0,
        )
        .unwrap();
        let grid = NetworkGrid::uniform(StarNetwork::symmetric(3, 1.0).unwrap(), 50).unwrap();
        let h = 1e-3;
        let u = oracle_dp(&ham, &grid, h, default_oracle_iterations(h), &[]).unwrap();
        assert!(u.iter_nodes().all(|(_, _, v)| (v - 1.0).abs() < 1e-3));
    }

    #[test]
    fn zero_cost_is_exact() {
        let ham = Hamiltonian::uniform(EdgeHamiltonian::control(&[(1.0, 0.0)]), 3, 10.0).unwrap();
        let grid = NetworkGrid::uniform(StarNetwork::symmetric(3, 1.0).unwrap(), 20).unwrap();
        let pinned = [Boundary::Dirichlet { value: 0.0 }; 3];
        let u = oracle_dp(&ham, &grid, 1e-2, 500, &pinned).unwrap();
        assert!(u.iter_nodes().all(|(_, _, v)| v == 0.0));
        assert!(matches!(
            oracle_dp(&ham, &grid, 1e-2, 500, &[]),
            Err(Error::Assumption(_))
        ));
    }

    #[test]
    fn iteration_count() {
        assert_eq!(default_oracle_iterations(0.5), 34);
        assert!(0.999f64.powi(default_oracle_iterations(1e-3) as i32) <= 1e-10);
    }
}
