//! Numerical audit of the standing assumptions on `H`.

use serde::{Deserialize, Serialize};

use super::{Hamiltonian, SCAN_POINTS};
use crate::network::StarNetwork;

/// `H(x, +-p_max)` must exceed `H(x, 0)` by at least this much.
pub const COERCIVITY_MARGIN: f64 = 1e-6;
const X_SAMPLES: usize = 101;
const VERTEX_TOL: f64 = 1e-9;
const QUASI_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assumption {
    Coercivity,
    Quasiconvexity,
    VertexContinuity,
    VertexSymmetry,
}

impl Assumption {
    pub const ALL: [Assumption; 4] = [
        Assumption::Coercivity,
        Assumption::Quasiconvexity,
        Assumption::VertexContinuity,
        Assumption::VertexSymmetry,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Witness {
    pub edge: usize,
    pub other_edge: Option<usize>,
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    /// Coercivity: smallest gap (must exceed the margin). Others: largest defect.
    pub worst: f64,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn get(&self, a: Assumption) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.assumption == a)
    }

    pub fn passed(&self, a: Assumption) -> Option<bool> {
        self.get(a).map(|c| c.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<Assumption> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.assumption)
            .collect()
    }
}

impl Hamiltonian {
    fn slope_samples(&self) -> Vec<f64> {
        let half = (SCAN_POINTS - 1) / 2;
        (0..SCAN_POINTS)
            .map(|i| self.p_max * (i as f64 - half as f64) / half as f64)
            .collect()
    }

    pub fn check_assumptions(&self, net: &StarNetwork, which: &[Assumption]) -> AssumptionReport {
        let checks = which
            .iter()
            .map(|&a| match a {
                Assumption::Coercivity => self.check_coercivity(net),
                Assumption::Quasiconvexity => self.check_quasiconvexity(),
                Assumption::VertexContinuity => self.check_vertex_continuity(),
                Assumption::VertexSymmetry => self.check_vertex_symmetry(),
            })
            .collect();
        AssumptionReport { checks }
    }

    fn check_coercivity(&self, net: &StarNetwork) -> AssumptionCheck {
        let mut worst = f64::INFINITY;
        let mut witness = Witness::default();
        for j in 0..self.num_edges() {
            let l = net.edges().get(j).map_or(0.0, |e| e.length);
            for k in 0..X_SAMPLES {
                let x = l * k as f64 / (X_SAMPLES - 1) as f64;
                let base = self.eval(j, x, 0.0);
                for p in [self.p_max, -self.p_max] {
                    let gap = self.eval(j, x, p) - base;
                    if gap < worst {
                        worst = gap;
                        witness = Witness {
                            edge: j,
                            other_edge: None,
                            x,
                            p,
                        };
                    }
                }
            }
        }
        AssumptionCheck {
            assumption: Assumption::Coercivity,
            passed: worst > COERCIVITY_MARGIN,
            worst,
            witness,
        }
    }

    /// A sampled profile is quasiconvex iff no sample exceeds the larger of
    /// the minima to its left and to its right.
    fn check_quasiconvexity(&self) -> AssumptionCheck {
        let ps = self.slope_samples();
        let mut worst = 0.0;
        let mut witness = Witness::default();
        for j in 0..self.num_edges() {
            let v: Vec<f64> = ps.iter().map(|&p| self.eval_vertex(j, p)).collect();
            let n = v.len();
            let mut suffix = vec![f64::INFINITY; n + 1];
            for k in (0..n).rev() {
                suffix[k] = suffix[k + 1].min(v[k]);
            }
            let mut prefix = f64::INFINITY;
            for k in 0..n {
                if k > 0 && k + 1 < n {
                    let excess = v[k] - prefix.max(suffix[k + 1]) - QUASI_TOL * (1.0 + v[k].abs());
                    if excess > worst {
                        worst = excess;
                        witness = Witness {
                            edge: j,
                            other_edge: None,
                            x: 0.0,
                            p: ps[k],
                        };
                    }
                }
                prefix = prefix.min(v[k]);
            }
        }
        AssumptionCheck {
            assumption: Assumption::Quasiconvexity,
            passed: worst <= 0.0,
            worst,
            witness,
        }
    }

    fn check_vertex_continuity(&self) -> AssumptionCheck {
        let ps = self.slope_samples();
        let mut worst = 0.0;
        let mut witness = Witness::default();
        for j in 0..self.num_edges() {
            for k in (j + 1)..self.num_edges() {
                for &p in &ps {
                    let gap = (self.eval_vertex(j, p) - self.eval_vertex(k, p)).abs();
                    if gap > worst {
                        worst = gap;
                        witness = Witness {
                            edge: j,
                            other_edge: Some(k),
                            x: 0.0,
                            p,
                        };
                    }
                }
            }
        }
        AssumptionCheck {
            assumption: Assumption::VertexContinuity,
            passed: worst <= VERTEX_TOL,
            worst,
            witness,
        }
    }

    fn check_vertex_symmetry(&self) -> AssumptionCheck {
        let ps = self.slope_samples();
        let mut worst = 0.0;
        let mut witness = Witness::default();
        for j in 0..self.num_edges() {
            for &p in &ps {
                let gap = (self.eval_vertex(j, p) - self.eval_vertex(j, -p)).abs();
                if gap > worst {
                    worst = gap;
                    witness = Witness {
                        edge: j,
                        other_edge: None,
                        x: 0.0,
                        p,
                    };
                }
            }
        }
        AssumptionCheck {
            assumption: Assumption::VertexSymmetry,
            passed: worst <= VERTEX_TOL,
            worst,
            witness,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::EdgeHamiltonian;

    fn star(n: usize) -> StarNetwork {
        StarNetwork::symmetric(n, 1.0).unwrap()
    }

    #[test]
    fn eikonal_passes_everything() {
        let h = Hamiltonian::uniform(EdgeHamiltonian::eikonal(1.0), 3, 10.0).unwrap();
        let r = h.check_assumptions(&star(3), &Assumption::ALL);
        assert!(r.all_passed(), "{r:?}");
    }

    #[test]
    fn offset_edges_break_continuity() {
        let h = Hamiltonian::new(
            vec![EdgeHamiltonian::eikonal(1.0), EdgeHamiltonian::eikonal(2.0)],
            10.0,
        )
        .unwrap();
        let r = h.check_assumptions(&star(2), &Assumption::ALL);
        let c = r.get(Assumption::VertexContinuity).unwrap();
        assert!(!c.passed);
        assert!((c.worst - 1.0).abs() < 1e-12);
        assert_eq!(c.witness.other_edge, Some(1));
        assert_eq!(r.passed(Assumption::VertexSymmetry), Some(true));
    }

    #[test]
    fn linear_hamiltonian_is_not_coercive() {
        let h = Hamiltonian::new(
            vec![
                EdgeHamiltonian::quadratic(0.0, -1.0, 0.0),
                EdgeHamiltonian::eikonal(1.0),
            ],
            10.0,
        )
        .unwrap();
        let c = h
            .check_assumptions(&star(2), &[Assumption::Coercivity])
            .checks[0]
            .clone();
        assert!(!c.passed);
        assert_eq!(c.witness.edge, 0);
        assert_eq!(c.witness.p, 10.0);
    }

    #[test]
    fn concave_profile_is_not_quasiconvex() {
        let h = Hamiltonian::uniform(EdgeHamiltonian::quadratic(-1.0, 0.0, 0.0), 2, 10.0).unwrap();
        let c = h
            .check_assumptions(&star(2), &[Assumption::Quasiconvexity])
            .checks[0]
            .clone();
        assert!(!c.passed);
        assert!(c.witness.p.abs() < 1e-9);
    }

    #[test]
    fn shifted_abs_is_not_symmetric() {
        let h = Hamiltonian::uniform(EdgeHamiltonian::shifted_abs(1.0, 1.0), 2, 10.0).unwrap();
        let r = h.check_assumptions(
            &star(2),
            &[Assumption::VertexSymmetry, Assumption::Quasiconvexity],
        );
        assert_eq!(r.passed(Assumption::VertexSymmetry), Some(false));
        assert_eq!(r.passed(Assumption::Quasiconvexity), Some(true));
    }
}
