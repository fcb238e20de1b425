//! Per-edge Hamiltonians `H^j(x, p)`, the vertex flux limiter and the
//! outgoing action sets used by the control formulation.

mod assumptions;
pub mod hull;

use serde::{Deserialize, Serialize};

pub use assumptions::{Assumption, AssumptionCheck, AssumptionReport, Witness, COERCIVITY_MARGIN};
pub use hull::FlSet;

use crate::error::{Error, Result};

/// Points of the coarse slope scan over `[-p_max, p_max]`.
pub const SCAN_POINTS: usize = 2001;
const ROOT_TOL: f64 = 1e-10;
const PLATEAU_TOL: f64 = 1e-12;

/// Named closed-form Hamiltonians. They do not depend on the position on the edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum ClosedForm {
    /// `|p| - offset`
    Eikonal { offset: f64 },
    /// `a p^2 + b p + c`
    Quadratic { a: f64, b: f64, c: f64 },
    /// `|p - shift| - offset`
    ShiftedAbs { shift: f64, offset: f64 },
}

impl ClosedForm {
    fn eval(&self, p: f64) -> f64 {
        match *self {
            ClosedForm::Eikonal { offset } => p.abs() - offset,
            ClosedForm::ShiftedAbs { shift, offset } => (p - shift).abs() - offset,
            ClosedForm::Quadratic { a, b, c } => {
                if p.is_infinite() {
                    let s = p.signum();
                    if a != 0.0 {
                        a.signum() * f64::INFINITY
                    } else if b != 0.0 {
                        (b * s).signum() * f64::INFINITY
                    } else {
                        c
                    }
                } else {
                    (a * p + b) * p + c
                }
            }
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            ClosedForm::Eikonal { offset } => vec![offset],
            ClosedForm::Quadratic { a, b, c } => vec![a, b, c],
            ClosedForm::ShiftedAbs { shift, offset } => vec![shift, offset],
        }
    }
}

/// One control: signed speed along the edge direction and running cost at the vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub speed: f64,
    pub cost: f64,
}

/// Finite action set of one edge. The running cost of every action at
/// parameter `y` is `cost + cost_slope * y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSet {
    pub actions: Vec<Action>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub cost_slope: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl ControlSet {
    pub fn new(actions: Vec<Action>) -> Self {
        Self {
            actions,
            cost_slope: 0.0,
        }
    }

    pub fn with_cost_slope(mut self, slope: f64) -> Self {
        self.cost_slope = slope;
        self
    }

    /// `max_a (-speed_a p - cost_a(x))`, with the limits at `p = +-inf`.
    fn eval(&self, x: f64, p: f64) -> f64 {
        let shift = self.cost_slope * x;
        self.actions
            .iter()
            .map(|a| -hull::slope_times_speed(p, a.speed) - a.cost - shift)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn vertex_pairs(&self) -> Vec<hull::Point> {
        self.actions.iter().map(|a| [a.speed, a.cost]).collect()
    }

    fn has_speed(&self, pred: impl Fn(f64) -> bool) -> bool {
        self.actions.iter().any(|a| pred(a.speed))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EdgeHamiltonian {
    ClosedForm(ClosedForm),
    Control(ControlSet),
}

impl EdgeHamiltonian {
    pub fn eikonal(offset: f64) -> Self {
        Self::ClosedForm(ClosedForm::Eikonal { offset })
    }

    pub fn quadratic(a: f64, b: f64, c: f64) -> Self {
        Self::ClosedForm(ClosedForm::Quadratic { a, b, c })
    }

    pub fn shifted_abs(shift: f64, offset: f64) -> Self {
        Self::ClosedForm(ClosedForm::ShiftedAbs { shift, offset })
    }

    pub fn control(actions: &[(f64, f64)]) -> Self {
        Self::Control(ControlSet::new(
            actions
                .iter()
                .map(|&(speed, cost)| Action { speed, cost })
                .collect(),
        ))
    }

    #[inline]
    pub fn eval(&self, x: f64, p: f64) -> f64 {
        match self {
            Self::ClosedForm(f) => f.eval(p),
            Self::Control(c) => c.eval(x, p),
        }
    }

    pub fn as_control(&self) -> Option<&ControlSet> {
        match self {
            Self::Control(c) => Some(c),
            Self::ClosedForm(_) => None,
        }
    }
}

/// Level-set thresholds of `p -> H^j(v, p)` at a given level:
/// `H > level` exactly outside `[p_minus, p_plus]` and `H < level` exactly on
/// `(p_low, p_high)`. An empty sublevel set is reported with `p_low > p_high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub p_minus: f64,
    pub p_low: f64,
    pub p_high: f64,
    pub p_plus: f64,
    pub level: f64,
}

impl Thresholds {
    pub fn is_empty(&self) -> bool {
        self.p_low > self.p_high
    }
}

/// The Hamiltonian on every edge of a star, with the slope window used by
/// all numerical scans.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    edges: Vec<EdgeHamiltonian>,
    p_max: f64,
    minimizers: Vec<Option<f64>>,
}

impl Hamiltonian {
    pub fn new(edges: Vec<EdgeHamiltonian>, p_max: f64) -> Result<Self> {
        if !(p_max.is_finite() && p_max > 0.0) {
            return Err(Error::BadHamiltonian(format!(
                "p_max must be positive, got {p_max}"
            )));
        }
        for (j, e) in edges.iter().enumerate() {
            match e {
                EdgeHamiltonian::Control(c) => {
                    if c.actions.is_empty() {
                        return Err(Error::EmptyActions { edge: j });
                    }
                    let finite = c.cost_slope.is_finite()
                        && c.actions
                            .iter()
                            .all(|a| a.speed.is_finite() && a.cost.is_finite());
                    if !finite {
                        return Err(Error::BadHamiltonian(format!(
                            "edge {j}: non-finite action data"
                        )));
                    }
                }
                EdgeHamiltonian::ClosedForm(f) => {
                    if f.params().iter().any(|v| !v.is_finite()) {
                        return Err(Error::BadHamiltonian(format!(
                            "edge {j}: non-finite parameter"
                        )));
                    }
                }
            }
        }
        let mut h = Self {
            edges,
            p_max,
            minimizers: Vec::new(),
        };
        h.minimizers = (0..h.edges.len()).map(|j| h.argmin_p(j).ok()).collect();
        Ok(h)
    }

    /// The same closed form on `n` edges.
    pub fn uniform(edge: EdgeHamiltonian, n: usize, p_max: f64) -> Result<Self> {
        Self::new(vec![edge; n], p_max)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn edges(&self) -> &[EdgeHamiltonian] {
        &self.edges
    }

    pub fn edge(&self, j: usize) -> &EdgeHamiltonian {
        &self.edges[j]
    }

    pub fn is_control(&self) -> bool {
        self.edges.iter().all(|e| e.as_control().is_some())
    }

    pub fn control(&self, j: usize) -> Result<&ControlSet> {
        self.edges[j]
            .as_control()
            .ok_or(Error::ControlFormRequired { edge: j })
    }

    /// `H^j(x, p)`; `x` is the parameter along edge `j`.
    #[inline]
    pub fn eval(&self, j: usize, x: f64, p: f64) -> f64 {
        self.edges[j].eval(x, p)
    }

    #[inline]
    pub fn eval_vertex(&self, j: usize, p: f64) -> f64 {
        self.edges[j].eval(0.0, p)
    }

    /// Leftmost minimizer `p0_j` of `p -> H^j(v, p)`.
    ///
    /// Control sets without outgoing (incoming) speeds are monotone, and their
    /// minimizer is `-inf` (`+inf`, when no action has zero speed). Otherwise
    /// the window is scanned on [`SCAN_POINTS`] points, the best cell is
    /// refined by golden section and a plateau the scan resolves is walked
    /// back to its left end by bisection.
    pub fn argmin_p(&self, j: usize) -> Result<f64> {
        if let EdgeHamiltonian::Control(c) = &self.edges[j] {
            if !c.has_speed(|s| s > 0.0) {
                return Ok(f64::NEG_INFINITY);
            }
            if !c.has_speed(|s| s <= 0.0) {
                return Ok(f64::INFINITY);
            }
        }
        let f = |p: f64| self.eval_vertex(j, p);
        let half = (SCAN_POINTS - 1) / 2;
        let grid: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| self.p_max * (i as f64 - half as f64) / half as f64)
            .collect();
        let vals: Vec<f64> = grid.iter().map(|&p| f(p)).collect();
        let k = (0..SCAN_POINTS).fold(0, |best, i| if vals[i] < vals[best] { i } else { best });
        if k == 0 || k == SCAN_POINTS - 1 {
            return Err(Error::WindowTooSmall {
                edge: j,
                p_max: self.p_max,
            });
        }
        let refined = golden_section(&f, grid[k - 1], grid[k + 1], ROOT_TOL);
        let (p_star, m) = if f(refined) < vals[k] {
            (refined, f(refined))
        } else {
            (grid[k], vals[k])
        };

        let at_min = |p: f64| f(p) <= m + PLATEAU_TOL;
        let first = (0..SCAN_POINTS).find(|&i| vals[i] <= m + PLATEAU_TOL);
        let count = vals.iter().filter(|&&v| v <= m + PLATEAU_TOL).count();
        match first {
            Some(i) if count >= 2 => {
                if i == 0 {
                    return Err(Error::WindowTooSmall {
                        edge: j,
                        p_max: self.p_max,
                    });
                }
                Ok(bisect_predicate(&at_min, grid[i - 1], grid[i], PLATEAU_TOL))
            }
            _ => Ok(p_star),
        }
    }

    /// Minimizers cached at construction; fails for edges whose window is too small.
    pub fn p0(&self, j: usize) -> Result<f64> {
        self.minimizers[j].ok_or(Error::WindowTooSmall {
            edge: j,
            p_max: self.p_max,
        })
    }

    pub fn minimizers(&self) -> Result<Vec<f64>> {
        (0..self.edges.len()).map(|j| self.p0(j)).collect()
    }

    /// `min_p H^j(v, p)`; may be `-inf` for monotone control sets.
    pub fn vertex_min(&self, j: usize) -> Result<f64> {
        Ok(self.eval_vertex(j, self.p0(j)?))
    }

    /// Non-increasing envelope `inf_{q <= 0} H^j(v, p + q)`.
    pub fn h_minus(&self, j: usize, p: f64) -> Result<f64> {
        Ok(self.h_minus_with(j, p, self.p0(j)?))
    }

    #[inline]
    pub fn h_minus_with(&self, j: usize, p: f64, p0: f64) -> f64 {
        if p < p0 {
            self.eval_vertex(j, p)
        } else {
            self.eval_vertex(j, p0)
        }
    }

    pub fn sublevel_thresholds(&self, j: usize, level: f64) -> Result<Thresholds> {
        let p0 = self.p0(j)?;
        let m = self.eval_vertex(j, p0);
        if m > level + PLATEAU_TOL {
            return Ok(Thresholds {
                p_minus: p0,
                p_low: f64::INFINITY,
                p_high: f64::NEG_INFINITY,
                p_plus: p0,
                level,
            });
        }
        if !p0.is_finite() {
            return Err(Error::BadHamiltonian(format!(
                "edge {j}: thresholds need a finite minimizer"
            )));
        }
        let f = |p: f64| self.eval_vertex(j, p);
        let (lo, hi) = (-self.p_max, self.p_max);
        if f(lo) <= level || f(hi) <= level {
            return Err(Error::WindowTooSmall {
                edge: j,
                p_max: self.p_max,
            });
        }
        let above = |p: f64| f(p) > level;
        let below = |p: f64| f(p) < level;
        let p_minus = bisect_predicate(&|p| !above(p), lo, p0, ROOT_TOL);
        let p_plus = bisect_predicate(&above, p0, hi, ROOT_TOL);
        let (p_low, p_high) = if m < level - PLATEAU_TOL {
            (
                bisect_predicate(&below, lo, p0, ROOT_TOL),
                bisect_predicate(&|p| !below(p), p0, hi, ROOT_TOL),
            )
        } else {
            (p0, p0)
        };
        Ok(Thresholds {
            p_minus,
            p_low,
            p_high,
            p_plus,
            level,
        })
    }

    pub fn fl_set(&self, j: usize) -> Result<FlSet> {
        let c = self.control(j)?;
        Ok(FlSet::from_pairs(j, &c.vertex_pairs()))
    }

    pub fn fl_sets(&self) -> Result<Vec<FlSet>> {
        (0..self.edges.len()).map(|j| self.fl_set(j)).collect()
    }

    /// `max_j |H^j(x, 0)|` and the finite vertex minima, the scale of any bounded solution.
    pub fn value_scale(&self, lengths: &[f64]) -> f64 {
        let mut s: f64 = 0.0;
        for (j, &l) in lengths.iter().enumerate() {
            for k in 0..=100 {
                s = s.max(self.eval(j, l * k as f64 / 100.0, 0.0).abs());
            }
            if let Ok(m) = self.vertex_min(j) {
                if m.is_finite() {
                    s = s.max(m.abs());
                }
            }
        }
        s
    }
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Boundary of a predicate that is false at `lo` and true at `hi`.
/// Returns the true end of the final bracket.
pub(crate) fn bisect_predicate(
    pred: &impl Fn(f64) -> bool,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(e: EdgeHamiltonian) -> Hamiltonian {
        Hamiltonian::new(vec![e.clone(), e], 10.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        let h = single(EdgeHamiltonian::control(&[(1.0, 1.0), (-1.0, 1.0)]));
        assert_eq!(h.eval(0, 0.0, 0.0), -1.0);
        assert_eq!(h.eval(0, 0.0, 3.0), 2.0);
        let q = single(EdgeHamiltonian::quadratic(1.0, 0.0, -1.0));
        assert_eq!(q.eval(0, 0.3, 2.0), 3.0);
    }

    #[test]
    fn cost_slope_shifts_interior() {
        let e = EdgeHamiltonian::Control(
            ControlSet::new(vec![
                Action {
                    speed: 1.0,
                    cost: 1.0,
                },
                Action {
                    speed: -1.0,
                    cost: 1.0,
                },
            ])
            .with_cost_slope(0.5),
        );
        assert_eq!(e.eval(0.0, 0.0), -1.0);
        assert_eq!(e.eval(1.0, 0.0), -1.5);
    }

    #[test]
    fn minimizer_examples() {
        assert_eq!(single(EdgeHamiltonian::eikonal(1.0)).p0(0).unwrap(), 0.0);
        let q = single(EdgeHamiltonian::quadratic(1.0, -4.0, 4.0));
        assert!((q.p0(0).unwrap() - 2.0).abs() < 1e-9);
        let c = single(EdgeHamiltonian::control(&[(2.0, 0.0), (-1.0, 0.0)]));
        // brute-force scan of max(-2p, p) on a 1e-4 grid
        let brute = (-100_000..=100_000)
            .map(|k| k as f64 * 1e-4)
            .min_by(|a, b| (-2.0 * a).max(*a).total_cmp(&(-2.0 * b).max(*b)))
            .unwrap();
        assert!(brute.abs() < 1e-12);
        assert!((c.p0(0).unwrap() - brute).abs() < 1e-9);
    }

    #[test]
    fn plateau_gives_leftmost_minimizer() {
        // max(-p - 3, -2, p - 3): flat at -2 on [-1, 1]
        let c = single(EdgeHamiltonian::control(&[
            (1.0, 3.0),
            (0.0, 2.0),
            (-1.0, 3.0),
        ]));
        assert!((c.p0(0).unwrap() + 1.0).abs() < 1e-9);
        assert!((c.vertex_min(0).unwrap() + 2.0).abs() < 1e-9);
    }

    #[test]
    fn minimizer_on_window_boundary_is_rejected() {
        let h = single(EdgeHamiltonian::quadratic(0.0, -1.0, 0.0));
        assert!(matches!(h.p0(0), Err(Error::WindowTooSmall { .. })));
        assert!(matches!(h.argmin_p(0), Err(Error::WindowTooSmall { .. })));
        let far = single(EdgeHamiltonian::shifted_abs(20.0, 0.0));
        assert!(far.p0(0).is_err());
    }

    #[test]
    fn monotone_control_sets() {
        let inward = single(EdgeHamiltonian::control(&[(-1.0, 1.0), (-2.0, 0.0)]));
        assert_eq!(inward.p0(0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(inward.h_minus(0, 3.0).unwrap(), f64::NEG_INFINITY);
        let outward = single(EdgeHamiltonian::control(&[(1.0, 0.0)]));
        assert_eq!(outward.p0(0).unwrap(), f64::INFINITY);
        assert_eq!(outward.h_minus(0, 3.0).unwrap(), -3.0);
    }

    #[test]
    fn h_minus_examples() {
        let h = single(EdgeHamiltonian::eikonal(1.0));
        assert_eq!(h.h_minus(0, 3.0).unwrap(), -1.0);
        assert_eq!(h.h_minus(0, -2.0).unwrap(), 1.0);
        assert_eq!(h.h_minus(0, 0.0).unwrap(), h.vertex_min(0).unwrap());
    }

    #[test]
    fn threshold_examples() {
        let q = single(EdgeHamiltonian::quadratic(1.0, 0.0, -1.0));
        let t = q.sublevel_thresholds(0, 0.0).unwrap();
        for (got, want) in [
            (t.p_minus, -1.0),
            (t.p_low, -1.0),
            (t.p_high, 1.0),
            (t.p_plus, 1.0),
        ] {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }

        let e = single(EdgeHamiltonian::eikonal(1.0));
        let t = e.sublevel_thresholds(0, -1.0).unwrap();
        // analytic: |p| - 1 = -1 only at p = 0
        assert!(t.p_low.abs() < 1e-9 && t.p_high.abs() < 1e-9);
        assert!(t.p_minus.abs() < 1e-9 && t.p_plus.abs() < 1e-9);
        assert!(!t.is_empty());

        let pos = single(EdgeHamiltonian::quadratic(1.0, 0.0, 1.0));
        assert!(pos.sublevel_thresholds(0, 0.0).unwrap().is_empty());
    }

    #[test]
    fn thresholds_at_plateau_level() {
        // max(-p - 2, 0, p - 1): minimum 0 on [-2, 1]
        let c = single(EdgeHamiltonian::control(&[
            (1.0, 2.0),
            (0.0, 0.0),
            (-1.0, 1.0),
        ]));
        let t = c.sublevel_thresholds(0, 0.0).unwrap();
        assert!((t.p_minus + 2.0).abs() < 1e-9);
        assert!((t.p_plus - 1.0).abs() < 1e-9);
        assert!((t.p_low + 2.0).abs() < 1e-9 && t.p_low == t.p_high);
        assert!(t.p_minus <= t.p_low && t.p_high < t.p_plus);
        assert!(c.sublevel_thresholds(0, -0.5).unwrap().is_empty());
    }

    #[test]
    fn fl_set_requires_control() {
        let h = single(EdgeHamiltonian::eikonal(1.0));
        assert!(matches!(
            h.fl_set(0),
            Err(Error::ControlFormRequired { edge: 0 })
        ));
        let c = single(EdgeHamiltonian::control(&[(1.0, 1.0), (-1.0, 1.0)]));
        assert_eq!(
            c.fl_set(1).unwrap().extreme_points,
            vec![[0.0, 1.0], [1.0, 1.0]]
        );
    }

    #[test]
    fn json_shapes() {
        let e: EdgeHamiltonian = serde_json::from_str(
            r#"{"type":"closed_form","name":"eikonal","params":{"offset":1.0}}"#,
        )
        .unwrap();
        assert_eq!(e, EdgeHamiltonian::eikonal(1.0));
        let c: EdgeHamiltonian =
            serde_json::from_str(r#"{"type":"control","actions":[{"speed":1.0,"cost":1.0}]}"#)
                .unwrap();
        assert_eq!(c, EdgeHamiltonian::control(&[(1.0, 1.0)]));
        let s = serde_json::to_string(&EdgeHamiltonian::shifted_abs(1.0, 2.0)).unwrap();
        assert_eq!(
            s,
            r#"{"type":"closed_form","name":"shifted_abs","params":{"shift":1.0,"offset":2.0}}"#
        );
    }
}
