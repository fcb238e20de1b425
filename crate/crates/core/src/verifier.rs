//! Audits of a grid function against the vertex conditions of the three
//! notions of solution (control-theoretic, flux-limited, and the symmetric
//! pairwise one), plus the interior scheme residual and the small-scale
//! difference-quotient bound.
//!
//! Everything is decided from one-sided difference quotients at the vertex.
//! For edge `j` the quotients `q_m = (u^j_m - u(v)) / y_m` at a few node
//! scales bracket the superdifferential `[p_j, +inf)` and the subdifferential
//! `(-inf, d_j]` of `u^j` at the vertex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Assumption, Hamiltonian};
use crate::network::NetworkFunction;
use crate::solvers::godunov_flux_with;

pub const DEFAULT_SCALES: [usize; 4] = [1, 2, 4, 8];
pub const DIVERGENCE_THRESHOLD: f64 = 10.0;
pub const DEFAULT_QUOTIENT_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifierOptions {
    pub tolerance: f64,
    pub scales: Vec<usize>,
    /// Widening of the quotient bracket; `None` means the largest grid spacing.
    pub slope_tolerance: Option<f64>,
    pub divergence_threshold: f64,
    pub quotient_depth: usize,
}

impl Default for VerifierOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            scales: DEFAULT_SCALES.to_vec(),
            slope_tolerance: None,
            divergence_threshold: DIVERGENCE_THRESHOLD,
            quotient_depth: DEFAULT_QUOTIENT_DEPTH,
        }
    }
}

impl VerifierOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }
}

/// Estimated differentials of one edge restriction at the vertex.
///
/// `sup_lo = None` means the superdifferential looks empty (quotients blow up
/// towards `+inf` at small scales); the subdifferential is then everything and
/// `sub_hi = +inf`. Symmetrically for `sub_hi = None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeDifferential {
    pub quotients: Vec<f64>,
    pub sup_lo: Option<f64>,
    pub sub_hi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexDifferentials {
    pub scales: Vec<usize>,
    pub slope_tolerance: f64,
    pub edges: Vec<EdgeDifferential>,
}

impl VertexDifferentials {
    pub fn any_super_empty(&self) -> bool {
        self.edges.iter().any(|e| e.sup_lo.is_none())
    }

    pub fn any_sub_empty(&self) -> bool {
        self.edges.iter().any(|e| e.sub_hi.is_none())
    }
}

/// Brackets the vertex differentials of `u` along every edge from the
/// quotients at the node counts in `scales`.
pub fn estimate_differentials(
    u: &NetworkFunction,
    scales: &[usize],
    slope_tolerance: Option<f64>,
    divergence_threshold: f64,
) -> Result<VertexDifferentials> {
    let grid = u.grid();
    if scales.is_empty() {
        return Err(Error::BadOptions("no quotient scales".into()));
    }
    let tol = slope_tolerance.unwrap_or_else(|| grid.max_spacing());
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::BadOptions(format!("slope tolerance {tol}")));
    }
    let uv = u.vertex_value();
    let mut edges = Vec::with_capacity(grid.num_edges());
    for j in 0..grid.num_edges() {
        let quotients = scales
            .iter()
            .map(|&m| {
                if m == 0 || m > grid.nodes(j) {
                    return Err(Error::BadOptions(format!(
                        "scale {m} does not fit edge {j} with {} nodes",
                        grid.nodes(j)
                    )));
                }
                Ok((u.value(j, m) - uv) / grid.position(j, m))
            })
            .collect::<Result<Vec<f64>>>()?;
        let hi = quotients.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = quotients.iter().copied().fold(f64::INFINITY, f64::min);
        let finest = quotients[argmin_scale(scales)];
        let coarsest = quotients[argmax_scale(scales)];
        let (sup_lo, sub_hi) = if hi - lo > divergence_threshold {
            if finest > coarsest {
                (None, Some(f64::INFINITY))
            } else {
                (Some(f64::NEG_INFINITY), None)
            }
        } else {
            (Some(hi - tol), Some(lo + tol))
        };
        edges.push(EdgeDifferential {
            quotients,
            sup_lo,
            sub_hi,
        });
    }
    Ok(VertexDifferentials {
        scales: scales.to_vec(),
        slope_tolerance: tol,
        edges,
    })
}

fn argmin_scale(scales: &[usize]) -> usize {
    (0..scales.len()).min_by_key(|&i| scales[i]).unwrap_or(0)
}

fn argmax_scale(scales: &[usize]) -> usize {
    (0..scales.len()).max_by_key(|&i| scales[i]).unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Definition {
    Acct,
    Imz,
    Cs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Sub,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// Verdict of one definition in one role.
///
/// `violation` is signed so that the check passes iff it is at most the
/// tolerance: the worst `u(v) + ...` value for subsolutions, its negative for
/// supersolutions. It is `None` when the admissible test family is empty or
/// the check does not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub definition: Definition,
    pub role: Role,
    pub status: Status,
    pub violation: Option<f64>,
    pub vacuous: bool,
    pub witness_edges: Vec<usize>,
    pub witness_slope: Option<f64>,
    /// Pairwise supersolutions only: the first feasible edge for each edge.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feasible_map: Option<Vec<Option<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// Set by [`verify`], which folds the interior audit into the verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_violation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interior_violation: Option<f64>,
}

impl CheckReport {
    fn not_applicable(definition: Definition, role: Role, note: String) -> Self {
        Self {
            definition,
            role,
            status: Status::NotApplicable,
            violation: None,
            vacuous: false,
            witness_edges: Vec::new(),
            witness_slope: None,
            feasible_map: None,
            note: Some(note),
            vertex_violation: None,
            interior_violation: None,
        }
    }

    fn vacuous(definition: Definition, role: Role, note: &str) -> Self {
        Self {
            status: Status::Pass,
            vacuous: true,
            note: Some(note.into()),
            ..Self::not_applicable(definition, role, String::new())
        }
    }

    fn decided(
        definition: Definition,
        role: Role,
        violation: f64,
        tol: f64,
        edges: Vec<usize>,
        slope: f64,
    ) -> Self {
        // NaN never passes
        let status = if violation <= tol {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            definition,
            role,
            status,
            violation: Some(violation),
            vacuous: false,
            witness_edges: edges,
            witness_slope: Some(slope),
            feasible_map: None,
            note: None,
            vertex_violation: None,
            interior_violation: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Adds the interior condition of the same role: the verdict passes iff
    /// the vertex check and the interior audit both do.
    fn with_interior(mut self, interior: &InteriorReport, tol: f64) -> Self {
        if self.status == Status::NotApplicable {
            return self;
        }
        let inner = interior.violation(self.role);
        self.vertex_violation = self.violation;
        self.interior_violation = Some(inner);
        self.violation = Some(self.violation.map_or(inner, |v| v.max(inner)));
        if !(inner <= tol) {
            self.status = Status::Fail;
        }
        self
    }
}

/// Binding slope per edge for `role`, or `None` if some edge has no admissible slope.
fn binding_slopes(d: &VertexDifferentials, role: Role) -> Option<Vec<f64>> {
    d.edges
        .iter()
        .map(|e| {
            if role == Role::Sub {
                e.sup_lo
            } else {
                e.sub_hi
            }
        })
        .collect()
}

/// Shared shape of the junction checks: `u(v) + max_j f_j(slope_j)` at the
/// binding slopes, which suffices because every `f_j` is non-increasing.
fn junction_check(
    definition: Definition,
    uv: f64,
    d: &VertexDifferentials,
    role: Role,
    tol: f64,
    f: impl Fn(usize, f64) -> f64,
) -> CheckReport {
    let Some(slopes) = binding_slopes(d, role) else {
        let note = match role {
            Role::Sub => "some superdifferential is empty",
            Role::Super => "some subdifferential is empty",
        };
        return CheckReport::vacuous(definition, role, note);
    };
    let mut worst = (0, f64::NEG_INFINITY);
    for (j, &q) in slopes.iter().enumerate() {
        let v = f(j, q);
        if v > worst.1 || v.is_nan() {
            worst = (j, v);
        }
    }
    let value = uv + worst.1;
    let violation = if role == Role::Sub { value } else { -value };
    CheckReport::decided(
        definition,
        role,
        violation,
        tol,
        vec![worst.0],
        slopes[worst.0],
    )
}

fn quasiconvex_minimizers(
    h: &Hamiltonian,
    u: &NetworkFunction,
) -> std::result::Result<Vec<f64>, String> {
    let r = h.check_assumptions(u.grid().network(), &[Assumption::Quasiconvexity]);
    if !r.all_passed() {
        return Err("vertex Hamiltonians are not quasiconvex".into());
    }
    h.minimizers().map_err(|e| e.to_string())
}

fn check_edges(u: &NetworkFunction, h: &Hamiltonian, d: &VertexDifferentials) -> Result<()> {
    if h.num_edges() != u.grid().num_edges() || d.edges.len() != h.num_edges() {
        return Err(Error::GridMismatch(
            "edge counts of function, Hamiltonian and differentials differ".into(),
        ));
    }
    Ok(())
}

/// Flux-limited junction condition `u(v) + max_j H^-_j(D_j phi) <= 0` (sub) or `>= 0` (super).
pub fn check_imz(
    u: &NetworkFunction,
    d: &VertexDifferentials,
    h: &Hamiltonian,
    role: Role,
    tol: f64,
) -> Result<CheckReport> {
    check_edges(u, h, d)?;
    let p0 = match quasiconvex_minimizers(h, u) {
        Ok(p0) => p0,
        Err(note) => return Ok(CheckReport::not_applicable(Definition::Imz, role, note)),
    };
    Ok(junction_check(
        Definition::Imz,
        u.vertex_value(),
        d,
        role,
        tol,
        |j, q| h.h_minus_with(j, q, p0[j]),
    ))
}

/// Control-theoretic junction condition through the support functions of the `FL_j(v)`.
pub fn check_acct(
    u: &NetworkFunction,
    d: &VertexDifferentials,
    h: &Hamiltonian,
    role: Role,
    tol: f64,
) -> Result<CheckReport> {
    check_edges(u, h, d)?;
    if !h.is_control() {
        return Ok(CheckReport::not_applicable(
            Definition::Acct,
            role,
            "control form required".into(),
        ));
    }
    let fl = h.fl_sets()?;
    Ok(junction_check(
        Definition::Acct,
        u.vertex_value(),
        d,
        role,
        tol,
        |j, q| fl[j].support(q),
    ))
}

/// Pairwise condition with `(j, k)`-test functions, for continuous and
/// symmetric vertex Hamiltonians.
///
/// Sub: every pair with a nonempty slope interval `[p_j, -p_k]` is checked at
/// both endpoints. Super: each `j` needs some `k` (searched in ascending
/// order) for which `u(v) + H^j(v, q)` stays above `-tol` on `[-d_k, d_j]`;
/// the minimum sits at the projection of the minimizer onto the interval.
pub fn check_cs(
    u: &NetworkFunction,
    d: &VertexDifferentials,
    h: &Hamiltonian,
    role: Role,
    tol: f64,
) -> Result<CheckReport> {
    check_edges(u, h, d)?;
    let gate = h.check_assumptions(
        u.grid().network(),
        &[Assumption::VertexContinuity, Assumption::VertexSymmetry],
    );
    if !gate.all_passed() {
        let failed: Vec<String> = gate.failures().iter().map(|a| format!("{a:?}")).collect();
        return Ok(CheckReport::not_applicable(
            Definition::Cs,
            role,
            format!("failed assumptions: {}", failed.join(", ")),
        ));
    }
    let p0 = match quasiconvex_minimizers(h, u) {
        Ok(p0) => p0,
        Err(note) => return Ok(CheckReport::not_applicable(Definition::Cs, role, note)),
    };
    let uv = u.vertex_value();
    let n = h.num_edges();
    let value = |j: usize, q: f64| uv + h.eval_vertex(j, q);
    match role {
        Role::Sub => {
            let mut worst: Option<(f64, usize, usize, f64)> = None;
            for j in 0..n {
                for k in (j + 1)..n {
                    let (Some(lo), Some(pk)) = (d.edges[j].sup_lo, d.edges[k].sup_lo) else {
                        continue;
                    };
                    let hi = -pk;
                    if lo > hi {
                        continue;
                    }
                    for q in [lo, hi] {
                        let v = value(j, q);
                        if worst.is_none_or(|w| v > w.0 || v.is_nan()) {
                            worst = Some((v, j, k, q));
                        }
                    }
                }
            }
            Ok(match worst {
                Some((v, j, k, q)) => {
                    CheckReport::decided(Definition::Cs, role, v, tol, vec![j, k], q)
                }
                None => CheckReport::vacuous(
                    Definition::Cs,
                    role,
                    "no pair admits an upper test function",
                ),
            })
        }
        Role::Super => {
            let mut feasible = vec![None; n];
            // per j: the k with the smallest violation and its witness slope
            let mut per_edge: Vec<(f64, usize, f64)> = Vec::with_capacity(n);
            for j in 0..n {
                let mut best = (f64::INFINITY, j, f64::NAN);
                for k in (0..n).filter(|&k| k != j) {
                    let (viol, q) = match (d.edges[j].sub_hi, d.edges[k].sub_hi) {
                        (Some(hi), Some(dk)) if -dk <= hi => {
                            let q = p0[j].max(-dk).min(hi);
                            (-value(j, q), q)
                        }
                        _ => (f64::NEG_INFINITY, f64::NAN),
                    };
                    if feasible[j].is_none() && viol <= tol {
                        feasible[j] = Some(k);
                    }
                    if viol < best.0 {
                        best = (viol, k, q);
                    }
                }
                per_edge.push(best);
            }
            let (j, &(viol, k, q)) = per_edge
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
                .expect("at least two edges");
            let mut report = if viol == f64::NEG_INFINITY {
                CheckReport::vacuous(Definition::Cs, role, "no lower test function on any pair")
            } else {
                CheckReport::decided(Definition::Cs, role, viol, tol, vec![j, k], q)
            };
            if report.status == Status::Pass && feasible.iter().any(Option::is_none) {
                report.status = Status::Fail;
            }
            report.feasible_map = Some(feasible);
            Ok(report)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorReport {
    pub status: Status,
    pub worst_edge: usize,
    pub worst_node: usize,
    /// Signed residual `u + flux` at the worst node.
    pub worst_residual: f64,
    pub max_residual: f64,
    pub min_residual: f64,
}

impl InteriorReport {
    /// Signed violation of the interior inequality for `role`.
    pub fn violation(&self, role: Role) -> f64 {
        match role {
            Role::Sub => self.max_residual,
            Role::Super => -self.min_residual,
        }
    }
}

/// Godunov residual `u + g(D^- u, D^+ u)` at every node strictly inside an edge.
pub fn check_interior(u: &NetworkFunction, h: &Hamiltonian, tol: f64) -> Result<InteriorReport> {
    let grid = u.grid();
    if h.num_edges() != grid.num_edges() {
        return Err(Error::GridMismatch(
            "edge counts of function and Hamiltonian differ".into(),
        ));
    }
    let p0 = h.minimizers()?;
    let mut worst = (0, 0, 0.0f64);
    let (mut max_r, mut min_r) = (f64::NEG_INFINITY, f64::INFINITY);
    for j in 0..grid.num_edges() {
        let dy = grid.spacing(j);
        for i in 1..grid.nodes(j) {
            let ui = u.value(j, i);
            let pl = (ui - u.value(j, i - 1)) / dy;
            let pr = (u.value(j, i + 1) - ui) / dy;
            let r = ui + godunov_flux_with(h, j, grid.position(j, i), pl, pr, p0[j]);
            if r.abs() > worst.2.abs() || r.is_nan() {
                worst = (j, i, r);
            }
            max_r = max_r.max(r);
            min_r = min_r.min(r);
        }
    }
    if worst.2.is_nan() {
        (max_r, min_r) = (f64::NAN, f64::NAN);
    }
    let status = if worst.2.abs() <= tol {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(InteriorReport {
        status,
        worst_edge: worst.0,
        worst_node: worst.1,
        worst_residual: worst.2,
        max_residual: max_r,
        min_residual: min_r,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientBoundReport {
    pub edge: usize,
    /// Node counts from the coarsest scale down to the first node.
    pub scales: Vec<usize>,
    /// `H^j(v, (u^j(y_m) - u(v)) / y_m) + u(v)` at each scale.
    pub values: Vec<f64>,
    pub minimum: f64,
    pub status: Status,
}

/// Small-scale bound on the vertex quotients of a claimed subsolution along
/// edge `j`, at nodes `2^(depth-1), ..., 2, 1`.
pub fn check_quotient_bound(
    u: &NetworkFunction,
    h: &Hamiltonian,
    j: usize,
    depth: usize,
    tol: f64,
) -> Result<QuotientBoundReport> {
    let grid = u.grid();
    if j >= grid.num_edges() || j >= h.num_edges() {
        return Err(Error::EdgeOutOfRange {
            edge: j,
            num_edges: grid.num_edges(),
        });
    }
    if depth == 0 || depth > usize::BITS as usize || (1usize << (depth - 1)) > grid.nodes(j) {
        return Err(Error::BadOptions(format!(
            "depth {depth} needs more than the {} nodes of edge {j}",
            grid.nodes(j)
        )));
    }
    let uv = u.vertex_value();
    let scales: Vec<usize> = (0..depth).rev().map(|k| 1usize << k).collect();
    let values: Vec<f64> = scales
        .iter()
        .map(|&m| h.eval_vertex(j, (u.value(j, m) - uv) / grid.position(j, m)) + uv)
        .collect();
    let minimum = values.iter().copied().fold(f64::INFINITY, f64::min);
    let status = if minimum <= tol {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok(QuotientBoundReport {
        edge: j,
        scales,
        values,
        minimum,
        status,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifierReport {
    pub tolerance: f64,
    pub differentials: VertexDifferentials,
    pub checks: Vec<CheckReport>,
    pub interior: InteriorReport,
    pub quotient_bound: Vec<QuotientBoundReport>,
}

impl VerifierReport {
    pub fn get(&self, definition: Definition, role: Role) -> Option<&CheckReport> {
        self.checks
            .iter()
            .find(|c| c.definition == definition && c.role == role)
    }

    /// Every applicable junction check passes.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Full verdicts: every junction check in both roles combined with the
/// interior audit of the same role, plus the quotient bound on every edge.
/// The definitions ask for the viscosity inequalities inside the edges too;
/// without them a function rising along every edge would pass the pairwise
/// subsolution test for lack of admissible test functions.
pub fn verify(
    u: &NetworkFunction,
    h: &Hamiltonian,
    opts: &VerifierOptions,
) -> Result<VerifierReport> {
    let d = estimate_differentials(
        u,
        &opts.scales,
        opts.slope_tolerance,
        opts.divergence_threshold,
    )?;
    let tol = opts.tolerance;
    let interior = check_interior(u, h, tol)?;
    let mut checks = Vec::with_capacity(6);
    for role in [Role::Sub, Role::Super] {
        checks.push(check_acct(u, &d, h, role, tol)?.with_interior(&interior, tol));
        checks.push(check_imz(u, &d, h, role, tol)?.with_interior(&interior, tol));
        checks.push(check_cs(u, &d, h, role, tol)?.with_interior(&interior, tol));
    }
    let quotient_bound = (0..h.num_edges())
        .map(|j| {
            let depth = opts
                .quotient_depth
                .min(usize::BITS as usize - 1 - u.grid().nodes(j).leading_zeros() as usize + 1);
            check_quotient_bound(u, h, j, depth, tol)
        })
        .collect::<Result<_>>()?;
    Ok(VerifierReport {
        tolerance: tol,
        differentials: d,
        checks,
        interior,
        quotient_bound,
    })
}
