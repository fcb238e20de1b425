//! Python bindings: problems, the three solvers and the verifier.

use hjnet::problem::{solution_from_csv, solution_to_csv};
use hjnet::solvers::{self, oracle_dp};
use hjnet::verifier::{self, VerifierOptions};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: hjnet::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_dict<'py>(py: Python<'py>, json: String) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (json,))
}

/// A star network, its grid, Hamiltonian and solver options.
#[pyclass(name = "Problem", module = "hjnet", skip_from_py_object)]
#[derive(Clone)]
struct PyProblem {
    inner: hjnet::Problem,
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        hjnet::Problem::from_json(text)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        hjnet::Problem::load(path)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    /// Same problem with every edge's node count multiplied by `factor`.
    fn refined(&self, factor: usize) -> PyResult<Self> {
        self.inner
            .refined(factor)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.metadata.name.clone()
    }

    #[getter]
    fn num_edges(&self) -> usize {
        self.inner.grid.num_edges()
    }

    #[getter]
    fn nodes_per_edge(&self) -> Vec<usize> {
        self.inner.grid.nodes_per_edge().to_vec()
    }

    #[getter]
    fn max_spacing(&self) -> f64 {
        self.inner.grid.max_spacing()
    }

    #[getter]
    fn is_control(&self) -> bool {
        self.inner.hamiltonian.is_control()
    }

    fn hamiltonian(&self, edge: usize, x: f64, p: f64) -> PyResult<f64> {
        self.check_edge(edge)?;
        Ok(self.inner.hamiltonian.eval(edge, x, p))
    }

    /// Non-increasing envelope of the vertex Hamiltonian of `edge`.
    fn h_minus(&self, edge: usize, p: f64) -> PyResult<f64> {
        self.check_edge(edge)?;
        self.inner.hamiltonian.h_minus(edge, p).map_err(err)
    }

    fn p0(&self, edge: usize) -> PyResult<f64> {
        self.check_edge(edge)?;
        self.inner.hamiltonian.p0(edge).map_err(err)
    }

    /// Sets edge `edge` to a Dirichlet end with value `value`, or back to a state constraint with `None`.
    #[pyo3(signature = (edge, value))]
    fn set_exit(&mut self, edge: usize, value: Option<f64>) -> PyResult<()> {
        self.check_edge(edge)?;
        let n = self.inner.grid.num_edges();
        let b = &mut self.inner.options.boundary;
        if b.is_empty() {
            *b = vec![solvers::Boundary::StateConstraint; n];
        }
        b[edge] = match value {
            Some(value) => solvers::Boundary::Dirichlet { value },
            None => solvers::Boundary::StateConstraint,
        };
        Ok(())
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(name={:?}, nodes_per_edge={:?})",
            self.inner.metadata.name,
            self.inner.grid.nodes_per_edge()
        )
    }
}

impl PyProblem {
    fn check_edge(&self, edge: usize) -> PyResult<()> {
        let n = self.inner.grid.num_edges();
        if edge < n {
            Ok(())
        } else {
            Err(err(hjnet::Error::EdgeOutOfRange { edge, num_edges: n }))
        }
    }
}

/// Nodal values on a network grid.
#[pyclass(name = "Solution", module = "hjnet", skip_from_py_object)]
#[derive(Clone)]
struct PySolution {
    inner: hjnet::NetworkFunction,
}

#[pymethods]
impl PySolution {
    #[staticmethod]
    fn from_csv(problem: &PyProblem, text: &str) -> PyResult<Self> {
        solution_from_csv(&problem.inner.grid, text)
            .map(|inner| Self { inner })
            .map_err(err)
    }

    fn to_csv(&self) -> PyResult<String> {
        solution_to_csv(&self.inner).map_err(err)
    }

    #[getter]
    fn vertex_value(&self) -> f64 {
        self.inner.vertex_value()
    }

    /// Values on `edge` from the vertex (node 0) to the outer end.
    fn edge_values(&self, edge: usize) -> PyResult<Vec<f64>> {
        let g = self.inner.grid();
        if edge >= g.num_edges() {
            return Err(err(hjnet::Error::EdgeOutOfRange {
                edge,
                num_edges: g.num_edges(),
            }));
        }
        Ok((0..=g.nodes(edge))
            .map(|i| self.inner.value(edge, i))
            .collect())
    }

    fn positions(&self, edge: usize) -> PyResult<Vec<f64>> {
        let g = self.inner.grid();
        if edge >= g.num_edges() {
            return Err(err(hjnet::Error::EdgeOutOfRange {
                edge,
                num_edges: g.num_edges(),
            }));
        }
        Ok((0..=g.nodes(edge)).map(|i| g.position(edge, i)).collect())
    }

    /// Piecewise-linear value at parameter `y` of `edge`.
    fn __call__(&self, edge: usize, y: f64) -> PyResult<f64> {
        let g = self.inner.grid();
        if edge >= g.num_edges() {
            return Err(err(hjnet::Error::EdgeOutOfRange {
                edge,
                num_edges: g.num_edges(),
            }));
        }
        if !(0.0..=g.length(edge)).contains(&y) {
            return Err(err(hjnet::Error::ParameterOutOfRange {
                edge,
                y,
                length: g.length(edge),
            }));
        }
        Ok(self.inner.interpolate(edge, y))
    }

    fn shifted(&self, c: f64) -> Self {
        Self {
            inner: self.inner.map(|v| v + c),
        }
    }

    fn with_vertex_value(&self, v: f64) -> Self {
        let mut inner = self.inner.clone();
        inner.set_vertex_value(v);
        Self { inner }
    }

    /// Sup-norm distance to another solution on the same grid.
    fn distance(&self, other: &PySolution) -> PyResult<f64> {
        solvers::compare(&self.inner, &other.inner)
            .map(|c| c.sup_norm)
            .map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(vertex_value={}, nodes_per_edge={:?})",
            self.inner.vertex_value(),
            self.inner.grid().nodes_per_edge()
        )
    }
}

#[pyclass(name = "SolveResult", module = "hjnet", get_all)]
struct PySolveResult {
    solution: Py<PySolution>,
    iterations: usize,
    residual: Option<f64>,
    converged: bool,
}

fn wrap(py: Python<'_>, r: hjnet::solvers::SolveResult) -> PyResult<PySolveResult> {
    Ok(PySolveResult {
        solution: Py::new(py, PySolution { inner: r.solution })?,
        iterations: r.iterations_used,
        residual: Some(r.final_residual),
        converged: r.converged,
    })
}

/// Godunov scheme with the flux-limited vertex condition.
#[pyfunction]
#[pyo3(signature = (problem, max_iterations = None))]
fn solve_imz(
    py: Python<'_>,
    problem: &PyProblem,
    max_iterations: Option<usize>,
) -> PyResult<PySolveResult> {
    let p = &problem.inner;
    let mut opts = p.options.clone();
    if let Some(k) = max_iterations {
        opts.max_iterations = k;
    }
    let r = py
        .detach(|| solvers::solve_imz(&p.hamiltonian, &p.grid, &opts))
        .map_err(err)?;
    wrap(py, r)
}

/// Semi-Lagrangian scheme on the control form.
#[pyfunction]
#[pyo3(signature = (problem, time_step = None))]
fn solve_acct(
    py: Python<'_>,
    problem: &PyProblem,
    time_step: Option<f64>,
) -> PyResult<PySolveResult> {
    let p = &problem.inner;
    let mut opts = p.options.clone();
    opts.sl_time_step = time_step.or(opts.sl_time_step);
    let r = py
        .detach(|| solvers::solve_acct(&p.hamiltonian, &p.grid, &opts))
        .map_err(err)?;
    wrap(py, r)
}

/// Brute-force dynamic programming on the problem's own grid.
#[pyfunction]
#[pyo3(signature = (problem, time_step = None, iterations = None))]
fn solve_oracle(
    py: Python<'_>,
    problem: &PyProblem,
    time_step: Option<f64>,
    iterations: Option<usize>,
) -> PyResult<PySolveResult> {
    let p = &problem.inner;
    let h = time_step.unwrap_or(p.oracle.time_step);
    let k = iterations.unwrap_or_else(|| {
        if time_step.is_some() {
            solvers::default_oracle_iterations(h)
        } else {
            p.oracle.iterations()
        }
    });
    let u = py
        .detach(|| oracle_dp(&p.hamiltonian, &p.grid, h, k, &p.options.boundary))
        .map_err(err)?;
    Ok(PySolveResult {
        solution: Py::new(py, PySolution { inner: u })?,
        iterations: k,
        residual: None,
        converged: true,
    })
}

/// Full verifier report as a dict; `tol` defaults to five grid spacings.
#[pyfunction]
#[pyo3(signature = (problem, solution, tol = None))]
fn verify<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    solution: &PySolution,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let p = &problem.inner;
    let tol = tol.unwrap_or(5.0 * p.grid.max_spacing());
    if solution.inner.grid() != &p.grid {
        return Err(err(hjnet::Error::GridMismatch(
            "solution does not live on the problem grid".into(),
        )));
    }
    let report = verifier::verify(
        &solution.inner,
        &p.hamiltonian,
        &VerifierOptions::with_tolerance(tol),
    )
    .map_err(err)?;
    to_dict(py, report.to_json().map_err(err)?)
}

#[pymodule]
#[pyo3(name = "hjnet")]
fn hjnet_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(solve_imz, m)?)?;
    m.add_function(wrap_pyfunction!(solve_acct, m)?)?;
    m.add_function(wrap_pyfunction!(solve_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
