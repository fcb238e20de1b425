//! JSON problem files and the solution CSV format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{EdgeHamiltonian, Hamiltonian};
use crate::network::{EdgeSpec, NetworkFunction, NetworkGrid, StarNetwork};
use crate::solvers::{default_oracle_iterations, SolveOptions};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Metadata {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSection {
    pub edges: Vec<EdgeSpec>,
}

/// One node count for every edge, or one per edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeCounts {
    Uniform(usize),
    PerEdge(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSection {
    pub nodes_per_edge: NodeCounts,
}

/// Either `edges` (one entry per edge) or `default` (shared by all edges).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    pub p_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeHamiltonian>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<EdgeHamiltonian>,
}

/// Parameters of the brute-force reference solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleOptions {
    /// Node-count multiplier of the oracle grid.
    pub refinement: usize,
    pub time_step: f64,
    /// Defaults to enough sweeps for `(1 - h)^k <= 1e-10`.
    pub iterations: Option<usize>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            refinement: 4,
            time_step: 1e-3,
            iterations: None,
        }
    }
}

impl OracleOptions {
    pub fn iterations(&self) -> usize {
        self.iterations
            .unwrap_or_else(|| default_oracle_iterations(self.time_step))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub schema_version: u32,
    #[serde(default)]
    pub metadata: Metadata,
    pub network: NetworkSection,
    pub grid: GridSection,
    pub hamiltonian: HamiltonianSection,
    #[serde(default)]
    pub options: SolveOptions,
    #[serde(default)]
    pub oracle: OracleOptions,
}

/// A validated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub metadata: Metadata,
    pub grid: NetworkGrid,
    pub hamiltonian: Hamiltonian,
    pub options: SolveOptions,
    pub oracle: OracleOptions,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Problem(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn build(&self) -> Result<Problem> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Problem(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let network = StarNetwork::new(&self.network.edges)?;
        let n = network.num_edges();
        let counts = match &self.grid.nodes_per_edge {
            NodeCounts::Uniform(m) => vec![*m; n],
            NodeCounts::PerEdge(v) if v.len() == n => v.clone(),
            NodeCounts::PerEdge(v) => {
                return Err(Error::Problem(format!(
                    "grid.nodes_per_edge has {} entries for {n} edges",
                    v.len()
                )))
            }
        };
        let grid = NetworkGrid::new(network, counts)?;
        let h = &self.hamiltonian;
        let edges = match (&h.edges, &h.default) {
            (Some(e), None) if e.len() == n => e.clone(),
            (Some(e), None) => {
                return Err(Error::Problem(format!(
                    "hamiltonian.edges has {} entries for {n} edges",
                    e.len()
                )))
            }
            (None, Some(d)) => vec![d.clone(); n],
            _ => {
                return Err(Error::Problem(
                    "hamiltonian needs exactly one of `edges` and `default`".into(),
                ))
            }
        };
        let hamiltonian = Hamiltonian::new(edges, h.p_max)?;
        self.options.validate(n)?;
        if self.oracle.refinement == 0 {
            return Err(Error::Problem("oracle.refinement must be positive".into()));
        }
        Ok(Problem {
            metadata: self.metadata.clone(),
            grid,
            hamiltonian,
            options: self.options.clone(),
            oracle: self.oracle.clone(),
        })
    }
}

impl Problem {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        ProblemFile::load(path)?.build()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ProblemFile::from_json(text)?.build()
    }

    /// Same problem on a grid with `factor` times as many nodes per edge.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Ok(Self {
            grid: self.grid.refined(factor)?,
            ..self.clone()
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    edge_index: usize,
    node_index: usize,
    y: f64,
    point_x: f64,
    point_y: f64,
    u: f64,
}

/// Writes `u` as CSV, one row per edge node; the vertex appears as node 0 of
/// every edge. Values use 17 significant digits so reading back is exact.
pub fn write_solution_csv<W: std::io::Write>(u: &NetworkFunction, out: W) -> Result<()> {
    let grid = u.grid();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["edge_index", "node_index", "y", "point_x", "point_y", "u"])?;
    for j in 0..grid.num_edges() {
        for i in 0..=grid.nodes(j) {
            let y = grid.position(j, i);
            let [px, py] = grid.network().param_to_point(j, y)?;
            let fields = [y, px, py, u.value(j, i)].map(|v| format!("{v:.16e}"));
            w.write_record([
                j.to_string(),
                i.to_string(),
                fields[0].clone(),
                fields[1].clone(),
                fields[2].clone(),
                fields[3].clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn solution_to_csv(u: &NetworkFunction) -> Result<String> {
    let mut buf = Vec::new();
    write_solution_csv(u, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ascii"))
}

/// Reads a solution written by [`write_solution_csv`] onto `grid`. Every
/// node must appear exactly once per edge and all vertex rows must agree.
pub fn read_solution_csv<R: std::io::Read>(
    grid: &NetworkGrid,
    input: R,
) -> Result<NetworkFunction> {
    let mut vertex: Option<f64> = None;
    let mut values: Vec<Vec<Option<f64>>> = (0..grid.num_edges())
        .map(|j| vec![None; grid.nodes(j)])
        .collect();
    let mut reader = csv::Reader::from_reader(input);
    for (line, row) in reader.deserialize::<CsvRow>().enumerate() {
        let row = row?;
        let at = || format!("row {}", line + 2);
        if row.edge_index >= grid.num_edges() || row.node_index > grid.nodes(row.edge_index) {
            return Err(Error::GridMismatch(format!(
                "{}: node ({}, {}) is not on the grid",
                at(),
                row.edge_index,
                row.node_index
            )));
        }
        if row.node_index == 0 {
            match vertex {
                Some(v) if v != row.u => {
                    return Err(Error::GridMismatch(format!(
                        "{}: vertex value {} disagrees with {v}",
                        at(),
                        row.u
                    )))
                }
                _ => vertex = Some(row.u),
            }
            continue;
        }
        let slot = &mut values[row.edge_index][row.node_index - 1];
        if slot.is_some() {
            return Err(Error::GridMismatch(format!(
                "{}: duplicate node ({}, {})",
                at(),
                row.edge_index,
                row.node_index
            )));
        }
        *slot = Some(row.u);
    }
    let vertex = vertex.ok_or_else(|| Error::GridMismatch("no vertex row".into()))?;
    let edges = values
        .into_iter()
        .enumerate()
        .map(|(j, vals)| {
            vals.into_iter()
                .enumerate()
                .map(|(i, v)| {
                    v.ok_or_else(|| Error::GridMismatch(format!("missing node ({j}, {})", i + 1)))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    NetworkFunction::new(grid.clone(), vertex, edges)
}

pub fn solution_from_csv(grid: &NetworkGrid, text: &str) -> Result<NetworkFunction> {
    read_solution_csv(grid, text.as_bytes())
}
