//! Star-shaped networks, per-edge uniform grids and grid functions.
//!
//! A star is one vertex at the origin and `N >= 2` straight edges
//! `e_j = (0, l_j) * eta_j`. Every edge is parametrized by arclength from the
//! vertex, so `y = 0` is the vertex on every edge. Edge indices are 0-based.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two directions closer than this (in radians, modulo 2pi) are the same direction.
const ANGLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub length: f64,
    /// Direction of the edge in radians.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub length: f64,
    pub angle: f64,
    pub direction: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct StarNetwork {
    edges: Vec<Edge>,
}

impl StarNetwork {
    /// Builds a star from `(length, angle)` pairs. Edges keep the given order.
    pub fn new(specs: &[EdgeSpec]) -> Result<Self> {
        if specs.len() < 2 {
            return Err(Error::TooFewEdges(specs.len()));
        }
        for (j, s) in specs.iter().enumerate() {
            if !(s.length.is_finite() && s.length > 0.0) {
                return Err(Error::BadLength {
                    edge: j,
                    length: s.length,
                });
            }
            if !s.angle.is_finite() {
                return Err(Error::BadHamiltonian(format!(
                    "edge {j} has a non-finite angle"
                )));
            }
        }
        for j in 0..specs.len() {
            for k in (j + 1)..specs.len() {
                let diff = (specs[j].angle - specs[k].angle).rem_euclid(TAU);
                if diff < ANGLE_EPS || TAU - diff < ANGLE_EPS {
                    return Err(Error::DuplicateDirection {
                        first: j,
                        second: k,
                    });
                }
            }
        }
        let edges = specs
            .iter()
            .map(|s| Edge {
                length: s.length,
                angle: s.angle,
                direction: [s.angle.cos(), s.angle.sin()],
            })
            .collect();
        Ok(Self { edges })
    }

    /// Symmetric star with `n` edges of equal length.
    pub fn symmetric(n: usize, length: f64) -> Result<Self> {
        let specs: Vec<_> = (0..n)
            .map(|j| EdgeSpec {
                length,
                angle: TAU * j as f64 / n as f64,
            })
            .collect();
        Self::new(&specs)
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, j: usize) -> Result<&Edge> {
        self.edges.get(j).ok_or(Error::EdgeOutOfRange {
            edge: j,
            num_edges: self.edges.len(),
        })
    }

    pub fn specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec {
                length: e.length,
                angle: e.angle,
            })
            .collect()
    }

    /// Planar image `y * eta_j` of the parameter `y` on edge `j`.
    pub fn param_to_point(&self, j: usize, y: f64) -> Result<[f64; 2]> {
        let e = self.edge(j)?;
        if !(0.0..=e.length).contains(&y) {
            return Err(Error::ParameterOutOfRange {
                edge: j,
                y,
                length: e.length,
            });
        }
        Ok([y * e.direction[0], y * e.direction[1]])
    }
}

/// Uniform grid on every edge. Node 0 of each edge is the shared vertex;
/// nodes `1..=M_j` sit at `y = i * l_j / M_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGrid {
    network: StarNetwork,
    nodes: Vec<usize>,
}

impl NetworkGrid {
    pub fn new(network: StarNetwork, nodes_per_edge: Vec<usize>) -> Result<Self> {
        if nodes_per_edge.len() != network.num_edges() {
            return Err(Error::GridMismatch(format!(
                "{} node counts for {} edges",
                nodes_per_edge.len(),
                network.num_edges()
            )));
        }
        for (j, &m) in nodes_per_edge.iter().enumerate() {
            if m < 2 {
                return Err(Error::TooFewNodes {
                    edge: j,
                    min: 2,
                    got: m,
                });
            }
        }
        Ok(Self {
            network,
            nodes: nodes_per_edge,
        })
    }

    pub fn uniform(network: StarNetwork, nodes: usize) -> Result<Self> {
        let n = network.num_edges();
        Self::new(network, vec![nodes; n])
    }

    /// Grid whose spacing on every edge is as close as possible to `dy`.
    pub fn with_spacing(network: StarNetwork, dy: f64) -> Result<Self> {
        let nodes = network
            .edges()
            .iter()
            .map(|e| (e.length / dy).round().max(2.0) as usize)
            .collect();
        Self::new(network, nodes)
    }

    pub fn network(&self) -> &StarNetwork {
        &self.network
    }

    pub fn num_edges(&self) -> usize {
        self.nodes.len()
    }

    /// `M_j`, the number of non-vertex nodes on edge `j`.
    pub fn nodes(&self, j: usize) -> usize {
        self.nodes[j]
    }

    pub fn nodes_per_edge(&self) -> &[usize] {
        &self.nodes
    }

    pub fn length(&self, j: usize) -> f64 {
        self.network.edges[j].length
    }

    pub fn spacing(&self, j: usize) -> f64 {
        self.length(j) / self.nodes[j] as f64
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.num_edges())
            .map(|j| self.spacing(j))
            .fold(0.0, f64::max)
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.num_edges())
            .map(|j| self.spacing(j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Parameter of node `i` on edge `j`; the last node is exactly `l_j`.
    pub fn position(&self, j: usize, i: usize) -> f64 {
        if i == self.nodes[j] {
            self.length(j)
        } else {
            i as f64 * self.spacing(j)
        }
    }

    /// Same network, every edge refined by `factor`.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(
            self.network.clone(),
            self.nodes.iter().map(|m| m * factor).collect(),
        )
    }

    pub fn total_nodes(&self) -> usize {
        1 + self.nodes.iter().sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Backward,
    Forward,
}

/// A function on the grid. The vertex value is stored once, so `u^j(0)` is the
/// same for every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFunction {
    grid: NetworkGrid,
    vertex: f64,
    /// `edge_values[j][i - 1]` is the value at node `i` of edge `j`.
    edge_values: Vec<Vec<f64>>,
}

impl NetworkFunction {
    pub fn new(grid: NetworkGrid, vertex: f64, edge_values: Vec<Vec<f64>>) -> Result<Self> {
        if edge_values.len() != grid.num_edges() {
            return Err(Error::GridMismatch(format!(
                "{} value arrays for {} edges",
                edge_values.len(),
                grid.num_edges()
            )));
        }
        for (j, vals) in edge_values.iter().enumerate() {
            if vals.len() != grid.nodes(j) {
                return Err(Error::GridMismatch(format!(
                    "edge {j}: {} values for {} nodes",
                    vals.len(),
                    grid.nodes(j)
                )));
            }
        }
        let f = Self {
            grid,
            vertex,
            edge_values,
        };
        f.check_finite()?;
        Ok(f)
    }

    pub fn constant(grid: NetworkGrid, c: f64) -> Self {
        let edge_values = grid.nodes.iter().map(|&m| vec![c; m]).collect();
        Self {
            grid,
            vertex: c,
            edge_values,
        }
    }

    /// Samples `f(j, y)` at every node. `f(j, 0)` is only evaluated for `j = 0`.
    pub fn from_fn(grid: NetworkGrid, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let vertex = f(0, 0.0);
        let edge_values = (0..grid.num_edges())
            .map(|j| {
                (1..=grid.nodes(j))
                    .map(|i| f(j, grid.position(j, i)))
                    .collect()
            })
            .collect();
        Self::new(grid, vertex, edge_values)
    }

    pub fn check_finite(&self) -> Result<()> {
        if !self.vertex.is_finite() {
            return Err(Error::NonFinite("vertex".into()));
        }
        for (j, vals) in self.edge_values.iter().enumerate() {
            if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("edge {j}, node {}", i + 1)));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> &NetworkGrid {
        &self.grid
    }

    pub fn vertex_value(&self) -> f64 {
        self.vertex
    }

    pub fn set_vertex_value(&mut self, v: f64) {
        self.vertex = v;
    }

    pub fn edge_values(&self, j: usize) -> &[f64] {
        &self.edge_values[j]
    }

    pub fn edge_values_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.edge_values[j]
    }

    /// Value at node `i` of edge `j`; node 0 is the vertex.
    #[inline]
    pub fn value(&self, j: usize, i: usize) -> f64 {
        if i == 0 {
            self.vertex
        } else {
            self.edge_values[j][i - 1]
        }
    }

    #[inline]
    pub fn set(&mut self, j: usize, i: usize, v: f64) {
        if i == 0 {
            self.vertex = v;
        } else {
            self.edge_values[j][i - 1] = v;
        }
    }

    /// Piecewise-linear interpolation along edge `j` at parameter `y`
    /// (clamped to `[0, l_j]`).
    pub fn interpolate(&self, j: usize, y: f64) -> f64 {
        let m = self.grid.nodes(j);
        let dy = self.grid.spacing(j);
        let s = (y / dy).clamp(0.0, m as f64);
        let i = (s.floor() as usize).min(m - 1);
        let t = s - i as f64;
        (1.0 - t) * self.value(j, i) + t * self.value(j, i + 1)
    }

    /// One-sided difference quotient with respect to the edge parameter.
    pub fn discrete_derivative(&self, j: usize, i: usize, side: Side) -> Result<f64> {
        let n = self.grid.num_edges();
        if j >= n {
            return Err(Error::EdgeOutOfRange {
                edge: j,
                num_edges: n,
            });
        }
        let m = self.grid.nodes(j);
        if i > m {
            return Err(Error::NodeOutOfRange {
                edge: j,
                node: i,
                nodes: m,
            });
        }
        let dy = self.grid.spacing(j);
        match side {
            Side::Forward if i == m => Err(Error::NoQuotient {
                edge: j,
                node: i,
                side: "forward",
            }),
            Side::Backward if i == 0 => Err(Error::NoQuotient {
                edge: j,
                node: i,
                side: "backward",
            }),
            Side::Forward => Ok((self.value(j, i + 1) - self.value(j, i)) / dy),
            Side::Backward => Ok((self.value(j, i) - self.value(j, i - 1)) / dy),
        }
    }

    /// Samples this function at the nodes of `grid`, which must be the same network.
    pub fn resample(&self, grid: &NetworkGrid) -> Result<Self> {
        if grid.network() != self.grid.network() {
            return Err(Error::GridMismatch("different networks".into()));
        }
        let edge_values = (0..grid.num_edges())
            .map(|j| {
                (1..=grid.nodes(j))
                    .map(|i| self.interpolate(j, grid.position(j, i)))
                    .collect()
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            vertex: self.vertex,
            edge_values,
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            vertex: f(self.vertex),
            edge_values: self
                .edge_values
                .iter()
                .map(|v| v.iter().map(|&x| f(x)).collect())
                .collect(),
        }
    }

    /// Iterates `(edge, node, value)` over every node, the vertex listed once as `(0, 0, u(v))`.
    pub fn iter_nodes(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        std::iter::once((0, 0, self.vertex)).chain(
            self.edge_values
                .iter()
                .enumerate()
                .flat_map(|(j, vals)| vals.iter().enumerate().map(move |(i, &v)| (j, i + 1, v))),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.iter_nodes()
            .map(|(_, _, v)| v.abs())
            .fold(0.0, f64::max)
    }
}
