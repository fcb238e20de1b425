use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("a star network needs at least two edges, got {0}")]
    TooFewEdges(usize),
    #[error("edge {edge} has non-positive or non-finite length {length}")]
    BadLength { edge: usize, length: f64 },
    #[error("edges {first} and {second} share the same direction")]
    DuplicateDirection { first: usize, second: usize },
    #[error("edge index {edge} out of range for a network with {num_edges} edges")]
    EdgeOutOfRange { edge: usize, num_edges: usize },
    #[error("parameter y = {y} outside [0, {length}] on edge {edge}")]
    ParameterOutOfRange { edge: usize, y: f64, length: f64 },
    #[error("node index {node} out of range on edge {edge} ({nodes} nodes)")]
    NodeOutOfRange {
        edge: usize,
        node: usize,
        nodes: usize,
    },
    #[error("{side} quotient does not exist at node {node} of edge {edge}")]
    NoQuotient {
        edge: usize,
        node: usize,
        side: &'static str,
    },
    #[error("edge {edge} needs at least {min} nodes, got {got}")]
    TooFewNodes { edge: usize, min: usize, got: usize },
    #[error("grid function values are not finite ({0})")]
    NonFinite(String),
    #[error("grids do not match: {0}")]
    GridMismatch(String),
    #[error("edge {edge} has an empty action list")]
    EmptyActions { edge: usize },
    #[error("invalid Hamiltonian parameter: {0}")]
    BadHamiltonian(String),
    #[error("minimum of H on edge {edge} sits on the boundary of the window [-{p_max}, {p_max}]; increase p_max")]
    WindowTooSmall { edge: usize, p_max: f64 },
    #[error("control form required on edge {edge}")]
    ControlFormRequired { edge: usize },
    #[error("assumption check failed: {0}")]
    Assumption(String),
    #[error("invalid solver options: {0}")]
    BadOptions(String),
    #[error("bisection bracket [-{bound}, {bound}] does not contain the root at {location}")]
    BracketFailure { location: String, bound: f64 },
    #[error("problem file: {0}")]
    Problem(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
