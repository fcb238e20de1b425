//! Stationary Hamilton-Jacobi equations `u + H(x, Du) = 0` on star-shaped networks.
//!
//! The crate provides the network geometry ([`network`]), per-edge
//! Hamiltonians with the vertex flux limiter and outgoing action sets
//! ([`hamiltonian`]), two independent solvers plus a brute-force dynamic
//! programming oracle ([`solvers`]), and audits of the three vertex
//! conditions for viscosity solutions ([`verifier`]).

pub mod error;
pub mod hamiltonian;
pub mod network;
pub mod problem;
pub mod solvers;
pub mod verifier;

pub use error::{Error, Result};
pub use hamiltonian::{
    Action, Assumption, ClosedForm, ControlSet, EdgeHamiltonian, FlSet, Hamiltonian, Thresholds,
};
pub use network::{EdgeSpec, NetworkFunction, NetworkGrid, Side, StarNetwork};
pub use problem::{Problem, ProblemFile};
