//! Grover-based search for the densest k-subgraph problem.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: graph model, random generators, exhaustive reference solver and
//!   the QUBO penalty formulation.
//! - [`sim`]: a dense statevector simulator over named registers.
//! - [`circuits`]: gate-level builders for Dicke-state preparation, the QFT
//!   edge counter with its folded two's-complement comparator, the phase
//!   oracle, the Dicke-axis diffusion operator and resource accounting.
//! - [`search`]: the adaptive-threshold driver with randomised iteration
//!   counts, plus the statevector-backed executor.
//! - [`baselines`]: black-box Grover emulator, brute force and simulated
//!   annealing with a vertex tabu list.
//! - [`bench`]: convergence and scaling experiments, two-level bootstrap and
//!   power-law fitting.
//! - [`cli`]: the `dks` command-line front end.
//!
//! Bit convention: vertex `i` is bit `i` of a subset mask, and in the
//! statevector the vertex register occupies the low-order qubits.

pub mod baselines;
pub mod bench;
pub mod circuits;
pub mod cli;
pub mod error;
pub mod graph;
pub mod rng;
pub mod search;
pub mod sim;

pub use error::{DksError, Result};
pub use graph::{Graph, QuboModel, VertexSubset};
