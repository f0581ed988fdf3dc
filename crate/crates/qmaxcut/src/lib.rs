//! Training and benchmarking toolkit for the Quantum Approximate Optimization
//! Algorithm on MaxCut.
//!
//! The crate simulates QAOA circuits exactly on a dense state vector, trains
//! protocols with analytic gradients and Adam, benchmarks the results against
//! the Goemans-Williamson algorithm and a brute-force oracle, and compiles
//! the circuits to a linear qubit array with exact CNOT accounting.
//!
//! Modules:
//! - [`graph`]: graph model, Erdős–Rényi sampling, exact MaxCut, file format
//! - [`sim`]: state vectors, gates, expectations, sampling, fidelity
//! - [`qaoa`]: the QAOA ansatz and its analytic gradient
//! - [`gw`]: low-rank semidefinite relaxation plus hyperplane rounding
//! - [`train`]: protocol initialization, Adam ascent, evaluation, checkpoints
//! - [`compile`]: all-to-all and swap-network compilation, CNOT counts
//!
//! All randomness flows through the ChaCha8 generator seeded explicitly, so
//! every sampled graph, initialization, training run, and rounding sweep is
//! reproducible from its seed.

pub mod compile;
pub mod error;
pub mod graph;
pub mod gw;
pub mod qaoa;
pub mod sim;
pub mod train;

pub use error::{Error, Result};
pub use graph::{brute_force_maxcut, cut_value, sample_erdos_renyi, CutResult, Graph};
pub use gw::{gw_maxcut, GwResult};
pub use qaoa::{batch_expected_cut, evolve, expected_cut, gradient, Protocol};
pub use sim::{expectation_cut, fidelity, sample_bitstrings, Gate, StateVector};
pub use train::{evaluate, init_protocol, train, TrainConfig, TrainRecord};
