//! Simulation, recursive least-squares estimation, and excitation
//! diagnostics for nonlinear autoregressive models.
//!
//! The toolkit simulates y_{t+1} = θᵀφ(y_t, …, y_{t−n+1}) + w_{t+1} for a
//! known regressor map φ, estimates θ online with the (optionally truncated)
//! recursive least-squares algorithm, and tracks the quantities that govern
//! when the estimates converge: the minimal eigenvalue of the information
//! matrix, the compact-set visit counts N_t(M) it grows with, and the
//! excitation geometry of φ (measure infima over unit directions, level-set
//! cell counts, vanishing boundary covers, and the volume-preserving shear
//! that links noise boxes to window boxes).
//!
//! Everything is deterministic given a seed; replicate streams derive from a
//! base seed, and identical configurations produce byte-identical artifacts.

// `!(x > 0.0)` checks reject NaN; the suggested `x <= 0.0` would accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops in the matrix and lattice kernels walk several arrays in step.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod estimator;
pub mod excitation;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod runner;
pub mod sim;

pub use error::{Error, Result};
