//! Simulation toolkit for randomness-driven qubit decoherence and control.
//!
//! The crate covers five constructions, each computed exactly (closed form,
//! recursion, or rational arithmetic) and cross-checked against seeded,
//! schedule-independent Monte Carlo:
//!
//! * [`qubit`]: single-qubit states, unitaries, Kraus channels, Choi-matrix
//!   positivity and the coherence-booster counterexample.
//! * [`iid`]: independent phase kicks described by their characteristic
//!   function.
//! * [`memory`]: correlated phase kicks whose random combination halves the
//!   decay rate.
//! * [`dissipative`]: amplitude damping mixed with dephasing, averaged over
//!   Gaussian parameter noise.
//! * [`parrondo`]: vector-rotating wheel games whose random mixture wins.
//! * [`grover`]: a search game where random alternation of two reflections
//!   realises Grover's iterate.
//!
//! The [`cli`] module implements the `stochq` binary and the JSON result
//! envelope shared with the C bindings.

pub mod cli;
pub mod dissipative;
mod error;
pub mod grover;
pub mod iid;
pub mod mc;
pub mod memory;
pub mod parrondo;
pub mod quadrature;
pub mod qubit;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Library version embedded in every result envelope.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
