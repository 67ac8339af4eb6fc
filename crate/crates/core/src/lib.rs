//! Compiler core for the neural-network specification language.
//!
//! The pipeline runs frontend, network type analysis, normalisation, query
//! compilation, and finally one of the backends (the Marabou query writer
//! or the theorem-prover interface renderer).

pub mod diagnostics;
pub mod expr;
pub mod marabou;
pub mod frontend;
pub mod itp;
pub mod network;
pub mod normalise;
pub mod query;
pub mod scalar;

pub use scalar::{Rational, Scalar};
pub use network::Network;
