//! Parameter identification for the two-branch (2RC) equivalent circuit
//! model of lithium-ion cells.
//!
//! - [`ecm`]: circuit parameters, OCV polynomials and the discrete simulator.
//! - [`dataset`]: Battery Archive CSV ingestion and discharge-window extraction.
//! - [`optimize`]: the MSE objective plus least squares, particle swarm,
//!   simulated annealing and genetic optimizers.
//! - [`bench`]: method-by-segment benchmark runs and their reports.

pub mod bench;
pub mod dataset;
pub mod ecm;
mod error;
pub mod kv;
pub mod optimize;
pub mod synthetic;

pub use error::{Error, Result};
