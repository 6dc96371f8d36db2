//! Simulator and optimizer for joint covert + information-theoretically
//! secure transmission in a six-node wireless topology with a friendly
//! jammer.
//!
//! The crate splits into the physical model (geometry, fading, rates), the
//! warden's detection math with its Monte Carlo oracle, the per-realization
//! rate optimizer with a brute-force grid oracle, the Monte Carlo
//! experiment harness, and a deterministic CLI front end.

pub mod cli;
pub mod config;
pub mod detection;
pub mod experiments;
pub mod model;
pub mod optimizer;
pub mod output;
pub mod validate;
