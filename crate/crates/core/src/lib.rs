//! Population-level microsimulation of ozone-induced FEV1 decrements with
//! bounded between- and within-person variability.
//!
//! The crate pairs a Monte Carlo engine with a closed-form oracle for the
//! zero-ozone case, so that simulated risks can be checked against exact
//! values. See the `examples/` directory for entry points.

pub mod cli;
pub mod config;
pub mod engine;
pub mod er_model;
pub mod oracle;
pub mod population;
pub mod sweep;
pub mod variability;
