//! Two-ion trapped-ion simulator for correlation-controlled heat-flow reversal.
//!
//! The pipeline runs from physical trap parameters to effective spin-spin
//! couplings, correlated thermal initial states, closed-form and numeric
//! evolution, and CSV/JSON output for plotting.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod hilbert;
pub mod linops;
pub mod model;
pub mod states;

pub use error::{Error, Result};
