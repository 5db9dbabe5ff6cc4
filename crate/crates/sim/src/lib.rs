//! Scenario files, CSV output and the `emc-sim` command line around
//! [`emc_core`].
//!
//! ```
//! use emc_sim::config::{presets, Scenario};
//!
//! let mut sc = Scenario::parse(presets::DISTREJ).unwrap();
//! sc.duration = 2.0;
//! let run = emc_sim::runner::run_scenario(&sc).unwrap();
//! assert!(run.metrics.rms_model_error < 1.0);
//! ```
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod csv;
mod error;
pub mod runner;

pub use error::SimError;
