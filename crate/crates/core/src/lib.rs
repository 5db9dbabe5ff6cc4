//! Embedded Model Control (EMC) for a single DC-motor speed loop closed over a
//! network with asynchronous sampling.
//!
//! The crate is `no_std` (it needs `alloc`) and carries only the algorithmic
//! parts: small dense numerics, the truth motor model, the EMC unit and its
//! per-step gain scheduler, a PI baseline, the sampling-time generator, the
//! unit-circle stability sweep and the lockstep simulation loop with its
//! metrics. Configuration files, CSV output and the command line live in the
//! `emc-sim` companion crate.
//!
//! A minimal closed loop:
//!
//! ```
//! use emc_core::emc::{ContinuousEigenSpec, EmcController, EmcOptions};
//! use emc_core::plant::{DisturbanceProfile, Plant, PlantParams};
//!
//! let params = PlantParams::default();
//! let mut emc = EmcController::new(params, ContinuousEigenSpec::nominal(), EmcOptions::default());
//! let mut plant = Plant::new(params);
//! let mut y_meas = 0.0;
//! for _ in 0..300 {
//!     let out = emc.step(0.01, 6.0, y_meas).unwrap();
//!     y_meas = plant.advance(out.u, &DisturbanceProfile::None, 0.01);
//! }
//! assert!((plant.state().omega - 6.0).abs() < 1.0);
//! ```
#![no_std]
#![warn(missing_docs)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod baseline_pi;
pub mod emc;
mod error;
pub mod netmodel;
pub mod numerics;
pub mod plant;
pub mod sim;
pub mod stability;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
