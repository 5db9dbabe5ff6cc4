//! Asynchronous sampling intervals and packet loss.
//!
//! Intervals are drawn i.i.d. uniform on `[ts_min, ts_max]` from a ChaCha8
//! stream seeded with [`TimingSpec::seed`]. Each step consumes exactly two
//! draws (interval, then loss), so the interval sequence for a seed does not
//! depend on the loss probability.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Sampling-time distribution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Distribution {
    /// Uniform on `[ts_min, ts_max]`.
    #[default]
    Uniform,
}

/// How the per-step intervals are generated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimingSpec {
    /// Smallest interval (s).
    pub ts_min: f64,
    /// Largest interval (s).
    pub ts_max: f64,
    /// Interval distribution.
    pub distribution: Distribution,
    /// Generator seed.
    pub seed: u64,
    /// Probability that a step's packets are lost, in `[0, 1)`.
    pub loss_probability: f64,
}

impl TimingSpec {
    /// Uniform timing without loss.
    pub fn uniform(ts_min: f64, ts_max: f64, seed: u64) -> Self {
        Self {
            ts_min,
            ts_max,
            distribution: Distribution::Uniform,
            seed,
            loss_probability: 0.0,
        }
    }

    /// Checks `0 < ts_min ≤ ts_max` and the loss probability range.
    pub fn validate(&self) -> Result<()> {
        if !(self.ts_min > 0.0) || !self.ts_min.is_finite() {
            return Err(Error::InvalidParameter {
                field: "ts_min",
                reason: "must be finite and > 0",
            });
        }
        if !(self.ts_max >= self.ts_min) || !self.ts_max.is_finite() {
            return Err(Error::InvalidParameter {
                field: "ts_max",
                reason: "must be finite and >= ts_min",
            });
        }
        if !(0.0..1.0).contains(&self.loss_probability) {
            return Err(Error::InvalidParameter {
                field: "loss_probability",
                reason: "must be in [0, 1)",
            });
        }
        Ok(())
    }
}

/// Generated intervals and loss flags, one entry per step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimingTrace {
    /// Interval that starts at each step (s).
    pub intervals: Vec<f64>,
    /// True when the step's packets were dropped.
    pub loss_flags: Vec<bool>,
}

impl TimingTrace {
    /// Number of steps.
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    /// True for a trace without steps.
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Start time of every step.
    pub fn start_times(&self) -> Vec<f64> {
        let mut t = 0.0;
        self.intervals
            .iter()
            .map(|ts| {
                let start = t;
                t += ts;
                start
            })
            .collect()
    }
}

/// Draws intervals until their sum reaches `duration`.
pub fn generate_trace(spec: &TimingSpec, duration: f64) -> Result<TimingTrace> {
    spec.validate()?;
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter {
            field: "duration",
            reason: "must be finite and > 0",
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut trace = TimingTrace::default();
    let mut elapsed = 0.0;
    while elapsed < duration {
        let u: f64 = rng.gen();
        let lost = rng.gen::<f64>() < spec.loss_probability;
        let ts = match spec.distribution {
            Distribution::Uniform if spec.ts_max == spec.ts_min => spec.ts_min,
            Distribution::Uniform => {
                (spec.ts_min + u * (spec.ts_max - spec.ts_min)).min(spec.ts_max)
            }
        };
        trace.intervals.push(ts);
        trace.loss_flags.push(lost);
        elapsed += ts;
    }
    Ok(trace)
}
