//! PI comparison controller with per-step sampling-time weighting.

use crate::{Error, Result};

/// PI gains and the actuator limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiParams {
    /// Proportional gain (V per rad/s).
    pub k_p: f64,
    /// Integral gain (V per rad).
    pub k_i: f64,
    /// Output saturation (V).
    pub v_max: f64,
}

impl PiParams {
    /// Gains of the EMC/PI benchmark, 12 V actuator.
    pub const fn benchmark() -> Self {
        Self {
            k_p: 1.35,
            k_i: 11.25,
            v_max: 12.0,
        }
    }

    /// Gains must be finite and non-negative, `v_max` positive.
    pub fn validate(&self) -> Result<()> {
        if !(self.k_p >= 0.0) || !self.k_p.is_finite() {
            return Err(Error::InvalidParameter {
                field: "k_p",
                reason: "must be finite and >= 0",
            });
        }
        if !(self.k_i >= 0.0) || !self.k_i.is_finite() {
            return Err(Error::InvalidParameter {
                field: "k_i",
                reason: "must be finite and >= 0",
            });
        }
        if !(self.v_max > 0.0) {
            return Err(Error::InvalidParameter {
                field: "v_max",
                reason: "must be > 0",
            });
        }
        Ok(())
    }
}

impl Default for PiParams {
    fn default() -> Self {
        Self::benchmark()
    }
}

/// Integrator state: accumulated error·time (rad).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PiState {
    /// Accumulated error (rad).
    pub integral: f64,
}

/// Result of one PI step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiOutput {
    /// Saturated command (V).
    pub u: f64,
    /// Command before saturation (V).
    pub u_raw: f64,
    /// Error `r − y` (rad/s).
    pub error: f64,
}

/// Forward-Euler PI step with conditional integration: the integral only
/// absorbs `e·ts` when the resulting command is inside the limits.
pub fn pi_step(s: &PiState, p: &PiParams, r_bar: f64, y_meas: f64, ts: f64) -> (PiState, PiOutput) {
    let error = r_bar - y_meas;
    let candidate = s.integral + error * ts;
    let u_raw = p.k_p * error + p.k_i * candidate;
    let next = if u_raw.abs() <= p.v_max {
        PiState {
            integral: candidate,
        }
    } else {
        *s
    };
    (
        next,
        PiOutput {
            u: u_raw.clamp(-p.v_max, p.v_max),
            u_raw,
            error,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_error_zero_output() {
        let (s, out) = pi_step(&PiState::default(), &PiParams::benchmark(), 3.0, 3.0, 0.01);
        assert_eq!(out.u, 0.0);
        assert_eq!(s.integral, 0.0);
    }

    #[test]
    fn benchmark_gains_unit_error() {
        let (s, out) = pi_step(&PiState::default(), &PiParams::benchmark(), 1.0, 0.0, 0.01);
        assert_abs_diff_eq!(out.u, 1.4625, epsilon = 1e-12);
        assert_abs_diff_eq!(s.integral, 0.01, epsilon = 1e-15);
    }

    #[test]
    fn integral_frozen_in_saturation() {
        let p = PiParams {
            v_max: 1.0,
            ..PiParams::benchmark()
        };
        let mut s = PiState::default();
        for _ in 0..100 {
            let (next, out) = pi_step(&s, &p, 1.0, 0.0, 0.01);
            assert!(out.u_raw > p.v_max);
            assert_eq!(out.u, p.v_max);
            s = next;
        }
        assert_eq!(s.integral, 0.0);
    }

    #[test]
    fn proportional_only_without_history() {
        let p = PiParams {
            k_i: 0.0,
            ..PiParams::benchmark()
        };
        let (_, out) = pi_step(&PiState::default(), &p, 2.0, 0.5, 0.05);
        assert_abs_diff_eq!(out.u, 1.35 * 1.5, epsilon = 1e-15);
    }

    #[test]
    fn validation() {
        assert!(PiParams::benchmark().validate().is_ok());
        assert!(PiParams {
            k_p: -1.0,
            ..PiParams::benchmark()
        }
        .validate()
        .is_err());
        assert!(PiParams {
            v_max: 0.0,
            ..PiParams::benchmark()
        }
        .validate()
        .is_err());
    }

    proptest! {
        #[test]
        fn integral_is_partition_additive(
            parts in proptest::collection::vec(0.001f64..0.2, 1..40), e in -2.0f64..2.0
        ) {
            let p = PiParams { v_max: 1e12, ..PiParams::benchmark() };
            let mut s = PiState::default();
            for ts in &parts {
                s = pi_step(&s, &p, e, 0.0, *ts).0;
            }
            let elapsed: f64 = parts.iter().sum();
            prop_assert!((p.k_i * s.integral - p.k_i * e * elapsed).abs() < 1e-9);
        }
    }
}
