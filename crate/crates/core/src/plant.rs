//! Truth DC motor used by the simulations.
//!
//! Speed responds to armature voltage through two real poles,
//! `ω/V = (1/k_v) / ((τ_m s + 1)(τ_a s + 1))`, realized as
//!
//! ```text
//! τ_m ω̇   = −ω + a + d
//! τ_a ȧ   = −a + V / k_v
//! θ̇       = ω
//! ```
//!
//! where `a` is the auxiliary (armature-side) state and `d` the injected load
//! disturbance in rad/s-equivalent units, so a constant `d` shifts the
//! steady-state speed by exactly `d`. Every asynchronous interval is
//! propagated with an exact zero-order hold on both `V` and `d`. The encoder
//! is a count accumulator over the true angle `θ`.

use core::f64::consts::PI;

use num_complex::Complex64;

use crate::numerics::{zoh_discretize, Mat, Vector};
use crate::{Error, Result};

/// Motor constants and the encoder model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantParams {
    /// Mechanical time constant τ_m (s).
    pub tau_m: f64,
    /// Armature time constant τ_a (s).
    pub tau_a: f64,
    /// Back-EMF constant k_v (V·s/rad).
    pub k_v: f64,
    /// Actuator saturation (V).
    pub v_max: f64,
    /// Encoder counts per revolution.
    pub encoder_cpr: u32,
}

impl PlantParams {
    /// τ_m recovered from the discrete coefficients β0 = 0.1313, α0 = −0.1471,
    /// α1 = −0.4835 at T = 10 ms.
    pub const TAU_M: f64 = 0.036053059014618305;
    /// τ_a recovered from the same coefficients.
    pub const TAU_A: f64 = 0.002508634930169695;
    /// k_v recovered from the same coefficients.
    pub const K_V: f64 = 1.4067022086824064;

    /// Checks the parameter invariants.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.tau_m, self.tau_a, self.k_v, self.v_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter {
                field: "plant",
                reason: "all constants must be finite",
            });
        }
        if !(self.tau_a > 0.0) {
            return Err(Error::InvalidParameter {
                field: "tau_a",
                reason: "must be > 0",
            });
        }
        if !(self.tau_m > self.tau_a) {
            return Err(Error::InvalidParameter {
                field: "tau_m",
                reason: "must be > tau_a",
            });
        }
        if !(self.k_v > 0.0) {
            return Err(Error::InvalidParameter {
                field: "k_v",
                reason: "must be > 0",
            });
        }
        if !(self.v_max > 0.0) {
            return Err(Error::InvalidParameter {
                field: "v_max",
                reason: "must be > 0",
            });
        }
        if self.encoder_cpr == 0 {
            return Err(Error::InvalidParameter {
                field: "encoder_cpr",
                reason: "must be a positive integer",
            });
        }
        Ok(())
    }

    /// Speed quantum of the finite-difference encoder over `dt`: one count.
    pub fn encoder_resolution(&self, dt: f64) -> f64 {
        2.0 * PI / f64::from(self.encoder_cpr) / dt
    }

    /// DC gain ω/V of the motor.
    pub fn dc_gain(&self) -> f64 {
        1.0 / self.k_v
    }
}

impl Default for PlantParams {
    fn default() -> Self {
        Self {
            tau_m: Self::TAU_M,
            tau_a: Self::TAU_A,
            k_v: Self::K_V,
            v_max: 12.0,
            encoder_cpr: 720,
        }
    }
}

/// Coefficients of `W(z) = β0 (z + 1) / (z² + α1 z + α0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TfCoefficients {
    /// Numerator gain β0.
    pub beta0: f64,
    /// Constant denominator coefficient α0.
    pub alpha0: f64,
    /// Linear denominator coefficient α1.
    pub alpha1: f64,
}

impl TfCoefficients {
    /// Roots of `z² + α1 z + α0`, sorted by real part.
    pub fn poles(&self) -> [Complex64; 2] {
        let b = self.alpha1;
        let c = self.alpha0;
        let disc = b * b - 4.0 * c;
        let mut p = if disc >= 0.0 {
            let s = libm::sqrt(disc);
            [
                Complex64::new((-b - s) / 2.0, 0.0),
                Complex64::new((-b + s) / 2.0, 0.0),
            ]
        } else {
            let s = libm::sqrt(-disc) / 2.0;
            [Complex64::new(-b / 2.0, -s), Complex64::new(-b / 2.0, s)]
        };
        crate::numerics::sort_complex(&mut p);
        p
    }
}

/// Discrete transfer-function coefficients of the motor at sampling time `t`.
pub fn tf_coefficients(p: &PlantParams, t: f64) -> TfCoefficients {
    let den = p.tau_m * t + 2.0 * p.tau_m * p.tau_a;
    TfCoefficients {
        beta0: t * t / (p.k_v * den),
        alpha0: (t * t - p.tau_m * t + 2.0 * p.tau_m * p.tau_a) / den,
        alpha1: (t * t - 4.0 * p.tau_m * p.tau_a) / den,
    }
}

/// Continuous state of the truth motor.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PlantState {
    /// Motor speed ω (rad/s).
    pub omega: f64,
    /// Auxiliary armature-side state (rad/s).
    pub omega_dot_aux: f64,
    /// True accumulated shaft angle (rad).
    pub theta: f64,
    /// Encoder counts, `floor(θ · cpr / 2π)`.
    pub theta_counts: i64,
    /// Disturbance value held over the last interval (rad/s-equivalent).
    pub d_load: f64,
}

/// Load disturbance injected on the speed channel.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum DisturbanceProfile {
    /// No disturbance.
    #[default]
    None,
    /// `magnitude` from `start_time` on.
    Step {
        /// Step height (rad/s-equivalent).
        magnitude: f64,
        /// Onset (s).
        start_time: f64,
    },
    /// `magnitude · (t − start_time)` from `start_time` on.
    Ramp {
        /// Slope (rad/s-equivalent per second).
        magnitude: f64,
        /// Onset (s).
        start_time: f64,
    },
    /// `magnitude · sin(2π f (t − start_time))` from `start_time` on.
    Sinusoid {
        /// Amplitude (rad/s-equivalent).
        magnitude: f64,
        /// Onset (s).
        start_time: f64,
        /// Frequency (Hz).
        frequency: f64,
    },
}

impl DisturbanceProfile {
    /// Disturbance value at time `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        match *self {
            DisturbanceProfile::None => 0.0,
            DisturbanceProfile::Step {
                magnitude,
                start_time,
            } => {
                if t >= start_time {
                    magnitude
                } else {
                    0.0
                }
            }
            DisturbanceProfile::Ramp {
                magnitude,
                start_time,
            } => magnitude * (t - start_time).max(0.0),
            DisturbanceProfile::Sinusoid {
                magnitude,
                start_time,
                frequency,
            } => {
                if t >= start_time {
                    magnitude * libm::sin(2.0 * PI * frequency * (t - start_time))
                } else {
                    0.0
                }
            }
        }
    }

    /// Checks `magnitude ≥ 0`, `start_time ≥ 0` and, for sinusoids, a
    /// non-negative frequency.
    pub fn validate(&self) -> Result<()> {
        let (magnitude, start_time, frequency) = match *self {
            DisturbanceProfile::None => return Ok(()),
            DisturbanceProfile::Step {
                magnitude,
                start_time,
            }
            | DisturbanceProfile::Ramp {
                magnitude,
                start_time,
            } => (magnitude, start_time, 0.0),
            DisturbanceProfile::Sinusoid {
                magnitude,
                start_time,
                frequency,
            } => (magnitude, start_time, frequency),
        };
        if !(magnitude >= 0.0) || !magnitude.is_finite() {
            return Err(Error::InvalidParameter {
                field: "magnitude",
                reason: "must be finite and >= 0",
            });
        }
        if !(start_time >= 0.0) || !start_time.is_finite() {
            return Err(Error::InvalidParameter {
                field: "start_time",
                reason: "must be finite and >= 0",
            });
        }
        if !(frequency >= 0.0) || !frequency.is_finite() {
            return Err(Error::InvalidParameter {
                field: "frequency",
                reason: "must be finite and >= 0",
            });
        }
        Ok(())
    }
}

/// Continuous-time matrices `(A, b_voltage, b_disturbance)` over the state
/// `[ω, a, θ]`.
fn continuous_model(p: &PlantParams) -> (Mat, Vector, Vector) {
    let mut a = Mat::zeros(3, 3);
    a[(0, 0)] = -1.0 / p.tau_m;
    a[(0, 1)] = 1.0 / p.tau_m;
    a[(1, 1)] = -1.0 / p.tau_a;
    a[(2, 0)] = 1.0;
    let b_v = Vector::from_slice(&[0.0, 1.0 / (p.k_v * p.tau_a), 0.0]);
    let b_d = Vector::from_slice(&[1.0 / p.tau_m, 0.0, 0.0]);
    (a, b_v, b_d)
}

fn counts_for(theta: f64, cpr: u32) -> i64 {
    libm::floor(theta * f64::from(cpr) / (2.0 * PI)) as i64
}

/// Advances the motor over `dt` seconds with `v_applied` (clamped to
/// `±v_max`) and the disturbance value sampled at `t_now`, both held.
///
/// # Panics
///
/// If `dt` is not positive and finite.
pub fn plant_step(
    s: &PlantState,
    p: &PlantParams,
    v_applied: f64,
    profile: &DisturbanceProfile,
    t_now: f64,
    dt: f64,
) -> PlantState {
    assert!(
        dt > 0.0 && dt.is_finite(),
        "plant_step needs dt > 0, got {dt}"
    );
    let v = v_applied.clamp(-p.v_max, p.v_max);
    let d = profile.value_at(t_now);
    let (a, b_v, b_d) = continuous_model(p);
    let (a_d, g_v) = zoh_discretize(&a, &b_v, dt).expect("3-state model and dt > 0");
    let (_, g_d) = zoh_discretize(&a, &b_d, dt).expect("3-state model and dt > 0");
    let x = Vector::from_slice(&[s.omega, s.omega_dot_aux, s.theta]);
    let next = a_d.mul_vec(&x) + g_v.scale(v) + g_d.scale(d);
    PlantState {
        omega: next[0],
        omega_dot_aux: next[1],
        theta: next[2],
        theta_counts: counts_for(next[2], p.encoder_cpr),
        d_load: d,
    }
}

/// Finite-difference speed from encoder counts over the last `dt` seconds.
pub fn measure_speed(s_prev: &PlantState, s_now: &PlantState, p: &PlantParams, dt: f64) -> f64 {
    let delta = (s_now.theta_counts - s_prev.theta_counts) as f64;
    delta * 2.0 * PI / f64::from(p.encoder_cpr) / dt
}

/// Stateful wrapper that keeps the clock and the previous encoder sample.
#[derive(Clone, Debug)]
pub struct Plant {
    params: PlantParams,
    state: PlantState,
    time: f64,
}

impl Plant {
    /// Motor at rest at `t = 0`.
    pub fn new(params: PlantParams) -> Self {
        Self {
            params,
            state: PlantState::default(),
            time: 0.0,
        }
    }

    /// Current state.
    pub fn state(&self) -> &PlantState {
        &self.state
    }

    /// Elapsed simulated time.
    pub fn time(&self) -> f64 {
        self.time
    }

    /// Applies `v` for `dt` seconds and returns the encoder speed measured
    /// over that interval.
    pub fn advance(&mut self, v: f64, profile: &DisturbanceProfile, dt: f64) -> f64 {
        let next = plant_step(&self.state, &self.params, v, profile, self.time, dt);
        let y = measure_speed(&self.state, &next, &self.params, dt);
        self.state = next;
        self.time += dt;
        y
    }
}
