//! Lockstep simulation loop and tracking metrics.
//!
//! At each step `k` of a [`TimingTrace`]:
//!
//! 1. the encoder speed over the previous interval is read (held if the
//!    step's packets are lost),
//! 2. the controller computes a command from that measurement using the
//!    interval `ts_k` it will be held for,
//! 3. the command reaches the plant (or the previous one is held on loss),
//! 4. the plant is propagated over `ts_k`.
//!
//! The record for step `k` carries the measurement and the command of the
//! same step.

use alloc::vec::Vec;

use crate::baseline_pi::{pi_step, PiParams, PiState};
use crate::emc::{emc_step, ContinuousEigenSpec, EmcOptions, EmcState};
use crate::netmodel::TimingTrace;
use crate::plant::{measure_speed, plant_step, DisturbanceProfile, PlantParams, PlantState};
use crate::{Error, Result};

/// Piecewise-constant setpoint schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSchedule {
    points: Vec<(f64, f64)>,
}

impl ReferenceSchedule {
    /// `(time, value)` pairs; times must start at 0 and increase strictly.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        match points.first() {
            Some((t, _)) if *t == 0.0 => {}
            _ => {
                return Err(Error::InvalidParameter {
                    field: "reference",
                    reason: "first time must be 0",
                })
            }
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidParameter {
                field: "reference",
                reason: "times must be strictly increasing",
            });
        }
        if points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "reference",
                reason: "times and values must be finite",
            });
        }
        Ok(Self { points })
    }

    /// Constant setpoint.
    pub fn constant(value: f64) -> Self {
        Self {
            points: alloc::vec![(0.0, value)],
        }
    }

    /// Setpoint in force at `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        self.points
            .iter()
            .take_while(|(start, _)| *start <= t)
            .last()
            .map_or(self.points[0].1, |(_, v)| *v)
    }

    /// Times at which the setpoint changes (excluding 0).
    pub fn change_times(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().skip(1).map(|(t, _)| *t)
    }

    /// Raw points.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Controller selection for a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ControllerConfig {
    /// EMC unit.
    Emc {
        /// Continuous eigenvalues.
        spec: ContinuousEigenSpec,
        /// Runtime options.
        options: EmcOptions,
    },
    /// PI baseline chasing a first-order shaped reference with pole `shaper_mu`.
    Pi {
        /// Gains.
        params: PiParams,
        /// Continuous pole of the reference shaper (the EMC μ_R).
        shaper_mu: f64,
    },
}

/// First-order reference filter `x' = λ x + (1 − λ) r`, `λ = exp(μ ts)`: the
/// same response the EMC reference dynamics produce.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReferenceShaper {
    /// Filter state (rad/s).
    pub state: f64,
}

impl ReferenceShaper {
    /// Returns the current output and advances the filter by `ts`.
    pub fn step(&mut self, mu: f64, ts: f64, r_bar: f64) -> f64 {
        let y = self.state;
        let lambda = libm::exp(mu * ts);
        self.state = lambda * self.state + (1.0 - lambda) * r_bar;
        y
    }
}

/// One row of telemetry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleRecord {
    /// Step index.
    pub k: usize,
    /// Sample time (s).
    pub t: f64,
    /// Interval following this sample (s).
    pub ts: f64,
    /// Raw setpoint.
    pub r_bar: f64,
    /// Reference output ȳ.
    pub y_ref: f64,
    /// True motor speed at the sample.
    pub y_true: f64,
    /// Measurement the controller used.
    pub y_meas: f64,
    /// Model output.
    pub y_m: f64,
    /// Model error `y_meas − y_m`.
    pub e_m: f64,
    /// Tracking error.
    pub e_bar: f64,
    /// Command (V).
    pub u: f64,
    /// Tracking part of the command (V).
    pub u_trk: f64,
    /// Disturbance rejection part (V).
    pub u_d: f64,
    /// Feedforward part (V).
    pub u_ff: f64,
    /// Disturbance state estimate.
    pub x_d1: f64,
    /// Drift state estimate.
    pub x_d2: f64,
    /// Packets of this step were lost.
    pub lost: bool,
}

/// Everything a run needs besides the trace.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopSetup {
    /// Truth plant.
    pub plant: PlantParams,
    /// Controller.
    pub controller: ControllerConfig,
    /// Load disturbance.
    pub disturbance: DisturbanceProfile,
    /// Setpoint schedule.
    pub reference: ReferenceSchedule,
}

enum ControllerState {
    Emc(EmcState),
    Pi(PiState, ReferenceShaper),
}

/// Runs the loop over every interval of `trace`.
pub fn run_loop(setup: &LoopSetup, trace: &TimingTrace) -> Result<Vec<SampleRecord>> {
    let p = &setup.plant;
    let mut records = Vec::with_capacity(trace.len());
    let mut plant = PlantState::default();
    let mut prev_plant = plant;
    let mut prev_ts = 0.0;
    let mut y_held = 0.0;
    let mut v_applied = 0.0;
    let mut ctl = match setup.controller {
        ControllerConfig::Emc { .. } => ControllerState::Emc(EmcState::default()),
        ControllerConfig::Pi { .. } => {
            ControllerState::Pi(PiState::default(), ReferenceShaper::default())
        }
    };

    let mut t = 0.0;
    for (k, (&ts, &lost)) in trace.intervals.iter().zip(&trace.loss_flags).enumerate() {
        let fresh = if k == 0 {
            0.0
        } else {
            measure_speed(&prev_plant, &plant, p, prev_ts)
        };
        let y_meas = if lost { y_held } else { fresh };
        y_held = y_meas;
        let r_bar = setup.reference.value_at(t);

        let mut rec = SampleRecord {
            k,
            t,
            ts,
            r_bar,
            y_ref: 0.0,
            y_true: plant.omega,
            y_meas,
            y_m: y_meas,
            e_m: 0.0,
            e_bar: 0.0,
            u: 0.0,
            u_trk: 0.0,
            u_d: 0.0,
            u_ff: 0.0,
            x_d1: 0.0,
            x_d2: 0.0,
            lost,
        };

        match (&mut ctl, &setup.controller) {
            (ControllerState::Emc(state), ControllerConfig::Emc { spec, options }) => {
                let out = emc_step(state, p, spec, options, ts, r_bar, y_meas)?;
                *state = out.state;
                let tel = out.telemetry;
                rec.y_ref = tel.y_ref;
                rec.y_m = tel.y_m;
                rec.e_m = tel.e_m;
                rec.e_bar = tel.e_bar;
                rec.u = out.u;
                rec.u_trk = tel.u_trk;
                rec.u_d = tel.u_d;
                rec.u_ff = tel.u_ff;
                rec.x_d1 = tel.x_d1;
                rec.x_d2 = tel.x_d2;
            }
            (ControllerState::Pi(state, shaper), ControllerConfig::Pi { params, shaper_mu }) => {
                let y_ref = shaper.step(*shaper_mu, ts, r_bar);
                let pi = PiParams {
                    v_max: params.v_max.min(p.v_max),
                    ..*params
                };
                let (next, out) = pi_step(state, &pi, y_ref, y_meas, ts);
                *state = next;
                rec.y_ref = y_ref;
                rec.e_bar = out.error;
                rec.u = out.u;
                rec.u_trk = out.u;
            }
            _ => unreachable!("controller state matches its configuration"),
        }

        if !lost {
            v_applied = rec.u;
        }
        prev_plant = plant;
        plant = plant_step(&plant, p, v_applied, &setup.disturbance, t, ts);
        prev_ts = ts;
        records.push(rec);
        t += ts;
    }
    Ok(records)
}

/// Summary statistics over a window of records.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    /// First sample time included.
    pub window_start: f64,
    /// Last sample time included.
    pub window_end: f64,
    /// Samples in the window.
    pub samples: usize,
    /// RMS of `ȳ − y_meas`, uniform per sample.
    pub rmse_tracking: f64,
    /// RMS of `e_m`.
    pub rms_model_error: f64,
    /// Max `|e_m|`.
    pub max_abs_model_error: f64,
    /// RMS of the tracking command.
    pub rms_u_trk: f64,
    /// Time from the last setpoint change until `|ȳ − y|` stays below the
    /// settle band for 0.5 s; `None` if it never does.
    pub settling_time: Option<f64>,
}

/// Hold time that defines settling.
pub const SETTLE_HOLD: f64 = 0.5;

fn rms(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (
        if n == 0 {
            0.0
        } else {
            libm::sqrt(sum / n as f64)
        },
        n,
    )
}

/// Metrics over samples with `t ≥ window_start`. `settle_band` is the error
/// band for the settling time (typically one encoder count at `ts_min`) and
/// `last_change` the setpoint change it is measured from.
pub fn compute_metrics(
    records: &[SampleRecord],
    window_start: f64,
    settle_band: f64,
    last_change: f64,
) -> Result<Metrics> {
    let window: Vec<&SampleRecord> = records.iter().filter(|r| r.t >= window_start).collect();
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let (rmse_tracking, samples) = rms(window.iter().map(|r| r.y_ref - r.y_meas));
    let (rms_model_error, _) = rms(window.iter().map(|r| r.e_m));
    let (rms_u_trk, _) = rms(window.iter().map(|r| r.u_trk));
    let max_abs_model_error = window.iter().map(|r| r.e_m.abs()).fold(0.0, f64::max);

    let end = records.last().map_or(0.0, |r| r.t);
    let settling_time = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.t >= last_change && r.t + SETTLE_HOLD <= end)
        .find(|(i, r)| {
            records[*i..]
                .iter()
                .take_while(|q| q.t <= r.t + SETTLE_HOLD)
                .all(|q| (q.y_ref - q.y_meas).abs() < settle_band)
        })
        .map(|(_, r)| r.t - last_change);

    Ok(Metrics {
        window_start,
        window_end: window.last().map_or(window_start, |r| r.t),
        samples,
        rmse_tracking,
        rms_model_error,
        max_abs_model_error,
        rms_u_trk,
        settling_time,
    })
}
