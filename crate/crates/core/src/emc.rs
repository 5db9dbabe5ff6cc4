//! Embedded Model Control unit.
//!
//! The internal model is the Euler-discretized motor speed equation augmented
//! with a second-order disturbance generator:
//!
//! ```text
//! x_c(k+1)  = A_c x_c + B_c u + Ts (x_d1 + w̄1)
//! x_d1(k+1) = a_d x_d1 + Ts (x_d2 + w̄2)
//! x_d2(k+1) = a_d x_d2 + Ts w̄3
//! y_m       = x_c
//! ```
//!
//! with `A_c = 1 − Ts/τ_m`, `B_c = Ts/(τ_m k_v)` and `a_d = 1 + Ts`. The
//! noise estimator closes the loop with `w̄ = L (y − y_m)`. Because the
//! sampling interval changes from one step to the next, all matrices and gains
//! are rebuilt every step from a fixed set of continuous-time eigenvalues
//! through `λ = exp(μ Ts)`.
//!
//! One step runs, in order: [`build_matrices`], [`schedule_gains`],
//! [`observer_correct`], [`reference_step`], [`control_law`] and
//! [`model_predict`]. The correction uses the measurement taken at the current
//! sample, the prediction targets the next one.

use crate::numerics::{solve_linear, Mat, Vector};
use crate::plant::PlantParams;
use crate::{Error, Result};

/// Continuous-time eigenvalues for the reference dynamics, the tracking loop
/// and the noise estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousEigenSpec {
    /// Reference dynamics eigenvalue μ_R.
    pub mu_r: f64,
    /// Tracking loop eigenvalues μ_K.
    pub mu_k: [f64; 2],
    /// Noise estimator (predictor) eigenvalues μ_N.
    pub mu_n: [f64; 3],
}

impl ContinuousEigenSpec {
    /// Nominal design: slow reference and tracking poles, fast estimator.
    pub const fn nominal() -> Self {
        Self {
            mu_r: -2.5647,
            mu_k: [-2.5647, -2.5647],
            mu_n: [-14.3842, -14.3842, -14.3839],
        }
    }

    /// Every eigenvalue must be finite and strictly negative.
    pub fn validate(&self) -> Result<()> {
        let ok = |v: &f64| v.is_finite() && *v < 0.0;
        if !ok(&self.mu_r) {
            return Err(Error::InvalidParameter {
                field: "mu_r",
                reason: "must be finite and < 0",
            });
        }
        if !self.mu_k.iter().all(ok) {
            return Err(Error::InvalidParameter {
                field: "mu_k",
                reason: "must be finite and < 0",
            });
        }
        if !self.mu_n.iter().all(ok) {
            return Err(Error::InvalidParameter {
                field: "mu_n",
                reason: "must be finite and < 0",
            });
        }
        Ok(())
    }

    /// Discrete targets `exp(μ ts)` for a sampling interval.
    pub fn discrete(&self, ts: f64) -> DiscreteTargets {
        DiscreteTargets {
            lambda_r: libm::exp(self.mu_r * ts),
            lambda_k: self.mu_k.map(|m| libm::exp(m * ts)),
            lambda_n: self.mu_n.map(|m| libm::exp(m * ts)),
        }
    }
}

impl Default for ContinuousEigenSpec {
    fn default() -> Self {
        Self::nominal()
    }
}

/// Discrete eigenvalue targets for one sampling interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteTargets {
    /// λ_R.
    pub lambda_r: f64,
    /// λ_K.
    pub lambda_k: [f64; 2],
    /// λ_N.
    pub lambda_n: [f64; 3],
}

/// Which tracking-loop state matrix to assemble for inspection.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ControllerMatrix {
    /// `[[A_c − k_p B_c, k_i B_c], [−1, 1]]`, the loop the control law realizes.
    #[default]
    Conventional,
    /// `[[−A_c − k_p B_c, k_i B_c], [−1, 1]]` with the sign of `A_c` flipped.
    AsPrinted,
}

/// Pole of the disturbance generator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DisturbancePole {
    /// `1 + Ts` (marginally unstable drift generator).
    #[default]
    AsPrinted,
    /// `1` (pure integrators).
    Neutral,
}

/// Runtime options of the EMC unit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EmcOptions {
    /// Tracking-loop matrix used by inspection tools.
    pub controller_matrix: ControllerMatrix,
    /// Disturbance generator pole.
    pub disturbance_pole: DisturbancePole,
}

/// Internal-model matrices for one sampling interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InternalModelMatrices {
    /// Sampling interval these matrices were built for.
    pub ts: f64,
    /// `1 − Ts/τ_m`.
    pub a_c: f64,
    /// `Ts/(τ_m k_v)`.
    pub b_c: f64,
    /// Output map of the controllable state (1).
    pub c_c: f64,
    /// Coupling of the disturbance state into `x_c`: `[Ts, 0]`.
    pub h_c: [f64; 2],
    /// Disturbance generator, `[[a_d, Ts], [0, a_d]]`.
    pub a_d: Mat,
    /// Input map of the disturbance states (zero).
    pub b_d: [f64; 2],
    /// Noise input map, `Ts · I₃`.
    pub g: Mat,
    /// Output map of the disturbance states (zero).
    pub c_d: [f64; 2],
}

impl InternalModelMatrices {
    /// Full 3×3 state matrix `[[A_c, H_c], [0, A_d]]`.
    pub fn a(&self) -> Mat {
        let mut a = Mat::zeros(3, 3);
        a[(0, 0)] = self.a_c;
        a[(0, 1)] = self.h_c[0];
        a[(0, 2)] = self.h_c[1];
        for i in 0..2 {
            for j in 0..2 {
                a[(1 + i, 1 + j)] = self.a_d[(i, j)];
            }
        }
        a
    }

    /// Output row `C = [C_c, C_d]`.
    pub fn c(&self) -> [f64; 3] {
        [self.c_c, self.c_d[0], self.c_d[1]]
    }

    /// Diagonal entry of the disturbance generator.
    pub fn disturbance_pole(&self) -> f64 {
        self.a_d[(0, 0)]
    }
}

/// Builds the internal model for the interval `ts`.
pub fn build_matrices(
    p: &PlantParams,
    ts: f64,
    pole: DisturbancePole,
) -> Result<InternalModelMatrices> {
    if !(ts > 0.0) || !ts.is_finite() {
        return Err(Error::DegeneratePlacement("sampling interval must be > 0"));
    }
    let a_dd = match pole {
        DisturbancePole::AsPrinted => 1.0 + ts,
        DisturbancePole::Neutral => 1.0,
    };
    Ok(InternalModelMatrices {
        ts,
        a_c: 1.0 - ts / p.tau_m,
        b_c: ts / (p.tau_m * p.k_v),
        c_c: 1.0,
        h_c: [ts, 0.0],
        a_d: Mat::from_rows(&[&[a_dd, ts], &[0.0, a_dd]]).expect("2x2"),
        b_d: [0.0; 2],
        g: Mat::identity(3).scale(ts),
        c_d: [0.0; 2],
    })
}

/// Gains for one sampling interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainSet {
    /// Reference dynamics state coefficient `A_c − B_c k_R` (= λ_R).
    pub a_r: f64,
    /// Reference dynamics input coefficient `B_c n_R`.
    pub b_r: f64,
    /// Reference state feedback gain.
    pub k_r: f64,
    /// Reference feedforward gain (unity DC gain of the reference dynamics).
    pub n_r: f64,
    /// Proportional tracking gain.
    pub k_p: f64,
    /// Integral tracking gain.
    pub k_i: f64,
    /// Noise estimator gains.
    pub l: [f64; 3],
    /// Disturbance rejection gain.
    pub m: [f64; 2],
    /// Tracking-error correction (zero in this realization).
    pub q: [f64; 2],
}

/// Converts the continuous eigenvalues into discrete gains for `m.ts`.
///
/// Reference and tracking gains have closed forms. The estimator gains come
/// from matching `det(zI − (A − G L C))` to `Π (z − λ_N)`; the coefficients
/// are affine in `L`, giving a triangular 3×3 system.
pub fn schedule_gains(spec: &ContinuousEigenSpec, m: &InternalModelMatrices) -> Result<GainSet> {
    let ts = m.ts;
    if !(ts > 0.0) {
        return Err(Error::DegeneratePlacement("sampling interval must be > 0"));
    }
    if m.b_c == 0.0 || !m.b_c.is_finite() {
        return Err(Error::DegeneratePlacement("input gain B_c is zero"));
    }
    let t = spec.discrete(ts);
    let (a_c, b_c) = (m.a_c, m.b_c);

    let k_r = (a_c - t.lambda_r) / b_c;
    let n_r = (1.0 - t.lambda_r) / b_c;

    let [l1, l2] = t.lambda_k;
    let k_p = (1.0 + a_c - l1 - l2) / b_c;
    let k_i = (1.0 - l1) * (1.0 - l2) / b_c;

    let l = estimator_gains(m, &t.lambda_n)?;

    // Sylvester-Francis with C_c = 1: Q = 0 and B_c M = H_c.
    let mm = [m.h_c[0] / b_c, m.h_c[1] / b_c];

    Ok(GainSet {
        a_r: t.lambda_r,
        b_r: b_c * n_r,
        k_r,
        n_r,
        k_p,
        k_i,
        l,
        m: mm,
        q: [0.0; 2],
    })
}

fn estimator_gains(m: &InternalModelMatrices, targets: &[f64; 3]) -> Result<[f64; 3]> {
    let ts = m.ts;
    let a = m.disturbance_pole();
    let a_c = m.a_c;
    // z³ + p2 z² + p1 z + p0 = Π (z − λ)
    let [r1, r2, r3] = *targets;
    let p2 = -(r1 + r2 + r3);
    let p1 = r1 * r2 + r1 * r3 + r2 * r3;
    let p0 = -(r1 * r2 * r3);

    // det(zI − (A − G L C)) = (z − A_c + Ts l1)(z − a)² + Ts² l2 (z − a) + Ts³ l3
    let j = Mat::from_rows(&[
        &[ts, 0.0, 0.0],
        &[-2.0 * a * ts, ts * ts, 0.0],
        &[a * a * ts, -a * ts * ts, ts * ts * ts],
    ])?;
    let rhs = Vector::from_slice(&[
        p2 + a_c + 2.0 * a,
        p1 - a * a - 2.0 * a * a_c,
        p0 + a_c * a * a,
    ]);
    let l = solve_linear(&j, &rhs)?;
    Ok([l[0], l[1], l[2]])
}

/// Reference dynamics closed-loop coefficient `A_c − B_c k_R`.
pub fn reference_closed_loop(m: &InternalModelMatrices, g: &GainSet) -> f64 {
    m.a_c - m.b_c * g.k_r
}

/// Tracking-loop state matrix over `[x_c, x_2]`.
pub fn controller_closed_loop(
    m: &InternalModelMatrices,
    g: &GainSet,
    variant: ControllerMatrix,
) -> Mat {
    let a11 = match variant {
        ControllerMatrix::Conventional => m.a_c,
        ControllerMatrix::AsPrinted => -m.a_c,
    } - g.k_p * m.b_c;
    Mat::from_rows(&[&[a11, g.k_i * m.b_c], &[-1.0, 1.0]]).expect("2x2")
}

/// Estimator closed-loop matrix `A − G L C`.
pub fn observer_closed_loop(m: &InternalModelMatrices, g: &GainSet) -> Mat {
    let c = m.c();
    let gl = m.g.mul_vec(&Vector::from_slice(&g.l));
    let mut out = m.a();
    for i in 0..3 {
        for j in 0..3 {
            out[(i, j)] -= gl[i] * c[j];
        }
    }
    out
}

/// EMC state carried between samples.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EmcState {
    /// Controllable state, the modeled speed (rad/s).
    pub x_c: f64,
    /// Disturbance state (rad/s² equivalent).
    pub x_d1: f64,
    /// Drift of the disturbance state.
    pub x_d2: f64,
    /// Reference dynamics state x̄ (rad/s).
    pub x_ref: f64,
    /// Integrator of the tracking loop.
    pub x_2: f64,
}

/// Model error `e_m = y − x_c` and the noise estimate `w̄ = L e_m`.
pub fn observer_correct(
    s: &EmcState,
    m: &InternalModelMatrices,
    g: &GainSet,
    y_meas: f64,
) -> ([f64; 3], f64) {
    let y_m = m.c_c * s.x_c + m.c_d[0] * s.x_d1 + m.c_d[1] * s.x_d2;
    let e_m = y_meas - y_m;
    (g.l.map(|l| l * e_m), e_m)
}

/// Propagates the internal model to the next sample. The reference and
/// integrator states are left untouched.
pub fn model_predict(
    s: &EmcState,
    m: &InternalModelMatrices,
    u: f64,
    w_bar: &[f64; 3],
) -> EmcState {
    let ts = m.ts;
    let a_dd = m.disturbance_pole();
    EmcState {
        x_c: m.a_c * s.x_c + m.b_c * u + m.h_c[0] * s.x_d1 + m.h_c[1] * s.x_d2 + ts * w_bar[0],
        x_d1: a_dd * s.x_d1 + m.a_d[(0, 1)] * s.x_d2 + m.b_d[0] * u + ts * w_bar[1],
        x_d2: a_dd * s.x_d2 + m.b_d[1] * u + ts * w_bar[2],
        ..*s
    }
}

/// Advances the reference dynamics. Returns `(x̄', ū, ȳ)` where `ȳ` is the
/// reference output at the current sample.
pub fn reference_step(s: &EmcState, g: &GainSet, r_bar: f64) -> (f64, f64, f64) {
    let x_next = g.a_r * s.x_ref + g.b_r * r_bar;
    let u_ff = -g.k_r * s.x_ref + g.n_r * r_bar;
    (x_next, u_ff, s.x_ref)
}

/// Output of [`control_law`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlOutput {
    /// Saturated command (V).
    pub u: f64,
    /// Tracking feedback part (V).
    pub u_trk: f64,
    /// Disturbance rejection part (V), subtracted from the command.
    pub u_d: f64,
    /// Tracking error ē (rad/s).
    pub e_bar: f64,
    /// Next integrator state.
    pub x_2: f64,
    /// True when the saturation clamp engaged.
    pub clamped: bool,
}

/// `u = clamp(ū + k_p ē + k_i x_2 − M x_d, ±v_max)`; the integrator is held
/// while the clamp is engaged.
pub fn control_law(s: &EmcState, g: &GainSet, u_ff: f64, v_max: f64) -> ControlOutput {
    let e_bar = (s.x_ref - g.q[0] * s.x_d1 - g.q[1] * s.x_d2) - s.x_c;
    let u_trk = g.k_p * e_bar + g.k_i * s.x_2;
    let u_d = g.m[0] * s.x_d1 + g.m[1] * s.x_d2;
    let raw = u_ff + u_trk - u_d;
    let clamped = raw.abs() > v_max;
    ControlOutput {
        u: raw.clamp(-v_max, v_max),
        u_trk,
        u_d,
        e_bar,
        x_2: if clamped { s.x_2 } else { s.x_2 + e_bar },
        clamped,
    }
}

/// Per-step quantities worth logging.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmcTelemetry {
    /// Reference output ȳ.
    pub y_ref: f64,
    /// Model output y_m before the correction.
    pub y_m: f64,
    /// Model error.
    pub e_m: f64,
    /// Tracking error.
    pub e_bar: f64,
    /// Feedforward command ū.
    pub u_ff: f64,
    /// Tracking command.
    pub u_trk: f64,
    /// Disturbance rejection command.
    pub u_d: f64,
    /// Disturbance state used for `u_d`.
    pub x_d1: f64,
    /// Drift state used for `u_d`.
    pub x_d2: f64,
    /// Noise estimate.
    pub w_bar: [f64; 3],
    /// Gains of this step.
    pub gains: GainSet,
}

/// Result of one [`emc_step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmcStepOutput {
    /// State for the next sample.
    pub state: EmcState,
    /// Command to hold over the coming interval.
    pub u: f64,
    /// Logged quantities.
    pub telemetry: EmcTelemetry,
}

/// One full EMC cycle for an interval of `ts` seconds.
pub fn emc_step(
    s: &EmcState,
    p: &PlantParams,
    spec: &ContinuousEigenSpec,
    options: &EmcOptions,
    ts: f64,
    r_bar: f64,
    y_meas: f64,
) -> Result<EmcStepOutput> {
    let m = build_matrices(p, ts, options.disturbance_pole)?;
    let g = schedule_gains(spec, &m)?;
    let (w_bar, e_m) = observer_correct(s, &m, &g, y_meas);
    let (x_ref_next, u_ff, y_ref) = reference_step(s, &g, r_bar);
    let ctl = control_law(s, &g, u_ff, p.v_max);
    let mut next = model_predict(s, &m, ctl.u, &w_bar);
    next.x_ref = x_ref_next;
    next.x_2 = ctl.x_2;
    Ok(EmcStepOutput {
        state: next,
        u: ctl.u,
        telemetry: EmcTelemetry {
            y_ref,
            y_m: s.x_c,
            e_m,
            e_bar: ctl.e_bar,
            u_ff,
            u_trk: ctl.u_trk,
            u_d: ctl.u_d,
            x_d1: s.x_d1,
            x_d2: s.x_d2,
            w_bar,
            gains: g,
        },
    })
}

/// EMC unit holding its own state.
#[derive(Clone, Debug)]
pub struct EmcController {
    params: PlantParams,
    spec: ContinuousEigenSpec,
    options: EmcOptions,
    state: EmcState,
}

impl EmcController {
    /// Controller at rest.
    pub fn new(params: PlantParams, spec: ContinuousEigenSpec, options: EmcOptions) -> Self {
        Self {
            params,
            spec,
            options,
            state: EmcState::default(),
        }
    }

    /// Current state.
    pub fn state(&self) -> &EmcState {
        &self.state
    }

    /// Runs [`emc_step`] and keeps the new state.
    pub fn step(&mut self, ts: f64, r_bar: f64, y_meas: f64) -> Result<EmcStepOutput> {
        let out = emc_step(
            &self.state,
            &self.params,
            &self.spec,
            &self.options,
            ts,
            r_bar,
            y_meas,
        )?;
        self.state = out.state;
        Ok(out)
    }
}
