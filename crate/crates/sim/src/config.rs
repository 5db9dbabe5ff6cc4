//! Scenario files.
//!
//! A scenario is a TOML document with one table per concern:
//!
//! ```toml
//! [scenario]
//! name = "distrej"
//! duration = 10.0
//! metrics_window_start = 1.0
//!
//! [timing]
//! ts_min = 0.01
//! ts_max = 0.03
//! seed = 1
//!
//! [controller]
//! kind = "emc"
//!
//! [reference]
//! times = [0.0, 5.0]
//! values = [6.0, -4.0]
//! ```
//!
//! Every other table (`[plant]`, `[emc]`, `[pi]`, `[disturbance]`,
//! `[stability]`, `[sweep]`, `[benchmark]`) is optional and falls back to the
//! defaults documented on its fields. Unknown keys are rejected.

use std::path::Path;

use emc_core::baseline_pi::PiParams;
use emc_core::emc::{ContinuousEigenSpec, ControllerMatrix, DisturbancePole, EmcOptions};
use emc_core::netmodel::{Distribution, TimingSpec};
use emc_core::plant::{DisturbanceProfile, PlantParams};
use emc_core::sim::{ControllerConfig, ReferenceSchedule};
use serde::Deserialize;

use crate::error::SimError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    scenario: ScenarioSection,
    timing: TimingSection,
    #[serde(default)]
    plant: PlantSection,
    controller: ControllerSection,
    #[serde(default)]
    emc: EmcSection,
    #[serde(default)]
    pi: PiSection,
    #[serde(default)]
    disturbance: DisturbanceSection,
    reference: ReferenceSection,
    #[serde(default)]
    stability: StabilitySection,
    #[serde(default)]
    sweep: SweepSection,
    #[serde(default)]
    benchmark: BenchmarkSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioSection {
    name: String,
    duration: f64,
    #[serde(default)]
    metrics_window_start: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimingSection {
    ts_min: f64,
    ts_max: f64,
    #[serde(default)]
    distribution: DistributionName,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    loss_probability: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DistributionName {
    #[default]
    Uniform,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlantSection {
    tau_m: f64,
    tau_a: f64,
    k_v: f64,
    v_max: f64,
    encoder_cpr: u32,
}

impl Default for PlantSection {
    fn default() -> Self {
        let p = PlantParams::default();
        Self {
            tau_m: p.tau_m,
            tau_a: p.tau_a,
            k_v: p.k_v,
            v_max: p.v_max,
            encoder_cpr: p.encoder_cpr,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerSection {
    kind: ControllerKind,
}

/// Which controller closes the loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    /// EMC unit.
    Emc,
    /// PI baseline.
    Pi,
}

impl ControllerKind {
    /// Lower-case label used in file names and CSV rows.
    pub fn label(self) -> &'static str {
        match self {
            ControllerKind::Emc => "emc",
            ControllerKind::Pi => "pi",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmcSection {
    mu_r: f64,
    mu_k: [f64; 2],
    mu_n: [f64; 3],
    #[serde(default)]
    controller_matrix: MatrixName,
    #[serde(default)]
    disturbance_pole: PoleName,
}

impl Default for EmcSection {
    fn default() -> Self {
        let t = ContinuousEigenSpec::nominal();
        Self {
            mu_r: t.mu_r,
            mu_k: t.mu_k,
            mu_n: t.mu_n,
            controller_matrix: MatrixName::default(),
            disturbance_pole: PoleName::default(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MatrixName {
    #[default]
    Conventional,
    AsPrinted,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PoleName {
    #[default]
    AsPrinted,
    Neutral,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PiSection {
    k_p: f64,
    k_i: f64,
    v_max: Option<f64>,
}

impl Default for PiSection {
    fn default() -> Self {
        let b = PiParams::benchmark();
        Self {
            k_p: b.k_p,
            k_i: b.k_i,
            v_max: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DisturbanceSection {
    #[serde(default)]
    kind: DisturbanceKind,
    #[serde(default)]
    magnitude: f64,
    #[serde(default)]
    start_time: f64,
    #[serde(default)]
    frequency: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DisturbanceKind {
    #[default]
    None,
    Step,
    Ramp,
    Sinusoid,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReferenceSection {
    times: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StabilitySection {
    #[serde(default = "default_points")]
    n_points: usize,
}

fn default_points() -> usize {
    41
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            n_points: default_points(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    #[serde(default)]
    ts_max: Vec<f64>,
    #[serde(default = "one")]
    repeats: u64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            ts_max: Vec::new(),
            repeats: one(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchmarkSection {
    #[serde(default = "one")]
    repeats: u64,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self { repeats: one() }
    }
}

fn one() -> u64 {
    1
}

/// EMC design: continuous eigenvalues and options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmcDesign {
    /// Continuous eigenvalues.
    pub spec: ContinuousEigenSpec,
    /// Runtime options.
    pub options: EmcOptions,
}

/// Validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    /// Name, used as the output file stem.
    pub name: String,
    /// Simulated time (s).
    pub duration: f64,
    /// Metrics ignore samples before this time (s).
    pub metrics_window_start: f64,
    /// Sampling-interval generator.
    pub timing: TimingSpec,
    /// Truth plant.
    pub plant: PlantParams,
    /// Controller used by `simulate`.
    pub controller: ControllerKind,
    /// EMC design, also used by `benchmark` and `stability`.
    pub emc: EmcDesign,
    /// PI gains, also used by `benchmark`.
    pub pi: PiParams,
    /// Load disturbance.
    pub disturbance: DisturbanceProfile,
    /// Setpoint schedule.
    pub reference: ReferenceSchedule,
    /// Grid size of the stability sweep.
    pub stability_points: usize,
    /// `ts_max` family of the critical-timing sweep.
    pub sweep_ts_max: Vec<f64>,
    /// Seeds per sweep point.
    pub sweep_repeats: u64,
    /// Seeds per benchmark.
    pub benchmark_repeats: u64,
}

fn field(section: &str, e: emc_core::Error) -> SimError {
    match e {
        emc_core::Error::InvalidParameter { field, reason } => SimError::Invalid {
            field: format!("{section}.{field}"),
            reason: reason.to_string(),
        },
        other => SimError::Invalid {
            field: section.to_string(),
            reason: other.to_string(),
        },
    }
}

fn invalid(field: &str, reason: &str) -> SimError {
    SimError::Invalid {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn parse(text: &str) -> Result<Self, SimError> {
        let f: File = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        Self::from_file(f)
    }

    /// Reads a scenario from disk.
    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|e| match e {
            SimError::Parse(msg) => SimError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn from_file(f: File) -> Result<Self, SimError> {
        let s = f.scenario;
        if s.name.is_empty()
            || !s
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(invalid("scenario.name", "must be non-empty [A-Za-z0-9_-]"));
        }
        if !(s.duration > 0.0) || !s.duration.is_finite() {
            return Err(invalid("scenario.duration", "must be positive"));
        }
        if !(0.0..s.duration).contains(&s.metrics_window_start) {
            return Err(invalid(
                "scenario.metrics_window_start",
                "must lie in [0, duration)",
            ));
        }

        let t = f.timing;
        let timing = TimingSpec {
            ts_min: t.ts_min,
            ts_max: t.ts_max,
            distribution: match t.distribution {
                DistributionName::Uniform => Distribution::Uniform,
            },
            seed: t.seed,
            loss_probability: t.loss_probability,
        };
        timing.validate().map_err(|e| field("timing", e))?;

        let p = f.plant;
        let plant = PlantParams {
            tau_m: p.tau_m,
            tau_a: p.tau_a,
            k_v: p.k_v,
            v_max: p.v_max,
            encoder_cpr: p.encoder_cpr,
        };
        plant.validate().map_err(|e| field("plant", e))?;

        let e = f.emc;
        let emc = EmcDesign {
            spec: ContinuousEigenSpec {
                mu_r: e.mu_r,
                mu_k: e.mu_k,
                mu_n: e.mu_n,
            },
            options: EmcOptions {
                controller_matrix: match e.controller_matrix {
                    MatrixName::Conventional => ControllerMatrix::Conventional,
                    MatrixName::AsPrinted => ControllerMatrix::AsPrinted,
                },
                disturbance_pole: match e.disturbance_pole {
                    PoleName::AsPrinted => DisturbancePole::AsPrinted,
                    PoleName::Neutral => DisturbancePole::Neutral,
                },
            },
        };
        emc.spec.validate().map_err(|e| field("emc", e))?;

        let pi = PiParams {
            k_p: f.pi.k_p,
            k_i: f.pi.k_i,
            v_max: f.pi.v_max.unwrap_or(plant.v_max),
        };
        pi.validate().map_err(|e| field("pi", e))?;

        let d = f.disturbance;
        let disturbance = match d.kind {
            DisturbanceKind::None => DisturbanceProfile::None,
            DisturbanceKind::Step => DisturbanceProfile::Step {
                magnitude: d.magnitude,
                start_time: d.start_time,
            },
            DisturbanceKind::Ramp => DisturbanceProfile::Ramp {
                magnitude: d.magnitude,
                start_time: d.start_time,
            },
            DisturbanceKind::Sinusoid => DisturbanceProfile::Sinusoid {
                magnitude: d.magnitude,
                start_time: d.start_time,
                frequency: d.frequency,
            },
        };
        disturbance
            .validate()
            .map_err(|e| field("disturbance", e))?;

        let r = f.reference;
        if r.times.len() != r.values.len() {
            return Err(invalid(
                "reference.values",
                "must have as many entries as reference.times",
            ));
        }
        let reference = ReferenceSchedule::new(r.times.into_iter().zip(r.values).collect())
            .map_err(|e| match e {
                emc_core::Error::InvalidParameter { reason, .. } => {
                    invalid("reference.times", reason)
                }
                other => field("reference", other),
            })?;

        if f.stability.n_points < 2 {
            return Err(invalid("stability.n_points", "need at least 2 grid points"));
        }
        if let Some(bad) = f
            .sweep
            .ts_max
            .iter()
            .find(|&&v| !(v >= timing.ts_min) || !v.is_finite())
        {
            return Err(invalid(
                "sweep.ts_max",
                &format!("{bad} is below timing.ts_min"),
            ));
        }
        if f.sweep.repeats == 0 {
            return Err(invalid("sweep.repeats", "must be at least 1"));
        }
        if f.benchmark.repeats == 0 {
            return Err(invalid("benchmark.repeats", "must be at least 1"));
        }

        Ok(Self {
            name: s.name,
            duration: s.duration,
            metrics_window_start: s.metrics_window_start,
            timing,
            plant,
            controller: f.controller.kind,
            emc,
            pi,
            disturbance,
            reference,
            stability_points: f.stability.n_points,
            sweep_ts_max: f.sweep.ts_max,
            sweep_repeats: f.sweep.repeats,
            benchmark_repeats: f.benchmark.repeats,
        })
    }

    /// Core loop configuration for `kind`.
    pub fn controller_config(&self, kind: ControllerKind) -> ControllerConfig {
        match kind {
            ControllerKind::Emc => ControllerConfig::Emc {
                spec: self.emc.spec,
                options: self.emc.options,
            },
            ControllerKind::Pi => ControllerConfig::Pi {
                params: self.pi,
                shaper_mu: self.emc.spec.mu_r,
            },
        }
    }
}

/// Bundled scenarios.
pub mod presets {
    /// Reference 6 then −4 rad/s with a step load, `Ts ∈ [0.01, 0.03]`.
    pub const DISTREJ: &str = include_str!("../presets/distrej.toml");
    /// Constant 6 rad/s, sweep over `ts_max`.
    pub const CRITICAL: &str = include_str!("../presets/critical.toml");
    /// EMC against PI, `Ts ∈ [0.01, 0.15]`.
    pub const BENCHMARK: &str = include_str!("../presets/benchmark.toml");

    /// Preset text by name.
    pub fn by_name(name: &str) -> Option<&'static str> {
        match name {
            "distrej" => Some(DISTREJ),
            "critical" => Some(CRITICAL),
            "benchmark" => Some(BENCHMARK),
            _ => None,
        }
    }
}
