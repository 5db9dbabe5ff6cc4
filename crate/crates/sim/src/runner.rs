//! Scenario execution: single runs, EMC/PI benchmark, critical-timing sweep and
//! the stability report.

use emc_core::netmodel::{generate_trace, TimingSpec, TimingTrace};
use emc_core::sim::{compute_metrics, run_loop, LoopSetup, Metrics, SampleRecord};
use emc_core::stability::{sweep as stability_sweep, StabilityReport};

use crate::config::{ControllerKind, Scenario};
use crate::error::SimError;

/// Records and metrics of one loop run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    /// Controller that closed the loop.
    pub controller: ControllerKind,
    /// Timing used.
    pub timing: TimingSpec,
    /// Sampling trace.
    pub trace: TimingTrace,
    /// One record per step.
    pub records: Vec<SampleRecord>,
    /// Metrics over the configured window.
    pub metrics: Metrics,
}

/// Settling band: one encoder count over the shortest interval.
pub fn settle_band(sc: &Scenario, timing: &TimingSpec) -> f64 {
    sc.plant.encoder_resolution(timing.ts_min)
}

/// Runs `kind` on the trace generated from `timing`.
pub fn run_with(
    sc: &Scenario,
    kind: ControllerKind,
    timing: &TimingSpec,
) -> Result<RunOutput, SimError> {
    let trace = generate_trace(timing, sc.duration)?;
    let setup = LoopSetup {
        plant: sc.plant,
        controller: sc.controller_config(kind),
        disturbance: sc.disturbance,
        reference: sc.reference.clone(),
    };
    let records = run_loop(&setup, &trace)?;
    let last_change = sc.reference.change_times().last().unwrap_or(0.0);
    let metrics = compute_metrics(
        &records,
        sc.metrics_window_start,
        settle_band(sc, timing),
        last_change,
    )?;
    Ok(RunOutput {
        controller: kind,
        timing: *timing,
        trace,
        records,
        metrics,
    })
}

/// Runs the scenario's own controller and timing.
pub fn run_scenario(sc: &Scenario) -> Result<RunOutput, SimError> {
    run_with(sc, sc.controller, &sc.timing)
}

/// Seeds `seed, seed + 1, …` for `repeats` runs.
pub fn seeds(first: u64, repeats: u64) -> impl Iterator<Item = u64> {
    (0..repeats).map(move |i| first.wrapping_add(i))
}

/// EMC and PI on one shared trace.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchmarkRun {
    /// Trace seed.
    pub seed: u64,
    /// EMC run.
    pub emc: RunOutput,
    /// PI run.
    pub pi: RunOutput,
}

/// Benchmark over `benchmark_repeats` seeds, one thread per seed.
pub fn benchmark(sc: &Scenario) -> Result<Vec<BenchmarkRun>, SimError> {
    let seeds: Vec<u64> = seeds(sc.timing.seed, sc.benchmark_repeats).collect();
    parallel(&seeds, |&seed| {
        let timing = TimingSpec { seed, ..sc.timing };
        Ok(BenchmarkRun {
            seed,
            emc: run_with(sc, ControllerKind::Emc, &timing)?,
            pi: run_with(sc, ControllerKind::Pi, &timing)?,
        })
    })
}

/// Critical-timing family: the scenario's controller for every `ts_max` and
/// every seed, ordered by `ts_max` then seed.
pub fn sweep(sc: &Scenario, ts_max: &[f64], repeats: u64) -> Result<Vec<RunOutput>, SimError> {
    if let Some(bad) = ts_max.iter().find(|&&v| !(v >= sc.timing.ts_min)) {
        return Err(SimError::Invalid {
            field: "sweep.ts_max".into(),
            reason: format!("{bad} is below timing.ts_min"),
        });
    }
    let jobs: Vec<TimingSpec> = ts_max
        .iter()
        .flat_map(|&ts_max| {
            seeds(sc.timing.seed, repeats).map(move |seed| TimingSpec {
                ts_max,
                seed,
                ..sc.timing
            })
        })
        .collect();
    parallel(&jobs, |timing| run_with(sc, sc.controller, timing))
}

/// Mean tracking RMSE per `ts_max` of a [`sweep`] result, in input order.
pub fn mean_rmse_by_ts_max(runs: &[RunOutput]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new();
    for r in runs {
        match out.iter_mut().find(|(t, _, _)| *t == r.timing.ts_max) {
            Some(entry) => {
                entry.1 += r.metrics.rmse_tracking;
                entry.2 += 1;
            }
            None => out.push((r.timing.ts_max, r.metrics.rmse_tracking, 1)),
        }
    }
    out.into_iter().map(|(t, s, n)| (t, s / n as f64)).collect()
}

/// Unit-circle sweep over the scenario's sampling range.
pub fn stability(sc: &Scenario) -> Result<StabilityReport, SimError> {
    Ok(stability_sweep(
        &sc.emc.spec,
        &sc.plant,
        &sc.emc.options,
        sc.timing.ts_min,
        sc.timing.ts_max,
        sc.stability_points,
    )?)
}

fn parallel<T: Sync, R: Send>(
    jobs: &[T],
    f: impl Fn(&T) -> Result<R, SimError> + Sync,
) -> Result<Vec<R>, SimError> {
    std::thread::scope(|s| {
        let handles: Vec<_> = jobs.iter().map(|j| s.spawn(|| f(j))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    })
}
