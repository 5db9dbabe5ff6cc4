//! The CLI subcommands as library calls: each runs and writes its CSV files
//! into `out_dir`, returning the paths written.

use std::path::{Path, PathBuf};

use crate::config::Scenario;
use crate::csv::{
    write_file, write_metrics, write_records, write_stability, write_trace, MetricsRow,
};
use crate::error::SimError;
use crate::runner::{self, RunOutput};

fn row(sc: &Scenario, run: &RunOutput) -> MetricsRow {
    MetricsRow {
        scenario: sc.name.clone(),
        controller: run.controller.label(),
        seed: run.timing.seed,
        ts_min: run.timing.ts_min,
        ts_max: run.timing.ts_max,
        metrics: run.metrics,
    }
}

fn ensure_dir(dir: &Path) -> Result<(), SimError> {
    std::fs::create_dir_all(dir).map_err(|source| SimError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// `simulate`: `<name>.csv`, `<name>_trace.csv`, `<name>_metrics.csv`.
pub fn simulate(sc: &Scenario, out_dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    ensure_dir(out_dir)?;
    let run = runner::run_scenario(sc)?;
    let records = out_dir.join(format!("{}.csv", sc.name));
    let trace = out_dir.join(format!("{}_trace.csv", sc.name));
    let metrics = out_dir.join(format!("{}_metrics.csv", sc.name));
    write_file(&records, |w| write_records(w, &run.records))?;
    write_file(&trace, |w| write_trace(w, &run.trace))?;
    write_file(&metrics, |w| write_metrics(w, &[row(sc, &run)]))?;
    Ok(vec![records, trace, metrics])
}

/// `benchmark`: `<name>_emc.csv` and `<name>_pi.csv` for the first seed and
/// `<name>_metrics.csv` with one EMC and one PI row per seed.
pub fn benchmark(sc: &Scenario, out_dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    ensure_dir(out_dir)?;
    let runs = runner::benchmark(sc)?;
    let emc = out_dir.join(format!("{}_emc.csv", sc.name));
    let pi = out_dir.join(format!("{}_pi.csv", sc.name));
    let metrics = out_dir.join(format!("{}_metrics.csv", sc.name));
    let first = &runs[0];
    write_file(&emc, |w| write_records(w, &first.emc.records))?;
    write_file(&pi, |w| write_records(w, &first.pi.records))?;
    let rows: Vec<_> = runs
        .iter()
        .flat_map(|b| [row(sc, &b.emc), row(sc, &b.pi)])
        .collect();
    write_file(&metrics, |w| write_metrics(w, &rows))?;
    Ok(vec![emc, pi, metrics])
}

/// `stability`: `<name>_stability.csv`.
pub fn stability(sc: &Scenario, out_dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    ensure_dir(out_dir)?;
    let report = runner::stability(sc)?;
    let path = out_dir.join(format!("{}_stability.csv", sc.name));
    write_file(&path, |w| write_stability(w, &report))?;
    Ok(vec![path])
}

/// `sweep`: `<name>_tsmax<value>.csv` (first seed) per bound and
/// `<name>_sweep.csv` with one metrics row per bound and seed.
pub fn sweep(sc: &Scenario, ts_max: &[f64], out_dir: &Path) -> Result<Vec<PathBuf>, SimError> {
    ensure_dir(out_dir)?;
    let list = if ts_max.is_empty() {
        &sc.sweep_ts_max[..]
    } else {
        ts_max
    };
    if list.is_empty() {
        return Err(SimError::Invalid {
            field: "sweep.ts_max".into(),
            reason: "no values given in the file or on the command line".into(),
        });
    }
    let runs = runner::sweep(sc, list, sc.sweep_repeats)?;
    let mut written = Vec::new();
    for run in runs.iter().filter(|r| r.timing.seed == sc.timing.seed) {
        let path = out_dir.join(format!("{}_tsmax{}.csv", sc.name, run.timing.ts_max));
        write_file(&path, |w| write_records(w, &run.records))?;
        written.push(path);
    }
    let summary = out_dir.join(format!("{}_sweep.csv", sc.name));
    let rows: Vec<_> = runs.iter().map(|r| row(sc, r)).collect();
    write_file(&summary, |w| write_metrics(w, &rows))?;
    written.push(summary);
    Ok(written)
}
