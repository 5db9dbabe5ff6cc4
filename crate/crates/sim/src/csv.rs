//! CSV writers. Floats use Rust's shortest round-trip formatting, so equal
//! inputs give equal bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use emc_core::netmodel::TimingTrace;
use emc_core::sim::{Metrics, SampleRecord};
use emc_core::stability::StabilityReport;

use crate::error::SimError;

/// Header of [`write_records`].
pub const RECORD_HEADER: &str =
    "k,t,ts,r_bar,y_ref,y_true,y_meas,y_m,e_m,e_bar,u,u_trk,u_d,u_ff,x_d1,x_d2,lost";

/// Header of [`write_metrics`].
pub const METRICS_HEADER: &str = "scenario,controller,seed,ts_min,ts_max,window_start,window_end,samples,rmse_tracking,rms_model_error,max_abs_model_error,rms_u_trk,settling_time";

/// One row of a metrics table.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    /// Scenario name.
    pub scenario: String,
    /// `emc` or `pi`.
    pub controller: &'static str,
    /// Trace seed.
    pub seed: u64,
    /// Lower sampling bound (s).
    pub ts_min: f64,
    /// Upper sampling bound (s).
    pub ts_max: f64,
    /// Values.
    pub metrics: Metrics,
}

/// Sample records, one row per step.
pub fn write_records<W: Write>(mut w: W, records: &[SampleRecord]) -> std::io::Result<()> {
    writeln!(w, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            r.t,
            r.ts,
            r.r_bar,
            r.y_ref,
            r.y_true,
            r.y_meas,
            r.y_m,
            r.e_m,
            r.e_bar,
            r.u,
            r.u_trk,
            r.u_d,
            r.u_ff,
            r.x_d1,
            r.x_d2,
            u8::from(r.lost)
        )?;
    }
    Ok(())
}

/// Sampling trace: `k,t,ts,lost`.
pub fn write_trace<W: Write>(mut w: W, trace: &TimingTrace) -> std::io::Result<()> {
    writeln!(w, "k,t,ts,lost")?;
    for (k, ((t, ts), lost)) in trace
        .start_times()
        .iter()
        .zip(&trace.intervals)
        .zip(&trace.loss_flags)
        .enumerate()
    {
        writeln!(w, "{k},{t},{ts},{}", u8::from(*lost))?;
    }
    Ok(())
}

/// Stability sweep in polar form.
pub fn write_stability<W: Write>(mut w: W, report: &StabilityReport) -> std::io::Result<()> {
    writeln!(w, "ts,group,index,re,im,modulus,argument")?;
    for p in report.points() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.ts,
            p.group,
            p.index,
            p.value.re,
            p.value.im,
            p.modulus(),
            p.argument()
        )?;
    }
    Ok(())
}

/// Metrics table; a missing settling time is an empty field.
pub fn write_metrics<W: Write>(mut w: W, rows: &[MetricsRow]) -> std::io::Result<()> {
    writeln!(w, "{METRICS_HEADER}")?;
    for r in rows {
        let m = &r.metrics;
        let settle = m.settling_time.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            r.controller,
            r.seed,
            r.ts_min,
            r.ts_max,
            m.window_start,
            m.window_end,
            m.samples,
            m.rmse_tracking,
            m.rms_model_error,
            m.max_abs_model_error,
            m.rms_u_trk,
            settle
        )?;
    }
    Ok(())
}

/// Creates `path` and hands a buffered writer to `body`.
pub fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), SimError> {
    let io = |source| SimError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    body(&mut w).map_err(io)?;
    w.flush().map_err(io)
}
