//! CSV and JSON renderings of evaluation results. Floats are written in
//! shortest round-trip form, so identical results give identical bytes.

use std::io::Write;

use serde::Serialize;

use super::bench::BenchmarkResult;
use super::sweep::{IterationStudy, SweepResult};
use super::timing::TimingRow;
use crate::error::{Error, Result};

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidData(format!("CSV output: {e}"))
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::InvalidData(e.to_string()))
}

/// One line per (dataset, detector, mode, k).
pub fn write_records_csv<W: Write>(result: &BenchmarkResult, out: W) -> Result<()> {
    write_rows(out, &result.records)
}

/// Best-k rows followed by nothing else; improvements go to
/// [`write_improvements_csv`].
pub fn write_summary_csv<W: Write>(result: &BenchmarkResult, out: W) -> Result<()> {
    write_rows(out, &result.summary)
}

pub fn write_improvements_csv<W: Write>(result: &BenchmarkResult, out: W) -> Result<()> {
    write_rows(out, &result.improvements)
}

#[derive(Serialize)]
struct CurveRow<'a> {
    detector: &'a str,
    mode: super::Mode,
    iterations: usize,
    k: usize,
    auc: f64,
    representatives: Option<usize>,
    seconds: Option<f64>,
}

/// Per-k curve, one row per k. Timing is included only on request.
pub fn write_sweep_csv<W: Write>(sweep: &SweepResult, timing: bool, out: W) -> Result<()> {
    write_rows(
        out,
        sweep.points.iter().map(|p| CurveRow {
            detector: &sweep.detector,
            mode: sweep.mode,
            iterations: sweep.iterations,
            k: p.k,
            auc: p.auc,
            representatives: p.representatives,
            seconds: timing.then_some(p.seconds),
        }),
    )
}

/// Best-k AUC per iteration count.
pub fn write_iteration_csv<W: Write>(study: &IterationStudy, out: W) -> Result<()> {
    write_rows(out, &study.rows)
}

#[derive(Serialize)]
struct IterationCurveRow {
    iterations: usize,
    k: usize,
    auc: f64,
}

/// Every evaluated (iterations, k) pair.
pub fn write_iteration_curve_csv<W: Write>(study: &IterationStudy, out: W) -> Result<()> {
    write_rows(
        out,
        study
            .curve
            .iter()
            .map(|&(iterations, k, auc)| IterationCurveRow { iterations, k, auc }),
    )
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], out: W) -> Result<()> {
    write_rows(out, rows)
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::InvalidData(format!("JSON output: {e}")))?;
    out.write_all(b"\n")
        .map_err(|e| Error::InvalidData(e.to_string()))
}
