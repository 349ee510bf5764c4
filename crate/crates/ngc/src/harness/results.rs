//! Result serialization: tidy CSV plus a JSON run manifest.
//!
//! `results.csv` is long/tidy — one metric per row, fixed header — so
//! external plotting tools can pivot without bespoke parsing. Given the
//! same config and seeds the bytes are identical run to run; everything
//! nondeterministic (the wall-clock timestamp) lives in `manifest.json`.

use crate::error::{Error, Result};
use crate::harness::config::{fmt_f64, ExperimentConfig};
use crate::rng::fnv1a64;
use crate::train::TrainRun;
use std::io::Write;
use std::path::Path;

/// One metric observation in tidy format.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub seed: u64,
    /// Name of the swept axis (`sigma`, `xi`, `depth`, `n`, `graph`, ...).
    pub sweep: String,
    /// Value of the swept axis for this row (stringly typed: numeric sweeps
    /// use the canonical float format, categorical sweeps the tag itself).
    pub sweep_value: String,
    pub metric: String,
    pub value: f64,
}

impl ResultRow {
    pub fn new(
        experiment: impl Into<String>,
        seed: u64,
        sweep: impl Into<String>,
        sweep_value: impl Into<String>,
        metric: impl Into<String>,
        value: f64,
    ) -> ResultRow {
        ResultRow {
            experiment: experiment.into(),
            seed,
            sweep: sweep.into(),
            sweep_value: sweep_value.into(),
            metric: metric.into(),
            value,
        }
    }
}

/// The exact, stable `results.csv` header.
pub const RESULTS_HEADER: &str = "experiment,seed,sweep,sweep_value,metric,value";

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render rows to CSV text (LF endings, UTF-8, header first).
#[must_use]
pub fn results_csv_string(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&csv_field(&r.experiment));
        out.push(',');
        out.push_str(&r.seed.to_string());
        out.push(',');
        out.push_str(&csv_field(&r.sweep));
        out.push(',');
        out.push_str(&csv_field(&r.sweep_value));
        out.push(',');
        out.push_str(&csv_field(&r.metric));
        out.push(',');
        out.push_str(&fmt_f64(r.value));
        out.push('\n');
    }
    out
}

/// Write `results.csv`.
pub fn write_results(path: &Path, rows: &[ResultRow]) -> Result<()> {
    write_text(path, &results_csv_string(rows))
}

/// Write `manifest.json`: experiment, library version, seeds, a hash of the
/// effective config, and the (isolated) timestamp.
pub fn write_manifest(path: &Path, cfg: &ExperimentConfig) -> Result<()> {
    let canonical = cfg.to_canonical_string();
    let unix_time = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = serde_json::json!({
        "experiment": cfg.experiment.as_str(),
        "version": env!("CARGO_PKG_VERSION"),
        "seeds": cfg.seeds,
        "config_fnv1a64": format!("{:016x}", fnv1a64(canonical.as_bytes())),
        "unix_time": unix_time,
    });
    let text = serde_json::to_string_pretty(&manifest).expect("static manifest serializes");
    write_text(path, &(text + "\n"))
}

/// Write a training trace as CSV (`step,loss,weight_norm`).
pub fn write_trace_csv(path: &Path, run: &TrainRun) -> Result<()> {
    let mut out = String::from("step,loss,weight_norm\n");
    for (step, (loss, norm)) in run.loss_trace.iter().zip(&run.weight_norm_trace).enumerate() {
        out.push_str(&format!("{step},{},{}\n", fmt_f64(*loss), fmt_f64(*norm)));
    }
    write_text(path, &out)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let display = path.display().to_string();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(display.clone(), e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(display, e))
}
