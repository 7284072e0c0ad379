//! Force-time traces: CSV ingestion and two-phase evaluation against
//! body-part force limits.
//!
//! A trace is split at a configurable phase boundary (default 0.5 s):
//! the peak over all samples is checked against the transient limit, and
//! a plateau estimate past the boundary — when contact persists — against
//! the quasi-static limit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contact_model::BodyPartParams;

/// Default split between the dynamic and quasi-static phases `[s]`.
pub const DEFAULT_PHASE_BOUNDARY: f64 = 0.5;

/// Force below this after the boundary means contact has ended `[N]`.
pub const CONTACT_END_FORCE: f64 = 5.0;

/// Plateau stability: sample std-dev must be below max(5% of mean, 2 N).
pub const PLATEAU_REL_STD: f64 = 0.05;
pub const PLATEAU_ABS_STD: f64 = 2.0;

const CSV_HEADER: &str = "time_s,force_N";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Measured,
    Simulated,
}

/// A sampled force-time series with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceTrace {
    /// (t `[s]`, F `[N]`) pairs.
    pub samples: Vec<(f64, f64)>,
    pub source: TraceSource,
}

impl ForceTrace {
    pub fn new(samples: Vec<(f64, f64)>, source: TraceSource) -> Result<Self, TraceError> {
        validate_samples(&samples)?;
        Ok(Self { samples, source })
    }

    pub fn duration(&self) -> f64 {
        self.samples.last().map(|s| s.0).unwrap_or(0.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("missing or malformed header; expected `{CSV_HEADER}`")]
    Header,
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("row {row}: time does not increase")]
    NonMonotonicTime { row: usize },
    #[error("a trace needs at least 2 samples")]
    TooFewSamples,
}

fn validate_samples(samples: &[(f64, f64)]) -> Result<(), TraceError> {
    if samples.len() < 2 {
        return Err(TraceError::TooFewSamples);
    }
    for (i, &(t, f)) in samples.iter().enumerate() {
        if !t.is_finite() || !f.is_finite() {
            return Err(TraceError::Row {
                row: i + 1,
                message: "non-finite value".into(),
            });
        }
        if i > 0 && t <= samples[i - 1].0 {
            return Err(TraceError::NonMonotonicTime { row: i + 1 });
        }
    }
    Ok(())
}

/// Parse a `time_s,force_N` CSV document (UTF-8, `.` decimals, LF or CRLF).
pub fn parse_trace(text: &str, source: TraceSource) -> Result<ForceTrace, TraceError> {
    let mut lines = text.lines();
    match lines.next().map(str::trim_end) {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(TraceError::Header),
    }
    let mut samples = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let (t, f) = match (cells.next(), cells.next(), cells.next()) {
            (Some(t), Some(f), None) => (t, f),
            _ => {
                return Err(TraceError::Row {
                    row,
                    message: "expected exactly 2 columns".into(),
                })
            }
        };
        let t: f64 = t.trim().parse().map_err(|_| TraceError::Row {
            row,
            message: format!("non-numeric time `{t}`"),
        })?;
        let f: f64 = f.trim().parse().map_err(|_| TraceError::Row {
            row,
            message: format!("non-numeric force `{f}`"),
        })?;
        samples.push((t, f));
    }
    ForceTrace::new(samples, source)
}

/// Write the CSV form; values use the exact shortest representation so a
/// re-parse reproduces the trace bit for bit.
pub fn trace_to_csv(trace: &ForceTrace) -> String {
    let mut out = String::with_capacity(trace.samples.len() * 16 + 16);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for &(t, f) in &trace.samples {
        out.push_str(&format!("{t},{f}\n"));
    }
    out
}

/// Outcome of evaluating one trace against one body part.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceVerdict {
    pub peak_force: f64,
    pub peak_time: f64,
    /// Plateau estimate past the boundary; `None` when the trace ends
    /// first or contact has ended.
    pub quasistatic_force: Option<f64>,
    pub phase_boundary: f64,
    pub transient_pass: bool,
    /// `None` when no quasi-static phase exists.
    pub quasistatic_pass: Option<bool>,
}

/// Evaluate peak and plateau against the body-part limits.
///
/// The peak is the exact sample maximum — no smoothing. The plateau is
/// the mean of the final 20% of post-boundary samples, accepted only if
/// stable, with the window shrunk until stable or given up.
pub fn evaluate_trace(
    trace: &ForceTrace,
    part: &BodyPartParams,
    phase_boundary: f64,
) -> TraceVerdict {
    // First occurrence of the exact sample maximum; no smoothing.
    let (mut peak_time, mut peak_force) = trace.samples[0];
    for &(t, f) in &trace.samples[1..] {
        if f > peak_force {
            peak_force = f;
            peak_time = t;
        }
    }

    let after: Vec<f64> = trace
        .samples
        .iter()
        .filter(|s| s.0 > phase_boundary)
        .map(|s| s.1)
        .collect();
    let quasistatic_force = plateau_estimate(&after);

    TraceVerdict {
        peak_force,
        peak_time,
        quasistatic_force,
        phase_boundary,
        transient_pass: peak_force <= part.transient_force_limit,
        quasistatic_pass: quasistatic_force.map(|f| f <= part.quasistatic_force_limit),
    }
}

fn plateau_estimate(after: &[f64]) -> Option<f64> {
    if after.is_empty() {
        return None;
    }
    let max = after.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max < CONTACT_END_FORCE {
        return None; // contact ended (e.g. successful retraction)
    }
    for frac in [0.20, 0.10, 0.05, 0.025] {
        let n = ((after.len() as f64 * frac).ceil() as usize).max(1);
        let window = &after[after.len() - n..];
        let mean = window.iter().sum::<f64>() / n as f64;
        let std = if n >= 2 {
            let var =
                window.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            var.sqrt()
        } else {
            0.0
        };
        if std < (PLATEAU_REL_STD * mean.abs()).max(PLATEAU_ABS_STD) {
            return Some(mean);
        }
    }
    None
}
