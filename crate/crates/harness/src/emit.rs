//! Deterministic serialisation of study rows.
//!
//! CSV columns follow the `StudyRow` field order, with every float written with 17
//! significant digits so that it reads back to the same `f64`. Absent values are empty
//! cells; flags are joined with `;`. JSON holds the same rows under `rows`, next to the
//! study summary.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::study::{StudyRow, StudySummary};

/// CSV header, in `StudyRow` field order.
pub const CSV_COLUMNS: [&str; 13] = [
    "n",
    "lambda_n",
    "v",
    "exact_log_mag",
    "exact_phase",
    "asym_log_mag",
    "asym_phase",
    "oscillatory_factor",
    "rel_error",
    "claimed_order_value",
    "bits_used",
    "wall_time_ms",
    "flags",
];

/// A float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

fn csv_error(e: csv::Error) -> HarnessError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::Io(io),
        other => HarnessError::Serialize(format!("{other:?}")),
    }
}

/// Write rows as CSV with a header line.
pub fn write_csv<W: Write>(rows: &[StudyRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(csv_error)?;
    for r in rows {
        let flags: Vec<&str> = r.flags.iter().map(|f| f.as_str()).collect();
        w.write_record([
            r.n.to_string(),
            format_float(r.lambda_n),
            format_float(r.v),
            opt(r.exact_log_mag),
            opt(r.exact_phase),
            format_float(r.asym_log_mag),
            format_float(r.asym_phase),
            format_float(r.oscillatory_factor),
            opt(r.rel_error),
            format_float(r.claimed_order_value),
            r.bits_used.to_string(),
            format_float(r.wall_time_ms),
            flags.join(";"),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON document of one study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonStudy {
    pub rows: Vec<StudyRow>,
    pub summary: StudySummary,
}

/// Write rows and their summary as pretty-printed JSON.
pub fn write_json<W: Write>(rows: &[StudyRow], summary: &StudySummary, mut out: W) -> Result<()> {
    let doc = JsonStudy {
        rows: rows.to_vec(),
        summary: summary.clone(),
    };
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| HarnessError::Serialize(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Parse the output of [`write_json`].
pub fn read_json(text: &str) -> Result<JsonStudy> {
    serde_json::from_str(text).map_err(|e| HarnessError::Serialize(e.to_string()))
}
