//! Report records, deterministic CSV/JSON emission, and verdict
//! summaries.
//!
//! All numeric output is printed with 12 significant digits so that
//! repeated runs with the same configuration are byte-identical.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// 12-significant-digit rendering used for every number we emit.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else { format!("{x}") };
    }
    format!("{x:.11e}")
}

/// One row of an orthogonality report (shared by both groups).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SchurRow {
    pub radius: f64,
    pub quad_id: usize,
    pub re_ratio: f64,
    pub im_ratio: f64,
    pub predicted_pairing_re: f64,
    pub predicted_pairing_im: f64,
    /// ratio / pairing when the pairing is nonzero, else NaN
    pub f_inv_estimate: f64,
}

pub const SCHUR_CSV_HEADER: &str =
    "R,quad_id,re_ratio,im_ratio,predicted_pairing_re,predicted_pairing_im,f_inv_estimate";

pub fn schur_rows_to_csv(rows: &[SchurRow]) -> String {
    let mut out = String::new();
    out.push_str(SCHUR_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt_sig(r.radius),
            r.quad_id,
            fmt_sig(r.re_ratio),
            fmt_sig(r.im_ratio),
            fmt_sig(r.predicted_pairing_re),
            fmt_sig(r.predicted_pairing_im),
            fmt_sig(r.f_inv_estimate),
        );
    }
    out
}

pub fn schur_rows_from_csv(text: &str) -> Result<Vec<SchurRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::config("empty CSV".to_string()))?;
    if header.trim() != SCHUR_CSV_HEADER {
        return Err(Error::config(format!("unexpected CSV header: {header}")));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::config(format!("row {i}: expected 7 fields")));
        }
        let num = |s: &str| -> Result<f64> {
            if s == "nan" {
                return Ok(f64::NAN);
            }
            s.parse::<f64>()
                .map_err(|e| Error::config(format!("row {i}: {e}")))
        };
        rows.push(SchurRow {
            radius: num(f[0])?,
            quad_id: f[1]
                .parse()
                .map_err(|e| Error::config(format!("row {i}: {e}")))?,
            re_ratio: num(f[2])?,
            im_ratio: num(f[3])?,
            predicted_pairing_re: num(f[4])?,
            predicted_pairing_im: num(f[5])?,
            f_inv_estimate: num(f[6])?,
        });
    }
    Ok(rows)
}

/// Where a reference value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefSource {
    /// an identity or definition evaluated directly
    Definition,
    /// an independently computed oracle (brute force, closed form, ...)
    Oracle,
    /// a bound or value quoted from the literature
    Literature,
}

/// One pass/fail record of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub id: String,
    pub measured: f64,
    pub reference: f64,
    pub source: RefSource,
    pub pass: bool,
    pub detail: String,
    /// wall-clock cost of producing the measurement; informational only,
    /// never compared on replay
    #[serde(default)]
    pub runtime_ms: f64,
}

impl VerdictRecord {
    pub fn new(
        id: impl Into<String>,
        measured: f64,
        reference: f64,
        source: RefSource,
        pass: bool,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            measured,
            reference,
            source,
            pass,
            detail: detail.into(),
            runtime_ms: 0.0,
        }
    }

    pub fn with_runtime(mut self, ms: f64) -> Self {
        self.runtime_ms = ms;
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictSummary {
    pub experiment: String,
    pub seed: u64,
    pub records: Vec<VerdictRecord>,
}

impl VerdictSummary {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config(format!("verdict JSON: {e}")))
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting_is_stable() {
        assert_eq!(fmt_sig(1.0), "1.00000000000e0");
        assert_eq!(fmt_sig(0.0), "0.00000000000e0");
        assert_eq!(fmt_sig(-0.125), "-1.25000000000e-1");
    }

    #[test]
    fn csv_roundtrip() {
        let rows = vec![SchurRow {
            radius: 100.0,
            quad_id: 2,
            re_ratio: 0.123456789,
            im_ratio: -1e-9,
            predicted_pairing_re: 1.0,
            predicted_pairing_im: 0.0,
            f_inv_estimate: f64::NAN,
        }];
        let csv = schur_rows_to_csv(&rows);
        let back = schur_rows_from_csv(&csv).unwrap();
        assert_eq!(back.len(), 1);
        assert!((back[0].re_ratio - rows[0].re_ratio).abs() < 1e-11);
        assert!(back[0].f_inv_estimate.is_nan());
    }
}

