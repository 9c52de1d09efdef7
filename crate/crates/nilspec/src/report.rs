//! Artifact emission: versioned JSON reports and CSV tables.
//!
//! Both formats are deterministic byte for byte: struct fields serialize in
//! declaration order, floats print in Rust's shortest round-trip form, and
//! all reductions upstream use fixed trees.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Bumped on any change to report layout or field meaning.
pub const SCHEMA_VERSION: u32 = 1;

/// A real value with its certified or estimated error; no bare numbers
/// leave the tool.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Measured {
    pub value: f64,
    pub error_estimate: f64,
}

impl Measured {
    pub fn new(value: f64, error_estimate: f64) -> Self {
        Measured { value, error_estimate }
    }
}

/// Complex analogue of [`Measured`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexMeasured {
    pub re: f64,
    pub im: f64,
    pub error_estimate: f64,
}

/// Envelope for every JSON artifact: schema version, producing subcommand,
/// model label, payload.
#[derive(Debug, Clone, Serialize)]
pub struct Report<T: Serialize> {
    pub schema_version: u32,
    pub tool: String,
    pub model: String,
    pub data: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(tool: &str, model: &str, data: T) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: tool.into(),
            model: model.into(),
            data,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("JSON serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json_string()?)?;
        Ok(())
    }
}

/// Shortest round-trip decimal; scientific notation outside [1e-4, 1e16)
/// keeps tiny error bounds readable without losing a digit.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        // Either sign of zero; "-0" would round-trip but reads as noise.
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-4..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// In-memory CSV table with a fixed column set; rendering yields a header
/// row plus one line per data row.
#[derive(Debug, Clone)]
pub struct CsvTable {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        CsvTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &x in &[
            0.0,
            1.0 / 3.0,
            1.0 / 720.0,
            -2.5e-13,
            1e-300,
            4.0 * std::f64::consts::PI * std::f64::consts::PI * 1e6,
            f64::MIN_POSITIVE,
        ] {
            let s = format_float(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, x, "{s}");
        }
    }

    #[test]
    fn csv_layout_and_shape_guard() {
        let mut t = CsvTable::new(&["t", "theta", "tail_bound"]);
        t.push_row(vec![0.5, 1.25, 1e-12]).unwrap();
        t.push_row(vec![1.0, 1.0, 5e-18]).unwrap();
        let body = t.render();
        let mut lines = body.lines();
        assert_eq!(lines.next(), Some("t,theta,tail_bound"));
        assert_eq!(lines.next(), Some("0.5,1.25,1e-12"));
        assert!(matches!(
            t.push_row(vec![1.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn json_envelope_is_versioned_and_deterministic() {
        #[derive(Serialize, Clone)]
        struct Payload {
            value: Measured,
        }
        let r = Report::new("zeta", "torus:1", Payload {
            value: Measured::new(-1.0, 3e-14),
        });
        let a = r.to_json_string().unwrap();
        let b = r.to_json_string().unwrap();
        assert_eq!(a, b);
        let parsed: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(parsed["schema_version"], SCHEMA_VERSION);
        assert_eq!(parsed["data"]["value"]["error_estimate"], 3e-14);
    }
}
