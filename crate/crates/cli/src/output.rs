//! Artifacts of a run and how they are written.
//!
//! For a file stem `s` a run writes `s.json` (the record), `s.log` (text
//! rendering), `s.csv` when the task produces a table, and with
//! `--emit-plot-data` one `s.plot.<series>.csv` per series.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Seventeen significant digits: enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_float(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<String>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// An `(x, y)` series for external plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub x: String,
    pub y: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A certificate whose hypotheses or conclusion failed.
    HypothesisFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::HypothesisFailure => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::HypothesisFailure => "hypothesis failure",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Artifacts {
    pub status: Status,
    pub record: serde_json::Value,
    pub log: String,
    pub table: Option<Table>,
    pub series: Vec<Series>,
}

impl Artifacts {
    pub fn new(status: Status, record: serde_json::Value, log: String) -> Self {
        Artifacts { status, record, log, table: None, series: Vec::new() }
    }
}

/// Writes the artifacts under `dir` and returns the paths written.
pub fn write_artifacts(dir: &Path, stem: &str, a: &Artifacts, plot_data: bool) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut put = |name: String, bytes: &[u8]| -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };
    let mut json = serde_json::to_string_pretty(&a.record).map_err(|e| CliError::Io(e.to_string()))?;
    json.push('\n');
    put(format!("{stem}.json"), json.as_bytes())?;
    put(format!("{stem}.log"), a.log.as_bytes())?;
    if let Some(t) = &a.table {
        put(format!("{stem}.csv"), &t.to_csv()?)?;
    }
    if plot_data {
        for s in &a.series {
            let mut t = Table::new(vec![s.x.clone(), s.y.clone()]);
            for (x, y) in &s.points {
                t.push(vec![Cell::Num(*x), Cell::Num(*y)]);
            }
            put(format!("{stem}.plot.{}.csv", s.name), &t.to_csv()?)?;
        }
    }
    Ok(written)
}

/// Appends a line to a log buffer.
pub fn line(log: &mut String, text: impl AsRef<str>) {
    let _ = writeln!(log, "{}", text.as_ref());
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn floats_round_trip(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back: f64 = format_float(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn csv_has_a_header_and_quotes_when_needed() {
        let mut t = Table::new(vec!["q".into(), "note".into()]);
        t.push(vec![1.5.into(), "a,b".into()]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "q,note\n1.5000000000000000e0,\"a,b\"\n");
    }
}
