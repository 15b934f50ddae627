//! Rectangular tables and their bit-stable CSV encoding.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// 17 significant digits in exponent form; parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_f64(*v),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().copied().map(Cell::Num).collect());
    }

    /// Numeric column by name, skipping text cells.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .filter_map(|r| match r.get(idx) {
                    Some(Cell::Num(v)) => Some(*v),
                    _ => None,
                })
                .collect(),
        )
    }

    fn check_rectangular(&self) -> Result<()> {
        match self.rows.iter().position(|r| r.len() != self.header.len()) {
            Some(i) => Err(Error::Domain(format!(
                "row {i} has {} cells, header has {}",
                self.rows[i].len(),
                self.header.len()
            ))),
            None => Ok(()),
        }
    }

    /// CSV bytes: header row, RFC 4180 quoting, LF line endings.
    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        self.check_rectangular()?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let wrap = |source: csv::Error| Error::Csv { path: "<memory>".into(), source };
        w.write_record(&self.header).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(wrap)?;
        }
        w.into_inner().map_err(|e| Error::Io { path: "<memory>".into(), source: e.into_error() })
    }
}

/// Writes `table` to `path` as CSV.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let bytes = table.to_csv_bytes()?;
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let mut f = File::create(path).map_err(io)?;
    f.write_all(&bytes).map_err(io)?;
    f.sync_all().map_err(io)
}
