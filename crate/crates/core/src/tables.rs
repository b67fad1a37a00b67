//! Whitespace-delimited `.dat` tables: simulations and nullclines.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::Model;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TableError {
    #[error("row {row}: expected {expected} columns, found {found}")]
    ColumnCountMismatch { row: usize, expected: usize, found: usize },
    #[error("row {row}, column {col}: `{cell}` is not a number")]
    NonNumericCell { row: usize, col: usize, cell: String },
    #[error("file contains no data rows")]
    EmptyFile,
    #[error("`{0}` does not follow the `[text]_x_y.dat` naming convention")]
    BadFilename(String),
    #[error("line {line}: {msg}")]
    BadRow { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTable {
    pub columns: IndexMap<String, Vec<f64>>,
    pub row_count: usize,
}

impl SimulationTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let names: Vec<&str> = self.columns.keys().map(String::as_str).collect();
        crate::model::lookup(&names, name, "column").map(|i| self.columns[i].as_slice())
    }
}

pub type Segment = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullclinePair {
    pub x_var: String,
    pub y_var: String,
    /// Segments of the nullcline with index 1.
    pub nc_x: Vec<Segment>,
    /// Segments of the nullcline with index 2.
    pub nc_y: Vec<Segment>,
}

fn data_lines(source: &str) -> impl Iterator<Item = (usize, &str)> {
    source.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_data(model: &Model, source: &str) -> Result<SimulationTable, TableError> {
    let names: Vec<String> = model.variables.keys().cloned().collect();
    let expected = names.len();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); expected];
    for (row, (_, line)) in data_lines(source).enumerate() {
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != expected {
            return Err(TableError::ColumnCountMismatch { row: row + 1, expected, found: cells.len() });
        }
        for (col, cell) in cells.iter().enumerate() {
            let x: f64 = cell.parse().map_err(|_| TableError::NonNumericCell {
                row: row + 1,
                col: col + 1,
                cell: cell.to_string(),
            })?;
            cols[col].push(x);
        }
    }
    let row_count = cols[0].len();
    if row_count == 0 {
        return Err(TableError::EmptyFile);
    }
    Ok(SimulationTable { columns: names.into_iter().zip(cols).collect(), row_count })
}

/// `(x_var, y_var)` from a `[text]_x_y.dat` filename.
pub fn nullcline_axes(path: &Path) -> Result<(String, String), TableError> {
    let file = path.file_name().and_then(|f| f.to_str()).unwrap_or_default();
    let bad = || TableError::BadFilename(file.to_string());
    let stem = file.strip_suffix(".dat").ok_or_else(bad)?;
    let toks: Vec<&str> = stem.split('_').collect();
    if toks.len() < 2 || toks[toks.len() - 2].is_empty() || toks[toks.len() - 1].is_empty() {
        return Err(bad());
    }
    Ok((toks[toks.len() - 2].to_string(), toks[toks.len() - 1].to_string()))
}

pub fn parse_nullcline_text(x_var: &str, y_var: &str, source: &str) -> Result<NullclinePair, TableError> {
    let mut pair =
        NullclinePair { x_var: x_var.to_string(), y_var: y_var.to_string(), nc_x: Vec::new(), nc_y: Vec::new() };
    // last index seen in the current run; None after a blank line
    let mut current: Option<u8> = None;
    for (no, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            current = None;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: String| TableError::BadRow { line: no + 1, msg };
        if cells.len() != 3 {
            return Err(bad(format!("expected 3 columns, found {}", cells.len())));
        }
        let x: f64 = cells[0].parse().map_err(|_| bad(format!("`{}` is not a number", cells[0])))?;
        let y: f64 = cells[1].parse().map_err(|_| bad(format!("`{}` is not a number", cells[1])))?;
        let idx: u8 = match cells[2] {
            "1" => 1,
            "2" => 2,
            other => return Err(bad(format!("nullcline index `{}` is not 1 or 2", other))),
        };
        let target = if idx == 1 { &mut pair.nc_x } else { &mut pair.nc_y };
        if current != Some(idx) {
            target.push(Vec::new());
        }
        target.last_mut().expect("segment opened").push((x, y));
        current = Some(idx);
    }
    Ok(pair)
}

pub fn parse_nullclines(path: &Path) -> Result<NullclinePair, crate::Error> {
    let (x, y) = nullcline_axes(path)?;
    let text =
        std::fs::read_to_string(path).map_err(|e| crate::Error::Io { path: path.display().to_string(), source: e })?;
    Ok(parse_nullcline_text(&x, &y, &text)?)
}
