//! JSON and CSV dumps of loaded and derived data.

use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::de::DeserializeOwned;

use super::ExportError;
use crate::analysis::{EigenData, Surface, Trajectory, ZeroAverage};
use crate::autorepo::{AutoRepo, BifurcationDiagram, Branch};
use crate::tables::SimulationTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy)]
pub enum DumpTarget<'a> {
    Repo(&'a AutoRepo),
    Diagram(&'a BifurcationDiagram),
    Table(&'a SimulationTable),
    Eigen(&'a EigenData),
    Trajectories(&'a [Trajectory]),
    Surface(&'a Surface),
    Projection(&'a IndexMap<String, Vec<f64>>),
    ZeroAverage(&'a ZeroAverage),
}

impl DumpTarget<'_> {
    fn kind(&self) -> &'static str {
        match self {
            DumpTarget::Repo(_) => "repository",
            DumpTarget::Diagram(_) => "diagram",
            DumpTarget::Table(_) => "simulation table",
            DumpTarget::Eigen(_) => "eigenvalue data",
            DumpTarget::Trajectories(_) => "trajectories",
            DumpTarget::Surface(_) => "surface",
            DumpTarget::Projection(_) => "projection",
            DumpTarget::ZeroAverage(_) => "averages",
        }
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> ExportError {
    ExportError::Io { path: path.display().to_string(), msg: e.to_string() }
}

pub fn to_json(target: DumpTarget) -> String {
    let v = match target {
        DumpTarget::Repo(x) => serde_json::to_string_pretty(x),
        DumpTarget::Diagram(x) => serde_json::to_string_pretty(x),
        DumpTarget::Table(x) => serde_json::to_string_pretty(x),
        DumpTarget::Eigen(x) => serde_json::to_string_pretty(x),
        DumpTarget::Trajectories(x) => serde_json::to_string_pretty(x),
        DumpTarget::Surface(x) => serde_json::to_string_pretty(x),
        DumpTarget::Projection(x) => serde_json::to_string_pretty(x),
        DumpTarget::ZeroAverage(x) => serde_json::to_string_pretty(x),
    };
    v.expect("dump types serialize") + "\n"
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, ExportError> {
    serde_json::from_str(text).map_err(|e| ExportError::Json(e.to_string()))
}

fn table_csv(header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<String, ExportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| ExportError::Csv(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r.iter().map(|x| x.to_string())).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| ExportError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn columns_csv(cols: &IndexMap<String, Vec<f64>>) -> Result<String, ExportError> {
    let header: Vec<String> = cols.keys().cloned().collect();
    let n = cols.values().next().map_or(0, Vec::len);
    table_csv(&header, (0..n).map(|i| cols.values().map(|c| c[i]).collect()))
}

pub fn branch_csv(bd: &BifurcationDiagram, b: &Branch) -> Result<String, ExportError> {
    let mut header: Vec<String> = vec!["idx".into()];
    header.extend(bd.hot.iter().cloned());
    header.extend(["L2".into(), "T".into()]);
    for v in &bd.variables {
        for s in ["i", "U", "L", "A"] {
            header.push(format!("{}_{}", v, s));
        }
    }
    for k in 1..=bd.variables.len() {
        header.push(format!("EigR{}", k));
    }
    for k in 1..=bd.variables.len() {
        header.push(format!("EigI{}", k));
    }
    table_csv(
        &header,
        b.points.iter().map(|p| {
            let mut r = vec![p.idx as f64];
            r.extend(&p.par_values);
            r.push(p.l2);
            r.push(p.period.unwrap_or(f64::NAN));
            for v in &p.vars {
                r.extend([v.initial, v.upper, v.lower, v.average]);
            }
            r.extend(&p.eig_real);
            r.extend(&p.eig_imag);
            r
        }),
    )
}

pub fn trajectory_csv(t: &Trajectory) -> Result<String, ExportError> {
    let mut cols = IndexMap::new();
    cols.insert("t".to_string(), t.t.clone());
    cols.extend(t.samples.iter().map(|(k, v)| (k.clone(), v.clone())));
    columns_csv(&cols)
}

pub fn matrix_csv(m: &ndarray::Array2<f64>) -> Result<String, ExportError> {
    let header: Vec<String> = (1..=m.ncols()).map(|j| format!("c{}", j)).collect();
    table_csv(&header, m.rows().into_iter().map(|r| r.to_vec()))
}

fn write(path: &Path, text: &str) -> Result<PathBuf, ExportError> {
    fs::write(path, text).map_err(|e| io(path, e))?;
    Ok(path.to_path_buf())
}

fn dir(path: &Path) -> Result<(), ExportError> {
    fs::create_dir_all(path).map_err(|e| io(path, e))
}

/// Write `target` to `path` and return the files written.
///
/// JSON always goes to the single file `path`. CSV writes one file for
/// tables, projections and averages; diagrams, trajectory sets and surfaces
/// become a directory `path` with one file per branch, trajectory or matrix.
pub fn dump(target: DumpTarget, format: DumpFormat, path: &Path) -> Result<Vec<PathBuf>, ExportError> {
    if format == DumpFormat::Json {
        return Ok(vec![write(path, &to_json(target))?]);
    }
    match target {
        DumpTarget::Table(t) => Ok(vec![write(path, &columns_csv(&t.columns)?)?]),
        DumpTarget::Projection(p) => Ok(vec![write(path, &columns_csv(p)?)?]),
        DumpTarget::ZeroAverage(z) => {
            let header = vec!["trajectory".to_string(), z.parameter.clone(), "J".to_string()];
            let mut w = csv::Writer::from_writer(Vec::new());
            let err = |e: csv::Error| ExportError::Csv(e.to_string());
            w.write_record(&header).map_err(err)?;
            for (k, (c, j)) in z.c.iter().zip(&z.j).enumerate() {
                w.write_record([format!("TRJ{}", k + 1), c.to_string(), j.to_string()]).map_err(err)?;
            }
            let bytes = w.into_inner().map_err(|e| ExportError::Csv(e.to_string()))?;
            Ok(vec![write(path, &String::from_utf8(bytes).expect("utf-8"))?])
        }
        DumpTarget::Diagram(bd) => {
            dir(path)?;
            bd.branches
                .iter()
                .map(|b| write(&path.join(format!("{}_{}.csv", bd.name, b.name)), &branch_csv(bd, b)?))
                .collect()
        }
        DumpTarget::Trajectories(ts) => {
            dir(path)?;
            ts.iter().map(|t| write(&path.join(format!("{}.csv", t.name)), &trajectory_csv(t)?)).collect()
        }
        DumpTarget::Surface(s) => {
            dir(path)?;
            s.matrices.iter().map(|(k, m)| write(&path.join(format!("{}.csv", k)), &matrix_csv(m)?)).collect()
        }
        other @ (DumpTarget::Repo(_) | DumpTarget::Eigen(_)) => Err(ExportError::UnsupportedTarget(other.kind())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    #[test]
    fn matrix_layout() {
        let m = Array2::from_shape_fn((4, 3), |(i, j)| (i * 3 + j) as f64);
        let text = matrix_csv(&m).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "c1,c2,c3");
        assert_eq!(lines[2], "3,4,5");
    }

    #[test]
    fn column_order() {
        let mut cols = IndexMap::new();
        cols.insert("t".to_string(), vec![0.0, 1.0]);
        cols.insert("v".to_string(), vec![2.0, 3.0]);
        cols.insert("a".to_string(), vec![4.0, 5.0]);
        assert_eq!(columns_csv(&cols).unwrap(), "t,v,a\n0,2,4\n1,3,5\n");
    }
}
