//! Freeze `.dat` files: one line `x ylo yhi type branch` per point.

use std::fmt::Write;

use super::plots::{Axis, AxisSpec};
use super::ExportError;
use crate::autorepo::BifurcationDiagram;
use crate::model::Model;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreezeRow {
    pub x: f64,
    pub ylo: f64,
    pub yhi: f64,
    pub typ: i32,
    pub branch: usize,
}

/// Rows for a one-parameter diagram. The default pair is the main parameter
/// against the first dynamical variable.
pub fn freeze_rows(
    model: &Model,
    bd: &BifurcationDiagram,
    var_pair: Option<[&str; 2]>,
) -> Result<Vec<FreezeRow>, ExportError> {
    if bd.is_two_parameter() {
        return Err(ExportError::TwoParameterDiagram(bd.name.clone()));
    }
    let spec = match var_pair {
        Some(p) => AxisSpec::resolve(model, bd, &p)?,
        None => AxisSpec::default_for(bd),
    };
    let (ax, ay) = (&spec.0[0], &spec.0[1]);
    let mut out = Vec::with_capacity(bd.point_count());
    for b in &bd.branches {
        for p in &b.points {
            let x = scalar(ax, p);
            let (ylo, yhi) = match ay {
                Axis::Var { index, .. } if b.class.is_periodic() => (p.vars[*index].lower, p.vars[*index].upper),
                Axis::Var { index, .. } => (p.vars[*index].initial, p.vars[*index].initial),
                other => {
                    let y = scalar(other, p);
                    (y, y)
                }
            };
            out.push(FreezeRow { x, ylo, yhi, typ: p.typ, branch: b.index });
        }
    }
    Ok(out)
}

fn scalar(a: &Axis, p: &crate::autorepo::ContinuationPoint) -> f64 {
    match a {
        Axis::Param { index, .. } => p.par_values[*index],
        Axis::Var { index, .. } => p.vars[*index].initial,
        Axis::L2 => p.l2,
        Axis::T => p.period.unwrap_or(f64::NAN),
        Axis::F => p.period.map_or(f64::NAN, |t| 1.0 / t),
    }
}

/// Reals are written in shortest round-trip form, so reading a file back
/// gives the same values.
pub fn write_points(
    model: &Model,
    bd: &BifurcationDiagram,
    var_pair: Option<[&str; 2]>,
) -> Result<String, ExportError> {
    let mut out = String::new();
    for r in freeze_rows(model, bd, var_pair)? {
        let _ = writeln!(out, "{} {} {} {} {}", r.x, r.ylo, r.yhi, r.typ, r.branch);
    }
    Ok(out)
}

pub fn read_points(text: &str) -> Result<Vec<FreezeRow>, ExportError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| ExportError::BadFreezeRow { line: no + 1, msg };
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != 5 {
            return Err(bad(format!("expected 5 columns, found {}", cells.len())));
        }
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("`{}` is not a number", s)));
        out.push(FreezeRow {
            x: real(cells[0])?,
            ylo: real(cells[1])?,
            yhi: real(cells[2])?,
            typ: cells[3].parse().map_err(|_| bad(format!("type `{}` is not an integer", cells[3])))?,
            branch: cells[4].parse().map_err(|_| bad(format!("branch `{}` is not an integer", cells[4])))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_form() {
        assert_eq!(format!("{} {}", 5.0_f64, -60.0_f64), "5 -60");
        let rows = read_points("5 -60 -60 1 1\n\n0.25 -70 20 3 2\n").unwrap();
        assert_eq!(rows[1], FreezeRow { x: 0.25, ylo: -70.0, yhi: 20.0, typ: 3, branch: 2 });
        assert!(read_points("1 2 3\n").is_err());
    }
}
