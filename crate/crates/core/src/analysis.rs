//! Post-processing of loaded diagrams: eigenvalue tables, special
//! trajectories, orbit averages and trajectory-family surfaces.

use std::cmp::Ordering;

use indexmap::IndexMap;
use ndarray::{Array2, Array3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autorepo::BifurcationDiagram;
use crate::expr::{Environment, Expr, ExprError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("diagram {0} has no labeled point with an orbit")]
    NoOrbits(String),
    #[error("unbound identifier `{0}`")]
    UnboundIdentifier(String),
    #[error("trajectory {trajectory} has {found} samples, expected {expected}")]
    GridLengthMismatch { trajectory: String, expected: usize, found: usize },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("no trajectories given")]
    NoTrajectories,
    #[error(transparent)]
    Expr(ExprError),
}

impl From<ExprError> for AnalysisError {
    fn from(e: ExprError) -> Self {
        match e {
            ExprError::UnboundIdentifier(n) => AnalysisError::UnboundIdentifier(n),
            other => AnalysisError::Expr(other),
        }
    }
}

/// Eigenvalues (or Floquet multipliers) as stored by the continuation.
///
/// `per_branch[b]` is `points x n x 2` (last axis: real, imaginary).
/// `per_label` is `labeled points x (1 + n) x 2`; column 0 of both slices
/// holds the 1-based owning branch index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub per_branch: Vec<Array3<f64>>,
    pub per_label: Array3<f64>,
}

/// Order of the eigenvalues of one point: real part ascending, ties broken by
/// imaginary part descending, so a conjugate pair reads `+w, -w`.
pub fn eig_order(re: &[f64], im: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..re.len()).collect();
    idx.sort_by(|&a, &b| match re[a].total_cmp(&re[b]) {
        Ordering::Equal => im[b].total_cmp(&im[a]),
        o => o,
    });
    idx
}

fn ordered(re: &[f64], im: &[f64], sorted: bool) -> Vec<(f64, f64)> {
    if sorted {
        eig_order(re, im).into_iter().map(|k| (re[k], im[k])).collect()
    } else {
        re.iter().copied().zip(im.iter().copied()).collect()
    }
}

pub fn get_eig(bd: &BifurcationDiagram, sorted: bool) -> EigenData {
    let n = bd.variables.len();
    let per_branch = bd
        .branches
        .iter()
        .map(|b| {
            let mut a = Array3::zeros((b.points.len(), n, 2));
            for (i, p) in b.points.iter().enumerate() {
                for (k, (re, im)) in ordered(&p.eig_real, &p.eig_imag, sorted).into_iter().enumerate() {
                    a[[i, k, 0]] = re;
                    a[[i, k, 1]] = im;
                }
            }
            a
        })
        .collect();
    let labels = bd.labeled();
    let mut per_label = Array3::zeros((labels.len(), n + 1, 2));
    for (i, lp) in labels.iter().enumerate() {
        per_label[[i, 0, 0]] = lp.branch as f64;
        per_label[[i, 0, 1]] = lp.branch as f64;
        let p = &lp.point;
        for (k, (re, im)) in ordered(&p.eig_real, &p.eig_imag, sorted).into_iter().enumerate() {
            per_label[[i, k + 1, 0]] = re;
            per_label[[i, k + 1, 1]] = im;
        }
    }
    EigenData { per_branch, per_label }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `TRJ1`, `TRJ2`, ...
    pub name: String,
    /// Name of the labeled point the orbit came from.
    pub source_label: String,
    /// Period-normalized time.
    pub t: Vec<f64>,
    pub samples: IndexMap<String, Vec<f64>>,
    /// Hot parameter values at the labeled point.
    pub params: IndexMap<String, f64>,
    pub period: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// A sample column or parameter value, by name.
    fn lookup_sample(&self, name: &str) -> Option<&[f64]> {
        let names: Vec<&str> = self.samples.keys().map(String::as_str).collect();
        crate::model::lookup(&names, name, "variable").map(|i| self.samples[i].as_slice())
    }

    fn lookup_param(&self, name: &str) -> Option<f64> {
        let names: Vec<&str> = self.params.keys().map(String::as_str).collect();
        crate::model::lookup(&names, name, "parameter").map(|i| self.params[i])
    }
}

pub fn get_trj(bd: &BifurcationDiagram) -> Result<Vec<Trajectory>, AnalysisError> {
    let mut out = Vec::new();
    for lp in bd.labeled() {
        let Some(orbit) = &lp.orbit else { continue };
        let params = bd.hot.iter().cloned().zip(lp.point.par_values.iter().copied()).collect();
        out.push(Trajectory {
            name: format!("TRJ{}", out.len() + 1),
            source_label: lp.name.clone(),
            t: orbit.t.clone(),
            samples: orbit.samples.clone(),
            params,
            period: lp.point.period.unwrap_or(1.0),
        });
    }
    if out.is_empty() {
        return Err(AnalysisError::NoOrbits(bd.name.clone()));
    }
    Ok(out)
}

/// Time average of `integrand` over one orbit: `(1/T) * trapz(t*T, f)`.
///
/// Identifiers resolve against the orbit samples, then the trajectory
/// parameters and `T`, then `extra`. A name in `extra` that a trajectory also
/// provides is shadowed, with a warning.
pub fn average_over_orbit(trj: &Trajectory, integrand: &Expr, extra: &dyn Environment) -> Result<f64, AnalysisError> {
    let idents = integrand.identifiers();
    let mut names: Vec<String> = Vec::with_capacity(idents.len());
    // per identifier: Ok(column) or Err(constant)
    let mut sources: Vec<Result<&[f64], f64>> = Vec::with_capacity(idents.len());
    for id in &idents {
        let local_col = trj.lookup_sample(id);
        let local_par = trj.lookup_param(id).or(if id == "T" { Some(trj.period) } else { None });
        let outside = extra.get(id);
        if outside.is_some() && (local_col.is_some() || local_par.is_some()) {
            log::warn!("`{}` is provided by {}; the bound value is ignored", id, trj.name);
        }
        let src = match (local_col, local_par) {
            (Some(c), _) => Ok(c),
            (None, Some(v)) => Err(v),
            (None, None) => Err(extra_lookup(extra, id)?),
        };
        names.push(id.clone());
        sources.push(src);
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let bound = integrand.bind(&refs)?;
    let tau: Vec<f64> = trj.t.iter().map(|t| t * trj.period).collect();
    let mut slots = vec![0.0; names.len()];
    let f: Vec<f64> = (0..trj.len())
        .map(|k| {
            for (s, src) in slots.iter_mut().zip(&sources) {
                *s = match src {
                    Ok(col) => col[k],
                    Err(v) => *v,
                };
            }
            bound.eval(&slots)
        })
        .collect();
    Ok(trapz(&tau, &f) / trj.period)
}

fn extra_lookup(extra: &dyn Environment, id: &str) -> Result<f64, AnalysisError> {
    if let Some(v) = extra.get(id) {
        return Ok(v);
    }
    let names = extra.names();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    crate::model::lookup(&refs, id, "identifier")
        .and_then(|i| extra.get(refs[i]))
        .ok_or_else(|| AnalysisError::UnboundIdentifier(id.to_string()))
}

pub fn trapz(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0])).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroAverage {
    pub parameter: String,
    /// Value of `parameter` on each trajectory.
    pub c: Vec<f64>,
    /// Orbit average on each trajectory.
    pub j: Vec<f64>,
    /// Position of the trajectory minimizing `|J|`.
    pub index: usize,
    /// Source label of that trajectory.
    pub bz: String,
}

/// Average `integrand` over every trajectory and pick the one closest to a
/// zero average. Ties go to the earliest trajectory.
pub fn find_zero_average(
    trajectories: &[Trajectory],
    integrand: &Expr,
    extra: &(dyn Environment + Sync),
    parameter: &str,
) -> Result<ZeroAverage, AnalysisError> {
    if trajectories.is_empty() {
        return Err(AnalysisError::NoTrajectories);
    }
    let c = trajectories
        .iter()
        .map(|t| t.lookup_param(parameter).ok_or_else(|| AnalysisError::UnknownName(parameter.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let j = trajectories.par_iter().map(|t| average_over_orbit(t, integrand, extra)).collect::<Result<Vec<_>, _>>()?;
    let index = argmin_abs(&j);
    Ok(ZeroAverage { parameter: parameter.to_string(), c, index, bz: trajectories[index].source_label.clone(), j })
}

/// First index of the smallest `|x|`; NaN never wins.
pub fn argmin_abs(xs: &[f64]) -> usize {
    let mut best = 0;
    for (k, x) in xs.iter().enumerate() {
        let b = xs[best].abs();
        if x.abs() < b || (b.is_nan() && !x.is_nan()) {
            best = k;
        }
    }
    best
}

/// Per-name `samples x trajectories` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub matrices: IndexMap<String, Array2<f64>>,
}

impl Surface {
    pub fn shape(&self) -> (usize, usize) {
        self.matrices.values().next().map_or((0, 0), |m| m.dim())
    }
}

fn common_length(trajectories: &[Trajectory]) -> Result<usize, AnalysisError> {
    let first = trajectories.first().ok_or(AnalysisError::NoTrajectories)?;
    for t in trajectories {
        if t.len() != first.len() {
            return Err(AnalysisError::GridLengthMismatch {
                trajectory: t.name.clone(),
                expected: first.len(),
                found: t.len(),
            });
        }
    }
    Ok(first.len())
}

fn column<'a>(t: &'a Trajectory, var: &str) -> Result<&'a [f64], AnalysisError> {
    t.lookup_sample(var).ok_or_else(|| AnalysisError::UnknownName(var.to_string()))
}

/// Stack the trajectories side by side: column `j` of a variable matrix is
/// trajectory `j`, column `j` of a parameter matrix repeats its value.
pub fn build_manifold(trajectories: &[Trajectory], vars: &[&str], pars: &[&str]) -> Result<Surface, AnalysisError> {
    let rows = common_length(trajectories)?;
    let cols = trajectories.len();
    let mut matrices = IndexMap::new();
    for &v in vars {
        let mut m = Array2::zeros((rows, cols));
        for (j, t) in trajectories.iter().enumerate() {
            for (i, x) in column(t, v)?.iter().enumerate() {
                m[[i, j]] = *x;
            }
        }
        matrices.insert(v.to_string(), m);
    }
    for &p in pars {
        let mut m = Array2::zeros((rows, cols));
        for (j, t) in trajectories.iter().enumerate() {
            let x = t.lookup_param(p).ok_or_else(|| AnalysisError::UnknownName(p.to_string()))?;
            m.column_mut(j).fill(x);
        }
        matrices.insert(p.to_string(), m);
    }
    Ok(Surface { matrices })
}

/// The last sample of every trajectory, per variable.
pub fn slow_manifold_projection(
    trajectories: &[Trajectory],
    vars: &[&str],
) -> Result<IndexMap<String, Vec<f64>>, AnalysisError> {
    common_length(trajectories)?;
    let mut out = IndexMap::new();
    for &v in vars {
        let col = trajectories.iter().map(|t| column(t, v).map(|c| c[c.len() - 1])).collect::<Result<Vec<_>, _>>()?;
        out.insert(v.to_string(), col);
    }
    Ok(out)
}
