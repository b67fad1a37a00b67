//! Diagram, labeled point, eigenvalue, nullcline and simulation plots.

use std::f64::consts::PI;

use super::style::PlotStyle;
use super::svg::{data_bounds, project, LegendKey, Line, Marker, Plot};
use super::ExportError;
use crate::analysis::get_eig;
use crate::autorepo::{BifurcationDiagram, Branch, BranchClass, ContinuationPoint, LabelTag};
use crate::model::Model;
use crate::tables::{NullclinePair, SimulationTable};

/// One plotted coordinate.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Param {
        index: usize,
        name: String,
    },
    Var {
        index: usize,
        name: String,
    },
    L2,
    /// Period.
    T,
    /// Frequency, `1/T`.
    F,
}

impl Axis {
    pub fn label(&self) -> String {
        match self {
            Axis::Param { name, .. } | Axis::Var { name, .. } => name.clone(),
            Axis::L2 => "L2".into(),
            Axis::T => "T".into(),
            Axis::F => "F".into(),
        }
    }

    fn needs_period(&self) -> bool {
        matches!(self, Axis::T | Axis::F)
    }

    fn value(&self, p: &ContinuationPoint, pick: Pick) -> f64 {
        match self {
            Axis::Param { index, .. } => p.par_values[*index],
            Axis::Var { index, .. } => {
                let v = &p.vars[*index];
                match pick {
                    Pick::Initial => v.initial,
                    Pick::Upper => v.upper,
                    Pick::Lower => v.lower,
                    Pick::Average => v.average,
                }
            }
            Axis::L2 => p.l2,
            Axis::T => p.period.unwrap_or(f64::NAN),
            Axis::F => p.period.map_or(f64::NAN, |t| 1.0 / t),
        }
    }
}

/// Which extremum of a periodic point is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PeriodicBranchMode {
    /// Both the upper and the lower curve.
    #[default]
    Standard,
    Lower,
    Upper,
    Initial,
    Average,
}

impl std::str::FromStr for PeriodicBranchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "standard" => PeriodicBranchMode::Standard,
            "lower" => PeriodicBranchMode::Lower,
            "upper" => PeriodicBranchMode::Upper,
            "initial" => PeriodicBranchMode::Initial,
            "average" => PeriodicBranchMode::Average,
            _ => return Err(format!("unknown mode `{}` (standard, lower, upper, initial, average)", s)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pick {
    Initial,
    Upper,
    Lower,
    Average,
}

fn picks(mode: PeriodicBranchMode, class: BranchClass, axes: &[Axis]) -> Vec<Pick> {
    let has_var = axes.iter().any(|a| matches!(a, Axis::Var { .. }));
    if !class.is_periodic() || !has_var {
        return vec![Pick::Initial];
    }
    match mode {
        PeriodicBranchMode::Standard => vec![Pick::Upper, Pick::Lower],
        PeriodicBranchMode::Lower => vec![Pick::Lower],
        PeriodicBranchMode::Upper => vec![Pick::Upper],
        PeriodicBranchMode::Initial => vec![Pick::Initial],
        PeriodicBranchMode::Average => vec![Pick::Average],
    }
}

/// Resolved plot axes.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisSpec(pub Vec<Axis>);

fn resolve_token(model: &Model, bd: &BifurcationDiagram, tok: &str) -> Result<Axis, ExportError> {
    match tok {
        "L2" => return Ok(Axis::L2),
        "T" => return Ok(Axis::T),
        "F" => return Ok(Axis::F),
        _ => {}
    }
    if let Some(index) = bd.hot_index(tok) {
        return Ok(Axis::Param { index, name: bd.hot[index].clone() });
    }
    if let Some(index) = bd.variable_index(tok) {
        return Ok(Axis::Var { index, name: bd.variables[index].clone() });
    }
    let hint = match model.resolve(tok) {
        Some(name) if model.parameters.contains_key(name) => {
            format!("`{}` is a parameter but not among the exported ones", name)
        }
        Some(name) => format!("`{}` is not a dynamical variable", name),
        None => format!("`{}` is not a hot parameter, dynamical variable, L2, T or F", tok),
    };
    Err(ExportError::UnknownAxisName { name: tok.to_string(), hint })
}

impl AxisSpec {
    pub fn resolve(model: &Model, bd: &BifurcationDiagram, tokens: &[&str]) -> Result<AxisSpec, ExportError> {
        if !(2..=3).contains(&tokens.len()) {
            return Err(ExportError::AxisCount(tokens.len()));
        }
        tokens.iter().map(|t| resolve_token(model, bd, t)).collect::<Result<_, _>>().map(AxisSpec)
    }

    /// Main parameter against the first dynamical variable for 1P diagrams,
    /// main against secondary parameter for 2P diagrams.
    pub fn default_for(bd: &BifurcationDiagram) -> AxisSpec {
        let main = bd.hot_index(&bd.params[0]).expect("diagram parameters are hot");
        let first = Axis::Param { index: main, name: bd.hot[main].clone() };
        let second = if bd.is_two_parameter() {
            let sec = bd.hot_index(&bd.params[1]).expect("diagram parameters are hot");
            Axis::Param { index: sec, name: bd.hot[sec].clone() }
        } else {
            Axis::Var { index: 0, name: bd.variables[0].clone() }
        };
        AxisSpec(vec![first, second])
    }

    fn labels(&self) -> Vec<String> {
        self.0.iter().map(Axis::label).collect()
    }

    fn point(&self, p: &ContinuationPoint, pick: Pick) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, a) in out.iter_mut().zip(&self.0) {
            *o = a.value(p, pick);
        }
        out
    }
}

fn axes_or_default(model: &Model, bd: &BifurcationDiagram, axes: Option<&[&str]>) -> Result<AxisSpec, ExportError> {
    match axes {
        Some(t) => AxisSpec::resolve(model, bd, t),
        None => Ok(AxisSpec::default_for(bd)),
    }
}

fn kept<'a>(bd: &'a BifurcationDiagram, filter: Option<&[usize]>) -> impl Iterator<Item = &'a Branch> {
    let filter = filter.map(<[usize]>::to_vec);
    bd.branches.iter().filter(move |b| filter.as_ref().is_none_or(|f| f.contains(&b.index)))
}

fn check_filter(bd: &BifurcationDiagram, filter: Option<&[usize]>) -> Result<(), ExportError> {
    for &i in filter.unwrap_or(&[]) {
        if i == 0 || i > bd.branches.len() {
            return Err(ExportError::UnknownBranch { index: i, count: bd.branches.len() });
        }
    }
    Ok(())
}

/// Branch curves of a diagram.
pub fn emit_diagram_plot(
    model: &Model,
    bd: &BifurcationDiagram,
    axes: Option<&[&str]>,
    mode: PeriodicBranchMode,
    style: &PlotStyle,
    branch_filter: Option<&[usize]>,
) -> Result<Plot, ExportError> {
    let spec = axes_or_default(model, bd, axes)?;
    check_filter(bd, branch_filter)?;
    let mut plot = Plot::new(bd.name.clone(), spec.labels());
    let needs_period = spec.0.iter().any(Axis::needs_period);
    for b in kept(bd, branch_filter) {
        if needs_period && b.points.iter().all(|p| p.period.is_none()) {
            log::warn!("{}: {} carries no period; skipped", bd.name, b.name);
            continue;
        }
        let ls = style.branches[&b.class].clone();
        for pick in picks(mode, b.class, &spec.0) {
            plot.lines.push(Line {
                points: b.points.iter().map(|p| spec.point(p, pick)).collect(),
                style: ls.clone(),
                class: format!("branch {}", b.class),
                branch: Some(b.index),
            });
        }
        plot.add_legend(b.class.name(), LegendKey::Line(ls));
    }
    Ok(plot)
}

/// Selected labeled points: every point when both filters are absent, the
/// union of the two selections otherwise.
pub fn select_labeled(
    bd: &BifurcationDiagram,
    branch_filter: Option<&[usize]>,
    point_filter: Option<&[usize]>,
) -> Vec<usize> {
    bd.labeled()
        .iter()
        .enumerate()
        .filter(|(_, lp)| match (branch_filter, point_filter) {
            (None, None) => true,
            (b, p) => b.is_some_and(|b| b.contains(&lp.branch)) || p.is_some_and(|p| p.contains(&lp.index)),
        })
        .map(|(k, _)| k)
        .collect()
}

pub fn emit_labeled_points_plot(
    model: &Model,
    bd: &BifurcationDiagram,
    axes: Option<&[&str]>,
    mode: PeriodicBranchMode,
    style: &PlotStyle,
    branch_filter: Option<&[usize]>,
    point_filter: Option<&[usize]>,
) -> Result<Plot, ExportError> {
    let spec = axes_or_default(model, bd, axes)?;
    check_filter(bd, branch_filter)?;
    let mut plot = Plot::new(bd.name.clone(), spec.labels());
    let lps = bd.labeled();
    for &i in point_filter.unwrap_or(&[]) {
        if i == 0 || i > lps.len() {
            return Err(ExportError::UnknownPoint { index: i, count: lps.len() });
        }
    }
    for k in select_labeled(bd, branch_filter, point_filter) {
        let lp = &lps[k];
        let ms = style.markers[&lp.tag].clone();
        for pick in picks(mode, lp.class, &spec.0) {
            plot.markers.push(Marker {
                at: spec.point(&lp.point, pick),
                style: ms.clone(),
                class: format!("marker {}", lp.tag),
                label: lp.name.clone(),
                branch: Some(lp.branch),
            });
        }
        plot.add_legend(lp.tag.name(), LegendKey::Marker(ms));
    }
    Ok(plot)
}

#[derive(Debug, Clone, PartialEq)]
enum EigAxis {
    Coord(Axis),
    Re,
    Im,
}

fn unit_circle(n: usize) -> impl Iterator<Item = (f64, f64)> {
    (0..=n).map(move |k| {
        let a = 2.0 * PI * k as f64 / n as f64;
        (a.cos(), a.sin())
    })
}

fn place(axes: &[EigAxis], coord: f64, re: f64, im: f64) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (o, a) in out.iter_mut().zip(axes) {
        *o = match a {
            EigAxis::Coord(_) => coord,
            EigAxis::Re => re,
            EigAxis::Im => im,
        };
    }
    out
}

/// Eigenvalue (or multiplier) loci against a parameter or variable, with the
/// unit circle, cylinder or `|x| = 1` lines as reference.
///
/// Accepted axis sets: `{P, EigR, EigI}`, `{P, V, EigR|EigI}`, `{P, EigR|EigI}`
/// and `{EigR, EigI}`, in any order, where `P`/`V` is any diagram axis token.
pub fn emit_eig_plot(
    model: &Model,
    bd: &BifurcationDiagram,
    axes: &[&str],
    style: &PlotStyle,
    branch_filter: Option<&[usize]>,
) -> Result<Plot, ExportError> {
    let combo = || ExportError::InvalidAxisCombo(axes.join(","));
    if !(2..=3).contains(&axes.len()) {
        return Err(combo());
    }
    let resolved = axes
        .iter()
        .map(|t| match *t {
            "EigR" => Ok(EigAxis::Re),
            "EigI" => Ok(EigAxis::Im),
            other => resolve_token(model, bd, other).map(EigAxis::Coord),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n_eig = resolved.iter().filter(|a| !matches!(a, EigAxis::Coord(_))).count();
    let n_coord = resolved.len() - n_eig;
    let dup = resolved.iter().filter(|a| **a == EigAxis::Re).count() > 1
        || resolved.iter().filter(|a| **a == EigAxis::Im).count() > 1;
    if n_eig == 0 || dup || (n_eig == 1 && n_coord == 0) {
        return Err(combo());
    }
    check_filter(bd, branch_filter)?;
    let coords: Vec<&Axis> = resolved
        .iter()
        .filter_map(|a| match a {
            EigAxis::Coord(c) => Some(c),
            _ => None,
        })
        .collect();
    let eig = get_eig(bd, true);
    let labels = resolved
        .iter()
        .map(|a| match a {
            EigAxis::Coord(c) => c.label(),
            EigAxis::Re => "EigR".into(),
            EigAxis::Im => "EigI".into(),
        })
        .collect();
    let mut plot = Plot::new(format!("{} eigenvalues", bd.name), labels);
    // per-point coordinate(s) in axis order, eigen entries filled per index
    let at = |p: &ContinuationPoint, re: f64, im: f64| -> [f64; 3] {
        let mut out = [0.0; 3];
        let mut ci = 0;
        for (o, a) in out.iter_mut().zip(&resolved) {
            *o = match a {
                EigAxis::Coord(_) => {
                    ci += 1;
                    coords[ci - 1].value(p, Pick::Initial)
                }
                EigAxis::Re => re,
                EigAxis::Im => im,
            };
        }
        out
    };
    let n = bd.variables.len();
    for b in kept(bd, branch_filter) {
        let table = &eig.per_branch[b.index - 1];
        let ls = style.branches[&b.class].clone();
        for k in 0..n {
            plot.lines.push(Line {
                points: b.points.iter().enumerate().map(|(i, p)| at(p, table[[i, k, 0]], table[[i, k, 1]])).collect(),
                style: ls.clone(),
                class: format!("locus {}", b.class),
                branch: Some(b.index),
            });
        }
        plot.add_legend(b.class.name(), LegendKey::Line(ls));
    }
    let lps = bd.labeled();
    let shown: Vec<usize> = match branch_filter {
        None => (0..lps.len()).collect(),
        Some(f) => select_labeled(bd, Some(f), None),
    };
    for &k in &shown {
        let lp = &lps[k];
        let ms = style.markers[&lp.tag].clone();
        for e in 0..n {
            plot.markers.push(Marker {
                at: at(&lp.point, eig.per_label[[k, e + 1, 0]], eig.per_label[[k, e + 1, 1]]),
                style: ms.clone(),
                class: format!("marker {}", lp.tag),
                label: lp.name.clone(),
                branch: Some(lp.branch),
            });
        }
        plot.add_legend(lp.tag.name(), LegendKey::Marker(ms));
    }
    add_reference(
        &mut plot,
        &resolved,
        style,
        |lp_k| {
            let lp = &lps[lp_k];
            coords.first().map(|c| c.value(&lp.point, Pick::Initial))
        },
        &shown,
        bd,
    );
    Ok(plot)
}

fn is_bifurcation(tag: LabelTag) -> bool {
    !matches!(tag, LabelTag::UZ | LabelTag::EP)
}

fn add_reference(
    plot: &mut Plot,
    axes: &[EigAxis],
    style: &PlotStyle,
    coord_of: impl Fn(usize) -> Option<f64>,
    shown: &[usize],
    bd: &BifurcationDiagram,
) {
    let cyl = style.cylinder.clone();
    let has_re = axes.contains(&EigAxis::Re);
    let has_im = axes.contains(&EigAxis::Im);
    let n_coord = axes.iter().filter(|a| matches!(a, EigAxis::Coord(_))).count();
    let ref_line =
        |points: Vec<[f64; 3]>, class: &str, style| Line { points, style, class: class.into(), branch: None };
    if n_coord == 0 {
        // complex plane
        let pts = unit_circle(120).map(|(c, s)| place(axes, 0.0, c, s)).collect();
        plot.lines.insert(0, ref_line(pts, "reference unit-circle", cyl));
        return;
    }
    let bounds = data_bounds(plot);
    let ci = axes.iter().position(|a| matches!(a, EigAxis::Coord(_))).expect("one coordinate");
    let (lo, hi) = bounds[ci];
    if !(has_re && has_im) {
        if n_coord == 1 {
            for y in [-1.0, 1.0] {
                let pts = vec![place(axes, lo, y, y), place(axes, hi, y, y)];
                plot.lines.insert(0, ref_line(pts, "reference unit-bound", cyl.clone()));
            }
        }
        return;
    }
    // unit cylinder along the coordinate axis: end circles, silhouette
    // generators and one colored ring per bifurcation point
    let mut refs = Vec::new();
    for c in [lo, hi] {
        refs.push(ref_line(
            unit_circle(120).map(|(x, y)| place(axes, c, x, y)).collect(),
            "reference cylinder",
            cyl.clone(),
        ));
    }
    // include the unit circle so the renderer's box covers the cylinder
    let mut probe = plot.clone();
    probe.lines.extend(refs.iter().cloned());
    let b = data_bounds(&probe);
    let ri = axes.iter().position(|a| *a == EigAxis::Re).expect("EigR");
    let ii = axes.iter().position(|a| *a == EigAxis::Im).expect("EigI");
    let unit = |k: usize| {
        let mut u = [0.0; 3];
        u[k] = 1.0 / (b[k].1 - b[k].0);
        project(u)
    };
    let d = unit(ci);
    let (a, bb) = (unit(ri), unit(ii));
    let nrm = (-d.1, d.0);
    let phi = (nrm.0 * bb.0 + nrm.1 * bb.1).atan2(nrm.0 * a.0 + nrm.1 * a.1);
    for f in [phi, phi + PI] {
        let (x, y) = (f.cos(), f.sin());
        refs.push(ref_line(vec![place(axes, lo, x, y), place(axes, hi, x, y)], "reference cylinder", cyl.clone()));
    }
    let lps = bd.labeled();
    for &k in shown {
        let lp = &lps[k];
        if !is_bifurcation(lp.tag) {
            continue;
        }
        let Some(c) = coord_of(k) else { continue };
        let ms = &style.markers[&lp.tag];
        let mut ls = cyl.clone();
        ls.color = ms.color;
        ls.line = super::style::LineKind::Solid;
        plot.lines.push(Line {
            points: unit_circle(120).map(|(x, y)| place(axes, c, x, y)).collect(),
            style: ls,
            class: format!("ring {}", lp.tag),
            branch: Some(lp.branch),
        });
    }
    for (k, r) in refs.into_iter().enumerate() {
        plot.lines.insert(k, r);
    }
}

/// Both nullclines of a pair. `axes`, if given, must name the two variables
/// of the pair; `(y_var, x_var)` transposes the plot.
pub fn emit_nullclines_plot(
    nc: &NullclinePair,
    axes: Option<[&str; 2]>,
    style: &PlotStyle,
) -> Result<Plot, ExportError> {
    let swap = match axes {
        None => false,
        Some([a, b]) => {
            for name in [a, b] {
                if name != nc.x_var && name != nc.y_var {
                    return Err(ExportError::AxisNotInPair {
                        name: name.to_string(),
                        pair: (nc.x_var.clone(), nc.y_var.clone()),
                    });
                }
            }
            if a == b {
                return Err(ExportError::AxisNotInPair {
                    name: b.to_string(),
                    pair: (nc.x_var.clone(), nc.y_var.clone()),
                });
            }
            a == nc.y_var
        }
    };
    let labels = if swap { vec![nc.y_var.clone(), nc.x_var.clone()] } else { vec![nc.x_var.clone(), nc.y_var.clone()] };
    let mut plot = Plot::new(format!("{}-{} nullclines", nc.x_var, nc.y_var), labels);
    let families = [(&nc.nc_x, &nc.x_var, 0), (&nc.nc_y, &nc.y_var, 1)];
    for (segs, var, k) in families {
        let ls = style.nullclines[k].clone();
        for seg in segs.iter() {
            plot.lines.push(Line {
                points: seg.iter().map(|&(x, y)| if swap { [y, x, 0.0] } else { [x, y, 0.0] }).collect(),
                style: ls.clone(),
                class: format!("nullcline nc{}", k + 1),
                branch: None,
            });
        }
        plot.add_legend(&format!("{}-nullcline", var), LegendKey::Line(ls));
    }
    Ok(plot)
}

/// One trace of a simulation table.
pub fn emit_sim_plot(table: &SimulationTable, x: &str, y: &str, style: &PlotStyle) -> Result<Plot, ExportError> {
    let col = |name: &str| {
        table.column(name).ok_or_else(|| ExportError::UnknownAxisName {
            name: name.to_string(),
            hint: format!("columns are {}", table.columns.keys().cloned().collect::<Vec<_>>().join(", ")),
        })
    };
    let (xs, ys) = (col(x)?, col(y)?);
    let mut plot = Plot::new(format!("{} vs {}", y, x), vec![x.to_string(), y.to_string()]);
    plot.lines.push(Line {
        points: xs.iter().zip(ys).map(|(a, b)| [*a, *b, 0.0]).collect(),
        style: style.trace.clone(),
        class: "trace".into(),
        branch: None,
    });
    Ok(plot)
}
