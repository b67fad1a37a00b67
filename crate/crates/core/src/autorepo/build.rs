//! Grouping of point records into diagrams, branches and labeled points.

use std::collections::HashSet;
use std::ops::Range;

use indexmap::IndexMap;

use super::{
    classify, AutoError, AutoRepo, BifurcationDiagram, Branch, ContinuationPoint, LabeledPoint, LoadReport, Orbit,
    SolutionRecord,
};

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramSpan {
    /// Continuation parameter names, main first.
    pub params: Vec<String>,
    /// Half-open range into the point list.
    pub range: Range<usize>,
}

fn same_set(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.contains(x))
}

fn frozen_differs(first: &ContinuationPoint, p: &ContinuationPoint) -> bool {
    (0..first.par_values.len()).filter(|k| !first.active.contains(k)).any(|k| first.par_values[k] != p.par_values[k])
}

/// Split a point stream wherever the continuation parameter set changes or a
/// parameter outside that set takes a new value.
pub fn split_diagrams(points: &[ContinuationPoint], hot: &[String]) -> Vec<DiagramSpan> {
    let mut spans: Vec<DiagramSpan> = Vec::new();
    let mut start = 0;
    for k in 1..=points.len() {
        let boundary = k == points.len()
            || !same_set(&points[start].active, &points[k].active)
            || frozen_differs(&points[start], &points[k]);
        if boundary && k > start {
            let params = points[start].active.iter().map(|&i| hot[i].clone()).collect();
            spans.push(DiagramSpan { params, range: start..k });
            start = k;
        }
    }
    spans
}

/// Maximal runs of points sharing `(tpar, typ, branch_no)`.
///
/// Panics if a point carries a `(tpar, typ)` pair that [`classify`] rejects;
/// points produced by the lexer never do.
pub fn segment_branches(points: &[ContinuationPoint]) -> Vec<Branch> {
    let mut out: Vec<Branch> = Vec::new();
    for p in points {
        let key = (p.tpar, p.typ, p.branch_no);
        match out.last_mut() {
            Some(b) if b.points.last().map(|q| (q.tpar, q.typ, q.branch_no)) == Some(key) => {
                b.points.push(p.clone());
            }
            _ => {
                let class = classify(p.tpar, p.typ).expect("point records are classified by the lexer");
                let index = out.len() + 1;
                out.push(Branch { name: format!("B{}_{}", index, class), index, class, points: vec![p.clone()] });
            }
        }
    }
    out
}

fn labeled_points(branches: &[Branch]) -> Vec<LabeledPoint> {
    let mut out = Vec::new();
    for b in branches {
        for p in &b.points {
            if let Some(tag) = p.tag {
                let index = out.len() + 1;
                out.push(LabeledPoint {
                    name: format!("PT{}_{}", index, tag),
                    index,
                    lab: p.lab,
                    tag,
                    class: b.class,
                    branch: b.index,
                    point: p.clone(),
                    orbit: None,
                });
            }
        }
    }
    out
}

pub(crate) fn build_diagrams(
    points: &[ContinuationPoint],
    hot: &[String],
    variables: &[String],
    with_labels: bool,
) -> Result<Vec<BifurcationDiagram>, AutoError> {
    let mut out = Vec::new();
    for (k, span) in split_diagrams(points, hot).into_iter().enumerate() {
        let branches = segment_branches(&points[span.range.clone()]);
        let labeled = with_labels.then(|| labeled_points(&branches));
        let index = k + 1;
        out.push(BifurcationDiagram {
            name: format!("BD{}_{}", index, span.params.join("_")),
            index,
            params: span.params,
            hot: hot.to_vec(),
            variables: variables.to_vec(),
            branches,
            labeled_points: labeled,
        });
    }
    Ok(out)
}

pub(crate) fn check_duplicate_solutions(solutions: &[SolutionRecord]) -> Result<(), AutoError> {
    let mut seen = HashSet::new();
    for s in solutions {
        if !seen.insert(s.lab) {
            return Err(AutoError::DuplicateLabel(s.lab));
        }
    }
    Ok(())
}

/// Positions of the diagrams whose labeled points may own an orbit: the last
/// one-parameter diagram, plus the two-parameter diagram right after it when
/// that one closes the repository.
pub(crate) fn eligible_diagrams(diagrams: &[BifurcationDiagram]) -> Vec<usize> {
    let mut out = Vec::new();
    if let Some(last_1p) = diagrams.iter().rposition(|d| !d.is_two_parameter()) {
        out.push(last_1p);
        if last_1p + 2 == diagrams.len() {
            out.push(last_1p + 1);
        }
    }
    out
}

/// Give periodic labeled points the orbit stored under their label.
///
/// Solutions without a matching point, and solutions for equilibrium points,
/// are reported and dropped. Solutions for diagrams outside the eligible set
/// are attached with a warning.
pub fn attach_special_solutions(
    repo: &mut AutoRepo,
    solutions: Vec<SolutionRecord>,
    report: &mut LoadReport,
) -> Result<(), AutoError> {
    check_duplicate_solutions(&solutions)?;
    let eligible = eligible_diagrams(&repo.diagrams);
    let mut grid: Option<usize> = None;
    for sol in solutions {
        let found = repo
            .diagrams
            .iter()
            .enumerate()
            .find_map(|(d, diag)| diag.labeled().iter().position(|lp| lp.lab == sol.lab).map(|k| (d, k)));
        let Some((d, k)) = found else {
            report.warn(format!("solution {} has no matching labeled point; skipped", sol.lab));
            continue;
        };
        let diag_name = repo.diagrams[d].name.clone();
        let lp = &mut repo.diagrams[d].labeled_points.as_mut().expect("found above")[k];
        if !lp.class.is_periodic() {
            report.warn(format!(
                "solution {} belongs to {} on a {} branch, which carries no orbit; skipped",
                sol.lab, lp.name, lp.class
            ));
            continue;
        }
        if !eligible.contains(&d) {
            report.warn(format!("solution {} belongs to {} in {}, an earlier diagram", sol.lab, lp.name, diag_name));
        }
        match grid {
            None => grid = Some(sol.t.len()),
            Some(n) if n != sol.t.len() => {
                report.warn(format!("solution {} has {} samples, earlier solutions have {}", sol.lab, sol.t.len(), n))
            }
            _ => {}
        }
        let samples: IndexMap<String, Vec<f64>> = repo.variables.iter().cloned().zip(sol.columns).collect();
        lp.orbit = Some(Orbit { t: sol.t, samples });
    }
    Ok(())
}
