//! `.auto` continuation repositories.
//!
//! The byte layout is documented in `docs/formats.md`. [`lexer`] is the only
//! part that knows about it; everything else works on [`ContinuationPoint`]
//! and [`SolutionRecord`] values.

mod build;
pub mod lexer;
mod write;

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use build::{attach_special_solutions, segment_branches, split_diagrams, DiagramSpan};
pub use lexer::SolutionRecord;
pub use write::serialize_auto;

use crate::model::Model;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutoError {
    #[error("section [{0}] is missing or out of order")]
    SectionMissing(&'static str),
    #[error("byte {offset}: malformed settings line: {msg}")]
    SettingsMalformed { offset: usize, msg: String },
    #[error("byte {offset}: malformed point record: {msg}")]
    PointRecordMalformed { offset: usize, msg: String },
    #[error("byte {offset}: point record has {found} values per variable block, the model has {expected} dynamical variables")]
    DimensionMismatch { offset: usize, expected: usize, found: usize },
    #[error("NPTS is {declared} but the file holds {found} point records")]
    PointCountMismatch { declared: usize, found: usize },
    #[error("unknown (tpar, typ) pair ({tpar}, {typ})")]
    UnknownTypePair { tpar: i32, typ: i32 },
    #[error("byte {offset}: solution {label} declares {declared} samples, found {found}")]
    SolutionLengthMismatch { offset: usize, label: u32, declared: usize, found: usize },
    #[error("byte {offset}: malformed solution: {msg}")]
    SolutionMalformed { offset: usize, msg: String },
    #[error("label {0} appears more than once")]
    DuplicateLabel(u32),
}

#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchClass {
    SEQ,
    UEQ,
    SLC,
    ULC,
    BVP,
    UZ,
    SN,
    SNPO,
    HB,
    TR,
    BP,
    PD,
}

/// Every accepted `(tpar, typ)` pair.
pub const CLASS_TABLE: [(i32, i32, BranchClass); 12] = [
    (0, 1, BranchClass::SEQ),
    (0, 2, BranchClass::UEQ),
    (0, 3, BranchClass::SLC),
    (0, 4, BranchClass::ULC),
    (0, 8, BranchClass::BVP),
    (9, 9, BranchClass::UZ),
    (1, 1, BranchClass::SN),
    (2, 2, BranchClass::SNPO),
    (3, 3, BranchClass::HB),
    (4, 4, BranchClass::TR),
    (5, 5, BranchClass::BP),
    (6, 6, BranchClass::PD),
];

pub fn classify(tpar: i32, typ: i32) -> Result<BranchClass, AutoError> {
    CLASS_TABLE
        .iter()
        .find(|(p, t, _)| *p == tpar && *t == typ)
        .map(|(_, _, c)| *c)
        .ok_or(AutoError::UnknownTypePair { tpar, typ })
}

impl BranchClass {
    pub const ALL: [BranchClass; 12] = [
        BranchClass::SEQ,
        BranchClass::UEQ,
        BranchClass::SLC,
        BranchClass::ULC,
        BranchClass::BVP,
        BranchClass::UZ,
        BranchClass::SN,
        BranchClass::SNPO,
        BranchClass::HB,
        BranchClass::TR,
        BranchClass::BP,
        BranchClass::PD,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BranchClass::SEQ => "SEQ",
            BranchClass::UEQ => "UEQ",
            BranchClass::SLC => "SLC",
            BranchClass::ULC => "ULC",
            BranchClass::BVP => "BVP",
            BranchClass::UZ => "UZ",
            BranchClass::SN => "SN",
            BranchClass::SNPO => "SNPO",
            BranchClass::HB => "HB",
            BranchClass::TR => "TR",
            BranchClass::BP => "BP",
            BranchClass::PD => "PD",
        }
    }

    /// Points of this class describe a periodic orbit or BVP solution, so they
    /// carry distinct extrema and may have an orbit attached.
    pub fn is_periodic(self) -> bool {
        matches!(
            self,
            BranchClass::SLC
                | BranchClass::ULC
                | BranchClass::BVP
                | BranchClass::SNPO
                | BranchClass::TR
                | BranchClass::PD
        )
    }
}

impl fmt::Display for BranchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[allow(clippy::upper_case_acronyms)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelTag {
    HB,
    SN,
    PD,
    SNPO,
    TR,
    EP,
    UZ,
}

impl LabelTag {
    pub const ALL: [LabelTag; 7] =
        [LabelTag::HB, LabelTag::SN, LabelTag::PD, LabelTag::SNPO, LabelTag::TR, LabelTag::EP, LabelTag::UZ];

    pub fn name(self) -> &'static str {
        match self {
            LabelTag::HB => "HB",
            LabelTag::SN => "SN",
            LabelTag::PD => "PD",
            LabelTag::SNPO => "SNPO",
            LabelTag::TR => "TR",
            LabelTag::EP => "EP",
            LabelTag::UZ => "UZ",
        }
    }
}

impl FromStr for LabelTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LabelTag::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| format!("unknown label type `{}`", s))
    }
}

impl fmt::Display for LabelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UzCondition {
    pub index: u8,
    pub parameter: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationSettings {
    pub npts: usize,
    pub num: IndexMap<String, f64>,
    pub uz: Vec<UzCondition>,
}

pub const NUM_KEYS: [&str; 21] = [
    "NTST", "NPR", "NMAX", "DS", "DSMIN", "DSMAX", "ParMIN", "ParMAX", "NormMIN", "NormMAX", "IAD", "MXBF", "IID",
    "ITMX", "ITNW", "NWTN", "IADS", "xmin", "ymin", "xmax", "ymax",
];

/// Initial, upper (max), lower (min) and average value of one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarSummary {
    pub initial: f64,
    pub upper: f64,
    pub lower: f64,
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationPoint {
    pub branch_no: i64,
    pub tpar: i32,
    pub typ: i32,
    /// 0 for unlabeled points.
    pub lab: u32,
    pub tag: Option<LabelTag>,
    pub idx: usize,
    /// Positions of the continuation parameters in the hot list.
    pub active: Vec<usize>,
    pub par_values: Vec<f64>,
    pub l2: f64,
    pub period: Option<f64>,
    pub vars: Vec<VarSummary>,
    pub eig_real: Vec<f64>,
    pub eig_imag: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub name: String,
    /// 1-based within its diagram.
    pub index: usize,
    pub class: BranchClass,
    pub points: Vec<ContinuationPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    /// Period-normalized time in [0, 1].
    pub t: Vec<f64>,
    pub samples: IndexMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledPoint {
    pub name: String,
    /// 1-based within its diagram.
    pub index: usize,
    pub lab: u32,
    pub tag: LabelTag,
    pub class: BranchClass,
    /// 1-based index of the owning branch.
    pub branch: usize,
    pub point: ContinuationPoint,
    pub orbit: Option<Orbit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationDiagram {
    pub name: String,
    pub index: usize,
    pub params: Vec<String>,
    pub hot: Vec<String>,
    pub variables: Vec<String>,
    pub branches: Vec<Branch>,
    pub labeled_points: Option<Vec<LabeledPoint>>,
}

impl BifurcationDiagram {
    pub fn is_two_parameter(&self) -> bool {
        self.params.len() == 2
    }

    pub fn point_count(&self) -> usize {
        self.branches.iter().map(|b| b.points.len()).sum()
    }

    pub fn labeled(&self) -> &[LabeledPoint] {
        self.labeled_points.as_deref().unwrap_or(&[])
    }

    pub fn hot_index(&self, name: &str) -> Option<usize> {
        let names: Vec<&str> = self.hot.iter().map(String::as_str).collect();
        crate::model::lookup(&names, name, "hot parameter")
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        let names: Vec<&str> = self.variables.iter().map(String::as_str).collect();
        crate::model::lookup(&names, name, "dynamical variable")
    }

    pub fn summary_line(&self) -> String {
        if self.is_two_parameter() {
            format!("2P-BD - Name: {} - Main: {} - Secondary: {}", self.name, self.params[0], self.params[1])
        } else {
            format!("1P-BD - Name: {} - Main: {}", self.name, self.params[0])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoRepo {
    pub settings: ContinuationSettings,
    pub hot: Vec<String>,
    pub variables: Vec<String>,
    pub diagrams: Vec<BifurcationDiagram>,
}

impl AutoRepo {
    /// Select a diagram by name (`BD1_i0`) or 1-based ordinal; `None` picks
    /// the last one.
    pub fn diagram(&self, selector: Option<&str>) -> Option<&BifurcationDiagram> {
        match selector {
            None => self.diagrams.last(),
            Some(s) => {
                if let Ok(k) = s.parse::<usize>() {
                    return k.checked_sub(1).and_then(|k| self.diagrams.get(k));
                }
                self.diagrams
                    .iter()
                    .find(|d| d.name == s)
                    .or_else(|| self.diagrams.iter().find(|d| d.name.eq_ignore_ascii_case(s)))
            }
        }
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.diagrams.iter().map(BifurcationDiagram::summary_line).collect()
    }

    /// The same repository with every orbit dropped.
    pub fn without_orbits(&self) -> AutoRepo {
        let mut out = self.clone();
        for d in &mut out.diagrams {
            if let Some(lps) = &mut d.labeled_points {
                for lp in lps {
                    lp.orbit = None;
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    pub labeled_points: bool,
    pub trajectories: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { labeled_points: true, trajectories: true }
    }
}

/// Progress steps and warnings collected while loading.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadReport {
    pub steps: Vec<String>,
    pub warnings: Vec<String>,
}

impl LoadReport {
    pub(crate) fn warn(&mut self, msg: String) {
        log::warn!("{}", msg);
        self.warnings.push(msg);
    }

    /// The console transcript: steps, then the per-diagram summary.
    pub fn render(&self, repo: &AutoRepo) -> String {
        let mut out = String::from("AR:\n");
        for s in &self.steps {
            out.push_str(s);
            out.push('\n');
        }
        out.push_str("\nSummary:\n");
        for line in repo.summary_lines() {
            out.push_str("    ");
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

pub fn parse_auto(model: &Model, source: &str, opts: LoadOptions) -> Result<(AutoRepo, LoadReport), AutoError> {
    let mut report = LoadReport::default();
    let variables: Vec<String> = model.dynamical().map(str::to_string).collect();
    let raw = lexer::lex(source, variables.len())?;
    report.steps.push("Parsing settings ...completed!".into());
    for name in &raw.hot {
        if model.resolve(name).is_none() {
            report.warn(format!("hot parameter `{}` is not declared in the model", name));
        }
    }
    report.steps.push("Parsing hot parameters ...completed!".into());
    let diagrams = build::build_diagrams(&raw.points, &raw.hot, &variables, opts.labeled_points)?;
    report.steps.push(if opts.labeled_points {
        "Parsing branches & labeled points ...completed!".into()
    } else {
        "Parsing branches ...completed!".into()
    });
    let mut repo = AutoRepo { settings: raw.settings, hot: raw.hot, variables, diagrams };
    if opts.labeled_points && opts.trajectories {
        attach_special_solutions(&mut repo, raw.solutions, &mut report)?;
        report.steps.push("Parsing Special Solutions...completed!".into());
    } else {
        build::check_duplicate_solutions(&raw.solutions)?;
        report.steps.push("Parsing Special Solutions...skipped!".into());
    }
    Ok((repo, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        assert_eq!(classify(0, 1), Ok(BranchClass::SEQ));
        assert_eq!(classify(0, 4), Ok(BranchClass::ULC));
        assert_eq!(classify(0, 8), Ok(BranchClass::BVP));
        assert_eq!(classify(3, 3), Ok(BranchClass::HB));
        assert_eq!(classify(9, 9), Ok(BranchClass::UZ));
        assert_eq!(classify(0, 5), Err(AutoError::UnknownTypePair { tpar: 0, typ: 5 }));
    }

    #[test]
    fn every_class_once() {
        for c in BranchClass::ALL {
            assert_eq!(CLASS_TABLE.iter().filter(|r| r.2 == c).count(), 1, "{}", c);
        }
    }

    #[test]
    fn tags_parse() {
        for t in LabelTag::ALL {
            assert_eq!(t.name().parse::<LabelTag>(), Ok(t));
        }
        assert!("BP".parse::<LabelTag>().is_err());
    }
}
