//! Plots, freeze files and data dumps.

mod dump;
mod freeze;
mod plots;
pub mod style;
pub mod svg;

use thiserror::Error;

pub use dump::{branch_csv, dump, from_json, matrix_csv, to_json, trajectory_csv, DumpFormat, DumpTarget};
pub use freeze::{freeze_rows, read_points, write_points, FreezeRow};
pub use plots::{
    emit_diagram_plot, emit_eig_plot, emit_labeled_points_plot, emit_nullclines_plot, emit_sim_plot, select_labeled,
    Axis, AxisSpec, PeriodicBranchMode,
};
pub use style::PlotStyle;
pub use svg::Plot;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExportError {
    #[error("unknown axis `{name}`: {hint}")]
    UnknownAxisName { name: String, hint: String },
    #[error("expected 2 or 3 axes, got {0}")]
    AxisCount(usize),
    #[error("axes `{0}` are not a valid eigenvalue plot combination (need EigR and/or EigI, plus a parameter or variable unless both are given)")]
    InvalidAxisCombo(String),
    #[error("`{name}` is not one of the pair ({}, {})", pair.0, pair.1)]
    AxisNotInPair { name: String, pair: (String, String) },
    #[error("{0} is a two-parameter diagram; freeze files hold one-parameter diagrams only")]
    TwoParameterDiagram(String),
    #[error("branch {index} does not exist (the diagram has {count})")]
    UnknownBranch { index: usize, count: usize },
    #[error("labeled point {index} does not exist (the diagram has {count})")]
    UnknownPoint { index: usize, count: usize },
    #[error("style `{key}`: {msg}")]
    BadStyle { key: String, msg: String },
    #[error("line {line}: {msg}")]
    BadFreezeRow { line: usize, msg: String },
    #[error("{0} cannot be written as CSV")]
    UnsupportedTarget(&'static str),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(String),
}
