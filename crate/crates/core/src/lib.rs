//! Parse, analyze and plot XPPAUT model, simulation, nullcline and
//! continuation files.

pub mod analysis;
pub mod autorepo;
pub mod export;
pub mod expr;
pub mod model;
pub mod numfmt;
pub mod tables;

use thiserror::Error;

pub use analysis::AnalysisError;
pub use autorepo::{parse_auto, AutoError, AutoRepo, LoadOptions, LoadReport};
pub use export::ExportError;
pub use expr::{parse_expr, ExprError};
pub use model::{parse_model, Model, ModelError};
pub use tables::{parse_data, parse_nullclines, TableError};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Auto(#[from] AutoError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Export(#[from] ExportError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
