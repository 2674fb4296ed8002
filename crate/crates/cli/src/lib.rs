//! Configuration parsing, mode dispatch and report serialization for the
//! `finsec` command.

pub mod config;
pub mod plot;
pub mod report;
pub mod run;

use thiserror::Error;

pub use config::{parse_config, Config, ExprSpec, Mode};
pub use report::ReportDocument;
pub use run::{run, Outcome, RunOptions};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Read(String, String),
    #[error("config error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("undefined {what} `{name}` referenced at `{path}`")]
    Undefined { what: &'static str, name: String, path: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("cannot write {0}: {1}")]
    Output(String, String),
    #[error(transparent)]
    Symbol(#[from] finsec_core::symbols::SymbolError),
    #[error(transparent)]
    Geometry(#[from] finsec_core::geometry::GeometryError),
    #[error(transparent)]
    Analyzer(#[from] finsec_core::analyzer::AnalyzerError),
    #[error(transparent)]
    Numerics(#[from] finsec_core::numerics::NumericsError),
}
