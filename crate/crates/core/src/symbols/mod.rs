//! Piecewise constant step functions, slowly oscillating generators and the symbols built from them.

mod fiber;
mod generator;
mod step;
mod symbol;

pub use fiber::{sample_fibers, FiberAssignment, FiberProvenance, FiberStrategy};
pub use generator::{ClusterSet, SoGenerator, SoKind};
pub use step::StepFunction;
pub use symbol::{PcsoSymbol, SymbolTerm};

pub(crate) use fiber::generators_by_key;
pub(crate) use symbol::sample_line;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("step function has {breakpoints} breakpoints but {values} values")]
    StepShape { breakpoints: usize, values: usize },
    #[error("breakpoints must be strictly increasing")]
    UnsortedBreakpoints,
    #[error("non-finite breakpoint or value")]
    NonFinite,
    #[error("unknown generator id `{0}`")]
    UnknownGenerator(String),
    #[error("no fiber value assigned to generator `{0}`")]
    MissingAssignment(String),
    #[error("value {value} assigned to `{id}` is outside its cluster set")]
    OutsideCluster { id: String, value: num_complex::Complex64 },
    #[error("unbounded cluster descriptor: {0}")]
    UnboundedCluster(String),
    #[error("generator `{0}` is not slowly oscillating: {1}")]
    NotSlowlyOscillating(String, String),
    #[error("cannot parse phase expression `{0}`: {1}")]
    Expression(String, String),
    #[error("invalid generator: {0}")]
    BadGenerator(String),
    #[error("resolution must be at least 1")]
    BadResolution,
}
