//! Stability criteria for sequences in the algebra generated by (aI), (W⁰(b))
//! and (P_τ): homomorphic images, one-sided invertibility tests, the fiber
//! symbols on the lens, and the verdicts built from them.

mod conditions;
mod expr;
mod gk;
mod images;
mod matrix;
mod normal;
mod report;

use thiserror::Error;

pub use conditions::{
    analyze_stability, check_condition_a, check_condition_b, check_condition_c, fsm_check, invertibility_of, AnalyzerConfig,
    Invertibility,
};
pub use expr::{HalfLine, OperatorExpr};
pub use gk::{gk_one_sided, sio_pc_invertible, wiener_hopf_curve, wiener_hopf_invertible, GkClass, GkReport};
pub use images::{h_eta_image, w_image, WIndex};
pub use matrix::{det_nonvanishing_on_lens, m2_det, n_eta_matrix, r_branch, LensCheck, Side, SymbolMatrix2, M2};
pub use normal::{Atom, GkForm, NormalForm, ProjectionWords, Term};
pub use report::{Checkpoint, Condition, ConditionRecord, Method, StabilityReport, Verdict, Witness};

use crate::geometry::GeometryError;
use crate::numerics::NumericsError;
use crate::symbols::SymbolError;

#[derive(Debug, Error)]
pub enum AnalyzerError {
    #[error("expression contains the sequence (P_tau) where a constant operator is required")]
    NotConcrete,
    #[error("interval ({0}, {1}) must be a proper subinterval of the real line")]
    BadInterval(f64, f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
