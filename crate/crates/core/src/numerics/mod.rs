//! Discrete realisations of the operators on truncated uniform grids, plus the
//! numerical diagnostics (condition sweeps, finite section solves, spectra,
//! strong-limit probes) used to cross-check the analyzer.

mod discretize;
mod grid;
mod norm;
mod oracle;
mod probe;
mod sweep;

use faer::Mat;
use num_complex::Complex64 as C64;
use thiserror::Error;

pub use discretize::{apply_sequence, discretize, discretize_sequence, finite_section_matrix};
pub use grid::Grid;
pub use norm::{p_norm_estimate, PNormEstimate};
pub use oracle::{convolution_oracle, s_quadrature};
pub use probe::{dilation_matrix, homomorphism_probe, modulation_matrix, shift_matrix, ProbeConfig, ProbeResult, ProbeTarget};
pub use sweep::{
    cond_sweep, empirical_spectrum, sigma_min_trend, solve_fsm, ConvergenceRecord, ConvergenceStudy, GridPolicy,
    SweepRecord, SweepResult,
};

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("grid half width {tau} too small for a mask of radius {mask}")]
    GridTooSmall { mask: f64, tau: f64 },
    #[error("expression contains the sequence (P_tau); a truncation radius is required")]
    SequenceLevel,
    #[error("singular system at tau = {tau}")]
    Singular { tau: f64 },
    #[error("kernel not representable: {0}")]
    UnsupportedKernel(String),
    #[error("tau list must be nonempty and strictly increasing")]
    BadTauList,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("decomposition failed: {0}")]
    Decomposition(String),
}

/// Complex matrix acting on the nodes of a grid.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub grid: Grid,
    pub mat: Mat<C64>,
    pub label: String,
}

impl DenseOperator {
    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.mat[(i, j)] * v[j]).sum()).collect()
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.mat[(i, j)].is_finite()))
    }

    /// Relative Frobenius distance ‖A − B‖ / ‖B‖.
    pub fn rel_diff(&self, other: &DenseOperator) -> f64 {
        (&self.mat - &other.mat).norm_l2() / other.mat.norm_l2()
    }
}

pub(crate) fn col(v: &[C64]) -> Mat<C64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub(crate) fn from_col(m: &Mat<C64>) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}
