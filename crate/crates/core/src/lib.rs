//! Stability analysis of the finite section method for convolution type operators
//! on L^p(ℝ) with piecewise constant and slowly oscillating symbols.

pub mod analyzer;
mod float_serde;
pub mod geometry;
pub mod numerics;
pub mod symbols;

pub use num_complex::Complex64 as C64;
