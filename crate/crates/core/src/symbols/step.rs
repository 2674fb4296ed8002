use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::SymbolError;

/// Piecewise constant function with finitely many breakpoints.
/// `values[k]` is the value on the k-th interval, counted from -∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<C64>,
}

impl StepFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<C64>) -> Result<Self, SymbolError> {
        if values.len() != breakpoints.len() + 1 {
            return Err(SymbolError::StepShape { breakpoints: breakpoints.len(), values: values.len() });
        }
        if breakpoints.iter().any(|x| !x.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(SymbolError::NonFinite);
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SymbolError::UnsortedBreakpoints);
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(c: C64) -> Self {
        Self { breakpoints: vec![], values: vec![c] }
    }

    pub fn zero() -> Self {
        Self::constant(C64::new(0.0, 0.0))
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    /// Two-piece function equal to `left` on (-∞, at) and `right` on (at, ∞).
    pub fn two_piece(at: f64, left: C64, right: C64) -> Self {
        Self { breakpoints: vec![at], values: vec![left, right] }
    }

    /// χ_- = indicator of (-∞, 0).
    pub fn chi_minus() -> Self {
        Self::two_piece(0.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// χ_+ = indicator of (0, ∞).
    pub fn chi_plus() -> Self {
        Self::two_piece(0.0, C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    /// Indicator of the open interval (a, b); either end may be infinite.
    pub fn indicator(a: f64, b: f64) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match (a.is_finite(), b.is_finite()) {
            (true, true) => Self { breakpoints: vec![a, b], values: vec![zero, one, zero] },
            (true, false) => Self::two_piece(a, zero, one),
            (false, true) => Self::two_piece(b, one, zero),
            (false, false) => Self::one(),
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    fn piece_index(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&x| x <= t)
    }

    /// Value at t; right limit at a breakpoint.
    pub fn eval(&self, t: f64) -> C64 {
        self.values[self.piece_index(t)]
    }

    pub fn one_sided_limits(&self, t: f64) -> (C64, C64) {
        let right = self.piece_index(t);
        let left = self.breakpoints.partition_point(|&x| x < t);
        (self.values[left], self.values[right])
    }

    pub fn at_minus_infinity(&self) -> C64 {
        self.values[0]
    }

    pub fn at_plus_infinity(&self) -> C64 {
        *self.values.last().unwrap()
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|v| *v == self.values[0])
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == C64::new(0.0, 0.0))
    }

    /// Breakpoints where the one-sided limits differ.
    pub fn jumps(&self) -> Vec<f64> {
        self.breakpoints
            .iter()
            .enumerate()
            .filter(|(k, _)| self.values[*k] != self.values[k + 1])
            .map(|(_, x)| *x)
            .collect()
    }

    /// One representative point strictly inside every piece.
    pub fn piece_representatives(&self) -> Vec<f64> {
        let b = &self.breakpoints;
        if b.is_empty() {
            return vec![0.0];
        }
        let mut out = vec![b[0] - 1.0];
        out.extend(b.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        out.push(b[b.len() - 1] + 1.0);
        out
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { breakpoints: self.breakpoints.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
        .simplified()
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        let mut bps: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        bps.dedup();
        let mut reps = Vec::with_capacity(bps.len() + 1);
        if bps.is_empty() {
            reps.push(0.0);
        } else {
            reps.push(bps[0] - 1.0);
            reps.extend(bps.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            reps.push(bps[bps.len() - 1] + 1.0);
        }
        let values = reps.iter().map(|&t| f(self.eval(t), other.eval(t))).collect();
        Self { breakpoints: bps, values }.simplified()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    /// Drop breakpoints across which the value does not change.
    pub fn simplified(mut self) -> Self {
        let mut bps = Vec::with_capacity(self.breakpoints.len());
        let mut vals = vec![self.values[0]];
        for (k, x) in self.breakpoints.iter().enumerate() {
            let v = self.values[k + 1];
            if v != *vals.last().unwrap() {
                bps.push(*x);
                vals.push(v);
            }
        }
        self.breakpoints = bps;
        self.values = vals;
        self
    }

    /// t ↦ self(-t).
    pub fn reflect(&self) -> Self {
        Self {
            breakpoints: self.breakpoints.iter().rev().map(|x| -x).collect(),
            values: self.values.iter().rev().copied().collect(),
        }
    }

    /// t ↦ self(t + shift).
    pub fn shifted(&self, shift: f64) -> Self {
        Self { breakpoints: self.breakpoints.iter().map(|x| x - shift).collect(), values: self.values.clone() }
    }

    pub fn min_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let d = self.zip_with(other, |a, b| a - b);
        d.values.iter().all(|v| v.norm() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn shape_is_validated() {
        assert!(StepFunction::new(vec![0.0, 1.0], vec![r(1.0)]).is_err());
        assert!(StepFunction::new(vec![1.0, 0.0], vec![r(1.0), r(2.0), r(3.0)]).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0], vec![r(1.0), r(2.0), r(3.0)]).is_ok());
    }

    #[test]
    fn evaluation_and_limits() {
        let chi = StepFunction::chi_plus();
        assert_eq!(chi.eval(-1.0), r(0.0));
        assert_eq!(chi.eval(2.0), r(1.0));
        assert_eq!(chi.eval(0.0), r(1.0));
        assert_eq!(chi.one_sided_limits(0.0), (r(0.0), r(1.0)));
        let a = StepFunction::two_piece(0.0, r(2.0), r(3.0));
        assert_eq!(a.one_sided_limits(1.0), (r(3.0), r(3.0)));
        assert_eq!(a.reflect().eval(1.0), r(2.0));
        assert_eq!(StepFunction::chi_plus().reflect(), StepFunction::chi_minus());
    }

    #[test]
    fn algebra_merges_breakpoints() {
        let a = StepFunction::indicator(-1.0, 1.0);
        let b = StepFunction::chi_plus();
        let prod = a.mul(&b);
        assert_eq!(prod, StepFunction::indicator(0.0, 1.0));
        let sum = StepFunction::chi_minus().add(&StepFunction::chi_plus());
        assert_eq!(sum, StepFunction::one());
        assert!(sum.is_constant());
        assert_eq!(a.jumps(), vec![-1.0, 1.0]);
    }
}
