use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::NumericsError;

/// Midpoint grid on [-tau, tau]: x_j = -tau + (j + 1/2)h, h = 2tau/n.
/// The origin is never a node since n is even.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub tau: f64,
    pub n: usize,
    pub padding: usize,
}

impl Grid {
    pub fn new(tau: f64, n: usize, padding: usize) -> Result<Self, NumericsError> {
        if !(tau.is_finite() && tau > 0.0) || n < 8 || n % 2 != 0 {
            return Err(NumericsError::BadGrid(format!("tau={tau}, n={n}")));
        }
        if padding < 4 {
            return Err(NumericsError::BadGrid(format!("padding {padding} < 4")));
        }
        Ok(Self { tau, n, padding })
    }

    /// Grid with the given spacing and half width, n rounded to an even count.
    pub fn with_spacing(h: f64, tau: f64, padding: usize) -> Result<Self, NumericsError> {
        let half = (tau / h).round() as usize;
        Self::new(half as f64 * h, 2 * half, padding)
    }

    pub fn h(&self) -> f64 {
        2.0 * self.tau / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.tau + (j as f64 + 0.5) * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Indicator of |x| < t on the nodes.
    pub fn mask(&self, t: f64) -> Vec<bool> {
        self.nodes().into_iter().map(|x| x.abs() < t).collect()
    }

    /// Discrete L^p norm with weight h^{1/p}.
    pub fn norm_p(&self, v: &[C64], p: f64) -> f64 {
        let s: f64 = v.iter().map(|z| z.norm().powf(p)).sum();
        (s * self.h()).powf(1.0 / p)
    }

    pub fn sample(&self, f: impl Fn(f64) -> C64) -> Vec<C64> {
        self.nodes().into_iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = Grid::new(2.0, 8, 4).unwrap();
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.x(0), -1.75);
        assert_eq!(g.x(7), 1.75);
        assert!(g.nodes().iter().all(|x| *x != 0.0));
        assert!(Grid::new(2.0, 7, 4).is_err());
        assert!(Grid::new(2.0, 6, 4).is_err());
        assert!(Grid::new(2.0, 8, 2).is_err());
        let m = g.mask(1.0);
        assert_eq!(m.iter().filter(|b| **b).count(), 4);
    }
}
