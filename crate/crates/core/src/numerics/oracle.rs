//! Quadrature assembly of convolution operators, independent of the transform path.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64 as C64;

use super::{DenseOperator, Grid, NumericsError};
use crate::symbols::PcsoSymbol;

const I: C64 = C64::new(0.0, 1.0);

/// S_ℝ on the grid by the staggered rule: nodes of opposite parity to the
/// evaluation node with double weight, S[j,l] = 2/(πi(l−j)) for odd l−j.
pub fn s_quadrature(grid: &Grid) -> Mat<C64> {
    Mat::from_fn(grid.n, grid.n, |j, l| {
        let d = l as i64 - j as i64;
        if d.rem_euclid(2) == 1 {
            2.0 / (PI * I * d as f64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// W⁰(χ_(x0,∞)) = U_{−x0} Q_ℝ U_{x0}, with Q_ℝ = (I − S_ℝ)/2.
fn shifted_half_projection(grid: &Grid, s: &Mat<C64>, x0: f64) -> Mat<C64> {
    let x = grid.nodes();
    Mat::from_fn(grid.n, grid.n, |j, l| {
        let q = if j == l { C64::new(0.5, 0.0) } else { C64::new(0.0, 0.0) } - 0.5 * s[(j, l)];
        (-I * x0 * x[j]).exp() * q * (I * x0 * x[l]).exp()
    })
}

fn step_oracle(b: &PcsoSymbol, grid: &Grid) -> Option<Mat<C64>> {
    let s = b.as_step()?;
    let sq = s_quadrature(grid);
    let mut m = Mat::from_fn(grid.n, grid.n, |j, l| if j == l { s.at_minus_infinity() } else { C64::new(0.0, 0.0) });
    for x0 in s.breakpoints() {
        let (l, r) = s.one_sided_limits(*x0);
        if l != r {
            let q = shifted_half_projection(grid, &sq, *x0);
            m = Mat::from_fn(grid.n, grid.n, |j, k| m[(j, k)] + (r - l) * q[(j, k)]);
        }
    }
    Some(m)
}

/// Kernel k(u) = (1/2π)∫(b(ξ) − b_∞)e^{−iξu}dξ by the trapezoid rule, for
/// continuous symbols whose deviation from the limit at infinity decays.
fn kernel_oracle(b: &PcsoSymbol, grid: &Grid) -> Result<Mat<C64>, NumericsError> {
    if !b.breakpoints().is_empty() {
        return Err(NumericsError::UnsupportedKernel("symbol has jumps and slowly oscillating factors".into()));
    }
    let far = 1e9;
    let (bm, bp) = (b.eval(-far), b.eval(far));
    if (bm - bp).norm() > 1e-12 {
        return Err(NumericsError::UnsupportedKernel("limits at ±∞ differ".into()));
    }
    let binf = bp;
    let decayed = |w: f64| (b.eval(w) - binf).norm() < 1e-14 && (b.eval(-w) - binf).norm() < 1e-14;
    let mut omega = 1.0;
    while !(decayed(omega) && decayed(2.0 * omega)) {
        omega *= 2.0;
        if omega > 1e4 {
            return Err(NumericsError::UnsupportedKernel("deviation from the limit at infinity is not integrable".into()));
        }
    }
    let span = 2.0 * grid.tau + 40.0;
    let m = ((2.0 * omega * span / PI).ceil() as usize).max(64);
    let dxi = 2.0 * omega / m as f64;
    let xi: Vec<f64> = (0..=m).map(|k| -omega + k as f64 * dxi).collect();
    let vals: Vec<C64> = xi
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let wt = if k == 0 || k == m { 0.5 } else { 1.0 };
            (b.eval(*w) - binf) * wt * dxi / (2.0 * PI)
        })
        .collect();
    let h = grid.h();
    let n = grid.n as i64;
    let kern: Vec<C64> = (-(n - 1)..n)
        .map(|d| {
            let u = d as f64 * h;
            xi.iter().zip(&vals).map(|(w, v)| v * (-I * w * u).exp()).sum::<C64>() * h
        })
        .collect();
    Ok(Mat::from_fn(grid.n, grid.n, |j, l| {
        let d = j as i64 - l as i64;
        kern[(d + n - 1) as usize] + if j == l { binf } else { C64::new(0.0, 0.0) }
    }))
}

/// Quadrature-path matrix of W⁰(b), used only to validate `discretize`.
pub fn convolution_oracle(b: &PcsoSymbol, grid: &Grid) -> Result<DenseOperator, NumericsError> {
    let mat = if let Some(c) = b.as_constant() {
        Mat::from_fn(grid.n, grid.n, |j, l| if j == l { c } else { C64::new(0.0, 0.0) })
    } else if let Some(m) = step_oracle(b, grid) {
        m
    } else {
        kernel_oracle(b, grid)?
    };
    Ok(DenseOperator { grid: *grid, mat, label: "oracle W0(b)".into() })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::analyzer::OperatorExpr;
    use crate::numerics::discretize;
    use crate::symbols::{SoGenerator, SoKind, StepFunction};

    #[test]
    fn constant_symbol_is_exact() {
        let g = Grid::new(10.0, 64, 4).unwrap();
        let c = C64::new(2.0, -1.0);
        let o = convolution_oracle(&PcsoSymbol::constant(c), &g).unwrap();
        let t = discretize(&OperatorExpr::conv(PcsoSymbol::constant(c)), &g).unwrap();
        assert!(o.rel_diff(&t) < 1e-10);
    }

    #[test]
    fn gaussian_kernel_matches_closed_form_and_transform() {
        let w = 1.5;
        let gen = Arc::new(SoGenerator::new("gauss", SoKind::Gaussian { width: w }, None).unwrap());
        let b = PcsoSymbol::with_generator(StepFunction::one(), gen);
        let g = Grid::new(10.0, 256, 4).unwrap();
        let o = convolution_oracle(&b, &g).unwrap();
        let h = g.h();
        let exact = Mat::from_fn(g.n, g.n, |j, l| {
            let u = g.x(j) - g.x(l);
            C64::new(h * w / (2.0 * PI).sqrt() * (-w * w * u * u / 2.0).exp(), 0.0)
        });
        assert!((&o.mat - &exact).norm_l2() / exact.norm_l2() < 1e-8);
        let t = discretize(&OperatorExpr::conv(b), &g).unwrap();
        assert!(t.rel_diff(&o) < 1e-6, "{}", t.rel_diff(&o));
    }

    #[test]
    fn oscillating_symbols_are_rejected() {
        let gen = Arc::new(SoGenerator::new("g1", SoKind::OscillatingPhase { k: 1 }, None).unwrap());
        let b = PcsoSymbol::with_generator(StepFunction::one(), gen);
        let g = Grid::new(10.0, 64, 4).unwrap();
        assert!(matches!(convolution_oracle(&b, &g), Err(NumericsError::UnsupportedKernel(_))));
    }
}
