//! Shift, dilation and modulation matrices, and numerical checks that the
//! conjugated sequences converge strongly to the claimed homomorphic images.

use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_sequence, Grid, NumericsError};
use crate::analyzer::{h_eta_image, w_image, OperatorExpr, WIndex};
use crate::symbols::StepFunction;

const ZERO: C64 = C64::new(0.0, 0.0);

/// V_τ with τ = k·h: (Vf)(x_j) = f(x_j − τ), zero where x_j − τ leaves the window.
pub fn shift_matrix(grid: &Grid, k: i64) -> Mat<C64> {
    Mat::from_fn(grid.n, grid.n, |j, l| if j as i64 - l as i64 == k { C64::new(1.0, 0.0) } else { ZERO })
}

/// U_η = diag(e^{iηx_j}).
pub fn modulation_matrix(grid: &Grid, eta: f64) -> Mat<C64> {
    let x = grid.nodes();
    Mat::from_fn(grid.n, grid.n, |j, l| if j == l { C64::new(0.0, eta * x[j]).exp() } else { ZERO })
}

/// Z_τ: (Zf)(x) = τ^{-1/p} f(x/τ), with f linearly interpolated between nodes
/// and zero outside the window.
pub fn dilation_matrix(grid: &Grid, tau: f64, p: f64) -> Mat<C64> {
    let h = grid.h();
    let w = tau.powf(-1.0 / p);
    let mut m = Mat::<C64>::zeros(grid.n, grid.n);
    for j in 0..grid.n {
        let y = grid.x(j) / tau;
        let s = (y + grid.tau) / h - 0.5;
        let l = s.floor();
        let t = s - l;
        for (idx, wt) in [(l as i64, 1.0 - t), (l as i64 + 1, t)] {
            if (0..grid.n as i64).contains(&idx) && wt != 0.0 {
                m[(j, idx as usize)] += C64::new(w * wt, 0.0);
            }
        }
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeTarget {
    /// s-lim V_{∓τ}A_τV_{±τ} (or s-lim A_τ for index 0).
    W(WIndex),
    /// s-lim Z_τ^{-1}U_η A_τ U_η^{-1} Z_τ.
    H(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    /// Grid carrying the test vectors.
    pub base: Grid,
    pub taus: Vec<f64>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub target: ProbeTarget,
    pub taus: Vec<f64>,
    /// max over test vectors of ‖(conjugated A_τ − limit)v‖_p / ‖v‖_p.
    pub deviations: Vec<f64>,
    pub monotone: bool,
}

impl ProbeResult {
    pub fn last(&self) -> f64 {
        *self.deviations.last().unwrap_or(&f64::NAN)
    }
}

/// Moves every multiplication of a concrete expression so that the origin sits at c.
fn recentred(expr: &OperatorExpr, c: f64) -> OperatorExpr {
    expr.map_leaves(&|leaf| match leaf {
        OperatorExpr::Mult(a) => OperatorExpr::Mult(a.shifted(-c)),
        OperatorExpr::Proj1 => OperatorExpr::Mult(StepFunction::indicator(-1.0 + c, 1.0 + c)),
        other => other.clone(),
    })
}

fn w_deviation(expr: &OperatorExpr, i: WIndex, cfg: &ProbeConfig, tau: f64, v: &[C64]) -> Result<f64, NumericsError> {
    let base = &cfg.base;
    let h = base.h();
    let k = (tau / h).round() as usize;
    let t = k as f64 * h;
    let n0 = base.n;
    let big = Grid::new(t + base.tau, n0 + 2 * k, base.padding)?;
    let (offset, centre) = match i {
        WIndex::MinusOne => (0, -t),
        WIndex::Zero => (k, 0.0),
        WIndex::One => (2 * k, t),
    };
    let mut emb = vec![ZERO; big.n];
    emb[offset..offset + n0].copy_from_slice(v);
    let y = apply_sequence(expr, Some(t), &big, &emb)?;
    let limit = recentred(&w_image(expr, i), centre);
    let z = apply_sequence(&limit, None, &big, &emb)?;
    let d: Vec<C64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
    Ok(big.norm_p(&d, cfg.p) / base.norm_p(v, cfg.p))
}

fn h_deviation(expr: &OperatorExpr, eta: f64, cfg: &ProbeConfig, tau: f64, v: &[C64]) -> Result<f64, NumericsError> {
    let base = &cfg.base;
    // nodes of the dilated grid are τ times the base nodes, so Z_τ acts as the
    // identity on sample vectors (the τ^{-1/p} factors cancel)
    let big = Grid::new(tau * base.tau, base.n, base.padding)?;
    let xs = big.nodes();
    let w: Vec<C64> = v.iter().zip(&xs).map(|(a, x)| a * C64::new(0.0, -eta * x).exp()).collect();
    let y: Vec<C64> = apply_sequence(expr, Some(tau), &big, &w)?
        .into_iter()
        .zip(&xs)
        .map(|(a, x)| a * C64::new(0.0, eta * x).exp())
        .collect();
    let z = apply_sequence(&h_eta_image(expr, eta), None, base, v)?;
    let d: Vec<C64> = y.iter().zip(&z).map(|(a, b)| a - b).collect();
    Ok(base.norm_p(&d, cfg.p) / base.norm_p(v, cfg.p))
}

/// Strong-convergence check of a homomorphism: for each τ the largest relative
/// deviation over the test vectors between the conjugated A_τ and its image.
pub fn homomorphism_probe(
    expr: &OperatorExpr,
    target: ProbeTarget,
    cfg: &ProbeConfig,
    test_vectors: &[Vec<C64>],
) -> Result<ProbeResult, NumericsError> {
    for v in test_vectors {
        if v.len() != cfg.base.n {
            return Err(NumericsError::Dimension { expected: cfg.base.n, got: v.len() });
        }
    }
    if cfg.taus.windows(2).any(|w| w[1] <= w[0]) || cfg.taus.is_empty() {
        return Err(NumericsError::BadTauList);
    }
    let deviations = cfg
        .taus
        .par_iter()
        .map(|&tau| {
            let mut worst: f64 = 0.0;
            for v in test_vectors {
                let d = match target {
                    ProbeTarget::W(i) => w_deviation(expr, i, cfg, tau, v)?,
                    ProbeTarget::H(eta) => h_deviation(expr, eta, cfg, tau, v)?,
                };
                worst = worst.max(d);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>, NumericsError>>()?;
    let monotone = deviations.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-14);
    Ok(ProbeResult { target, taus: cfg.taus.clone(), deviations, monotone })
}
