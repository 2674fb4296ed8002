use faer::linalg::solvers::Solve;
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norm::p_norm_estimate;
use super::{col, discretize, finite_section_matrix, from_col, DenseOperator, Grid, NumericsError};
use crate::analyzer::OperatorExpr;

/// How the grid for a truncation radius τ is chosen: n nodes on [−wτ, wτ].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridPolicy {
    pub n: usize,
    pub padding: usize,
    pub window_factor: f64,
    /// Seed of the random start vector of the p-norm estimator.
    pub seed: u64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self { n: 1024, padding: 4, window_factor: 1.25, seed: 7 }
    }
}

impl GridPolicy {
    pub fn grid_for(&self, tau: f64) -> Result<Grid, NumericsError> {
        if !(self.window_factor > 1.0) {
            return Err(NumericsError::BadGrid(format!("window factor {} must exceed 1", self.window_factor)));
        }
        Grid::new(self.window_factor * tau, self.n, self.padding)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub tau: f64,
    pub n: usize,
    #[serde(with = "crate::float_serde")]
    pub sigma_min: f64,
    #[serde(with = "crate::float_serde")]
    pub cond2: f64,
    #[serde(with = "crate::float_serde")]
    pub condp: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub p: f64,
    pub records: Vec<SweepRecord>,
    /// max cond₂ / min cond₂ over the sweep.
    #[serde(with = "crate::float_serde")]
    pub cond_ratio: f64,
    /// σ_min at the first τ divided by σ_min at the last τ.
    #[serde(with = "crate::float_serde")]
    pub sigma_drop: f64,
    pub sigma_nonincreasing: bool,
}

fn check_taus(taus: &[f64]) -> Result<(), NumericsError> {
    if taus.is_empty() || taus.windows(2).any(|w| w[1] <= w[0]) || taus.iter().any(|t| !(*t > 0.0)) {
        return Err(NumericsError::BadTauList);
    }
    Ok(())
}

fn singular_values(m: &Mat<C64>) -> Result<Vec<f64>, NumericsError> {
    m.singular_values().map_err(|e| NumericsError::Decomposition(format!("{e:?}")))
}

fn matvec(m: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    from_col(&(m * &col(v)))
}

fn adj_matvec(m: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    from_col(&(m.adjoint() * &col(v)))
}

fn sweep_record(m: &DenseOperator, tau: f64, p: f64, seed: u64) -> Result<SweepRecord, NumericsError> {
    let s = singular_values(&m.mat)?;
    let (smax, smin) = (s[0], *s.last().unwrap());
    let n = m.dim();
    if !(smin > smax * 1e-14) {
        return Ok(SweepRecord { tau, n, sigma_min: smin, cond2: f64::INFINITY, condp: f64::INFINITY, singular: true });
    }
    let lu = m.mat.partial_piv_lu();
    let inv = |v: &[C64]| {
        let mut c = col(v);
        lu.solve_in_place(c.as_mut());
        from_col(&c)
    };
    let inv_adj = |v: &[C64]| {
        let mut c = col(v);
        lu.solve_adjoint_in_place(c.as_mut());
        from_col(&c)
    };
    let na = p_norm_estimate(n, p, &|v| matvec(&m.mat, v), &|v| adj_matvec(&m.mat, v), seed);
    let ni = p_norm_estimate(n, p, &inv, &inv_adj, seed);
    Ok(SweepRecord { tau, n, sigma_min: smin, cond2: smax / smin, condp: na.value * ni.value, singular: false })
}

/// Condition numbers of the finite sections P_τ A P_τ + Q_τ over increasing τ.
pub fn cond_sweep(a: &OperatorExpr, taus: &[f64], p: f64, policy: &GridPolicy) -> Result<SweepResult, NumericsError> {
    check_taus(taus)?;
    let records = taus
        .par_iter()
        .map(|&tau| {
            let grid = policy.grid_for(tau)?;
            let m = finite_section_matrix(a, tau, &grid)?;
            sweep_record(&m, tau, p, policy.seed)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let conds: Vec<f64> = records.iter().map(|r| r.cond2).collect();
    let cmax = conds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cmin = conds.iter().cloned().fold(f64::INFINITY, f64::min);
    let first = records.first().unwrap().sigma_min;
    let last = records.last().unwrap().sigma_min;
    Ok(SweepResult {
        p,
        cond_ratio: cmax / cmin,
        sigma_drop: first / last,
        sigma_nonincreasing: records.windows(2).all(|w| w[1].sigma_min <= w[0].sigma_min * (1.0 + 1e-9)),
        records,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub tau: f64,
    /// ‖φ_τ − φ_{τ_prev}‖_p; absent for the first τ.
    #[serde(with = "crate::float_serde::option")]
    pub diff_norm: Option<f64>,
    /// ‖Aφ_τ − f‖_p on the full grid.
    #[serde(with = "crate::float_serde")]
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub grid: Grid,
    pub p: f64,
    pub records: Vec<ConvergenceRecord>,
    #[serde(skip)]
    pub solutions: Vec<Vec<C64>>,
}

impl ConvergenceStudy {
    pub fn final_residual(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.residual)
    }

    pub fn diffs(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.diff_norm).collect()
    }
}

/// Solves (P_τ A P_τ + Q_τ)φ_τ = P_τ f for each τ on one common grid whose half
/// width is window_factor·max τ.
pub fn solve_fsm(
    a: &OperatorExpr,
    f: &dyn Fn(f64) -> C64,
    taus: &[f64],
    p: f64,
    policy: &GridPolicy,
) -> Result<ConvergenceStudy, NumericsError> {
    check_taus(taus)?;
    let grid = policy.grid_for(*taus.last().unwrap())?;
    let fv = grid.sample(f);
    let full = discretize(a, &grid)?;
    let solutions = taus
        .par_iter()
        .map(|&tau| {
            let m = finite_section_matrix(a, tau, &grid)?;
            let s = singular_values(&m.mat)?;
            if !(*s.last().unwrap() > s[0] * 1e-14) {
                return Err(NumericsError::Singular { tau });
            }
            let mask = grid.mask(tau);
            let rhs: Vec<C64> = fv.iter().zip(&mask).map(|(v, m)| if *m { *v } else { C64::new(0.0, 0.0) }).collect();
            let mut c = col(&rhs);
            m.mat.partial_piv_lu().solve_in_place(c.as_mut());
            Ok(from_col(&c))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let records = taus
        .iter()
        .enumerate()
        .map(|(k, &tau)| {
            let phi = &solutions[k];
            let r: Vec<C64> = full.apply(phi).iter().zip(&fv).map(|(a, b)| a - b).collect();
            let diff_norm = (k > 0).then(|| {
                let d: Vec<C64> = phi.iter().zip(&solutions[k - 1]).map(|(a, b)| a - b).collect();
                grid.norm_p(&d, p)
            });
            ConvergenceRecord { tau, diff_norm, residual: grid.norm_p(&r, p) }
        })
        .collect();
    Ok(ConvergenceStudy { grid, p, records, solutions })
}

/// Eigenvalues of the matrix (the 2-norm spectrum of the discretization).
pub fn empirical_spectrum(m: &DenseOperator) -> Result<Vec<C64>, NumericsError> {
    m.mat.eigenvalues().map_err(|e| NumericsError::Decomposition(format!("{e:?}")))
}

/// Smallest singular value of a concrete operator on each (τ, n) grid.
pub fn sigma_min_trend(expr: &OperatorExpr, grids: &[(f64, usize)], padding: usize) -> Result<Vec<f64>, NumericsError> {
    grids
        .par_iter()
        .map(|&(tau, n)| {
            let m = discretize(expr, &Grid::new(tau, n, padding)?)?;
            Ok(*singular_values(&m.mat)?.last().unwrap())
        })
        .collect()
}
