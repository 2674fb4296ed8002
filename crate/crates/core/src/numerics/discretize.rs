use faer::Mat;
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use super::{DenseOperator, Grid, NumericsError};
use crate::analyzer::OperatorExpr;
use crate::symbols::{PcsoSymbol, StepFunction};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Intermediate result: diagonal operators stay diagonal until a dense factor appears.
#[derive(Debug, Clone)]
pub(crate) enum Disc {
    Diag(Vec<C64>),
    Dense(Mat<C64>),
}

impl Disc {
    fn scale(self, c: C64) -> Disc {
        match self {
            Disc::Diag(d) => Disc::Diag(d.into_iter().map(|v| v * c).collect()),
            Disc::Dense(m) => Disc::Dense(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c)),
        }
    }

    fn add(self, other: Disc) -> Disc {
        match (self, other) {
            (Disc::Diag(a), Disc::Diag(b)) => Disc::Diag(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
            (Disc::Dense(mut m), Disc::Diag(d)) | (Disc::Diag(d), Disc::Dense(mut m)) => {
                for (k, v) in d.iter().enumerate() {
                    m[(k, k)] += v;
                }
                Disc::Dense(m)
            }
            (Disc::Dense(a), Disc::Dense(b)) => Disc::Dense(&a + &b),
        }
    }

    fn mul(self, other: Disc) -> Disc {
        match (self, other) {
            (Disc::Diag(a), Disc::Diag(b)) => Disc::Diag(a.iter().zip(&b).map(|(x, y)| x * y).collect()),
            (Disc::Diag(d), Disc::Dense(m)) => Disc::Dense(Mat::from_fn(m.nrows(), m.ncols(), |i, j| d[i] * m[(i, j)])),
            (Disc::Dense(m), Disc::Diag(d)) => Disc::Dense(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * d[j])),
            (Disc::Dense(a), Disc::Dense(b)) => Disc::Dense(&a * &b),
        }
    }

    pub(crate) fn into_mat(self) -> Mat<C64> {
        match self {
            Disc::Dense(m) => m,
            Disc::Diag(d) => Mat::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { ZERO }),
        }
    }
}

/// Step function sampled at the nodes; at a node that is a breakpoint the two
/// one-sided limits are averaged.
pub(crate) fn sample_step(a: &StepFunction, grid: &Grid) -> Vec<C64> {
    grid.nodes()
        .into_iter()
        .map(|x| {
            let (l, r) = a.one_sided_limits(x);
            0.5 * (l + r)
        })
        .collect()
}

/// Sampled symbol at the dual-grid frequencies, in FFT order, length N = padding·n.
/// Breakpoints and the Nyquist node take the mean of the one-sided values.
pub(crate) fn symbol_samples(b: &dyn Fn(f64) -> (C64, C64), grid: &Grid) -> Vec<C64> {
    let big_n = grid.padding * grid.n;
    let dw = 2.0 * std::f64::consts::PI / (big_n as f64 * grid.h());
    (0..big_n)
        .map(|k| {
            if k == big_n / 2 {
                let w = dw * k as f64;
                let (_, r) = b(-w);
                let (l, _) = b(w);
                return 0.5 * (l + r);
            }
            let kk = if k > big_n / 2 { k as f64 - big_n as f64 } else { k as f64 };
            let (l, r) = b(dw * kk);
            0.5 * (l + r)
        })
        .collect()
}

/// Toeplitz matrix T[j,l] = c[j-l] with c the inverse-transform coefficients of the
/// sampled symbol: c[m] = (1/N) Σ_k b(ω_k) e^{-2πikm/N}.
pub(crate) fn toeplitz_from_samples(samples: Vec<C64>, n: usize) -> Mat<C64> {
    let big_n = samples.len();
    let mut buf = samples;
    let fft = FftPlanner::new().plan_fft_forward(big_n);
    fft.process(&mut buf);
    let scale = 1.0 / big_n as f64;
    Mat::from_fn(n, n, |j, l| {
        let m = (j as isize - l as isize).rem_euclid(big_n as isize) as usize;
        buf[m] * scale
    })
}

pub(crate) fn conv_matrix(b: &PcsoSymbol, grid: &Grid) -> Disc {
    if let Some(c) = b.as_constant() {
        return Disc::Diag(vec![c; grid.n]);
    }
    let f = |w: f64| b.one_sided_limits(w);
    Disc::Dense(toeplitz_from_samples(symbol_samples(&f, grid), grid.n))
}

pub(crate) fn disc(expr: &OperatorExpr, grid: &Grid, proj_seq: Option<f64>) -> Result<Disc, NumericsError> {
    Ok(match expr {
        OperatorExpr::Ident => Disc::Diag(vec![ONE; grid.n]),
        OperatorExpr::Mult(a) => Disc::Diag(sample_step(a, grid)),
        OperatorExpr::Proj1 => {
            mask_fits(grid, 1.0)?;
            Disc::Diag(sample_step(&StepFunction::indicator(-1.0, 1.0), grid))
        }
        OperatorExpr::ProjSeq => match proj_seq {
            Some(t) => Disc::Diag(grid.mask(t).into_iter().map(|b| if b { ONE } else { ZERO }).collect()),
            None => return Err(NumericsError::SequenceLevel),
        },
        OperatorExpr::Conv(b) => conv_matrix(b, grid),
        OperatorExpr::ConvHalf(h) => conv_matrix(&PcsoSymbol::from(h.symbol()), grid),
        OperatorExpr::Scale(c, e) => disc(e, grid, proj_seq)?.scale(*c),
        OperatorExpr::Sum(v) => {
            let mut acc = Disc::Diag(vec![ZERO; grid.n]);
            for e in v {
                acc = acc.add(disc(e, grid, proj_seq)?);
            }
            acc
        }
        OperatorExpr::Prod(v) => {
            let mut acc = Disc::Diag(vec![ONE; grid.n]);
            for e in v {
                acc = acc.mul(disc(e, grid, proj_seq)?);
            }
            acc
        }
    })
}

fn mask_fits(grid: &Grid, t: f64) -> Result<(), NumericsError> {
    if t > grid.tau {
        return Err(NumericsError::GridTooSmall { mask: t, tau: grid.tau });
    }
    Ok(())
}

fn label(expr: &OperatorExpr) -> String {
    match expr {
        OperatorExpr::Ident => "I".into(),
        OperatorExpr::Mult(_) => "aI".into(),
        OperatorExpr::Conv(_) => "W0(b)".into(),
        OperatorExpr::ProjSeq => "P_tau".into(),
        OperatorExpr::ConvHalf(h) => format!("{h:?}"),
        OperatorExpr::Proj1 => "P_1".into(),
        OperatorExpr::Scale(c, e) => format!("{c}*{}", label(e)),
        OperatorExpr::Sum(v) => format!("({})", v.iter().map(label).collect::<Vec<_>>().join(" + ")),
        OperatorExpr::Prod(v) => v.iter().map(label).collect::<Vec<_>>().join("·"),
    }
}

/// Matrix of a concrete operator expression on the grid window.
pub fn discretize(expr: &OperatorExpr, grid: &Grid) -> Result<DenseOperator, NumericsError> {
    let mat = disc(expr, grid, None)?.into_mat();
    Ok(DenseOperator { grid: *grid, mat, label: label(expr) })
}

/// Matrix of the τ-th member of a sequence-level expression (P_τ realised as a mask).
pub fn discretize_sequence(expr: &OperatorExpr, tau: f64, grid: &Grid) -> Result<DenseOperator, NumericsError> {
    mask_fits(grid, tau)?;
    let mat = disc(expr, grid, Some(tau))?.into_mat();
    Ok(DenseOperator { grid: *grid, mat, label: format!("{}[tau={tau}]", label(expr)) })
}

/// Toeplitz matrix-vector product through the circulant embedding of length N.
/// The transform of the coefficient sequence c is b_{-k}, so no extra pass is needed.
fn toeplitz_apply(samples: &[C64], v: &[C64]) -> Vec<C64> {
    let big_n = samples.len();
    let mut planner = FftPlanner::new();
    let mut x = vec![ZERO; big_n];
    x[..v.len()].copy_from_slice(v);
    planner.plan_fft_forward(big_n).process(&mut x);
    for (k, xv) in x.iter_mut().enumerate() {
        *xv *= samples[(big_n - k) % big_n];
    }
    planner.plan_fft_inverse(big_n).process(&mut x);
    x.truncate(v.len());
    let scale = 1.0 / big_n as f64;
    x.into_iter().map(|z| z * scale).collect()
}

/// Applies the τ-th member of an expression to a grid vector without forming
/// dense matrices; convolutions go through the FFT.
pub fn apply_sequence(expr: &OperatorExpr, tau: Option<f64>, grid: &Grid, v: &[C64]) -> Result<Vec<C64>, NumericsError> {
    if v.len() != grid.n {
        return Err(NumericsError::Dimension { expected: grid.n, got: v.len() });
    }
    Ok(match expr {
        OperatorExpr::Ident => v.to_vec(),
        OperatorExpr::Mult(a) => sample_step(a, grid).iter().zip(v).map(|(a, x)| a * x).collect(),
        OperatorExpr::Proj1 => {
            mask_fits(grid, 1.0)?;
            grid.mask(1.0).iter().zip(v).map(|(m, x)| if *m { *x } else { ZERO }).collect()
        }
        OperatorExpr::ProjSeq => {
            let t = tau.ok_or(NumericsError::SequenceLevel)?;
            grid.mask(t).iter().zip(v).map(|(m, x)| if *m { *x } else { ZERO }).collect()
        }
        OperatorExpr::Conv(b) => match b.as_constant() {
            Some(c) => v.iter().map(|x| c * x).collect(),
            None => toeplitz_apply(&symbol_samples(&|w| b.one_sided_limits(w), grid), v),
        },
        OperatorExpr::ConvHalf(h) => {
            let s = h.symbol();
            toeplitz_apply(&symbol_samples(&|w| s.one_sided_limits(w), grid), v)
        }
        OperatorExpr::Scale(c, e) => apply_sequence(e, tau, grid, v)?.into_iter().map(|x| c * x).collect(),
        OperatorExpr::Sum(items) => {
            let mut acc = vec![ZERO; v.len()];
            for e in items {
                for (a, x) in acc.iter_mut().zip(apply_sequence(e, tau, grid, v)?) {
                    *a += x;
                }
            }
            acc
        }
        OperatorExpr::Prod(items) => {
            let mut acc = v.to_vec();
            for e in items.iter().rev() {
                acc = apply_sequence(e, tau, grid, &acc)?;
            }
            acc
        }
    })
}

/// P_τ A P_τ + Q_τ for a concrete operator A.
pub fn finite_section_matrix(a: &OperatorExpr, tau_inner: f64, grid: &Grid) -> Result<DenseOperator, NumericsError> {
    if tau_inner >= grid.tau {
        return Err(NumericsError::GridTooSmall { mask: tau_inner, tau: grid.tau });
    }
    if a.contains_proj_seq() {
        return Err(NumericsError::SequenceLevel);
    }
    let m = grid.mask(tau_inner);
    let a_full = disc(a, grid, None)?.into_mat();
    let mat = Mat::from_fn(grid.n, grid.n, |i, j| {
        if m[i] && m[j] {
            a_full[(i, j)]
        } else if i == j && !m[i] {
            ONE
        } else {
            ZERO
        }
    });
    Ok(DenseOperator { grid: *grid, mat, label: format!("P A P + Q [{}, tau={tau_inner}]", label(a)) })
}
