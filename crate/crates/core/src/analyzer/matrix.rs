//! The 2×2 symbols N_η^∓ on the lens and the determinant test over it.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::expr::{HalfLine, OperatorExpr};
use super::AnalyzerError;
use crate::geometry::{refine, CircularArc, LensDomain};
use crate::symbols::FiberAssignment;

pub type M2 = [[C64; 2]; 2];

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn m2_scalar(c: C64) -> M2 {
    [[c, ZERO], [ZERO, c]]
}

pub fn m2_mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn m2_add(a: &M2, b: &M2) -> M2 {
    [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]]
}

pub fn m2_det(a: &M2) -> C64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(M2),
    /// W⁰(b) with fiber values b_η(-∞), b_η(+∞).
    Conv(C64, C64),
    Scale(C64, Box<Node>),
    Sum(Vec<Node>),
    Prod(Vec<Node>),
}

/// x ↦ N_η^∓(A)(x), evaluated from the expression tree.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolMatrix2 {
    root: Node,
    side: Side,
    branch: f64,
}

/// Principal branch of sqrt(x(1-x)). x(1-x) is a negative real only for real x
/// outside [0,1], which never lies in the lens, so this branch is analytic there.
pub fn r_branch(x: C64) -> C64 {
    (x * (1.0 - x)).sqrt()
}

impl SymbolMatrix2 {
    pub fn side(&self) -> Side {
        self.side
    }

    /// The same symbol computed with -R(x) in place of R(x).
    pub fn with_branch_flipped(&self) -> Self {
        Self { branch: -self.branch, ..self.clone() }
    }

    pub fn eval(&self, x: C64) -> M2 {
        let r = r_branch(x) * self.branch;
        eval_node(&self.root, self.side, x, r)
    }

    pub fn det(&self, x: C64) -> C64 {
        m2_det(&self.eval(x))
    }
}

fn conv_matrix(side: Side, bm: C64, bp: C64, x: C64, r: C64) -> M2 {
    let (u, v) = match side {
        Side::Minus => (bm, bp),
        Side::Plus => (bp, bm),
    };
    let off = (u - v) * r;
    [[u * x + v * (1.0 - x), off], [off, u * (1.0 - x) + v * x]]
}

fn eval_node(n: &Node, side: Side, x: C64, r: C64) -> M2 {
    match n {
        Node::Const(m) => *m,
        Node::Conv(bm, bp) => conv_matrix(side, *bm, *bp, x, r),
        Node::Scale(c, e) => {
            let m = eval_node(e, side, x, r);
            [[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]]
        }
        Node::Sum(v) => v.iter().fold([[ZERO; 2]; 2], |acc, e| m2_add(&acc, &eval_node(e, side, x, r))),
        Node::Prod(v) => v.iter().fold(m2_scalar(ONE), |acc, e| m2_mul(&acc, &eval_node(e, side, x, r))),
    }
}

pub fn n_eta_matrix(expr: &OperatorExpr, fiber: &FiberAssignment, side: Side) -> Result<SymbolMatrix2, AnalyzerError> {
    Ok(SymbolMatrix2 { root: build(expr, fiber, side)?, side, branch: 1.0 })
}

fn build(expr: &OperatorExpr, fiber: &FiberAssignment, side: Side) -> Result<Node, AnalyzerError> {
    let at_side = |m: C64, p: C64| match side {
        Side::Minus => m,
        Side::Plus => p,
    };
    Ok(match expr {
        OperatorExpr::Ident => Node::Const(m2_scalar(ONE)),
        OperatorExpr::ProjSeq => Node::Const([[ONE, ZERO], [ZERO, ZERO]]),
        OperatorExpr::Mult(a) => Node::Const(m2_scalar(at_side(a.at_minus_infinity(), a.at_plus_infinity()))),
        OperatorExpr::Proj1 => Node::Const(m2_scalar(ZERO)),
        OperatorExpr::Conv(b) => {
            let (m, p) = b.fiber_values(fiber)?;
            Node::Conv(m, p)
        }
        OperatorExpr::ConvHalf(HalfLine::Minus) => Node::Conv(ONE, ZERO),
        OperatorExpr::ConvHalf(HalfLine::Plus) => Node::Conv(ZERO, ONE),
        OperatorExpr::Scale(c, e) => Node::Scale(*c, Box::new(build(e, fiber, side)?)),
        OperatorExpr::Sum(v) => Node::Sum(v.iter().map(|e| build(e, fiber, side)).collect::<Result<_, _>>()?),
        OperatorExpr::Prod(v) => Node::Prod(v.iter().map(|e| build(e, fiber, side)).collect::<Result<_, _>>()?),
    })
}

/// Result of the determinant test on the lens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum LensCheck {
    Pass { margin: f64 },
    Fail { witness: C64, modulus: f64, zeros: i64 },
}

impl LensCheck {
    pub fn passed(&self) -> bool {
        matches!(self, LensCheck::Pass { .. })
    }
}

/// Grid over the lens: arcs 𝔄_s(0,1) for s across [min{p,q}, max{p,q}] at Chebyshev μ.
fn lens_grid(lens: &LensDomain, n_arcs: usize, n_mu: usize) -> Vec<C64> {
    let (lo, hi) = lens.theta_interval();
    let arcs = if lens.is_segment() { 1 } else { n_arcs };
    let mus = super::gk::chebyshev_mu(n_mu);
    let mut pts = Vec::with_capacity(arcs * n_mu);
    for k in 0..arcs {
        let theta = if arcs == 1 { lo } else { lo + (hi - lo) * k as f64 / (arcs - 1) as f64 };
        let arc = CircularArc { z1: ZERO, z2: ONE, s: 2.0 * std::f64::consts::PI / theta };
        pts.extend(mus.iter().map(|&mu| arc.point_unchecked(mu)));
    }
    pts
}

/// Newton iteration on an analytic function with a central difference derivative.
fn newton(f: &dyn Fn(C64) -> C64, mut z: C64) -> C64 {
    for _ in 0..50 {
        let h = 1e-7 * (1.0 + z.norm());
        let df = (f(z + h) - f(z - h)) / (2.0 * h);
        if df.norm() == 0.0 {
            break;
        }
        let step = f(z) / df;
        z -= step;
        if !z.is_finite() {
            break;
        }
        if step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Golden-section minimisation of |f| over real x in [a, b].
fn minimize_on_segment(f: &dyn Fn(C64) -> C64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..200 {
        if f(C64::new(c, 0.0)).norm() < f(C64::new(d, 0.0)).norm() {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Argument increment of f along the positively oriented lens boundary.
fn boundary_zero_count(f: &dyn Fn(C64) -> C64, lens: &LensDomain) -> (f64, f64) {
    let mut total = 0.0;
    let mut min_mod = f64::INFINITY;
    for arc in lens.boundary().arcs {
        const START: usize = 64;
        let g = |mu: f64| f(arc.point_unchecked(mu));
        let mut prev = g(0.0);
        min_mod = min_mod.min(prev.norm());
        for k in 1..=START {
            let mb = k as f64 / START as f64;
            let zb = g(mb);
            min_mod = min_mod.min(zb.norm());
            total += refine(&g, (k - 1) as f64 / START as f64, prev, mb, zb, 0, &mut min_mod);
            prev = zb;
        }
    }
    (total / (2.0 * std::f64::consts::PI), min_mod)
}

/// Decide whether the analytic function f has no zero on the lens 𝔏_p.
pub fn det_nonvanishing_on_lens(f: &(dyn Fn(C64) -> C64 + Sync), p: f64, tol: f64) -> Result<LensCheck, AnalyzerError> {
    let lens = LensDomain::new(p)?;
    let grid = lens_grid(&lens, 33, 257);
    let (mut best, mut best_mod) = (grid[0], f64::INFINITY);
    for &z in &grid {
        let m = f(z).norm();
        if m < best_mod {
            best = z;
            best_mod = m;
        }
    }
    if lens.is_segment() {
        let n = grid.len();
        let k = grid.iter().position(|z| *z == best).unwrap_or(0);
        let a = grid[k.saturating_sub(1)].re;
        let b = grid[(k + 1).min(n - 1)].re;
        let x = minimize_on_segment(f, a, b);
        let m = f(C64::new(x, 0.0)).norm();
        if m < best_mod {
            best = C64::new(x, 0.0);
            best_mod = m;
        }
        if best_mod <= tol {
            return Ok(LensCheck::Fail { witness: best, modulus: best_mod, zeros: 1 });
        }
        return Ok(LensCheck::Pass { margin: best_mod });
    }
    let (turns, boundary_min) = boundary_zero_count(f, &lens);
    let zeros = turns.round() as i64;
    if boundary_min > tol && zeros == 0 && best_mod > tol {
        return Ok(LensCheck::Pass { margin: best_mod.min(boundary_min) });
    }
    // locate a witness: Newton from the grid minimiser, kept only if it stays in the lens
    let z = newton(f, best);
    let (witness, modulus) = if z.is_finite() && lens.contains(z, 1e-6) && f(z).norm() < best_mod {
        (z, f(z).norm())
    } else {
        (best, best_mod)
    };
    Ok(LensCheck::Fail { witness, modulus, zeros: zeros.max(i64::from(modulus <= tol)) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{PcsoSymbol, StepFunction};

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn close(a: &M2, b: &M2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).norm() <= tol))
    }

    #[test]
    fn generator_images() {
        let f = FiberAssignment::default();
        let x = C64::new(0.3, 0.2);
        let p = n_eta_matrix(&OperatorExpr::ProjSeq, &f, Side::Minus).unwrap();
        assert_eq!(p.eval(x), [[ONE, ZERO], [ZERO, ZERO]]);
        let a = OperatorExpr::Mult(StepFunction::two_piece(0.0, r(2.0), r(3.0)));
        assert_eq!(n_eta_matrix(&a, &f, Side::Minus).unwrap().eval(x), m2_scalar(r(2.0)));
        assert_eq!(n_eta_matrix(&a, &f, Side::Plus).unwrap().eval(x), m2_scalar(r(3.0)));
        let b = OperatorExpr::conv(PcsoSymbol::constant(r(4.0)));
        assert!(close(&n_eta_matrix(&b, &f, Side::Plus).unwrap().eval(x), &m2_scalar(r(4.0)), 1e-15));
    }

    #[test]
    fn projection_images_are_idempotent() {
        let f = FiberAssignment::default();
        for side in [Side::Minus, Side::Plus] {
            for e in [OperatorExpr::ConvHalf(HalfLine::Minus), OperatorExpr::ConvHalf(HalfLine::Plus), OperatorExpr::ProjSeq] {
                let m = n_eta_matrix(&e, &f, side).unwrap();
                for x in [C64::new(0.2, 0.1), C64::new(0.7, -0.3), r(0.5)] {
                    let v = m.eval(x);
                    assert!(close(&m2_mul(&v, &v), &v, 1e-14));
                }
            }
        }
    }

    #[test]
    fn affine_det_zero_is_found() {
        let f = |x: C64| x - 0.5;
        match det_nonvanishing_on_lens(&f, 2.0, 1e-9).unwrap() {
            LensCheck::Fail { witness, .. } => assert!((witness - 0.5).norm() < 1e-9),
            other => panic!("{other:?}"),
        }
        match det_nonvanishing_on_lens(&f, 4.0, 1e-9).unwrap() {
            LensCheck::Fail { witness, zeros, .. } => {
                assert!((witness - 0.5).norm() < 1e-9);
                assert_eq!(zeros, 1);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(det_nonvanishing_on_lens(&|_| ONE, 3.0, 1e-9).unwrap(), LensCheck::Pass { margin: 1.0 });
        assert!(det_nonvanishing_on_lens(&|x: C64| x + 1.0, 3.0, 1e-9).unwrap().passed());
        // zero just outside the p = 4 disc but inside the p = 6 lens
        let g = |x: C64| x - C64::new(0.5, 0.55);
        assert!(det_nonvanishing_on_lens(&g, 4.0, 1e-9).unwrap().passed());
        assert!(!det_nonvanishing_on_lens(&g, 6.0, 1e-9).unwrap().passed());
    }
}
