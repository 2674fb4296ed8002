//! Shared builders and oracles for the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use finsec_core::analyzer::{HalfLine, OperatorExpr};
use finsec_core::geometry::LensDomain;
use finsec_core::symbols::{FiberAssignment, PcsoSymbol, SoGenerator, SoKind, StepFunction};
use finsec_core::C64;
use rand::Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn g1() -> Arc<SoGenerator> {
    Arc::new(SoGenerator::new("g1", SoKind::OscillatingPhase { k: 1 }, None).unwrap())
}

/// W⁰(a)χ_- + W⁰(b)χ_+ with constant a, b.
pub fn paired_const(a: f64, b: f64) -> OperatorExpr {
    OperatorExpr::paired(PcsoSymbol::constant(c(a, 0.0)), PcsoSymbol::constant(c(b, 0.0)))
}

/// The paired operator with a = χ_- + g₁χ_+ and b = 1.
pub fn chi_minus_plus_g1() -> OperatorExpr {
    let a = PcsoSymbol::from(StepFunction::chi_minus()).add(&PcsoSymbol::with_generator(StepFunction::chi_plus(), g1()));
    OperatorExpr::paired(a, PcsoSymbol::constant(c(1.0, 0.0)))
}

fn random_c(rng: &mut impl Rng) -> C64 {
    c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
}

pub fn random_step(rng: &mut impl Rng) -> StepFunction {
    let at = [-1.0, 0.0, 0.5, 2.0][rng.gen_range(0..4)];
    StepFunction::two_piece(at, random_c(rng), random_c(rng))
}

pub fn random_symbol(rng: &mut impl Rng) -> PcsoSymbol {
    let s = PcsoSymbol::from(random_step(rng));
    if rng.gen_bool(0.3) {
        s.add(&PcsoSymbol::with_generator(random_step(rng), g1()))
    } else {
        s
    }
}

/// Random expression of depth at most `depth`; `(P_τ)` leaves only if `with_seq`.
pub fn random_expr(rng: &mut impl Rng, depth: usize, with_seq: bool) -> OperatorExpr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..if with_seq { 6 } else { 5 }) {
            0 => OperatorExpr::Ident,
            1 => OperatorExpr::Mult(random_step(rng)),
            2 | 3 => OperatorExpr::conv(random_symbol(rng)),
            4 => OperatorExpr::ConvHalf(if rng.gen_bool(0.5) { HalfLine::Minus } else { HalfLine::Plus }),
            _ => OperatorExpr::ProjSeq,
        };
    }
    let k = rng.gen_range(2..4);
    match rng.gen_range(0..3) {
        0 => OperatorExpr::Sum((0..k).map(|_| random_expr(rng, depth - 1, with_seq)).collect()),
        1 => OperatorExpr::Prod((0..k).map(|_| random_expr(rng, depth - 1, with_seq)).collect()),
        _ => OperatorExpr::scale(random_c(rng), random_expr(rng, depth - 1, with_seq)),
    }
}

pub fn random_fiber(rng: &mut impl Rng) -> FiberAssignment {
    FiberAssignment::from_pairs([("g1", C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))])
}

/// Closed polygon through samples of the lens boundary.
pub fn lens_polygon(p: f64, per_arc: usize) -> Vec<C64> {
    LensDomain::new(p).unwrap().boundary().sample(per_arc).into_iter().map(|(_, _, z)| z).collect()
}

/// Even-odd ray casting.
pub fn point_in_polygon(poly: &[C64], z: C64) -> bool {
    let n = poly.len();
    let mut inside = false;
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if (a.im > z.im) != (b.im > z.im) {
            let x = a.re + (z.im - a.im) * (b.re - a.re) / (b.im - a.im);
            if z.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn polygon_distance(poly: &[C64], z: C64) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            let d = b - a;
            let t = if d.norm_sqr() == 0.0 { 0.0 } else { ((z - a) * d.conj()).re / d.norm_sqr() };
            (z - (a + d * t.clamp(0.0, 1.0))).norm()
        })
        .fold(f64::INFINITY, f64::min)
}
