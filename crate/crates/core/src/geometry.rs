//! Circular arcs 𝔄_s(z1, z2), closed arc curves, winding numbers and the lens 𝔏_p.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("arc parameter s must exceed 1, got {0}")]
    BadExponent(f64),
    #[error("arc parameter mu must lie in [0,1], got {0}")]
    BadMu(f64),
    #[error("curve passes within {tol:e} of the origin near {near}")]
    CurveThroughOrigin { tol: f64, near: C64 },
    #[error("arc chain does not close: gap {0:e}")]
    NotClosed(f64),
    #[error("accumulated argument {0} is not an integer multiple of 2pi")]
    NonIntegerWinding(f64),
}

/// Conjugate exponent q = p/(p-1).
pub fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

fn check_exponent(s: f64) -> Result<(), GeometryError> {
    if s.is_finite() && s > 1.0 {
        Ok(())
    } else {
        Err(GeometryError::BadExponent(s))
    }
}

/// f_s(mu). The s = 2 case is the straight segment and is handled as its own branch.
pub fn f_param(s: f64, mu: f64) -> Result<C64, GeometryError> {
    check_exponent(s)?;
    if !(0.0..=1.0).contains(&mu) {
        return Err(GeometryError::BadMu(mu));
    }
    Ok(f_unchecked(s, mu))
}

fn f_unchecked(s: f64, mu: f64) -> C64 {
    if s == 2.0 {
        return C64::new(mu, 0.0);
    }
    let phi = PI - 2.0 * PI / s;
    let amp = (mu * phi).sin() / phi.sin();
    C64::from_polar(amp, phi * (mu - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircularArc {
    pub z1: C64,
    pub z2: C64,
    pub s: f64,
}

impl CircularArc {
    pub fn new(z1: C64, z2: C64, s: f64) -> Result<Self, GeometryError> {
        check_exponent(s)?;
        Ok(Self { z1, z2, s })
    }

    pub fn is_degenerate(&self) -> bool {
        self.z1 == self.z2
    }

    /// Angle 2π/s under which the chord [z1, z2] is seen from the arc.
    pub fn angle(&self) -> f64 {
        2.0 * PI / self.s
    }

    /// The same point set traversed from z2 to z1.
    pub fn reversed(&self) -> Self {
        Self { z1: self.z2, z2: self.z1, s: conjugate(self.s) }
    }

    pub(crate) fn point_unchecked(&self, mu: f64) -> C64 {
        if self.is_degenerate() {
            return self.z1;
        }
        let f = f_unchecked(self.s, mu);
        self.z1 * (1.0 - f) + self.z2 * f
    }
}

pub fn arc_point(arc: &CircularArc, mu: f64) -> Result<C64, GeometryError> {
    f_param(arc.s, mu)?;
    Ok(arc.point_unchecked(mu))
}

/// Wrap an angle into (-π, π].
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Argument of z in [0, 2π).
pub(crate) fn arg_2pi(z: C64) -> f64 {
    z.arg().rem_euclid(2.0 * PI)
}

pub fn arc_contains(arc: &CircularArc, z: C64, tol: f64) -> bool {
    if (z - arc.z1).norm() <= tol || (z - arc.z2).norm() <= tol {
        return true;
    }
    if arc.is_degenerate() {
        return false;
    }
    let (u, v) = (z - arc.z1, z - arc.z2);
    let dtheta = wrap_angle((u / v).arg() - arc.angle()).abs();
    // |grad arg((z-z1)/(z-z2))| = |z1-z2| / (|z-z1||z-z2|)
    dtheta * u.norm() * v.norm() / (arc.z1 - arc.z2).norm() <= tol
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LensDomain {
    pub p: f64,
}

impl LensDomain {
    pub fn new(p: f64) -> Result<Self, GeometryError> {
        check_exponent(p)?;
        Ok(Self { p })
    }

    pub fn q(&self) -> f64 {
        conjugate(self.p)
    }

    /// The s-interval [min{p,q}, max{p,q}].
    pub fn s_interval(&self) -> (f64, f64) {
        let q = self.q();
        (self.p.min(q), self.p.max(q))
    }

    /// Range of arg(z/(z-1)) over the lens: [2π/max, 2π/min].
    pub fn theta_interval(&self) -> (f64, f64) {
        let (lo, hi) = self.s_interval();
        (2.0 * PI / hi, 2.0 * PI / lo)
    }

    pub fn is_segment(&self) -> bool {
        self.p == 2.0
    }

    pub fn contains(&self, z: C64, tol: f64) -> bool {
        if z.norm() <= tol || (z - 1.0).norm() <= tol {
            return true;
        }
        let theta = arg_2pi(z / (z - 1.0));
        let (lo, hi) = self.theta_interval();
        if theta >= lo && theta <= hi {
            return true;
        }
        let d = wrap_angle(theta - lo).abs().min(wrap_angle(theta - hi).abs());
        d * z.norm() * (z - 1.0).norm() <= tol
    }

    /// Positively oriented boundary: lower arc 0 → 1 followed by the upper arc 1 → 0.
    /// For p = 2 the two arcs coincide with the segment.
    pub fn boundary(&self) -> ArcCurve {
        let (_, hi) = self.s_interval();
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let lower = CircularArc { z1: zero, z2: one, s: hi };
        ArcCurve { arcs: vec![lower, CircularArc { z1: one, z2: zero, s: hi }] }
    }
}

pub fn lens_contains(p: f64, z: C64, tol: f64) -> Result<bool, GeometryError> {
    Ok(LensDomain::new(p)?.contains(z, tol))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcCurve {
    pub arcs: Vec<CircularArc>,
}

impl ArcCurve {
    pub fn new(arcs: Vec<CircularArc>) -> Result<Self, GeometryError> {
        let c = Self { arcs };
        let gap = c.closure_gap();
        if gap > 1e-12 {
            return Err(GeometryError::NotClosed(gap));
        }
        Ok(c)
    }

    /// Closed curve through the given vertices, every arc with the same exponent.
    pub fn through(s: f64, vertices: &[C64]) -> Result<Self, GeometryError> {
        check_exponent(s)?;
        let n = vertices.len();
        let arcs = (0..n)
            .map(|k| CircularArc { z1: vertices[k], z2: vertices[(k + 1) % n], s })
            .collect();
        Ok(Self { arcs })
    }

    pub fn closure_gap(&self) -> f64 {
        let n = self.arcs.len();
        (0..n)
            .map(|k| {
                let (a, b) = (self.arcs[k].z2, self.arcs[(k + 1) % n].z1);
                (a - b).norm() / a.norm().max(b.norm()).max(1.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn is_point(&self) -> bool {
        self.arcs.iter().all(|a| a.is_degenerate() && a.z1 == self.arcs[0].z1)
    }

    pub fn reversed(&self) -> Self {
        Self { arcs: self.arcs.iter().rev().map(CircularArc::reversed).collect() }
    }

    pub fn rotated(&self, k: usize) -> Self {
        let mut arcs = self.arcs.clone();
        if !arcs.is_empty() {
            let k = k % arcs.len();
            arcs.rotate_left(k);
        }
        Self { arcs }
    }

    /// Polyline samples (arc index, mu, point), `per_arc` uniform samples per arc.
    pub fn sample(&self, per_arc: usize) -> Vec<(usize, f64, C64)> {
        let per_arc = per_arc.max(2);
        let mut out = Vec::with_capacity(per_arc * self.arcs.len());
        for (i, arc) in self.arcs.iter().enumerate() {
            for k in 0..per_arc {
                let mu = k as f64 / (per_arc - 1) as f64;
                out.push((i, mu, arc.point_unchecked(mu)));
            }
        }
        out
    }
}

/// The oriented curve 𝔄_p(z1,z2) ∪ 𝔄_p(z2,z3) ∪ 𝔄_p(z3,z1).
pub fn triple_curve(p: f64, z1: C64, z2: C64, z3: C64) -> Result<ArcCurve, GeometryError> {
    ArcCurve::through(p, &[z1, z2, z3])
}

const MAX_STEP: f64 = PI / 4.0;

/// Argument increment of a single arc, refined until every step is below π/4.
/// Also returns the smallest modulus seen.
pub(crate) fn arc_arg_increment(arc: &CircularArc) -> (f64, f64) {
    if arc.is_degenerate() {
        return (0.0, arc.z1.norm());
    }
    const START: usize = 16;
    let mut total = 0.0;
    let mut min_mod = f64::INFINITY;
    let mut prev_mu = 0.0;
    let mut prev = arc.point_unchecked(0.0);
    min_mod = min_mod.min(prev.norm());
    for k in 1..=START {
        let mu = k as f64 / START as f64;
        let z = arc.point_unchecked(mu);
        min_mod = min_mod.min(z.norm());
        total += refine(&|m| arc.point_unchecked(m), prev_mu, prev, mu, z, 0, &mut min_mod);
        prev_mu = mu;
        prev = z;
    }
    (total, min_mod)
}

pub(crate) fn refine(
    f: &dyn Fn(f64) -> C64,
    ma: f64,
    za: C64,
    mb: f64,
    zb: C64,
    depth: u32,
    min_mod: &mut f64,
) -> f64 {
    let step = (zb / za).arg();
    if !step.is_finite() {
        *min_mod = 0.0;
        return 0.0;
    }
    if step.abs() < MAX_STEP || depth > 48 {
        return step;
    }
    let mm = 0.5 * (ma + mb);
    let zm = f(mm);
    *min_mod = min_mod.min(zm.norm());
    refine(f, ma, za, mm, zm, depth + 1, min_mod) + refine(f, mm, zm, mb, zb, depth + 1, min_mod)
}

pub fn winding_about_origin(curve: &ArcCurve, min_modulus_tol: f64) -> Result<i64, GeometryError> {
    if curve.is_point() {
        return Ok(0);
    }
    let origin = C64::new(0.0, 0.0);
    let mut total = 0.0;
    for arc in &curve.arcs {
        if arc_contains(arc, origin, min_modulus_tol) {
            let near = if arc.z1.norm() <= arc.z2.norm() { arc.z1 } else { arc.z2 };
            return Err(GeometryError::CurveThroughOrigin { tol: min_modulus_tol, near });
        }
        let (inc, min_mod) = arc_arg_increment(arc);
        if min_mod < min_modulus_tol {
            return Err(GeometryError::CurveThroughOrigin { tol: min_modulus_tol, near: arc.z1 });
        }
        total += inc;
    }
    let turns = total / (2.0 * PI);
    let w = turns.round();
    if (turns - w).abs() >= 0.1 {
        return Err(GeometryError::NonIntegerWinding(total));
    }
    Ok(w as i64)
}
