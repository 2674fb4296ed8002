//! One-sided invertibility of P_(α,β)c + Q_(α,β)d with piecewise constant c, d,
//! the two-piece singular integral criterion, and Wiener–Hopf operators with
//! piecewise constant symbols.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::geometry::{arc_contains, winding_about_origin, ArcCurve, CircularArc, GeometryError};
use crate::symbols::StepFunction;

use super::AnalyzerError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GkClass {
    Invertible,
    LeftOnly,
    RightOnly,
    NotOneSided,
}

/// Outcome with the smallest modulus met along the arcs and the offending location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GkReport {
    pub class: GkClass,
    #[serde(with = "crate::float_serde")]
    pub margin: f64,
    pub winding: Option<i64>,
    pub failure: Option<String>,
}

const ORIGIN: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Chebyshev–Lobatto nodes on [0, 1].
pub(crate) fn chebyshev_mu(n: usize) -> Vec<f64> {
    (0..n).map(|k| 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / (n - 1) as f64).cos())).collect()
}

const MU_NODES: usize = 257;

/// min over the μ-grid of |arc point| together with the exact membership of 0.
fn arc_avoids_origin(arc: &CircularArc, tol: f64) -> (bool, f64) {
    let margin = chebyshev_mu(MU_NODES).into_iter().map(|mu| arc.point_unchecked(mu).norm()).fold(f64::INFINITY, f64::min);
    (!arc_contains(arc, ORIGIN, tol) && margin > tol, margin)
}

/// Values of c and d at α+, at every interior breakpoint (both sides) and at β-.
struct Pieces {
    alpha_plus: (C64, C64),
    interior: Vec<(f64, (C64, C64), (C64, C64))>,
    beta_minus: (C64, C64),
    piece_values: Vec<(C64, C64)>,
}

fn pieces(alpha: f64, beta: f64, c: &StepFunction, d: &StepFunction) -> Pieces {
    let mut bps: Vec<f64> =
        c.breakpoints().iter().chain(d.breakpoints()).copied().filter(|x| *x > alpha && *x < beta).collect();
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    bps.dedup();
    let right_of = |f: &StepFunction, t: f64| if t.is_finite() { f.one_sided_limits(t).1 } else { f.at_minus_infinity() };
    let left_of = |f: &StepFunction, t: f64| if t.is_finite() { f.one_sided_limits(t).0 } else { f.at_plus_infinity() };
    let interior = bps
        .iter()
        .map(|&t| {
            let (cl, cr) = c.one_sided_limits(t);
            let (dl, dr) = d.one_sided_limits(t);
            (t, (cl, dl), (cr, dr))
        })
        .collect();
    let mut piece_values = vec![(right_of(c, alpha), right_of(d, alpha))];
    for &t in &bps {
        piece_values.push((c.one_sided_limits(t).1, d.one_sided_limits(t).1));
    }
    Pieces {
        alpha_plus: (right_of(c, alpha), right_of(d, alpha)),
        interior,
        beta_minus: (left_of(c, beta), left_of(d, beta)),
        piece_values,
    }
}

/// Classify P_(α,β)cI + Q_(α,β)dI on L^p(α,β), (α,β) ≠ ℝ.
pub fn gk_one_sided(
    p: f64,
    alpha: f64,
    beta: f64,
    c: &StepFunction,
    d: &StepFunction,
    tol: f64,
) -> Result<GkReport, AnalyzerError> {
    if !(alpha < beta) || (alpha.is_infinite() && beta.is_infinite()) {
        return Err(AnalyzerError::BadInterval(alpha, beta));
    }
    let pc = pieces(alpha, beta, c, d);
    let mut margin = f64::INFINITY;
    let fail = |margin: f64, what: String| GkReport { class: GkClass::NotOneSided, margin, winding: None, failure: Some(what) };

    for (k, (cv, dv)) in pc.piece_values.iter().enumerate() {
        let m = (cv * dv).norm();
        margin = margin.min(m);
        if m <= tol {
            return Ok(fail(margin, format!("c·d vanishes on piece {k}")));
        }
    }
    let (ca, da) = pc.alpha_plus;
    let (ok, m) = arc_avoids_origin(&CircularArc::new(da, ca, p)?, tol);
    margin = margin.min(m);
    if !ok {
        return Ok(fail(margin, format!("arc condition at alpha={alpha}")));
    }
    for (t, (cl, dl), (cr, dr)) in &pc.interior {
        let (ok, m) = arc_avoids_origin(&CircularArc::new(cl * dr, cr * dl, p)?, tol);
        margin = margin.min(m);
        if !ok {
            return Ok(fail(margin, format!("arc condition at t={t}")));
        }
    }
    let (cb, db) = pc.beta_minus;
    let (ok, m) = arc_avoids_origin(&CircularArc::new(cb, db, p)?, tol);
    margin = margin.min(m);
    if !ok {
        return Ok(fail(margin, format!("arc condition at beta={beta}")));
    }

    // closed curve of a = c/d: 1 → a(α+) → jumps → a(β-) → 1
    let mut arcs = vec![CircularArc::new(ONE, ca / da, p)?];
    for (_, (cl, dl), (cr, dr)) in &pc.interior {
        arcs.push(CircularArc::new(cl / dl, cr / dr, p)?);
    }
    arcs.push(CircularArc::new(cb / db, ONE, p)?);
    let w = match winding_about_origin(&ArcCurve { arcs }, tol) {
        Ok(w) => w,
        Err(GeometryError::CurveThroughOrigin { .. }) => return Ok(fail(margin, "curve through origin".into())),
        Err(e) => return Err(e.into()),
    };
    let class = match w {
        0 => GkClass::Invertible,
        w if w > 0 => GkClass::LeftOnly,
        _ => GkClass::RightOnly,
    };
    Ok(GkReport { class, margin, winding: Some(w), failure: None })
}

/// Invertibility of P_(-1,1)(a_-χ_(-1,0) + b_-χ_(0,1)) + Q_(-1,1)(a_+χ_(-1,0) + b_+χ_(0,1)).
pub fn sio_pc_invertible(p: f64, a_minus: C64, a_plus: C64, b_minus: C64, b_plus: C64, tol: f64) -> Result<bool, AnalyzerError> {
    if [a_minus, a_plus, b_minus, b_plus].iter().any(|v| v.norm() <= tol) {
        return Ok(false);
    }
    let curve = crate::geometry::triple_curve(p, ONE, a_minus / a_plus, b_minus / b_plus)?;
    match winding_about_origin(&curve, tol) {
        Ok(w) => Ok(w == 0),
        Err(GeometryError::CurveThroughOrigin { .. }) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

/// Closed arc curve of a piecewise constant Wiener–Hopf symbol g: the values of g
/// from -∞ to +∞ joined by 𝔄_p(g(x-), g(x+)) at every jump and closed by
/// 𝔄_p(g(+∞), g(-∞)).
pub fn wiener_hopf_curve(p: f64, g: &StepFunction) -> Result<ArcCurve, AnalyzerError> {
    let mut arcs = vec![];
    for x in g.jumps() {
        let (l, r) = g.one_sided_limits(x);
        arcs.push(CircularArc::new(l, r, p)?);
    }
    arcs.push(CircularArc::new(g.at_plus_infinity(), g.at_minus_infinity(), p)?);
    Ok(ArcCurve { arcs })
}

/// W(g) = χ_+W⁰(g)χ_+ on L^p(ℝ_+) for piecewise constant g.
pub fn wiener_hopf_invertible(p: f64, g: &StepFunction, tol: f64) -> Result<GkReport, AnalyzerError> {
    let mut margin = g.min_modulus();
    if margin <= tol {
        return Ok(GkReport { class: GkClass::NotOneSided, margin, winding: None, failure: Some("symbol vanishes".into()) });
    }
    let curve = wiener_hopf_curve(p, g)?;
    for arc in &curve.arcs {
        let (ok, m) = arc_avoids_origin(arc, tol);
        margin = margin.min(m);
        if !ok {
            return Ok(GkReport {
                class: GkClass::NotOneSided,
                margin,
                winding: None,
                failure: Some(format!("arc from {} to {} meets the origin", arc.z1, arc.z2)),
            });
        }
    }
    let w = winding_about_origin(&curve, tol)?;
    let class = match w {
        0 => GkClass::Invertible,
        w if w > 0 => GkClass::LeftOnly,
        _ => GkClass::RightOnly,
    };
    Ok(GkReport { class, margin, winding: Some(w), failure: None })
}
