//! CSV tables and small hand-written SVG plots.

use std::fmt::Write as _;
use std::path::Path;

use finsec_core::geometry::{ArcCurve, LensDomain};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointRow {
    pub re: f64,
    pub im: f64,
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Output(path.display().to_string(), e.to_string()))?;
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Output(path.display().to_string(), e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Output(path.display().to_string(), e.to_string()))
}

pub fn point_rows(pts: &[C64]) -> Vec<PointRow> {
    pts.iter().map(|z| PointRow { re: z.re, im: z.im }).collect()
}

/// Closed polyline around 𝔏_p, from 0 to 1 along one arc and back along the other.
pub fn lens_boundary(p: f64, per_arc: usize) -> Result<Vec<C64>, CliError> {
    let lens = LensDomain::new(p)?;
    let mut pts: Vec<C64> = lens.boundary().sample(per_arc).into_iter().map(|(_, _, z)| z).collect();
    pts.push(pts[0]);
    Ok(pts)
}

pub fn curve_points(curve: &ArcCurve, per_arc: usize) -> Vec<C64> {
    if curve.is_point() {
        return vec![curve.arcs[0].z1];
    }
    curve.sample(per_arc).into_iter().map(|(_, _, z)| z).collect()
}

/// Distance from z to the lens (zero inside).
pub fn lens_distance(p: f64, boundary: &[C64], z: C64) -> f64 {
    if finsec_core::geometry::lens_contains(p, z, 1e-9).unwrap_or(false) {
        return 0.0;
    }
    boundary
        .windows(2)
        .map(|w| {
            let (a, d) = (w[0], w[1] - w[0]);
            let t = if d.norm_sqr() == 0.0 { 0.0 } else { (((z - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0) };
            (z - (a + d * t)).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// A plot in data coordinates, rendered into a fixed-size SVG.
#[derive(Default)]
pub struct Svg {
    lines: Vec<(Vec<C64>, &'static str)>,
    dots: Vec<(Vec<C64>, &'static str, f64)>,
    crosses: Vec<C64>,
    title: String,
}

const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;

impl Svg {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), ..Default::default() }
    }

    pub fn line(mut self, pts: Vec<C64>, colour: &'static str) -> Self {
        self.lines.push((pts, colour));
        self
    }

    pub fn dots(mut self, pts: Vec<C64>, colour: &'static str, r: f64) -> Self {
        self.dots.push((pts, colour, r));
        self
    }

    pub fn cross(mut self, z: C64) -> Self {
        self.crosses.push(z);
        self
    }

    pub fn render(&self) -> String {
        let all = self.lines.iter().flat_map(|l| &l.0).chain(self.dots.iter().flat_map(|d| &d.0)).chain(&self.crosses);
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in all.filter(|z| z.is_finite()) {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-9) * 1.1;
        let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
        let scale = (SIZE - 2.0 * MARGIN) / span;
        let map = |z: &C64| (SIZE / 2.0 + (z.re - cx) * scale, SIZE / 2.0 - (z.im - cy) * scale);

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{MARGIN}" y="16" font-size="12" font-family="sans-serif">{}</text>"#, escape(&self.title));
        for (pts, colour) in &self.lines {
            let coords: Vec<String> = pts.iter().filter(|z| z.is_finite()).map(|z| {
                let (x, y) = map(z);
                format!("{x:.2},{y:.2}")
            }).collect();
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        }
        for (pts, colour, r) in &self.dots {
            for z in pts.iter().filter(|z| z.is_finite()) {
                let (x, y) = map(z);
                let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{colour}"/>"#);
            }
        }
        for z in &self.crosses {
            let (x, y) = map(z);
            let _ = writeln!(
                s,
                r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="black" stroke-width="1.5"/>"#,
                x - 5.0, y - 5.0, x + 5.0, y + 5.0, x - 5.0, y + 5.0, x + 5.0, y - 5.0
            );
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|e| CliError::Output(path.display().to_string(), e.to_string()))
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
