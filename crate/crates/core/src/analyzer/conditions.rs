//! Conditions (a)–(c) of the stability criterion and the verdicts built on them.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expr::OperatorExpr;
use super::gk::{gk_one_sided, sio_pc_invertible, wiener_hopf_invertible, GkClass, GkReport};
use super::images::{h_eta_image, w_image, WIndex};
use super::matrix::{det_nonvanishing_on_lens, n_eta_matrix, LensCheck, Side};
use super::normal::{GkForm, NormalForm};
use super::report::{Checkpoint, Condition, ConditionRecord, Method, StabilityReport};
use super::AnalyzerError;
use crate::geometry::conjugate;
use crate::numerics::sigma_min_trend;
use crate::symbols::{generators_by_key, sample_fibers, sample_line, FiberProvenance, FiberStrategy, PcsoSymbol, StepFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzerConfig {
    /// Moduli at or below this count as zeros.
    pub tol: f64,
    pub fibers: FiberStrategy,
    /// (half width, nodes) of the discretizations used by the σ_min trend probe.
    pub trend_grids: Vec<(f64, usize)>,
    /// A σ_min drop by at least this factor across the trend grids flags non-invertibility.
    pub drop_factor: f64,
    pub padding: usize,
    /// Cluster resolution used when bounding slowly oscillating symbols away from zero.
    pub symbol_resolution: usize,
}

impl Default for AnalyzerConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            fibers: FiberStrategy::default(),
            trend_grids: vec![(8.0, 128), (16.0, 256), (32.0, 512)],
            drop_factor: 10.0,
            padding: 4,
            symbol_resolution: 16,
        }
    }
}

impl AnalyzerConfig {
    fn validate(&self, p: f64) -> Result<(), AnalyzerError> {
        if !(p.is_finite() && p > 1.0) {
            return Err(AnalyzerError::Config(format!("p = {p} must lie in (1, ∞)")));
        }
        if !(self.tol > 0.0) || !(self.drop_factor > 1.0) || self.trend_grids.len() < 2 {
            return Err(AnalyzerError::Config("tol > 0, drop_factor > 1 and two or more trend grids required".into()));
        }
        Ok(())
    }
}

/// Invertibility verdict for one concrete operator on L^p(ℝ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Invertibility {
    pub invertible: bool,
    #[serde(with = "crate::float_serde")]
    pub margin: f64,
    pub method: Method,
    pub definitive: bool,
    pub detail: String,
}

impl Invertibility {
    fn exact(invertible: bool, margin: f64, detail: impl Into<String>) -> Self {
        Self { invertible, margin, method: Method::Exact, definitive: !invertible, detail: detail.into() }
    }
}

fn gk_outcome(r: &GkReport, what: &str) -> Invertibility {
    let ok = r.class == GkClass::Invertible;
    let mut detail = format!("{what}: {:?}", r.class);
    if let Some(f) = &r.failure {
        detail.push_str(&format!(" ({f})"));
    }
    Invertibility::exact(ok, r.margin, detail)
}

enum BlockShape {
    /// W⁰(a)χ_- + W⁰(b)χ_+
    Paired,
    /// χ_-W⁰(a) + χ_+W⁰(b)
    Transposed,
}

fn block_shape(s: &[[PcsoSymbol; 2]; 2]) -> Option<BlockShape> {
    let close = |x: &PcsoSymbol, y: &PcsoSymbol| x.sub(y).as_constant().is_some();
    if close(&s[1][0], &s[0][0]) && close(&s[0][1], &s[1][1]) {
        Some(BlockShape::Paired)
    } else if close(&s[0][1], &s[0][0]) && close(&s[1][0], &s[1][1]) {
        Some(BlockShape::Transposed)
    } else {
        None
    }
}

/// Σ χ_i W⁰(s_ij) χ_j with pure step entries: diagonal, paired and transposed paired shapes.
fn blocks_invertibility(s: &[[PcsoSymbol; 2]; 2], p: f64, tol: f64) -> Option<Result<Invertibility, AnalyzerError>> {
    let constant = |x: &PcsoSymbol| x.as_constant().is_some();
    // χ_iW⁰(c)χ_j vanishes for i ≠ j and constant c, so off-diagonal blocks
    // only matter up to constants
    if constant(&s[0][1]) && constant(&s[1][0]) {
        let plus = s[1][1].as_step()?;
        let minus = s[0][0].as_step()?;
        let r_plus = match wiener_hopf_invertible(p, &plus, tol) {
            Ok(r) => r,
            Err(e) => return Some(Err(e)),
        };
        let r_minus = match wiener_hopf_invertible(p, &minus.reflect(), tol) {
            Ok(r) => r,
            Err(e) => return Some(Err(e)),
        };
        let a = gk_outcome(&r_plus, "W(s++) on R+");
        let b = gk_outcome(&r_minus, "W(s--~) on R+");
        return Some(Ok(Invertibility::exact(
            a.invertible && b.invertible,
            a.margin.min(b.margin),
            format!("half-line diagonal; {}; {}", a.detail, b.detail),
        )));
    }
    let (a, b, shape) = match block_shape(s)? {
        BlockShape::Paired => (&s[0][0], &s[1][1], "paired"),
        BlockShape::Transposed => (&s[0][0], &s[1][1], "transposed paired"),
    };
    let (sa, sb) = (a.as_step()?, b.as_step()?);
    let m = sa.min_modulus().min(sb.min_modulus());
    if m <= tol {
        return Some(Ok(Invertibility::exact(false, m, format!("{shape}: a symbol vanishes"))));
    }
    let ratio = sa.zip_with(&sb, |x, y| x / y).reflect();
    match wiener_hopf_invertible(p, &ratio, tol) {
        Ok(r) => {
            let mut out = gk_outcome(&r, &format!("{shape}: W((a/b)~)"));
            out.margin = out.margin.min(m);
            Some(Ok(out))
        }
        Err(e) => Some(Err(e)),
    }
}

/// Modulus of the multiplication m0 off the interval (α, β).
fn outside_margin(gk: &GkForm) -> f64 {
    // merge in the endpoints so that every piece lies on one side of them
    let cut = gk.outside.zip_with(&StepFunction::indicator(gk.alpha, gk.beta), |a, _| a);
    cut.piece_representatives()
        .into_iter()
        .filter(|t| !(*t > gk.alpha && *t < gk.beta))
        .map(|t| cut.eval(t).norm())
        .fold(f64::INFINITY, f64::min)
}

fn gk_invertibility(gk: &GkForm, p: f64, tol: f64) -> Result<Invertibility, AnalyzerError> {
    let pp = if gk.transposed { conjugate(p) } else { p };
    let out = outside_margin(gk);
    let inner_breaks: Vec<f64> = gk
        .c
        .breakpoints()
        .iter()
        .chain(gk.d.breakpoints())
        .copied()
        .filter(|x| *x > gk.alpha && *x < gk.beta)
        .collect();
    let mut inv = if (gk.alpha, gk.beta) == (-1.0, 1.0) && inner_breaks.iter().all(|x| *x == 0.0) {
        let (am, ap, bm, bp) = (gk.c.eval(-0.5), gk.d.eval(-0.5), gk.c.eval(0.5), gk.d.eval(0.5));
        let ok = sio_pc_invertible(pp, am, ap, bm, bp, tol)?;
        let m = [am, ap, bm, bp].iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        Invertibility::exact(ok, m, format!("two-piece SIO on (-1,1): ({am}, {ap}, {bm}, {bp})"))
    } else {
        let r = gk_one_sided(pp, gk.alpha, gk.beta, &gk.c, &gk.d, tol)?;
        gk_outcome(&r, &format!("GK on ({}, {})", gk.alpha, gk.beta))
    };
    if out <= tol {
        inv = Invertibility::exact(false, out, "multiplication outside the interval vanishes");
    } else {
        inv.margin = inv.margin.min(out);
    }
    Ok(inv)
}

/// Invertibility of a concrete operator: exact when it reduces to a
/// multiplication, a convolution, a Wiener–Hopf/paired block form or a
/// one-sided GK form; otherwise the σ_min trend over growing discretizations.
pub fn invertibility_of(expr: &OperatorExpr, p: f64, cfg: &AnalyzerConfig) -> Result<Invertibility, AnalyzerError> {
    let nf = NormalForm::new(expr)?;
    if nf.is_zero() {
        return Ok(Invertibility::exact(false, 0.0, "zero operator"));
    }
    if let Some(a) = nf.as_multiplication() {
        let m = a.min_modulus();
        return Ok(Invertibility::exact(m > cfg.tol, m, "multiplication"));
    }
    if let Some(b) = nf.as_convolution() {
        let m = b.min_modulus(cfg.symbol_resolution);
        let ok = m > cfg.tol;
        return Ok(if b.is_pure_step() {
            Invertibility::exact(ok, m, "convolution")
        } else {
            // sampled: a pass is not a proof, a zero actually met is
            Invertibility { invertible: ok, margin: m, method: Method::Numeric, definitive: !ok, detail: "convolution (sampled)".into() }
        });
    }
    if let Some(s) = nf.half_line_blocks() {
        if let Some(r) = blocks_invertibility(&s, p, cfg.tol) {
            return r;
        }
        // a vanishing block row or column leaves a nontrivial kernel or cokernel
        let row = |i: usize| s[i][0].is_zero() && s[i][1].is_zero();
        let column = |j: usize| s[0][j].is_zero() && s[1][j].is_zero();
        if row(0) || row(1) || column(0) || column(1) {
            return Ok(Invertibility::exact(false, 0.0, "a half-line block row or column vanishes"));
        }
    }
    if let Some(gk) = nf.in_projection_form().and_then(|f| f.projection_words()).and_then(|w| w.as_gk_form()) {
        return gk_invertibility(&gk, p, cfg.tol);
    }
    let s = sigma_min_trend(expr, &cfg.trend_grids, cfg.padding)?;
    let (first, last) = (s[0], *s.last().unwrap());
    let drop = first / last;
    let ok = drop < cfg.drop_factor && last > 0.0;
    Ok(Invertibility {
        invertible: ok,
        margin: last,
        method: Method::Numeric,
        definitive: false,
        detail: format!("sigma_min trend {s:?} (drop {drop:.3})"),
    })
}

fn record(condition: Condition, checkpoint: Checkpoint, inv: Invertibility) -> ConditionRecord {
    ConditionRecord {
        condition,
        checkpoint,
        passed: inv.invertible,
        margin: inv.margin,
        method: inv.method,
        definitive: inv.definitive,
        detail: inv.detail,
        witness: None,
    }
}

/// Condition (a): invertibility of W_{-1}(A), W_0(A), W_1(A).
pub fn check_condition_a(expr: &OperatorExpr, p: f64, cfg: &AnalyzerConfig) -> Result<Vec<ConditionRecord>, AnalyzerError> {
    WIndex::ALL
        .par_iter()
        .map(|&i| {
            let img = w_image(expr, i);
            let inv = invertibility_of(&img, p, cfg)?;
            Ok(record(Condition::A, Checkpoint::W { index: i.as_i8() }, inv))
        })
        .collect()
}

/// Condition (b): invertibility of H_η(A) for every real η. Exact at the jump
/// points of the convolution symbols; between them the image is a
/// multiplication, checked on interval representatives (pure PC) or sampled.
pub fn check_condition_b(expr: &OperatorExpr, p: f64, cfg: &AnalyzerConfig) -> Result<Vec<ConditionRecord>, AnalyzerError> {
    let jumps = expr.jump_set();
    let mut records: Vec<ConditionRecord> = jumps
        .par_iter()
        .map(|&eta| {
            let inv = invertibility_of(&h_eta_image(expr, eta), p, cfg)?;
            Ok(record(Condition::B, Checkpoint::Eta { eta }, inv))
        })
        .collect::<Result<_, AnalyzerError>>()?;

    let pure = expr.conv_symbols().iter().all(|b| b.is_pure_step());
    let points: Vec<f64> = if pure {
        match (jumps.first(), jumps.last()) {
            (Some(&lo), Some(&hi)) => std::iter::once(lo - 1.0)
                .chain(jumps.windows(2).map(|w| 0.5 * (w[0] + w[1])))
                .chain(std::iter::once(hi + 1.0))
                .collect(),
            _ => vec![0.0],
        }
    } else {
        sample_line(&jumps).into_iter().filter(|t| !jumps.contains(t)).collect()
    };
    let results: Vec<(f64, Invertibility)> = points
        .par_iter()
        .map(|&eta| {
            let img = h_eta_image(expr, eta);
            let nf = NormalForm::new(&img)?;
            let inv = match nf.as_multiplication() {
                Some(a) => {
                    let m = a.min_modulus();
                    Invertibility::exact(m > cfg.tol, m, "multiplication")
                }
                None => invertibility_of(&img, p, cfg)?,
            };
            Ok((eta, inv))
        })
        .collect::<Result<_, AnalyzerError>>()?;
    let worst = results
        .iter()
        .min_by(|a, b| {
            (a.1.invertible, a.1.margin).partial_cmp(&(b.1.invertible, b.1.margin)).unwrap_or(std::cmp::Ordering::Equal)
        })
        .cloned();
    if let Some((eta, mut inv)) = worst {
        let all_exact = results.iter().all(|(_, r)| r.method == Method::Exact);
        if !pure || !all_exact {
            inv.method = Method::Numeric;
        }
        inv.detail = format!("{} points, worst at eta = {eta}: {}", points.len(), inv.detail);
        let (from, to) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(*t), b.max(*t)));
        records.push(record(Condition::B, Checkpoint::EtaRange { from, to, points: points.len() }, inv));
    }
    Ok(records)
}

/// Which entry of N_η^± must not vanish on the lens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LensFunction {
    Det,
    Entry11,
}

fn fiber_records(
    expr: &OperatorExpr,
    symbols: &[&PcsoSymbol],
    p: f64,
    cfg: &AnalyzerConfig,
    which: LensFunction,
) -> Result<(FiberProvenance, Vec<ConditionRecord>), AnalyzerError> {
    let gens = generators_by_key(symbols);
    let fibers = sample_fibers(symbols, &cfg.fibers)?;
    let provenance =
        FiberProvenance { strategy: cfg.fibers.clone(), generators: gens.keys().cloned().collect(), assignments: fibers.len() };
    // a zero found on a product grid with several generators may sit at a tuple
    // that is never attained jointly
    let exact_fibers = gens.is_empty();
    let joint_ok = gens.len() <= 1 && matches!(cfg.fibers, FiberStrategy::Product { .. });
    let jobs: Vec<(usize, Side)> = (0..fibers.len()).flat_map(|k| [(k, Side::Minus), (k, Side::Plus)]).collect();
    let records = jobs
        .par_iter()
        .map(|&(k, side)| {
            let fiber = &fibers[k];
            let m = n_eta_matrix(expr, fiber, side)?;
            let f = |x: C64| match which {
                LensFunction::Det => m.det(x),
                LensFunction::Entry11 => m.eval(x)[0][0],
            };
            let check = det_nonvanishing_on_lens(&f, p, cfg.tol)?;
            let checkpoint = Checkpoint::Fiber { fiber: fiber.values.clone(), side };
            let method = if exact_fibers { Method::Exact } else { Method::Numeric };
            let label = match which {
                LensFunction::Det => "det N",
                LensFunction::Entry11 => "[N]_11",
            };
            Ok(match check {
                LensCheck::Pass { margin } => ConditionRecord {
                    condition: Condition::C,
                    checkpoint,
                    passed: true,
                    margin,
                    method,
                    definitive: false,
                    detail: format!("{label} nonvanishing on the lens"),
                    witness: None,
                },
                LensCheck::Fail { witness, modulus, zeros } => ConditionRecord {
                    condition: Condition::C,
                    checkpoint,
                    passed: false,
                    margin: modulus,
                    method,
                    definitive: (exact_fibers || joint_ok) && (modulus <= cfg.tol || zeros > 0),
                    detail: format!("{label} has {zeros} zero(s) in the lens; |value| = {modulus:.3e} at x = {witness}"),
                    witness: Some(witness),
                },
            })
        })
        .collect::<Result<Vec<_>, AnalyzerError>>()?;
    Ok((provenance, records))
}

/// Condition (c): det N_η^±(A)(x) ≠ 0 on the lens for every sampled fiber.
pub fn check_condition_c(
    expr: &OperatorExpr,
    p: f64,
    cfg: &AnalyzerConfig,
) -> Result<(FiberProvenance, Vec<ConditionRecord>), AnalyzerError> {
    fiber_records(expr, &expr.conv_symbols(), p, cfg, LensFunction::Det)
}

/// Stability of a sequence expression.
pub fn analyze_stability(expr: &OperatorExpr, p: f64, cfg: &AnalyzerConfig) -> Result<StabilityReport, AnalyzerError> {
    cfg.validate(p)?;
    let mut records = check_condition_a(expr, p, cfg)?;
    records.extend(check_condition_b(expr, p, cfg)?);
    let (prov, c) = check_condition_c(expr, p, cfg)?;
    records.extend(c);
    Ok(StabilityReport::assemble(p, false, false, prov, records))
}

/// True when A = W⁰(a)χ_-I + W⁰(b)χ_+I up to normal-form rewriting.
fn is_paired(a: &OperatorExpr) -> bool {
    NormalForm::new(a)
        .ok()
        .and_then(|nf| nf.half_line_blocks())
        .is_some_and(|s| matches!(block_shape(&s), Some(BlockShape::Paired)))
}

/// Applicability of the finite section method to a constant operator A:
/// (a) and (b) on the sequence P A P + Q, (c) on [N_η^±(A)]_11.
pub fn fsm_check(a: &OperatorExpr, p: f64, cfg: &AnalyzerConfig) -> Result<StabilityReport, AnalyzerError> {
    cfg.validate(p)?;
    if a.contains_proj_seq() {
        return Err(AnalyzerError::NotConcrete);
    }
    let seq = OperatorExpr::finite_section(a.clone());
    let mut records = check_condition_a(&seq, p, cfg)?;
    records.extend(check_condition_b(&seq, p, cfg)?);
    let (prov, c) = fiber_records(a, &a.conv_symbols(), p, cfg, LensFunction::Entry11)?;
    records.extend(c);
    Ok(StabilityReport::assemble(p, true, is_paired(a), prov, records))
}
