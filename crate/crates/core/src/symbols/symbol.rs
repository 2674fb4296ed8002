use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::{FiberAssignment, SoGenerator, StepFunction, SymbolError};

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTerm {
    pub pc: StepFunction,
    /// Generator ids, sorted; repeats mean powers.
    pub so: Vec<String>,
}

/// b = Σ_k pc_k · Π g, a finite combination of step functions and SO generators.
/// Terms are kept canonical: one term per distinct factor list, zero terms dropped.
#[derive(Debug, Clone)]
pub struct PcsoSymbol {
    terms: Vec<SymbolTerm>,
    generators: BTreeMap<String, Arc<SoGenerator>>,
}

impl PartialEq for PcsoSymbol {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl From<StepFunction> for PcsoSymbol {
    fn from(pc: StepFunction) -> Self {
        Self::canonical(vec![SymbolTerm { pc, so: vec![] }], BTreeMap::new())
    }
}

impl PcsoSymbol {
    pub fn new(terms: Vec<SymbolTerm>, generators: Vec<Arc<SoGenerator>>) -> Result<Self, SymbolError> {
        let table: BTreeMap<String, Arc<SoGenerator>> =
            generators.into_iter().map(|g| (g.id().to_string(), g)).collect();
        for t in &terms {
            for id in &t.so {
                if !table.contains_key(id) {
                    return Err(SymbolError::UnknownGenerator(id.clone()));
                }
            }
        }
        Ok(Self::canonical(terms, table))
    }

    pub fn constant(c: C64) -> Self {
        StepFunction::constant(c).into()
    }

    /// pc · g for a single generator.
    pub fn with_generator(pc: StepFunction, g: Arc<SoGenerator>) -> Self {
        let id = g.id().to_string();
        Self::canonical(vec![SymbolTerm { pc, so: vec![id.clone()] }], BTreeMap::from([(id, g)]))
    }

    fn canonical(terms: Vec<SymbolTerm>, generators: BTreeMap<String, Arc<SoGenerator>>) -> Self {
        let mut merged: BTreeMap<Vec<String>, StepFunction> = BTreeMap::new();
        for mut t in terms {
            t.so.sort();
            match merged.get_mut(&t.so) {
                Some(pc) => *pc = pc.add(&t.pc),
                None => {
                    merged.insert(t.so, t.pc.simplified());
                }
            }
        }
        let terms: Vec<SymbolTerm> =
            merged.into_iter().filter(|(_, pc)| !pc.is_zero()).map(|(so, pc)| SymbolTerm { pc, so }).collect();
        let used: std::collections::BTreeSet<&String> = terms.iter().flat_map(|t| &t.so).collect();
        let generators = generators.into_iter().filter(|(id, _)| used.contains(id)).collect();
        Self { terms, generators }
    }

    pub fn terms(&self) -> &[SymbolTerm] {
        &self.terms
    }

    pub fn generators(&self) -> impl Iterator<Item = &Arc<SoGenerator>> {
        self.generators.values()
    }

    pub fn generator(&self, id: &str) -> Result<&Arc<SoGenerator>, SymbolError> {
        self.generators.get(id).ok_or_else(|| SymbolError::UnknownGenerator(id.to_string()))
    }

    pub fn is_pure_step(&self) -> bool {
        self.terms.iter().all(|t| t.so.is_empty())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The step function when no SO factor is present.
    pub fn as_step(&self) -> Option<StepFunction> {
        match self.terms.as_slice() {
            [] => Some(StepFunction::zero()),
            [t] if t.so.is_empty() => Some(t.pc.clone()),
            _ => None,
        }
    }

    /// Scalar value when the symbol is a constant.
    pub fn as_constant(&self) -> Option<C64> {
        self.as_step().filter(|s| s.is_constant()).map(|s| s.values()[0])
    }

    fn so_product(&self, so: &[String], t: f64) -> C64 {
        so.iter().map(|id| self.generators[id].eval(t)).product()
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.terms.iter().map(|term| term.pc.eval(t) * self.so_product(&term.so, t)).sum()
    }

    pub fn one_sided_limits(&self, eta: f64) -> (C64, C64) {
        let mut out = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for term in &self.terms {
            let g = self.so_product(&term.so, eta);
            let (l, r) = term.pc.one_sided_limits(eta);
            out.0 += l * g;
            out.1 += r * g;
        }
        out
    }

    /// Points where the symbol may jump: breakpoints of all coefficient step functions.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.terms.iter().flat_map(|t| t.pc.breakpoints().iter().copied()).collect();
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.dedup();
        b
    }

    /// Breakpoints with differing one-sided limits.
    pub fn jumps(&self) -> Vec<f64> {
        self.breakpoints()
            .into_iter()
            .filter(|&x| {
                let (l, r) = self.one_sided_limits(x);
                l != r
            })
            .collect()
    }

    fn fiber_product(&self, so: &[String], fiber: &FiberAssignment) -> Result<C64, SymbolError> {
        let mut prod = C64::new(1.0, 0.0);
        for id in so {
            let g = self.generator(id)?;
            prod *= fiber.value(g.fiber_key())?;
        }
        Ok(prod)
    }

    /// (b_η(-∞), b_η(+∞)).
    pub fn fiber_values(&self, fiber: &FiberAssignment) -> Result<(C64, C64), SymbolError> {
        let mut out = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for term in &self.terms {
            let g = self.fiber_product(&term.so, fiber)?;
            out.0 += term.pc.at_minus_infinity() * g;
            out.1 += term.pc.at_plus_infinity() * g;
        }
        Ok(out)
    }

    /// b_η(-∞)χ_- + b_η(+∞)χ_+.
    pub fn gamma_eta(&self, fiber: &FiberAssignment) -> Result<StepFunction, SymbolError> {
        let (m, p) = self.fiber_values(fiber)?;
        Ok(StepFunction::two_piece(0.0, m, p).simplified())
    }

    pub fn reflect(&self) -> Self {
        let generators: BTreeMap<String, Arc<SoGenerator>> = self
            .generators
            .values()
            .map(|g| {
                let r = g.reflected();
                (r.id().to_string(), Arc::new(r))
            })
            .collect();
        let rename = |id: &String| self.generators[id].reflected().id().to_string();
        let terms = self
            .terms
            .iter()
            .map(|t| SymbolTerm { pc: t.pc.reflect(), so: t.so.iter().map(rename).collect() })
            .collect();
        Self::canonical(terms, generators)
    }

    fn merged_generators(&self, other: &Self) -> BTreeMap<String, Arc<SoGenerator>> {
        let mut g = self.generators.clone();
        g.extend(other.generators.iter().map(|(k, v)| (k.clone(), v.clone())));
        g
    }

    pub fn add(&self, other: &Self) -> Self {
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Self::canonical(terms, self.merged_generators(other))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut so = a.so.clone();
                so.extend(b.so.iter().cloned());
                terms.push(SymbolTerm { pc: a.pc.mul(&b.pc), so });
            }
        }
        Self::canonical(terms, self.merged_generators(other))
    }

    pub fn scale(&self, c: C64) -> Self {
        let terms = self.terms.iter().map(|t| SymbolTerm { pc: t.pc.scale(c), so: t.so.clone() }).collect();
        Self::canonical(terms, self.generators.clone())
    }

    /// Symbolic equality up to `tol` on the coefficient step functions.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.sub(other).terms.iter().all(|t| t.pc.values().iter().all(|v| v.norm() <= tol))
    }

    /// Smallest modulus seen on a sampling grid, at one-sided limits of breakpoints
    /// and at the fiber grids at infinity. Exact for pure step symbols.
    pub fn min_modulus(&self, resolution: usize) -> f64 {
        if let Some(s) = self.as_step() {
            return s.min_modulus();
        }
        let mut m = f64::INFINITY;
        for t in sample_line(&self.breakpoints()) {
            m = m.min(self.eval(t).norm());
        }
        for x in self.breakpoints() {
            let (l, r) = self.one_sided_limits(x);
            m = m.min(l.norm()).min(r.norm());
        }
        for fiber in super::fiber::product_fibers(&[self], resolution).unwrap_or_default() {
            if let Ok((a, b)) = self.fiber_values(&fiber) {
                m = m.min(a.norm()).min(b.norm());
            }
        }
        m
    }
}

/// Sample points for continuous factors: dense near the breakpoints, geometric tails.
pub(crate) fn sample_line(breaks: &[f64]) -> Vec<f64> {
    let lo = breaks.first().copied().unwrap_or(0.0).min(0.0) - 1.0;
    let hi = breaks.last().copied().unwrap_or(0.0).max(0.0) + 1.0;
    let n = ((hi - lo) * 512.0).ceil() as usize;
    let mut pts: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    for k in 0..=60 {
        let d = 2f64.powf(k as f64 * 0.5);
        pts.push(hi + d);
        pts.push(lo - d);
    }
    pts
}
