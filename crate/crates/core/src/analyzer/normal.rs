//! Sum-of-products normal form for concrete expressions, and the pattern
//! classifiers used by the exact invertibility paths.
//!
//! Adjacent factors of the same kind are merged (multiplications commute with
//! each other, and so do convolutions); a multiplication and a convolution are
//! never commuted.

use num_complex::Complex64 as C64;

use super::expr::OperatorExpr;
use super::AnalyzerError;
use crate::symbols::{PcsoSymbol, StepFunction};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    M(StepFunction),
    C(PcsoSymbol),
}

impl Atom {
    fn constant_value(&self) -> Option<C64> {
        match self {
            Atom::M(a) => a.is_constant().then(|| a.values()[0]),
            Atom::C(b) => b.as_constant(),
        }
    }

    fn same_kind(&self, other: &Atom) -> bool {
        matches!((self, other), (Atom::M(_), Atom::M(_)) | (Atom::C(_), Atom::C(_)))
    }

    fn merge(&self, other: &Atom) -> Atom {
        match (self, other) {
            (Atom::M(a), Atom::M(b)) => Atom::M(a.mul(b)),
            (Atom::C(a), Atom::C(b)) => Atom::C(a.mul(b)),
            _ => unreachable!("merge of different kinds"),
        }
    }

    fn lin(&self, c1: C64, other: &Atom, c2: C64) -> Atom {
        match (self, other) {
            (Atom::M(a), Atom::M(b)) => Atom::M(a.scale(c1).add(&b.scale(c2))),
            (Atom::C(a), Atom::C(b)) => Atom::C(a.scale(c1).add(&b.scale(c2))),
            _ => unreachable!("combination of different kinds"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub atoms: Vec<Atom>,
}

impl Term {
    fn scalar(c: C64) -> Self {
        Self { coeff: c, atoms: vec![] }
    }

    fn push(&mut self, atom: Atom) {
        if self.coeff == ZERO {
            return;
        }
        if let Some(v) = atom.constant_value() {
            self.coeff *= v;
            return;
        }
        match self.atoms.last() {
            Some(last) if last.same_kind(&atom) => {
                let merged = last.merge(&atom);
                self.atoms.pop();
                self.push(merged);
            }
            _ => self.atoms.push(atom),
        }
    }

    fn times(&self, other: &Term) -> Term {
        let mut t = Term { coeff: self.coeff * other.coeff, atoms: self.atoms.clone() };
        for a in &other.atoms {
            t.push(a.clone());
        }
        t
    }

    /// Re-insert every atom so constants are pulled out and neighbours merged.
    fn renormalized(&self) -> Term {
        let mut t = Term::scalar(self.coeff);
        for a in &self.atoms {
            t.push(a.clone());
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub terms: Vec<Term>,
}

impl NormalForm {
    pub fn new(expr: &OperatorExpr) -> Result<Self, AnalyzerError> {
        let mut nf = Self { terms: build(expr)? };
        nf.collect();
        Ok(nf)
    }

    pub fn scalar(c: C64) -> Self {
        let mut nf = Self { terms: vec![Term::scalar(c)] };
        nf.collect();
        nf
    }

    fn collect(&mut self) {
        loop {
            self.terms.retain(|t| t.coeff != ZERO);
            let mut changed = false;
            // like terms
            let mut out: Vec<Term> = Vec::with_capacity(self.terms.len());
            for t in self.terms.drain(..) {
                match out.iter_mut().find(|o| o.atoms == t.atoms) {
                    Some(o) => {
                        o.coeff += t.coeff;
                        changed = true;
                    }
                    None => out.push(t),
                }
            }
            out.retain(|t| t.coeff != ZERO);
            // terms differing in a single slot
            'outer: for i in 0..out.len() {
                for j in i + 1..out.len() {
                    if let Some(k) = single_slot_difference(&out[i], &out[j]) {
                        let mut atoms = out[i].atoms.clone();
                        atoms[k] = out[i].atoms[k].lin(out[i].coeff, &out[j].atoms[k], out[j].coeff);
                        let merged = Term { coeff: ONE, atoms }.renormalized();
                        out.remove(j);
                        out[i] = merged;
                        changed = true;
                        break 'outer;
                    }
                }
            }
            self.terms = out;
            if !changed {
                break;
            }
        }
        self.terms.retain(|t| t.coeff != ZERO);
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_scalar(&self) -> Option<C64> {
        self.terms.iter().map(|t| t.atoms.is_empty().then_some(t.coeff)).sum()
    }

    pub fn as_multiplication(&self) -> Option<StepFunction> {
        let mut acc = StepFunction::zero();
        for t in &self.terms {
            let m = match t.atoms.as_slice() {
                [] => StepFunction::one(),
                [Atom::M(a)] => a.clone(),
                _ => return None,
            };
            acc = acc.add(&m.scale(t.coeff));
        }
        Some(acc)
    }

    pub fn as_convolution(&self) -> Option<PcsoSymbol> {
        let mut acc = PcsoSymbol::constant(ZERO);
        for t in &self.terms {
            let c = match t.atoms.as_slice() {
                [] => PcsoSymbol::constant(ONE),
                [Atom::C(b)] => b.clone(),
                _ => return None,
            };
            acc = acc.add(&c.scale(t.coeff));
        }
        Some(acc)
    }

    /// Block form Σ_{i,j∈{-,+}} χ_i W⁰(s_ij) χ_j when every multiplication
    /// coefficient is constant on each half-line. Index 0 is ℝ_-, 1 is ℝ_+.
    pub fn half_line_blocks(&self) -> Option<[[PcsoSymbol; 2]; 2]> {
        let halves = |a: &StepFunction| -> Option<[C64; 2]> {
            a.breakpoints().iter().all(|x| *x == 0.0).then(|| [a.at_minus_infinity(), a.at_plus_infinity()])
        };
        let zero = PcsoSymbol::constant(ZERO);
        let mut s = [[zero.clone(), zero.clone()], [zero.clone(), zero]];
        for t in &self.terms {
            let (l, c, r) = match t.atoms.as_slice() {
                [] => (None, None, None),
                [Atom::M(m)] => (Some(m), None, None),
                [Atom::C(b)] => (None, Some(b), None),
                [Atom::M(m), Atom::C(b)] => (Some(m), Some(b), None),
                [Atom::C(b), Atom::M(m)] => (None, Some(b), Some(m)),
                [Atom::M(m1), Atom::C(b), Atom::M(m2)] => (Some(m1), Some(b), Some(m2)),
                _ => return None,
            };
            let lv = match l {
                Some(m) => halves(m)?,
                None => [ONE, ONE],
            };
            let rv = match r {
                Some(m) => halves(m)?,
                None => [ONE, ONE],
            };
            for i in 0..2 {
                for j in 0..2 {
                    let w = t.coeff * lv[i] * rv[j];
                    match c {
                        Some(b) => s[i][j] = s[i][j].add(&b.scale(w)),
                        None if i == j => s[i][j] = s[i][j].add(&PcsoSymbol::constant(w)),
                        None => {}
                    }
                }
            }
        }
        Some(s)
    }

    /// Rewrite every convolution atom whose symbol jumps at most at 0 as
    /// b(+∞)I + (b(-∞) - b(+∞))P_ℝ.  Fails if some symbol is not of that type.
    pub fn in_projection_form(&self) -> Option<NormalForm> {
        let p = Atom::C(PcsoSymbol::from(StepFunction::chi_minus()));
        let mut terms = vec![];
        for t in &self.terms {
            let mut partial = vec![Term::scalar(t.coeff)];
            for a in &t.atoms {
                let options: Vec<Term> = match a {
                    Atom::M(_) => vec![Term { coeff: ONE, atoms: vec![a.clone()] }],
                    Atom::C(b) => {
                        let s = b.as_step()?;
                        if s.breakpoints().iter().any(|x| *x != 0.0) {
                            return None;
                        }
                        let (m, pl) = (s.at_minus_infinity(), s.at_plus_infinity());
                        vec![Term::scalar(pl), Term { coeff: m - pl, atoms: vec![p.clone()] }]
                    }
                };
                partial = partial.iter().flat_map(|x| options.iter().map(move |o| x.times(o))).collect();
            }
            terms.extend(partial);
        }
        let mut nf = NormalForm { terms };
        nf.collect();
        Some(nf)
    }

    /// Decompose a projection form as m0 + Σ l_k P r_k; None if a word has two P factors.
    pub fn projection_words(&self) -> Option<ProjectionWords> {
        let mut m0 = StepFunction::zero();
        let mut words = vec![];
        for t in &self.terms {
            let one = StepFunction::one();
            match t.atoms.as_slice() {
                [] => m0 = m0.add(&one.scale(t.coeff)),
                [Atom::M(m)] => m0 = m0.add(&m.scale(t.coeff)),
                [Atom::C(_)] => words.push((one.scale(t.coeff), one)),
                [Atom::M(l), Atom::C(_)] => words.push((l.scale(t.coeff), one)),
                [Atom::C(_), Atom::M(r)] => words.push((one.scale(t.coeff), r.clone())),
                [Atom::M(l), Atom::C(_), Atom::M(r)] => words.push((l.scale(t.coeff), r.clone())),
                _ => return None,
            }
        }
        Some(ProjectionWords { m0, words })
    }
}

/// m0 + Σ l_k P_ℝ r_k with step functions m0, l_k, r_k.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionWords {
    pub m0: StepFunction,
    pub words: Vec<(StepFunction, StepFunction)>,
}

/// Interval where a step function is a nonzero constant, provided it vanishes elsewhere.
fn constant_on_interval(f: &StepFunction) -> Option<(f64, f64, C64)> {
    let vals = f.values();
    let nz: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] != ZERO).collect();
    let (&first, &last) = (nz.first()?, nz.last()?);
    if nz.len() != 1 {
        return None;
    }
    let bps = f.breakpoints();
    let a = if first == 0 { f64::NEG_INFINITY } else { bps[first - 1] };
    let b = if last == vals.len() - 1 { f64::INFINITY } else { bps[last] };
    Some((a, b, vals[first]))
}

fn supported_in(f: &StepFunction, a: f64, b: f64) -> bool {
    f.piece_representatives().iter().all(|&t| (t > a && t < b) || f.eval(t) == ZERO)
}

/// Operator P_J c + Q_J d on an interval J together with the multiplication m0 off J.
#[derive(Debug, Clone, PartialEq)]
pub struct GkForm {
    pub alpha: f64,
    pub beta: f64,
    pub c: StepFunction,
    pub d: StepFunction,
    pub outside: StepFunction,
    /// True when the coefficients stood to the left of the projection; the
    /// criterion is then applied to the transposed operator on L^q.
    pub transposed: bool,
}

impl ProjectionWords {
    pub fn as_gk_form(&self) -> Option<GkForm> {
        if self.words.is_empty() {
            return None;
        }
        let left = self.words.iter().map(|(l, _)| constant_on_interval(l)).collect::<Option<Vec<_>>>();
        if let Some(ls) = left {
            let (a, b, _) = ls[0];
            if ls.iter().all(|(x, y, _)| *x == a && *y == b)
                && (a.is_finite() || b.is_finite())
                && self.words.iter().all(|(_, r)| supported_in(r, a, b))
            {
                let rho = ls
                    .iter()
                    .zip(&self.words)
                    .fold(StepFunction::zero(), |acc, ((_, _, lam), (_, r))| acc.add(&r.scale(*lam)));
                return Some(self.form(a, b, rho, false));
            }
        }
        let right = self.words.iter().map(|(_, r)| constant_on_interval(r)).collect::<Option<Vec<_>>>();
        if let Some(rs) = right {
            let (a, b, _) = rs[0];
            if rs.iter().all(|(x, y, _)| *x == a && *y == b)
                && (a.is_finite() || b.is_finite())
                && self.words.iter().all(|(l, _)| supported_in(l, a, b))
            {
                let rho = rs
                    .iter()
                    .zip(&self.words)
                    .fold(StepFunction::zero(), |acc, ((_, _, lam), (l, _))| acc.add(&l.scale(*lam)));
                return Some(self.form(a, b, rho, true));
            }
        }
        None
    }

    fn form(&self, a: f64, b: f64, rho: StepFunction, transposed: bool) -> GkForm {
        let chi = StepFunction::indicator(a, b);
        let outside = self.m0.mul(&StepFunction::one().add(&chi.scale(-ONE)));
        GkForm { alpha: a, beta: b, c: self.m0.add(&rho), d: self.m0.clone(), outside, transposed }
    }
}

fn single_slot_difference(a: &Term, b: &Term) -> Option<usize> {
    if a.atoms.len() != b.atoms.len() {
        return None;
    }
    let mut diff = None;
    for (k, (x, y)) in a.atoms.iter().zip(&b.atoms).enumerate() {
        if !x.same_kind(y) {
            return None;
        }
        if x != y {
            if diff.is_some() {
                return None;
            }
            diff = Some(k);
        }
    }
    diff
}

fn build(expr: &OperatorExpr) -> Result<Vec<Term>, AnalyzerError> {
    Ok(match expr {
        OperatorExpr::Ident => vec![Term::scalar(ONE)],
        OperatorExpr::ProjSeq => return Err(AnalyzerError::NotConcrete),
        OperatorExpr::Mult(a) => vec![Term::scalar(ONE).times(&Term { coeff: ONE, atoms: vec![Atom::M(a.clone())] })],
        OperatorExpr::Proj1 => {
            vec![Term::scalar(ONE).times(&Term { coeff: ONE, atoms: vec![Atom::M(StepFunction::indicator(-1.0, 1.0))] })]
        }
        OperatorExpr::Conv(b) => vec![Term::scalar(ONE).times(&Term { coeff: ONE, atoms: vec![Atom::C(b.clone())] })],
        OperatorExpr::ConvHalf(h) => {
            vec![Term::scalar(ONE).times(&Term { coeff: ONE, atoms: vec![Atom::C(h.symbol().into())] })]
        }
        OperatorExpr::Scale(c, e) => build(e)?.into_iter().map(|t| Term { coeff: t.coeff * c, atoms: t.atoms }).collect(),
        OperatorExpr::Sum(v) => {
            let mut out = vec![];
            for e in v {
                out.extend(build(e)?);
            }
            out
        }
        OperatorExpr::Prod(v) => {
            let mut acc = vec![Term::scalar(ONE)];
            for e in v {
                let f = build(e)?;
                acc = acc.iter().flat_map(|a| f.iter().map(move |b| a.times(b))).collect();
                acc.retain(|t| t.coeff != ZERO);
            }
            acc
        }
    })
}

#[cfg(test)]
mod tests {
    use super::super::expr::HalfLine;
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn complementary_projections_collapse() {
        let e = OperatorExpr::sum(vec![OperatorExpr::ConvHalf(HalfLine::Minus), OperatorExpr::ConvHalf(HalfLine::Plus)]);
        assert_eq!(NormalForm::new(&e).unwrap().as_scalar(), Some(r(1.0)));
        let pq = OperatorExpr::prod(vec![OperatorExpr::ConvHalf(HalfLine::Minus), OperatorExpr::ConvHalf(HalfLine::Plus)]);
        assert!(NormalForm::new(&pq).unwrap().is_zero());
    }

    #[test]
    fn paired_blocks_are_column_constant() {
        let a = PcsoSymbol::from(StepFunction::two_piece(1.0, r(2.0), r(5.0)));
        let b = PcsoSymbol::constant(r(-1.0));
        let s = NormalForm::new(&OperatorExpr::paired(a.clone(), b.clone())).unwrap().half_line_blocks().unwrap();
        assert_eq!(s[0][0], a);
        assert_eq!(s[1][0], a);
        assert_eq!(s[1][1], b);
        // χ_-W⁰(-1)χ_+ = 0, so the off-diagonal block is fixed only up to constants
        assert!(s[0][1].sub(&b).as_constant().is_some());
    }

    #[test]
    fn mult_and_conv_do_not_commute() {
        let e = OperatorExpr::prod(vec![
            OperatorExpr::Mult(StepFunction::chi_plus()),
            OperatorExpr::ConvHalf(HalfLine::Minus),
        ]);
        let f = OperatorExpr::prod(vec![
            OperatorExpr::ConvHalf(HalfLine::Minus),
            OperatorExpr::Mult(StepFunction::chi_plus()),
        ]);
        assert_ne!(NormalForm::new(&e).unwrap(), NormalForm::new(&f).unwrap());
        assert!(NormalForm::new(&OperatorExpr::ProjSeq).is_err());
    }

    #[test]
    fn projection_form_of_truncated_sio() {
        // P_1 [(P + Q)χ_- + (-P + Q)χ_+] P_1 + Q_1  =  I - 2 χ_J P χ_(0,1)
        let h = OperatorExpr::sum(vec![
            OperatorExpr::Mult(StepFunction::chi_minus()),
            OperatorExpr::prod(vec![
                OperatorExpr::sum(vec![
                    OperatorExpr::scale(r(-1.0), OperatorExpr::ConvHalf(HalfLine::Minus)),
                    OperatorExpr::ConvHalf(HalfLine::Plus),
                ]),
                OperatorExpr::Mult(StepFunction::chi_plus()),
            ]),
        ]);
        let e = OperatorExpr::sum(vec![
            OperatorExpr::prod(vec![OperatorExpr::Proj1, h, OperatorExpr::Proj1]),
            OperatorExpr::Ident,
            OperatorExpr::scale(r(-1.0), OperatorExpr::Proj1),
        ]);
        let pw = NormalForm::new(&e).unwrap().in_projection_form().unwrap().projection_words().unwrap();
        let gk = pw.as_gk_form().unwrap();
        assert_eq!((gk.alpha, gk.beta), (-1.0, 1.0));
        assert!(!gk.transposed);
        assert_eq!(gk.c.eval(-0.5), r(1.0));
        assert_eq!(gk.c.eval(0.5), r(-1.0));
        assert_eq!(gk.d.eval(0.5), r(1.0));
        assert_eq!(gk.outside.eval(3.0), r(1.0));
    }
}
