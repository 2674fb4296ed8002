use num_complex::Complex64 as C64;

use crate::symbols::{PcsoSymbol, StepFunction};

/// Which half-line projection W⁰(χ_∓) a `ConvHalf` atom stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfLine {
    /// W⁰(χ_-) = P_ℝ = (I + S_ℝ)/2
    Minus,
    /// W⁰(χ_+) = Q_ℝ = (I - S_ℝ)/2
    Plus,
}

impl HalfLine {
    pub fn symbol(self) -> StepFunction {
        match self {
            HalfLine::Minus => StepFunction::chi_minus(),
            HalfLine::Plus => StepFunction::chi_plus(),
        }
    }
}

/// Elements of the algebra generated by multiplications, convolutions and the
/// truncation sequence (P_τ).
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorExpr {
    Ident,
    /// Multiplication by a step function.
    Mult(StepFunction),
    /// Convolution W⁰(b).
    Conv(PcsoSymbol),
    /// The sequence (P_τ).
    ProjSeq,
    /// P_ℝ or Q_ℝ.
    ConvHalf(HalfLine),
    /// P_1 = χ_(-1,1) I.
    Proj1,
    Scale(C64, Box<OperatorExpr>),
    Sum(Vec<OperatorExpr>),
    Prod(Vec<OperatorExpr>),
}

impl OperatorExpr {
    pub fn mult(a: StepFunction) -> Self {
        OperatorExpr::Mult(a)
    }

    pub fn conv(b: impl Into<PcsoSymbol>) -> Self {
        OperatorExpr::Conv(b.into())
    }

    pub fn scale(c: C64, e: OperatorExpr) -> Self {
        OperatorExpr::Scale(c, Box::new(e))
    }

    pub fn sum(items: Vec<OperatorExpr>) -> Self {
        OperatorExpr::Sum(items)
    }

    pub fn prod(items: Vec<OperatorExpr>) -> Self {
        OperatorExpr::Prod(items)
    }

    /// W⁰(a)χ_- + W⁰(b)χ_+.
    pub fn paired(a: PcsoSymbol, b: PcsoSymbol) -> Self {
        Self::sum(vec![
            Self::prod(vec![Self::Conv(a), Self::Mult(StepFunction::chi_minus())]),
            Self::prod(vec![Self::Conv(b), Self::Mult(StepFunction::chi_plus())]),
        ])
    }

    /// The sequence P A P + Q built from a constant operator A.
    pub fn finite_section(a: OperatorExpr) -> Self {
        Self::sum(vec![
            Self::prod(vec![Self::ProjSeq, a, Self::ProjSeq]),
            Self::Ident,
            Self::scale(C64::new(-1.0, 0.0), Self::ProjSeq),
        ])
    }

    /// Structural map over leaves; sums, products and scalings are kept.
    pub fn map_leaves(&self, f: &impl Fn(&OperatorExpr) -> OperatorExpr) -> OperatorExpr {
        match self {
            OperatorExpr::Scale(c, e) => OperatorExpr::Scale(*c, Box::new(e.map_leaves(f))),
            OperatorExpr::Sum(v) => OperatorExpr::Sum(v.iter().map(|e| e.map_leaves(f)).collect()),
            OperatorExpr::Prod(v) => OperatorExpr::Prod(v.iter().map(|e| e.map_leaves(f)).collect()),
            leaf => f(leaf),
        }
    }

    pub fn visit_leaves<'a>(&'a self, f: &mut impl FnMut(&'a OperatorExpr)) {
        match self {
            OperatorExpr::Scale(_, e) => e.visit_leaves(f),
            OperatorExpr::Sum(v) | OperatorExpr::Prod(v) => v.iter().for_each(|e| e.visit_leaves(f)),
            leaf => f(leaf),
        }
    }

    pub fn contains_proj_seq(&self) -> bool {
        let mut found = false;
        self.visit_leaves(&mut |l| found |= matches!(l, OperatorExpr::ProjSeq));
        found
    }

    /// All convolution symbols occurring in the expression.
    pub fn conv_symbols(&self) -> Vec<&PcsoSymbol> {
        let mut out = Vec::new();
        self.visit_leaves(&mut |l| {
            if let OperatorExpr::Conv(b) = l {
                out.push(b);
            }
        });
        out
    }

    /// Points where some convolution symbol (or half-line projection) jumps.
    pub fn jump_set(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        self.visit_leaves(&mut |l| match l {
            OperatorExpr::Conv(b) => pts.extend(b.jumps()),
            OperatorExpr::ConvHalf(_) => pts.push(0.0),
            _ => {}
        });
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    /// Breakpoints of all multiplication coefficients.
    pub fn mult_breakpoints(&self) -> Vec<f64> {
        let mut pts = Vec::new();
        self.visit_leaves(&mut |l| match l {
            OperatorExpr::Mult(a) => pts.extend_from_slice(a.breakpoints()),
            OperatorExpr::Proj1 => pts.extend([-1.0, 1.0]),
            _ => {}
        });
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    pub fn depth(&self) -> usize {
        match self {
            OperatorExpr::Scale(_, e) => 1 + e.depth(),
            OperatorExpr::Sum(v) | OperatorExpr::Prod(v) => 1 + v.iter().map(|e| e.depth()).max().unwrap_or(0),
            _ => 0,
        }
    }
}
