//! Images of sequence-level expressions under W_{-1}, W_0, W_1 and H_η.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::expr::{HalfLine, OperatorExpr};
use crate::symbols::StepFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WIndex {
    #[serde(rename = "-1")]
    MinusOne,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
}

impl WIndex {
    pub const ALL: [WIndex; 3] = [WIndex::MinusOne, WIndex::Zero, WIndex::One];

    pub fn as_i8(self) -> i8 {
        match self {
            WIndex::MinusOne => -1,
            WIndex::Zero => 0,
            WIndex::One => 1,
        }
    }
}

fn scalar(c: C64) -> OperatorExpr {
    OperatorExpr::scale(c, OperatorExpr::Ident)
}

/// W_{-1}: P ↦ χ_+I, aI ↦ a(-∞)I.  W_0: identity on generators with P ↦ I.
/// W_1: P ↦ χ_-I, aI ↦ a(+∞)I.  Convolutions are fixed by all three.
pub fn w_image(expr: &OperatorExpr, i: WIndex) -> OperatorExpr {
    expr.map_leaves(&|leaf| match (leaf, i) {
        (OperatorExpr::ProjSeq, WIndex::MinusOne) => OperatorExpr::Mult(StepFunction::chi_plus()),
        (OperatorExpr::ProjSeq, WIndex::Zero) => OperatorExpr::Ident,
        (OperatorExpr::ProjSeq, WIndex::One) => OperatorExpr::Mult(StepFunction::chi_minus()),
        (OperatorExpr::Mult(a), WIndex::MinusOne) => scalar(a.at_minus_infinity()),
        (OperatorExpr::Mult(a), WIndex::One) => scalar(a.at_plus_infinity()),
        (OperatorExpr::Proj1, WIndex::MinusOne | WIndex::One) => scalar(C64::new(0.0, 0.0)),
        (other, _) => other.clone(),
    })
}

/// H_η: P ↦ P_1, aI ↦ a(-∞)χ_-I + a(+∞)χ_+I, W⁰(b) ↦ b(η-)P_ℝ + b(η+)Q_ℝ.
pub fn h_eta_image(expr: &OperatorExpr, eta: f64) -> OperatorExpr {
    let conv_image = |l: C64, r: C64| {
        if l == r {
            scalar(l)
        } else {
            OperatorExpr::sum(vec![
                OperatorExpr::scale(l, OperatorExpr::ConvHalf(HalfLine::Minus)),
                OperatorExpr::scale(r, OperatorExpr::ConvHalf(HalfLine::Plus)),
            ])
        }
    };
    expr.map_leaves(&|leaf| match leaf {
        OperatorExpr::ProjSeq => OperatorExpr::Proj1,
        OperatorExpr::Mult(a) => {
            let g = StepFunction::two_piece(0.0, a.at_minus_infinity(), a.at_plus_infinity()).simplified();
            if g.is_constant() {
                scalar(g.values()[0])
            } else {
                OperatorExpr::Mult(g)
            }
        }
        OperatorExpr::Proj1 => scalar(C64::new(0.0, 0.0)),
        OperatorExpr::Conv(b) => {
            let (l, r) = b.one_sided_limits(eta);
            conv_image(l, r)
        }
        OperatorExpr::ConvHalf(h) => {
            let (l, r) = h.symbol().one_sided_limits(eta);
            conv_image(l, r)
        }
        other => other.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::PcsoSymbol;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn w_image_examples() {
        assert_eq!(w_image(&OperatorExpr::ProjSeq, WIndex::MinusOne), OperatorExpr::Mult(StepFunction::chi_plus()));
        let a = StepFunction::two_piece(0.0, r(2.0), r(3.0));
        assert_eq!(w_image(&OperatorExpr::Mult(a.clone()), WIndex::One), scalar(r(3.0)));
        assert_eq!(w_image(&OperatorExpr::Mult(a.clone()), WIndex::Zero), OperatorExpr::Mult(a));
        let b = OperatorExpr::conv(PcsoSymbol::from(StepFunction::chi_plus()));
        for i in WIndex::ALL {
            assert_eq!(w_image(&b, i), b);
        }
    }

    #[test]
    fn h_eta_examples() {
        assert_eq!(h_eta_image(&OperatorExpr::ProjSeq, 0.3), OperatorExpr::Proj1);
        let b = OperatorExpr::conv(PcsoSymbol::from(StepFunction::indicator(-1.0, 2.0)));
        assert_eq!(h_eta_image(&b, 0.5), scalar(r(1.0)));
        assert_eq!(
            h_eta_image(&b, 2.0),
            OperatorExpr::sum(vec![
                OperatorExpr::scale(r(1.0), OperatorExpr::ConvHalf(HalfLine::Minus)),
                OperatorExpr::scale(r(0.0), OperatorExpr::ConvHalf(HalfLine::Plus)),
            ])
        );
        let a = StepFunction::new(vec![-1.0, 4.0], vec![r(2.0), r(7.0), r(3.0)]).unwrap();
        assert_eq!(
            h_eta_image(&OperatorExpr::Mult(a), 9.0),
            OperatorExpr::Mult(StepFunction::two_piece(0.0, r(2.0), r(3.0)))
        );
    }
}
