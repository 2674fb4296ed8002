use std::f64::consts::PI;
use std::sync::Arc;

use evalexpr::{Context, DefaultNumericTypes, EvalexprError, EvalexprResult, Node, Value};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::SymbolError;

/// Declared set of partial limits of a generator at infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClusterSet {
    Point { value: C64 },
    Circle { center: C64, radius: f64 },
    FiniteSet { values: Vec<C64> },
    /// Values g(τ_n), τ_n = tau0·rho^n, n < steps.
    Sampled { tau0: f64, rho: f64, steps: usize },
}

impl ClusterSet {
    pub fn validate(&self) -> Result<(), SymbolError> {
        let ok = match self {
            ClusterSet::Point { value } => value.is_finite(),
            ClusterSet::Circle { center, radius } => center.is_finite() && radius.is_finite() && *radius >= 0.0,
            ClusterSet::FiniteSet { values } => !values.is_empty() && values.iter().all(|v| v.is_finite()),
            ClusterSet::Sampled { tau0, rho, steps } => {
                tau0.is_finite() && *tau0 > 0.0 && rho.is_finite() && *rho > 1.0 && *steps > 0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(SymbolError::UnboundedCluster(format!("{self:?}")))
        }
    }
}

/// Built-in slowly oscillating functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SoKind {
    Constant { value: C64 },
    /// num(t)/den(t), coefficients in ascending powers; deg num ≤ deg den.
    Rational { num: Vec<C64>, den: Vec<C64> },
    /// t²/(t²+1)·exp(i·sqrt(log(t^{2k}+1))).
    OscillatingPhase { k: u32 },
    /// exp(i·ψ(t)) for a user expression ψ in the variable t.
    Phase { psi: String },
    /// exp(-t²/(2w²)).
    Gaussian { width: f64 },
    /// t ↦ inner(-t).
    Reflected { inner: Box<SoKind> },
}

#[derive(Clone)]
struct Compiled(Arc<Node<DefaultNumericTypes>>);

impl std::fmt::Debug for Compiled {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("<compiled>")
    }
}

struct TContext {
    t: Value<DefaultNumericTypes>,
}

fn unary(arg: &Value<DefaultNumericTypes>, f: fn(f64) -> f64) -> EvalexprResult<Value<DefaultNumericTypes>, DefaultNumericTypes> {
    Ok(Value::Float(f(arg.as_number()?)))
}

impl Context for TContext {
    type NumericTypes = DefaultNumericTypes;

    fn get_value(&self, identifier: &str) -> Option<&Value<DefaultNumericTypes>> {
        (identifier == "t").then_some(&self.t)
    }

    fn call_function(
        &self,
        identifier: &str,
        argument: &Value<DefaultNumericTypes>,
    ) -> EvalexprResult<Value<DefaultNumericTypes>, DefaultNumericTypes> {
        let f: fn(f64) -> f64 = match identifier {
            "sqrt" => f64::sqrt,
            "ln" | "log" => f64::ln,
            "log1p" => f64::ln_1p,
            "exp" => f64::exp,
            "sin" => f64::sin,
            "cos" => f64::cos,
            "tan" => f64::tan,
            "atan" => f64::atan,
            "abs" => f64::abs,
            "tanh" => f64::tanh,
            _ => return Err(EvalexprError::FunctionIdentifierNotFound(identifier.to_string())),
        };
        unary(argument, f)
    }

    fn are_builtin_functions_disabled(&self) -> bool {
        false
    }

    fn set_builtin_functions_disabled(&mut self, _: bool) -> EvalexprResult<(), DefaultNumericTypes> {
        Err(EvalexprError::BuiltinFunctionsCannotBeDisabled)
    }
}

#[derive(Debug, Clone)]
pub struct SoGenerator {
    id: String,
    kind: SoKind,
    cluster: ClusterSet,
    compiled: Option<Compiled>,
}

fn poly(coeffs: &[C64], t: f64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * t + c)
}

fn degree(coeffs: &[C64]) -> Option<usize> {
    coeffs.iter().rposition(|c| *c != C64::new(0.0, 0.0))
}

/// log(t^{2k}+1) without overflow.
fn log_power_plus_one(t: f64, k: u32) -> f64 {
    let a = t.abs();
    let e = 2.0 * k as f64;
    if a > 1.0 {
        e * a.ln() + (-e * a.ln()).exp().ln_1p()
    } else {
        (e * a.ln()).exp().ln_1p()
    }
}

impl SoGenerator {
    /// Generator with its natural cluster set; `cluster` overrides it when given.
    pub fn new(id: impl Into<String>, kind: SoKind, cluster: Option<ClusterSet>) -> Result<Self, SymbolError> {
        let id = id.into();
        let compiled = compile(&kind)?;
        let natural = natural_cluster(&kind)?;
        let cluster = cluster.unwrap_or(natural);
        cluster.validate()?;
        let g = Self { id, kind, cluster, compiled };
        g.check_bounded_slowly_oscillating()?;
        Ok(g)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn kind(&self) -> &SoKind {
        &self.kind
    }

    pub fn cluster(&self) -> &ClusterSet {
        &self.cluster
    }

    /// Reflections share the fiber value of the generator they reflect.
    pub fn fiber_key(&self) -> &str {
        self.id.trim_end_matches('~')
    }

    pub fn reflected(&self) -> Self {
        let (id, kind) = match (&self.kind, self.id.strip_suffix('~')) {
            (SoKind::Reflected { inner }, Some(base)) => (base.to_string(), (**inner).clone()),
            _ => (format!("{}~", self.id), SoKind::Reflected { inner: Box::new(self.kind.clone()) }),
        };
        Self { id, kind, cluster: self.cluster.clone(), compiled: self.compiled.clone() }
    }

    pub fn eval(&self, t: f64) -> C64 {
        eval_kind(&self.kind, self.compiled.as_ref(), t)
    }

    /// Oscillation over [x, 2x] ∪ [-2x, -x] estimated on `samples` points per side.
    pub fn dyadic_oscillation(&self, x: f64, samples: usize) -> f64 {
        let mut vals = Vec::with_capacity(2 * samples);
        for k in 0..samples {
            let t = x * (1.0 + k as f64 / (samples - 1) as f64);
            vals.push(self.eval(t));
            vals.push(self.eval(-t));
        }
        let mut osc: f64 = 0.0;
        for a in &vals {
            for b in &vals {
                osc = osc.max((a - b).norm());
            }
        }
        osc
    }

    fn check_bounded_slowly_oscillating(&self) -> Result<(), SymbolError> {
        for k in -40..=40 {
            let t = (k as f64 * 0.5).sinh() * 10.0;
            if !self.eval(t).is_finite() {
                return Err(SymbolError::NotSlowlyOscillating(self.id.clone(), format!("non-finite value at t={t}")));
            }
        }
        let near = self.dyadic_oscillation(1e2, 64);
        let far = self.dyadic_oscillation(1e6, 64);
        if !(far < near || far < 1e-6) {
            return Err(SymbolError::NotSlowlyOscillating(
                self.id.clone(),
                format!("oscillation {far:.3e} at 1e6 does not decay from {near:.3e} at 1e2"),
            ));
        }
        Ok(())
    }

    /// Finite grid over the declared cluster set.
    pub fn cluster_grid(&self, resolution: usize) -> Vec<C64> {
        match &self.cluster {
            ClusterSet::Point { value } => vec![*value],
            ClusterSet::Circle { center, radius } => (0..resolution)
                .map(|k| center + C64::from_polar(*radius, 2.0 * PI * k as f64 / resolution as f64))
                .collect(),
            ClusterSet::FiniteSet { values } => values.clone(),
            ClusterSet::Sampled { .. } => {
                let tail = self.sampled_tail();
                if tail.len() <= resolution {
                    return tail;
                }
                (0..resolution).map(|k| tail[k * tail.len() / resolution]).collect()
            }
        }
    }

    /// Trajectory values g(τ_n) in the second half of a Sampled descriptor.
    fn sampled_tail(&self) -> Vec<C64> {
        match &self.cluster {
            ClusterSet::Sampled { tau0, rho, steps } => {
                (steps / 2..*steps).map(|n| self.eval(tau0 * rho.powi(n as i32))).collect()
            }
            _ => vec![],
        }
    }

    pub fn cluster_contains(&self, v: C64, tol: f64) -> bool {
        match &self.cluster {
            ClusterSet::Point { value } => (v - value).norm() <= tol,
            ClusterSet::Circle { center, radius } => ((v - center).norm() - radius).abs() <= tol,
            ClusterSet::FiniteSet { values } => values.iter().any(|c| (v - c).norm() <= tol),
            ClusterSet::Sampled { .. } => {
                let tail = self.sampled_tail();
                tail.windows(2).any(|w| segment_distance(v, w[0], w[1]) <= tol)
                    || tail.iter().any(|c| (v - c).norm() <= tol)
            }
        }
    }
}

fn segment_distance(z: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (z - (a + d * t)).norm()
}

fn compile(kind: &SoKind) -> Result<Option<Compiled>, SymbolError> {
    match kind {
        SoKind::Phase { psi } => {
            let node = evalexpr::build_operator_tree::<DefaultNumericTypes>(psi)
                .map_err(|e| SymbolError::Expression(psi.clone(), e.to_string()))?;
            let c = Compiled(Arc::new(node));
            let ctx = TContext { t: Value::Float(1.5) };
            c.0.eval_number_with_context(&ctx).map_err(|e| SymbolError::Expression(psi.clone(), e.to_string()))?;
            Ok(Some(c))
        }
        SoKind::Reflected { inner } => compile(inner),
        _ => Ok(None),
    }
}

fn natural_cluster(kind: &SoKind) -> Result<ClusterSet, SymbolError> {
    Ok(match kind {
        SoKind::Constant { value } => ClusterSet::Point { value: *value },
        SoKind::Rational { num, den } => {
            let dd = degree(den).ok_or_else(|| SymbolError::BadGenerator("zero denominator".into()))?;
            match degree(num) {
                None => ClusterSet::Point { value: C64::new(0.0, 0.0) },
                Some(dn) if dn < dd => ClusterSet::Point { value: C64::new(0.0, 0.0) },
                Some(dn) if dn == dd => ClusterSet::Point { value: num[dn] / den[dd] },
                Some(_) => return Err(SymbolError::UnboundedCluster("rational with deg num > deg den".into())),
            }
        }
        SoKind::OscillatingPhase { .. } => ClusterSet::Circle { center: C64::new(0.0, 0.0), radius: 1.0 },
        SoKind::Phase { .. } => ClusterSet::Sampled { tau0: 10.0, rho: 1.05, steps: 4096 },
        SoKind::Gaussian { width } => {
            if !(width.is_finite() && *width > 0.0) {
                return Err(SymbolError::BadGenerator(format!("gaussian width {width}")));
            }
            ClusterSet::Point { value: C64::new(0.0, 0.0) }
        }
        SoKind::Reflected { inner } => natural_cluster(inner)?,
    })
}

fn eval_kind(kind: &SoKind, compiled: Option<&Compiled>, t: f64) -> C64 {
    match kind {
        SoKind::Constant { value } => *value,
        SoKind::Rational { num, den } => poly(num, t) / poly(den, t),
        SoKind::OscillatingPhase { k } => {
            let amp = 1.0 / (1.0 + (t * t).recip());
            C64::from_polar(amp, log_power_plus_one(t, *k).sqrt())
        }
        SoKind::Phase { .. } => {
            let ctx = TContext { t: Value::Float(t) };
            let psi = compiled.and_then(|c| c.0.eval_number_with_context(&ctx).ok()).unwrap_or(f64::NAN);
            C64::from_polar(1.0, psi)
        }
        SoKind::Gaussian { width } => C64::new((-t * t / (2.0 * width * width)).exp(), 0.0),
        SoKind::Reflected { inner } => eval_kind(inner, compiled, -t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gk(k: u32) -> SoGenerator {
        SoGenerator::new(format!("g{k}"), SoKind::OscillatingPhase { k }, None).unwrap()
    }

    #[test]
    fn oscillating_phase_matches_direct_formula() {
        let g = gk(1);
        assert_eq!(g.eval(0.0), C64::new(0.0, 0.0));
        for t in [0.3, 2.0, -5.0, 40.0] {
            let direct = C64::from_polar(t * t / (t * t + 1.0), ((t as f64).powi(2) + 1.0).ln().sqrt());
            assert!((g.eval(t) - direct).norm() < 1e-13);
        }
        let g3 = gk(3);
        let t = 1e80;
        assert!((g3.eval(t).norm() - 1.0).abs() < 1e-12);
        assert!((g3.eval(t).arg() - (6.0 * t.ln()).sqrt().rem_euclid(2.0 * PI)).abs() < 1e-9
            || (g3.eval(t).arg() + 2.0 * PI - (6.0 * t.ln()).sqrt().rem_euclid(2.0 * PI)).abs() < 1e-9);
    }

    #[test]
    fn oscillation_decays() {
        let g = gk(2);
        assert!(g.dyadic_oscillation(1e8, 64) < g.dyadic_oscillation(1e2, 64));
    }

    #[test]
    fn phase_expression_and_rejection() {
        let p = SoGenerator::new("phi", SoKind::Phase { psi: "sqrt(ln(t^2+1))".into() }, None).unwrap();
        let t = 7.0f64;
        assert!((p.eval(t) - C64::from_polar(1.0, (t * t + 1.0).ln().sqrt())).norm() < 1e-13);
        let fast = SoGenerator::new("bad", SoKind::Phase { psi: "t".into() }, None);
        assert!(matches!(fast, Err(SymbolError::NotSlowlyOscillating(..))));
        let broken = SoGenerator::new("x", SoKind::Phase { psi: "sqrt(".into() }, None);
        assert!(matches!(broken, Err(SymbolError::Expression(..))));
    }

    #[test]
    fn rational_limits() {
        let one = C64::new(1.0, 0.0);
        let r = SoGenerator::new(
            "r",
            SoKind::Rational { num: vec![one, C64::new(0.0, 0.0), 2.0 * one], den: vec![one, C64::new(0.0, 0.0), one] },
            None,
        )
        .unwrap();
        assert_eq!(r.cluster(), &ClusterSet::Point { value: 2.0 * one });
        let bad = SoGenerator::new("r", SoKind::Rational { num: vec![one, one], den: vec![one] }, None);
        assert!(bad.is_err());
    }

    #[test]
    fn reflection_keeps_fiber_key() {
        let g = gk(1);
        let r = g.reflected();
        assert_eq!(r.id(), "g1~");
        assert_eq!(r.fiber_key(), "g1");
        assert_eq!(r.eval(3.0), g.eval(-3.0));
        assert_eq!(r.reflected().id(), "g1");
    }

    #[test]
    fn cluster_membership() {
        let g = gk(1);
        assert!(g.cluster_contains(C64::new(-1.0, 0.0), 1e-9));
        assert!(!g.cluster_contains(C64::new(0.5, 0.0), 1e-9));
        assert_eq!(g.cluster_grid(8).len(), 8);
        let bad = ClusterSet::Sampled { tau0: 1.0, rho: 0.9, steps: 3 };
        assert!(bad.validate().is_err());
    }
}
