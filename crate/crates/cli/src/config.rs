//! Run configuration: a JSON document describing symbols, the operator
//! expression and the numerical settings for one mode.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use finsec_core::analyzer::{AnalyzerConfig, OperatorExpr};
use finsec_core::numerics::GridPolicy;
use finsec_core::symbols::{ClusterSet, FiberStrategy, PcsoSymbol, SoGenerator, SoKind, StepFunction, SymbolTerm};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Stability of the sequence given by the expression.
    Analyze,
    /// Applicability of the finite section method to the constant operator.
    Fsm,
    /// Condition number sweep and, with a right-hand side, truncated solves.
    Simulate,
    /// Eigenvalues of the discretized operator against the lens.
    Spectrum,
}

/// A real number or a [re, im] pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Real(f64),
    Complex([f64; 2]),
}

impl Number {
    pub fn value(self) -> C64 {
        match self {
            Number::Real(x) => C64::new(x, 0.0),
            Number::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedStep {
    ChiMinus,
    ChiPlus,
    One,
    Zero,
}

/// Step function: a name, a constant, an indicator of [from, to) or explicit pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSpec {
    Named(NamedStep),
    Constant(Number),
    Indicator {
        indicator: [f64; 2],
    },
    Pieces {
        breakpoints: Vec<f64>,
        values: Vec<Number>,
    },
}

impl StepSpec {
    pub fn build(&self) -> Result<StepFunction, CliError> {
        Ok(match self {
            StepSpec::Named(NamedStep::ChiMinus) => StepFunction::chi_minus(),
            StepSpec::Named(NamedStep::ChiPlus) => StepFunction::chi_plus(),
            StepSpec::Named(NamedStep::One) => StepFunction::one(),
            StepSpec::Named(NamedStep::Zero) => StepFunction::zero(),
            StepSpec::Constant(c) => StepFunction::constant(c.value()),
            StepSpec::Indicator { indicator: [a, b] } => {
                if !(a < b) {
                    return Err(CliError::Invalid(format!("indicator [{a}, {b}] is empty")));
                }
                StepFunction::indicator(*a, *b)
            }
            StepSpec::Pieces { breakpoints, values } => {
                StepFunction::new(breakpoints.clone(), values.iter().map(|v| v.value()).collect())?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub pc: StepSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub so: Vec<String>,
}

/// Σ pc_k · Π generators, or a plain step function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolSpec {
    Terms { terms: Vec<TermSpec> },
    Step(StepSpec),
}

/// Nested operator expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ExprSpec {
    Ident,
    /// The truncation sequence (P_τ).
    Projseq,
    Mult(StepSpec),
    /// Convolution by a named symbol.
    Conv(String),
    Sum(Vec<ExprSpec>),
    Prod(Vec<ExprSpec>),
    Scale { by: Number, expr: Box<ExprSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Rhs {
    Gaussian {
        #[serde(default)]
        center: f64,
        width: f64,
    },
    Indicator {
        from: f64,
        to: f64,
    },
}

impl Rhs {
    pub fn eval(&self, x: f64) -> C64 {
        match self {
            Rhs::Gaussian { center, width } => C64::new((-(x - center).powi(2) / (2.0 * width * width)).exp(), 0.0),
            Rhs::Indicator { from, to } => C64::new(if x >= *from && x < *to { 1.0 } else { 0.0 }, 0.0),
        }
    }
}

/// Tolerances of the analyzer and the trend thresholds used to summarise numerics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub tol: f64,
    pub drop_factor: f64,
    pub trend_grids: Vec<(f64, usize)>,
    pub symbol_resolution: usize,
    /// A sweep counts as bounded when max cond₂ / min cond₂ stays below this.
    pub cond_ratio: f64,
    /// A sweep counts as degenerating when σ_min falls by at least this factor.
    pub sigma_drop: f64,
    /// Eigenvalues within this distance of the lens count as near it.
    pub spectrum_distance: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let a = AnalyzerConfig::default();
        Self {
            tol: a.tol,
            drop_factor: a.drop_factor,
            trend_grids: a.trend_grids,
            symbol_resolution: a.symbol_resolution,
            cond_ratio: 3.0,
            sigma_drop: 10.0,
            spectrum_distance: 0.15,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub p: f64,
    pub mode: Mode,
    pub expression: ExprSpec,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub generators: BTreeMap<String, SoKind>,
    /// Overrides of the natural cluster sets of generators.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub clusters: BTreeMap<String, ClusterSet>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub symbols: BTreeMap<String, SymbolSpec>,
    #[serde(default)]
    pub fiber: FiberStrategy,
    #[serde(default = "default_taus")]
    pub tau_list: Vec<f64>,
    #[serde(default)]
    pub grid: GridPolicy,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Rhs>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_taus() -> Vec<f64> {
    vec![10.0, 20.0, 40.0, 80.0]
}

/// Parse and validate a configuration; errors name the offending key path.
pub fn parse_config(text: &str) -> Result<Config, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: Config = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Schema { path: e.path().to_string(), message: e.inner().to_string() })?;
    cfg.validate()?;
    Ok(cfg)
}

impl Config {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(CliError::Schema { path: "p".into(), message: format!("{} is not in (1, inf)", self.p) });
        }
        if self.tau_list.is_empty() || self.tau_list.windows(2).any(|w| w[1] <= w[0]) || self.tau_list.iter().any(|t| !(*t > 0.0))
        {
            return Err(CliError::Schema {
                path: "tau_list".into(),
                message: "must be a non-empty, strictly increasing list of positive numbers".into(),
            });
        }
        for id in self.clusters.keys() {
            if !self.generators.contains_key(id) {
                return Err(CliError::Undefined { what: "generator", name: id.clone(), path: format!("clusters.{id}") });
            }
        }
        for (name, sym) in &self.symbols {
            if let SymbolSpec::Terms { terms } = sym {
                for (k, t) in terms.iter().enumerate() {
                    for g in &t.so {
                        if !self.generators.contains_key(g) {
                            return Err(CliError::Undefined {
                                what: "generator",
                                name: g.clone(),
                                path: format!("symbols.{name}.terms[{k}].so"),
                            });
                        }
                    }
                }
            }
        }
        check_refs(&self.expression, &self.symbols, "expression")
    }

    pub fn analyzer_config(&self) -> AnalyzerConfig {
        let t = &self.tolerances;
        AnalyzerConfig {
            tol: t.tol,
            fibers: self.fiber.clone(),
            trend_grids: t.trend_grids.clone(),
            drop_factor: t.drop_factor,
            padding: self.grid.padding,
            symbol_resolution: t.symbol_resolution,
        }
    }

    fn generator_objects(&self) -> Result<BTreeMap<String, Arc<SoGenerator>>, CliError> {
        self.generators
            .iter()
            .map(|(id, kind)| {
                let g = SoGenerator::new(id.clone(), kind.clone(), self.clusters.get(id).cloned())?;
                Ok((id.clone(), Arc::new(g)))
            })
            .collect()
    }

    pub fn symbol_objects(&self) -> Result<BTreeMap<String, PcsoSymbol>, CliError> {
        let gens = self.generator_objects()?;
        self.symbols
            .iter()
            .map(|(name, spec)| {
                let sym = match spec {
                    SymbolSpec::Step(s) => PcsoSymbol::from(s.build()?),
                    SymbolSpec::Terms { terms } => {
                        let mut used = vec![];
                        let mut out = vec![];
                        for t in terms {
                            for g in &t.so {
                                used.push(gens[g].clone());
                            }
                            out.push(SymbolTerm { pc: t.pc.build()?, so: t.so.clone() });
                        }
                        PcsoSymbol::new(out, used)?
                    }
                };
                Ok((name.clone(), sym))
            })
            .collect()
    }

    /// The operator expression with every symbol reference resolved.
    pub fn build_expression(&self) -> Result<OperatorExpr, CliError> {
        let symbols = self.symbol_objects()?;
        build(&self.expression, &symbols)
    }
}

fn check_refs(e: &ExprSpec, symbols: &BTreeMap<String, SymbolSpec>, path: &str) -> Result<(), CliError> {
    match e {
        ExprSpec::Conv(name) if !symbols.contains_key(name) => {
            Err(CliError::Undefined { what: "symbol", name: name.clone(), path: format!("{path}.conv") })
        }
        ExprSpec::Sum(v) => v.iter().enumerate().try_for_each(|(k, x)| check_refs(x, symbols, &format!("{path}.sum[{k}]"))),
        ExprSpec::Prod(v) => v.iter().enumerate().try_for_each(|(k, x)| check_refs(x, symbols, &format!("{path}.prod[{k}]"))),
        ExprSpec::Scale { expr, .. } => check_refs(expr, symbols, &format!("{path}.scale.expr")),
        _ => Ok(()),
    }
}

fn build(e: &ExprSpec, symbols: &BTreeMap<String, PcsoSymbol>) -> Result<OperatorExpr, CliError> {
    Ok(match e {
        ExprSpec::Ident => OperatorExpr::Ident,
        ExprSpec::Projseq => OperatorExpr::ProjSeq,
        ExprSpec::Mult(s) => OperatorExpr::Mult(s.build()?),
        ExprSpec::Conv(name) => OperatorExpr::conv(symbols[name].clone()),
        ExprSpec::Sum(v) => OperatorExpr::sum(v.iter().map(|x| build(x, symbols)).collect::<Result<_, _>>()?),
        ExprSpec::Prod(v) => OperatorExpr::prod(v.iter().map(|x| build(x, symbols)).collect::<Result<_, _>>()?),
        ExprSpec::Scale { by, expr } => OperatorExpr::scale(by.value(), build(expr, symbols)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIRED: &str = r#"{
        "p": 2, "mode": "fsm",
        "symbols": { "a": 1, "b": -1 },
        "expression": { "sum": [
            { "prod": [ { "conv": "a" }, { "mult": "chi_minus" } ] },
            { "prod": [ { "conv": "b" }, { "mult": "chi_plus" } ] }
        ] }
    }"#;

    #[test]
    fn minimal_config() {
        let c = parse_config(r#"{"p": 2, "mode": "analyze", "expression": "ident"}"#).unwrap();
        assert_eq!(c.build_expression().unwrap(), OperatorExpr::Ident);
        assert_eq!(c.tau_list, default_taus());
    }

    #[test]
    fn paired_config_builds_the_paired_operator() {
        let c = parse_config(PAIRED).unwrap();
        let want = OperatorExpr::paired(PcsoSymbol::constant(C64::new(1.0, 0.0)), PcsoSymbol::constant(C64::new(-1.0, 0.0)));
        assert_eq!(c.build_expression().unwrap(), want);
    }

    #[test]
    fn errors_name_the_offender() {
        let e = parse_config(r#"{"p": 2, "mode": "analyze", "expression": {"conv": "a"}}"#).unwrap_err();
        assert!(e.to_string().contains("`a`"), "{e}");
        let e = parse_config(r#"{"p": 2, "mode": "analyze", "expression": "ident", "colour": 1}"#).unwrap_err();
        assert!(e.to_string().contains("colour"), "{e}");
        let e = parse_config(r#"{"p": 2, "mode": "analyze", "expression": "ident", "grid": {"n": 64, "pad": 2}}"#).unwrap_err();
        assert!(e.to_string().contains("grid"), "{e}");
        let e = parse_config(r#"{"p": 0.5, "mode": "analyze", "expression": "ident"}"#).unwrap_err();
        assert!(e.to_string().contains("p"), "{e}");
    }

    #[test]
    fn round_trip() {
        let text = r#"{
            "p": 3, "mode": "analyze",
            "generators": { "g1": { "kind": "oscillating_phase", "k": 1 } },
            "symbols": {
                "a": { "terms": [ { "pc": "chi_minus" }, { "pc": "chi_plus", "so": ["g1"] } ] },
                "c": { "breakpoints": [0, 1], "values": [1, [0, 2], -1] },
                "d": { "indicator": [-1, 1] }
            },
            "expression": { "prod": [ "projseq", { "scale": { "by": [1, 1], "expr": { "conv": "a" } } },
                                      { "conv": "c" }, { "conv": "d" }, "projseq" ] },
            "fiber": { "strategy": "trajectory", "tau0": 2, "rho": 1.5, "steps": 64 },
            "rhs": { "kind": "gaussian", "width": 2 }
        }"#;
        let c = parse_config(text).unwrap();
        c.build_expression().unwrap();
        assert_eq!(parse_config(&c.to_json()).unwrap(), c);
    }
}
