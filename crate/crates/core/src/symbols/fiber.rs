use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{PcsoSymbol, SoGenerator, SymbolError};

/// A point of the fiber over infinity, given by one value per generator.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FiberAssignment {
    pub values: BTreeMap<String, C64>,
}

impl FiberAssignment {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, C64)>) -> Self {
        Self { values: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
    }

    pub fn value(&self, key: &str) -> Result<C64, SymbolError> {
        self.values.get(key).copied().ok_or_else(|| SymbolError::MissingAssignment(key.to_string()))
    }

    /// Every assigned value must lie in the declared cluster set of its generator.
    pub fn validate(&self, generators: &[Arc<SoGenerator>], tol: f64) -> Result<(), SymbolError> {
        for g in generators {
            let v = self.value(g.fiber_key())?;
            if !g.cluster_contains(v, tol) {
                return Err(SymbolError::OutsideCluster { id: g.fiber_key().to_string(), value: v });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case", deny_unknown_fields)]
pub enum FiberStrategy {
    /// Independent grid over each cluster set; contains the true joint fiber set.
    Product { resolution: usize },
    /// Joint values along τ_n = tau0·rho^n; only jointly attained tuples.
    Trajectory { tau0: f64, rho: f64, steps: usize },
}

impl Default for FiberStrategy {
    fn default() -> Self {
        FiberStrategy::Product { resolution: 16 }
    }
}

/// Which bracket of the fiber set a verdict was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberProvenance {
    pub strategy: FiberStrategy,
    pub generators: Vec<String>,
    pub assignments: usize,
}

/// Distinct generators by fiber key, preferring unreflected representatives.
pub(crate) fn generators_by_key(symbols: &[&PcsoSymbol]) -> BTreeMap<String, Arc<SoGenerator>> {
    let mut out: BTreeMap<String, Arc<SoGenerator>> = BTreeMap::new();
    for s in symbols {
        for g in s.generators() {
            let key = g.fiber_key().to_string();
            let replace = match out.get(&key) {
                None => true,
                Some(old) => old.id() != key && g.id() == key,
            };
            if replace {
                out.insert(key, g.clone());
            }
        }
    }
    out
}

pub(crate) fn product_fibers(symbols: &[&PcsoSymbol], resolution: usize) -> Result<Vec<FiberAssignment>, SymbolError> {
    if resolution == 0 {
        return Err(SymbolError::BadResolution);
    }
    let gens = generators_by_key(symbols);
    let mut fibers = vec![FiberAssignment::default()];
    for (key, g) in &gens {
        g.cluster().validate()?;
        let grid = g.cluster_grid(resolution);
        let mut next = Vec::with_capacity(fibers.len() * grid.len());
        for f in &fibers {
            for v in &grid {
                let mut f = f.clone();
                f.values.insert(key.clone(), *v);
                next.push(f);
            }
        }
        fibers = next;
    }
    Ok(fibers)
}

pub fn sample_fibers(symbols: &[&PcsoSymbol], strategy: &FiberStrategy) -> Result<Vec<FiberAssignment>, SymbolError> {
    match strategy {
        FiberStrategy::Product { resolution } => product_fibers(symbols, *resolution),
        FiberStrategy::Trajectory { tau0, rho, steps } => {
            if !(tau0.is_finite() && *tau0 > 0.0 && rho.is_finite() && *rho > 1.0) || *steps == 0 {
                return Err(SymbolError::UnboundedCluster(format!("trajectory tau0={tau0} rho={rho} steps={steps}")));
            }
            let gens = generators_by_key(symbols);
            if gens.is_empty() {
                return Ok(vec![FiberAssignment::default()]);
            }
            Ok((0..*steps)
                .map(|n| {
                    let tau = tau0 * rho.powi(n as i32);
                    FiberAssignment { values: gens.iter().map(|(k, g)| (k.clone(), g.eval(tau))).collect() }
                })
                .collect())
        }
    }
}
