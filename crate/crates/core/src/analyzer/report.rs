use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::matrix::Side;
use crate::symbols::FiberProvenance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Checkpoint {
    /// Image under W_i.
    W { index: i8 },
    /// H_η at a jump point.
    Eta { eta: f64 },
    /// H_η on the continuity set, sampled or by interval representatives.
    EtaRange { from: f64, to: f64, points: usize },
    /// N_η^± on the lens for one fiber value.
    Fiber { fiber: BTreeMap<String, C64>, side: Side },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub condition: Condition,
    pub checkpoint: Checkpoint,
    pub passed: bool,
    #[serde(with = "crate::float_serde")]
    pub margin: f64,
    pub method: Method,
    /// A failure that cannot be an artefact of sampling or discretization.
    pub definitive: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

/// Location of the first definitive failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub condition: Condition,
    pub checkpoint: Checkpoint,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<C64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    /// Set when every record passed but some only numerically.
    pub leaning_stable: bool,
    pub p: f64,
    /// True when the report is about the finite section method for a constant operator.
    pub finite_section: bool,
    pub paired: bool,
    pub fibers: FiberProvenance,
    pub records: Vec<ConditionRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

impl StabilityReport {
    pub(crate) fn assemble(
        p: f64,
        finite_section: bool,
        paired: bool,
        fibers: FiberProvenance,
        records: Vec<ConditionRecord>,
    ) -> Self {
        let failed: Vec<&ConditionRecord> = records.iter().filter(|r| !r.passed).collect();
        let definitive = failed.iter().find(|r| r.definitive);
        let (verdict, leaning_stable) = if definitive.is_some() {
            (Verdict::Unstable, false)
        } else if !failed.is_empty() {
            (Verdict::Inconclusive, false)
        } else if records.iter().all(|r| r.method == Method::Exact) {
            (Verdict::Stable, false)
        } else {
            (Verdict::Inconclusive, true)
        };
        let witness = definitive
            .or(failed.first())
            .map(|r| Witness { condition: r.condition, checkpoint: r.checkpoint.clone(), x: r.witness });
        Self { verdict, leaning_stable, p, finite_section, paired, fibers, records, witness }
    }

    /// Smallest margin over all records of one condition.
    pub fn margin(&self, condition: Condition) -> f64 {
        self.records.iter().filter(|r| r.condition == condition).map(|r| r.margin).fold(f64::INFINITY, f64::min)
    }

    pub fn condition_passed(&self, condition: Condition) -> bool {
        self.records.iter().filter(|r| r.condition == condition).all(|r| r.passed)
    }
}
