use finsec_core::analyzer::StabilityReport;
use finsec_core::numerics::{ConvergenceStudy, SweepResult};
use serde::{Deserialize, Serialize};

use crate::config::{Config, Mode, Tolerances};

/// Everything a run produced, with the resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDocument {
    pub environment: Environment,
    pub mode: Mode,
    pub config: Config,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSummary>,
    /// Files written next to the report, relative to the output directory.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub thresholds: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSummary {
    pub result: SweepResult,
    /// cond₂ varied by less than the configured ratio.
    pub bounded: bool,
    /// σ_min fell by at least the configured factor.
    pub degenerating: bool,
    pub singular_taus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "status", rename_all = "snake_case")]
pub enum ConvergenceSummary {
    Solved { study: ConvergenceStudy },
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSummary {
    pub tau: f64,
    pub n: usize,
    pub eigenvalues: usize,
    pub distance: f64,
    /// Share of eigenvalues within `distance` of the lens.
    pub near_lens: f64,
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
