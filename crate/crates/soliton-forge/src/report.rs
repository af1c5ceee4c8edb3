//! Machine-readable report structures shared by the CLI commands.
//!
//! Reports serialize with a fixed schema version and declaration-order
//! fields; given identical inputs (and seed) the bytes are identical, which
//! the test-suite relies on.

use serde::Serialize;
use std::collections::BTreeMap;

use crate::cones::{ClassificationReport, ConeDecomposition};
use crate::numeric::{FdReport, Grid};
use crate::operators::{Model, OperatorResult, Profile};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Invocation {
    pub command: String,
    pub expr: Option<String>,
    /// Flags echoed with their effective (defaulted) values, sorted by name.
    pub flags: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseEcho {
    /// The expression as parsed, printed back in canonical DSL form.
    pub expr: String,
    /// Parameter record when the expression is constructor-built.
    pub spec: Option<serde_json::Value>,
    pub term_count: usize,
    /// Canonical textual form of the expanded phase.
    pub theta: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct OperatorReport {
    pub name: String,
    pub model: Model,
    pub cleared_by: u32,
    pub is_zero: bool,
    pub term_count: usize,
}

impl OperatorReport {
    pub fn new(name: &str, op: &OperatorResult) -> Self {
        OperatorReport {
            name: name.to_string(),
            model: op.model,
            cleared_by: op.cleared_by,
            is_zero: op.is_zero(),
            term_count: op.expr.term_count(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConeSummary {
    pub var: String,
    pub dim: usize,
    pub all_freq_nonneg: bool,
    pub all_coeff_syntactically_positive: bool,
    pub no_poly_prefactor: bool,
    pub frequencies: Vec<String>,
}

impl ConeSummary {
    pub fn new(dec: &ConeDecomposition) -> Self {
        ConeSummary {
            var: dec.var.clone(),
            dim: dec.dim(),
            all_freq_nonneg: dec.flags.all_freq_nonneg,
            all_coeff_syntactically_positive: dec.flags.all_coeff_syntactically_positive,
            no_poly_prefactor: dec.flags.no_poly_prefactor,
            frequencies: dec.entries.iter().map(|e| e.freq.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub ok: bool,
    pub m: usize,
    pub k: Vec<String>,
    pub a: Vec<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NumericSummary {
    pub model: Model,
    pub profile: Profile,
    pub grid: Grid,
    pub max_u: f64,
    pub residual: Option<FdReport>,
    pub csv_path: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpectationResult {
    pub operator: String,
    pub expected_zero: bool,
    pub actual_zero: bool,
    pub fulfilled: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub details: String,
}

/// Top-level report; one per CLI invocation (sweeps nest one per point).
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub invocation: Invocation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseEcho>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub operators: Vec<OperatorReport>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub cones: Vec<ConeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruction: Option<ReconstructionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub expectations: Vec<ExpectationResult>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub criteria: Vec<CriterionResult>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sweep: Vec<Report>,
}

impl Report {
    pub fn new(command: &str, expr: Option<String>, flags: BTreeMap<String, String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION,
            invocation: Invocation { command: command.to_string(), expr, flags },
            phase: None,
            operators: Vec::new(),
            cones: Vec::new(),
            classification: None,
            reconstruction: None,
            numeric: None,
            expectations: Vec::new(),
            criteria: Vec::new(),
            sweep: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
