use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One asserted property with its measured value and tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// Human-readable acceptance rule, e.g. `<= 1e-6`.
    pub tolerance: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl Criterion {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= limit,
            value,
            tolerance: format!("<= {limit:e}"),
            detail: String::new(),
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            passed: value >= limit,
            value,
            tolerance: format!(">= {limit:e}"),
            detail: String::new(),
        }
    }

    pub fn positive(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            passed: value > 0.0,
            value,
            tolerance: "> 0".into(),
            detail: String::new(),
        }
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            name: name.into(),
            passed: (lo..=hi).contains(&value),
            value,
            tolerance: format!("in [{lo}, {hi}]"),
            detail: String::new(),
        }
    }

    pub fn holds(name: impl Into<String>, passed: bool, tolerance: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            value: if passed { 1.0 } else { 0.0 },
            tolerance: tolerance.into(),
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

/// Everything an experiment asserts and measures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub kind: String,
    pub config_hash: String,
    pub passed: bool,
    pub criteria: Vec<Criterion>,
    /// Fitted constants: rates, slopes, plateaus.
    pub fitted: BTreeMap<String, f64>,
    /// Ledger paths relative to the output directory.
    pub ledgers: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    /// Kind-specific payload (sequences, traces, child reports).
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub data: serde_json::Value,
}

impl ExperimentReport {
    pub fn new(kind: &str, config_hash: &str) -> Self {
        Self {
            kind: kind.to_string(),
            config_hash: config_hash.to_string(),
            passed: true,
            criteria: Vec::new(),
            fitted: BTreeMap::new(),
            ledgers: Vec::new(),
            notes: Vec::new(),
            data: serde_json::Value::Null,
        }
    }

    pub fn check(&mut self, c: Criterion) {
        self.passed &= c.passed;
        self.criteria.push(c);
    }

    pub fn fit(&mut self, name: impl Into<String>, value: f64) {
        self.fitted.insert(name.into(), value);
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    /// `PASS name` / `FAIL name` lines.
    pub fn summary_lines(&self) -> Vec<String> {
        self.criteria
            .iter()
            .map(|c| {
                format!(
                    "{} {}/{}: {:.6e} ({})",
                    if c.passed { "PASS" } else { "FAIL" },
                    self.kind,
                    c.name,
                    c.value,
                    c.tolerance
                )
            })
            .collect()
    }
}
