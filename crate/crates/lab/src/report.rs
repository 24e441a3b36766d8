use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// A published statement about the germ or map.
    Literature,
    /// Computed by an independent closed form or oracle.
    Derived,
    /// Holds by construction.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub id: String,
    pub description: String,
    pub measured: Value,
    pub expected: Value,
    pub source: Source,
    /// Short statement of the fact the expectation rests on.
    pub anchor: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    /// Conjunction of all assertions; false when the run errored or asserted nothing.
    pub pass: bool,
    pub runtime_seconds: f64,
    /// Resolved configuration: feeding it back reproduces the run.
    pub config: ExperimentConfig,
    pub assertions: Vec<Assertion>,
    pub measurements: BTreeMap<String, Value>,
    /// Files written, relative to the experiment's output directory.
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ExperimentReport {
    pub fn assertion(&self, id: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.id == id)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.pass)
    }

    /// JSON with the runtime zeroed, for reproducibility comparisons.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.runtime_seconds = 0.0;
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}
