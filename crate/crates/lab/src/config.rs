use std::path::PathBuf;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LabError, Result};

pub const DEFAULT_SEED: u64 = 42;

/// Run configuration. `params` holds the experiment-specific knobs (germ and
/// map specs, schedule, tolerances, budgets); omitted knobs take their
/// defaults and the report echoes the fully resolved values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    pub params: Value,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig { name: String::new(), seed: DEFAULT_SEED, out_dir: None, params: Value::Object(Default::default()) }
    }
}

impl ExperimentConfig {
    pub fn named(name: &str) -> Self {
        ExperimentConfig { name: name.to_string(), ..Default::default() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_out_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.out_dir = Some(dir.into());
        self
    }

    pub fn with_params(mut self, params: Value) -> Self {
        self.params = params;
        self
    }

    /// Typed view of `params`; unknown keys are rejected.
    pub fn params<P: DeserializeOwned + Default>(&self) -> Result<P> {
        match &self.params {
            Value::Null => Ok(P::default()),
            v => serde_json::from_value(v.clone()).map_err(|e| LabError::Config(format!("{}: {e}", self.name))),
        }
    }
}
