//! Self-contained JSON reports written by the command-line tool.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// The published report schema.
pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

pub const DEFAULT_SEED: u64 = 0;
pub const SEED_VAR: &str = "PUNCTLAB_SEED";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub samples: BTreeMap<String, u64>,
    pub tolerances: BTreeMap<String, f64>,
}

impl Provenance {
    pub fn new(seed: u64) -> Self {
        Provenance { seed, ..Default::default() }
    }

    pub fn sample(mut self, name: &str, n: usize) -> Self {
        self.samples.insert(name.to_string(), n as u64);
        self
    }

    pub fn tolerance(mut self, name: &str, value: f64) -> Self {
        self.tolerances.insert(name.to_string(), value);
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub command: String,
    #[serde(rename = "fn")]
    pub function: Option<String>,
    pub params: Value,
    pub result: Value,
    pub provenance: Provenance,
    pub timing: Timing,
}

impl Report {
    pub fn new(command: &str, function: Option<String>, params: Value, result: Value, provenance: Provenance) -> Self {
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            function,
            params,
            result,
            provenance,
            timing: Timing::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only finite numbers and strings")
    }

    /// The report with timing removed, the part that reruns reproduce.
    pub fn payload(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("serializable report");
        if let Value::Object(map) = &mut v {
            map.remove("timing");
        }
        v
    }
}

/// Seed from `PUNCTLAB_SEED`, falling back to the default.
pub fn env_seed() -> Result<u64, String> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s.trim().parse().map_err(|_| format!("{SEED_VAR} must be an unsigned integer, got {s:?}")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
