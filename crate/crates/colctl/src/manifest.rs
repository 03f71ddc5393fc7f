//! Run manifests: enough provenance to reproduce a run bit-exactly.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sim_core::ScenarioConfig;

use crate::ExperimentError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub mode: String,
    /// SHA-256 over the resolved scenario TOML and the run arguments.
    pub spec_hash: String,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    pub scenario_toml: String,
    /// True until the run finishes writing all outputs.
    pub incomplete: bool,
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(mode: &str, scenario: &ScenarioConfig, seed: u64, args_repr: &str) -> Self {
        let scenario_toml = scenario.to_toml_string();
        let mut hasher = Sha256::new();
        hasher.update(scenario_toml.as_bytes());
        hasher.update(args_repr.as_bytes());
        hasher.update(seed.to_le_bytes());
        let spec_hash = hex(&hasher.finalize());
        let mut versions = BTreeMap::new();
        for (name, v) in [
            ("colctl", env!("CARGO_PKG_VERSION")),
            ("rustc-target", std::env::consts::ARCH),
        ] {
            versions.insert(name.to_string(), v.to_string());
        }
        Self {
            mode: mode.to_string(),
            spec_hash,
            seed,
            versions,
            scenario_toml,
            incomplete: true,
            extra: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.extra.insert(key.to_string(), value.into());
    }

    pub fn write(&self, path: &Path) -> Result<(), ExperimentError> {
        let body = serde_json::to_string_pretty(self)
            .map_err(|e| ExperimentError::Runtime(e.to_string()))?;
        std::fs::write(path, body).map_err(|e| ExperimentError::Runtime(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, ExperimentError> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&body).map_err(|e| ExperimentError::Config(e.to_string()))
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
