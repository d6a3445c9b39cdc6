//! Per-stage provenance record written next to the artifacts.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// File name relative to the output directory.
    pub file: String,
    pub sha256: String,
}

impl Artifact {
    pub fn of(out: &Path, file: &str) -> Result<Self, CliError> {
        let path = out.join(file);
        let bytes = std::fs::read(&path)
            .map_err(|e| CliError::Validation(format!("cannot read artifact {}: {e}", path.display())))?;
        Ok(Self { file: file.to_string(), sha256: hex::encode(Sha256::digest(bytes)) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub stage: String,
    pub version: String,
    pub config_hash: String,
    pub config: RunConfig,
    pub seeds: BTreeMap<String, u64>,
    pub threads: usize,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
    /// Wall-clock measurements in seconds.
    pub timings: BTreeMap<String, f64>,
    /// Stage-specific results.
    pub details: Value,
}

impl Manifest {
    pub fn new(stage: &str, config: &RunConfig) -> Self {
        Self {
            stage: stage.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config.hash(),
            config: config.clone(),
            seeds: BTreeMap::new(),
            threads: rayon::current_num_threads(),
            inputs: vec![],
            outputs: vec![],
            timings: BTreeMap::new(),
            details: Value::Null,
        }
    }

    pub fn file_name(stage: &str) -> String {
        format!("manifest-{stage}.json")
    }

    pub fn write(&self, out: &Path) -> Result<(), CliError> {
        let path = out.join(Self::file_name(&self.stage));
        let text = serde_json::to_string_pretty(self).expect("manifest serialises");
        std::fs::write(&path, text + "\n")
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))
    }

    pub fn read(out: &Path, stage: &str) -> Result<Self, CliError> {
        let path = out.join(Self::file_name(stage));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("invalid manifest {}: {e}", path.display())))
    }
}
