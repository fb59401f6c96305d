//! Run manifests: what was run, with which inputs, and what it wrote.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use peakon_core::evolve::SolverConfig;
use peakon_core::ModelParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Option<ModelParams>,
    pub config: Option<SolverConfig>,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// Command-line arguments after the program name, minus `--out-dir`.
    pub arguments: Vec<String>,
    /// Paths relative to the output directory.
    pub outputs: Vec<String>,
    pub output_sha256: BTreeMap<String, String>,
    /// SHA-256 over `blob <len>\0<canonical inputs JSON>`.
    pub input_hash: String,
}

#[derive(Serialize)]
struct Inputs<'a> {
    command: &'a str,
    params: &'a Option<ModelParams>,
    config: &'a Option<SolverConfig>,
    seed: Option<u64>,
    tool_version: &'a str,
    arguments: &'a [String],
}

/// Serialize with keys sorted at every level.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    // serde_json's default map is ordered, so a round trip through Value sorts keys
    let v = serde_json::to_value(value).expect("serializable");
    serde_json::to_string_pretty(&v).expect("serializable")
}

pub fn git_blob_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    format!("{:x}", h.finalize())
}

pub fn file_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(
        command: &str,
        params: Option<ModelParams>,
        config: Option<SolverConfig>,
        seed: Option<u64>,
        arguments: Vec<String>,
    ) -> Self {
        let tool_version = env!("CARGO_PKG_VERSION").to_string();
        let inputs = Inputs {
            command,
            params: &params,
            config: &config,
            seed,
            tool_version: &tool_version,
            arguments: &arguments,
        };
        let input_hash = git_blob_hash(serde_json::to_string(&serde_json::to_value(&inputs).expect("serializable")).expect("serializable").as_bytes());
        Self {
            command: command.to_string(),
            params,
            config,
            seed,
            tool_version,
            arguments,
            outputs: Vec::new(),
            output_sha256: BTreeMap::new(),
            input_hash,
        }
    }

    /// Record outputs with their hashes and write `manifest.json`.
    pub fn finish(mut self, out_dir: &Path, outputs: &[String]) -> Result<(), CliError> {
        for name in outputs {
            self.output_sha256.insert(name.clone(), file_sha256(&out_dir.join(name))?);
        }
        self.outputs = outputs.to_vec();
        let path = out_dir.join(MANIFEST_FILE);
        fs::write(&path, canonical_json(&self) + "\n").map_err(|e| CliError::io(&path, e))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}
