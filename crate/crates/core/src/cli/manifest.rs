use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::Failure;

/// Bumped whenever a manifest field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
    /// Columns left out of the hash because they vary between identical runs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hash_excludes: Vec<String>,
}

/// What a run read, how it was configured and what it wrote. Two runs with
/// equal `params` and input hashes produce equal output hashes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub params: Value,
    pub inputs: BTreeMap<String, FileDigest>,
    pub outputs: BTreeMap<String, FileDigest>,
    pub summary: Value,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises")
    }
}

/// Records every file a command touches while it runs.
pub(super) struct Recorder {
    command: &'static str,
    params: Value,
    inputs: BTreeMap<String, FileDigest>,
    outputs: BTreeMap<String, FileDigest>,
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::new("Io", format!("{}: {e}", path.display()))
}

impl Recorder {
    pub fn new(command: &'static str, params: &impl Serialize) -> Self {
        Self {
            command,
            params: serde_json::to_value(params).expect("params serialise"),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }

    pub fn read(&mut self, role: &str, path: &Path) -> Result<Vec<u8>, Failure> {
        let bytes = std::fs::read(path).map_err(|e| io_failure(path, e))?;
        self.inputs.insert(
            role.to_owned(),
            FileDigest {
                path: path.display().to_string(),
                bytes: bytes.len() as u64,
                sha256: hash_bytes(&bytes),
                hash_excludes: Vec::new(),
            },
        );
        Ok(bytes)
    }

    pub fn read_text(&mut self, role: &str, path: &Path) -> Result<String, Failure> {
        let bytes = self.read(role, path)?;
        String::from_utf8(bytes).map_err(|_| Failure::new("FormatError", format!("{}: not UTF-8", path.display())))
    }

    pub fn write(&mut self, role: &str, path: &Path, bytes: &[u8]) -> Result<(), Failure> {
        self.write_hashed(role, path, bytes, hash_bytes(bytes), Vec::new())
    }

    /// Writes `bytes` but records `sha256` computed over a normalised form.
    pub fn write_hashed(
        &mut self,
        role: &str,
        path: &Path,
        bytes: &[u8],
        sha256: String,
        hash_excludes: Vec<String>,
    ) -> Result<(), Failure> {
        std::fs::write(path, bytes).map_err(|e| io_failure(path, e))?;
        self.outputs.insert(
            role.to_owned(),
            FileDigest {
                path: path.display().to_string(),
                bytes: bytes.len() as u64,
                sha256,
                hash_excludes,
            },
        );
        Ok(())
    }

    pub fn finish(self, summary: impl Serialize) -> Manifest {
        Manifest {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            command: self.command.to_owned(),
            params: self.params,
            inputs: self.inputs,
            outputs: self.outputs,
            summary: serde_json::to_value(summary).expect("summary serialises"),
        }
    }
}
