use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    /// The flag that named the file.
    pub role: &'static str,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything that determines a report. Equal manifests give byte-identical
/// reports; paths, timestamps and thread counts are deliberately absent.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub tool_version: &'static str,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str) -> Self {
        Self {
            subcommand,
            tool_version: env!("CARGO_PKG_VERSION"),
            config: serde_json::Value::Null,
            inputs: Vec::new(),
        }
    }

    /// Reads an input file as UTF-8 and records its digest.
    pub fn read_input(&mut self, role: &'static str, path: &Path) -> Result<String, Failure> {
        let bytes = fs::read(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(InputDigest { role, sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len() });
        String::from_utf8(bytes).map_err(|_| Failure::input(format!("{} is not UTF-8", path.display())))
    }

    pub fn echo<T: Serialize>(&mut self, config: &T) {
        self.config = serde_json::to_value(config).expect("configuration serializes");
    }
}
