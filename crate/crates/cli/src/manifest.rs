//! Run manifests: everything needed to re-execute a run and verify that
//! its outputs reproduce byte for byte.

use serde::{Deserialize, Serialize};
use std::path::Path;

use conegrowth_core::models::stable_hash_bytes;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config_hash: String,
    /// Full configuration text, inlined so replay needs nothing else.
    pub config_text: String,
    pub created_unix_secs: u64,
    /// Derived seed per task, in task order.
    pub task_seeds: Vec<u64>,
    pub outputs: Vec<OutputRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OutputRecord {
    /// Path relative to the output directory.
    pub path: String,
    /// Stable content hash, hexadecimal.
    pub content_hash: String,
    pub bytes: u64,
}

pub fn content_hash(bytes: &[u8]) -> String {
    format!("{:016x}", stable_hash_bytes(bytes))
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join(MANIFEST_FILE), text)
    }

    pub fn from_path(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}
