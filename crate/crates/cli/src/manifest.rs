//! Run manifest written next to every output set.

use serde::Serialize;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    /// Subcommand line that reproduces the run.
    pub command: String,
    pub config_digest: String,
    pub base_seed: u64,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub output_paths: Vec<String>,
    /// Canonical text of every config in the run, in output order.
    pub configs: Vec<ManifestConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestConfig {
    pub cell_id: String,
    pub digest: String,
    pub canonical: String,
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn utc_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut text =
            serde_json::to_string_pretty(self).map_err(|e| CliError::Validation(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}
