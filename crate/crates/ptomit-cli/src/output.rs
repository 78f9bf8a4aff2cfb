//! Artifact writing and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Manifest written at the end of every run.
#[derive(Debug, Serialize)]
struct RunManifest<'a> {
    /// Hash of the resolved parameters and grids; equal hashes guarantee
    /// byte-identical data files.
    config_hash: &'a str,
    /// Version of the binary that wrote the files.
    tool_version: &'a str,
    /// UTC wall-clock time the manifest was written, ISO 8601.
    timestamp: String,
    /// The command line after the binary name.
    command_line: String,
    /// Written artifacts, relative to the output directory, in the order
    /// they were produced.
    outputs: &'a [String],
    /// Command-specific scalar results, when the command has any.
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<serde_json::Value>,
}

/// Collects the files written by one command and finishes with a manifest
/// naming all of them.
pub struct RunWriter {
    root: PathBuf,
    outputs: Vec<String>,
}

impl RunWriter {
    /// Create the output directory (and parents) if needed.
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(RunWriter {
            root: root.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    /// Write one artifact under the output directory and record it for
    /// the manifest. Intermediate directories are created as needed.
    pub fn write(&mut self, relative: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
        self.outputs.push(relative.to_string());
        Ok(())
    }

    /// Write `run_manifest.json` and return its path.
    pub fn finish(
        self,
        config_hash: &str,
        summary: Option<serde_json::Value>,
    ) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            command_line: std::env::args().skip(1).collect::<Vec<_>>().join(" "),
            outputs: &self.outputs,
            summary,
        };
        let path = self.root.join("run_manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// Make an arbitrary error message safe to embed in a CSV cell: commas
/// become semicolons, newlines become spaces.
pub fn csv_safe(message: &str) -> String {
    message.replace(',', ";").replace(['\n', '\r'], " ")
}
