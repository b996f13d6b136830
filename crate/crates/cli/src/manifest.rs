use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

/// Provenance block embedded in every artifact the tool writes.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    /// Fully resolved parameters, defaults included.
    pub config: Value,
    pub input_paths: Vec<PathBuf>,
    pub output_paths: Vec<PathBuf>,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            config: serde_json::to_value(config).expect("configs serialize"),
            input_paths: Vec::new(),
            output_paths: Vec::new(),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        }
    }

    pub fn input(mut self, path: &Path) -> Self {
        self.input_paths.push(path.to_path_buf());
        self
    }

    pub fn output(mut self, path: &Path) -> Self {
        self.output_paths.push(path.to_path_buf());
        self
    }
}

/// An artifact payload with its manifest in front.
#[derive(Debug, Serialize)]
pub struct Artifact<'a, T: Serialize> {
    pub manifest: &'a RunManifest,
    #[serde(flatten)]
    pub payload: T,
}
