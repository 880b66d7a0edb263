use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use fcm_core::formats::write_bytes;
use fcm_core::FormatError;

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub millis: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct LlmUsage {
    pub cache_hits: usize,
    pub network_attempts: usize,
}

/// Record of one command invocation, written as `manifest.json` in the
/// output directory. Every field but `timings` is reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<String>,
    pub stages: Vec<String>,
    pub config_fingerprints: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub llm: Option<LlmUsage>,
    pub timings: Vec<StageTiming>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            schema_version: 1,
            command: command.to_string(),
            inputs: Vec::new(),
            stages: Vec::new(),
            config_fingerprints: BTreeMap::new(),
            outputs: Vec::new(),
            llm: None,
            timings: Vec::new(),
        }
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn fingerprint(&mut self, key: &str, value: String) {
        self.config_fingerprints.insert(key.to_string(), value);
    }

    /// Runs `f` as a named stage and records its wall time.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.push(name.to_string());
        self.timings.push(StageTiming {
            stage: name.to_string(),
            millis: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, FormatError> {
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self).expect("plain struct");
        text.push('\n');
        write_bytes(&path, text.as_bytes())?;
        Ok(path)
    }
}
