use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::{LlmConfig, LlmError, Prompt, ProviderKind};

/// One recorded request/response pair. The prompt and sampling settings are
/// stored alongside the response so cache files can be read on their own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub fingerprint: String,
    pub provider: ProviderKind,
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub system: String,
    pub user: String,
    pub response: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
}

impl TranscriptEntry {
    pub fn new(config: &LlmConfig, prompt: &Prompt, response: String) -> Self {
        let created_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            fingerprint: config.request_fingerprint(prompt),
            provider: config.provider,
            model: config.model.clone(),
            temperature: config.temperature,
            top_p: config.top_p,
            system: prompt.system.clone(),
            user: prompt.user.clone(),
            response,
            created_at,
        }
    }
}

/// Append-only directory holding one `<fingerprint>.json` file per entry.
#[derive(Debug, Clone)]
pub struct TranscriptCache {
    dir: PathBuf,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

fn cache_err(context: &str, path: &Path, e: impl std::fmt::Display) -> LlmError {
    LlmError::Cache(format!("{context} {}: {e}", path.display()))
}

impl TranscriptCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, LlmError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| cache_err("creating", &dir, e))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, fingerprint: &str) -> PathBuf {
        self.dir.join(format!("{fingerprint}.json"))
    }

    pub fn get(&self, fingerprint: &str) -> Result<Option<TranscriptEntry>, LlmError> {
        let path = self.path_for(fingerprint);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(cache_err("reading", &path, e)),
        };
        let entry: TranscriptEntry =
            serde_json::from_slice(&bytes).map_err(|e| cache_err("parsing", &path, e))?;
        if entry.fingerprint != fingerprint {
            return Err(cache_err(
                "fingerprint mismatch in",
                &path,
                format!("file records {}", entry.fingerprint),
            ));
        }
        Ok(Some(entry))
    }

    /// Writes the entry via a temporary file and rename. An existing entry
    /// for the same fingerprint is kept.
    pub fn put(&self, entry: &TranscriptEntry) -> Result<(), LlmError> {
        let path = self.path_for(&entry.fingerprint);
        if path.exists() {
            return Ok(());
        }
        let tmp = self.dir.join(format!(
            ".{}.{}.{}.tmp",
            entry.fingerprint,
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        let mut json = serde_json::to_string_pretty(entry).expect("plain struct");
        json.push('\n');
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(json.as_bytes())?;
            f.sync_all()?;
            fs::rename(&tmp, &path)
        };
        write().map_err(|e| {
            let _ = fs::remove_file(&tmp);
            cache_err("writing", &path, e)
        })
    }

    /// Number of stored entries.
    pub fn len(&self) -> Result<usize, LlmError> {
        let entries = fs::read_dir(&self.dir).map_err(|e| cache_err("listing", &self.dir, e))?;
        Ok(entries
            .filter_map(Result::ok)
            .filter(|e| {
                let name = e.file_name();
                let name = name.to_string_lossy();
                name.ends_with(".json") && !name.starts_with('.')
            })
            .count())
    }

    pub fn is_empty(&self) -> Result<bool, LlmError> {
        self.len().map(|n| n == 0)
    }
}
