//! Client for a remote text-generation service with deterministic sampling
//! settings, a fingerprint-keyed transcript cache, and a replay-only mode.

mod cache;
mod client;
mod provider;
mod schema;
mod transport;

pub use cache::{TranscriptCache, TranscriptEntry};
pub use client::{ClientStats, LlmClient};
pub use provider::ProviderKind;
pub use schema::{extract_json, FieldKind, FieldSpec, StructuredSchema};
pub use transport::{HttpRequest, Transport, TransportError, UreqTransport};

use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("invalid client configuration: {0}")]
    InvalidConfig(String),
    #[error("credential environment variable {var} is not set")]
    MissingCredential { var: String },
    #[error("authentication rejected (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("service returned HTTP {status}: {body}")]
    Remote { status: u16, body: String },
    #[error("network failure after {attempts} attempt(s): {message}")]
    Network { attempts: usize, message: String },
    #[error("unexpected response shape: {0}")]
    BadResponse(String),
    #[error("replay-only mode: no cached transcript for request {fingerprint}")]
    ReplayMiss { fingerprint: String },
    #[error("response does not match schema {schema:?}: {}", problems.join("; "))]
    Schema {
        schema: String,
        problems: Vec<String>,
    },
    #[error("transcript cache: {0}")]
    Cache(String),
}

/// A system instruction plus the user turn it applies to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub system: String,
    pub user: String,
}

impl Prompt {
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        Self {
            system: system.into(),
            user: user.into(),
        }
    }

    /// Both parts as one human-readable document.
    pub fn render(&self) -> String {
        format!("[system]\n{}\n\n[user]\n{}\n", self.system, self.user)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub provider: ProviderKind,
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_retries: usize,
    #[serde(with = "secs")]
    pub timeout: Duration,
    #[serde(with = "secs")]
    pub retry_backoff: Duration,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            provider: ProviderKind::Gemini,
            endpoint: ProviderKind::Gemini.default_endpoint().to_string(),
            model: "gemini-2.5-pro".into(),
            temperature: 0.0,
            top_p: 0.95,
            max_retries: 2,
            timeout: Duration::from_secs(300),
            retry_backoff: Duration::from_secs(2),
            api_key_env: ProviderKind::Gemini.default_key_env().to_string(),
        }
    }
}

#[derive(Serialize)]
struct SamplingKey<'a> {
    provider: ProviderKind,
    model: &'a str,
    temperature: f64,
    top_p: f64,
}

#[derive(Serialize)]
struct RequestKey<'a> {
    v: u32,
    sampling: SamplingKey<'a>,
    system: &'a str,
    user: &'a str,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(LlmError::InvalidConfig(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(LlmError::InvalidConfig(format!(
                "top_p must be in (0, 1], got {}",
                self.top_p
            )));
        }
        if self.model.trim().is_empty() {
            return Err(LlmError::InvalidConfig("model identifier is empty".into()));
        }
        Ok(())
    }

    fn sampling_key(&self) -> SamplingKey<'_> {
        SamplingKey {
            provider: self.provider,
            model: &self.model,
            temperature: self.temperature,
            top_p: self.top_p,
        }
    }

    /// Hash of the settings that shape a completion. Endpoint, timeouts and
    /// retry counts are excluded.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(&self.sampling_key()).expect("plain struct");
        sha256_hex(json.as_bytes())
    }

    /// Cache key for `prompt` under this configuration.
    pub fn request_fingerprint(&self, prompt: &Prompt) -> String {
        let key = RequestKey {
            v: 1,
            sampling: self.sampling_key(),
            system: &prompt.system,
            user: &prompt.user,
        };
        let json = serde_json::to_string(&key).expect("plain struct");
        sha256_hex(json.as_bytes())
    }
}
