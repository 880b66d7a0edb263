use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde_json::Value;

use super::provider::{build_request, parse_response};
use super::schema::extract_json;
use super::{
    LlmConfig, LlmError, Prompt, StructuredSchema, TranscriptCache, TranscriptEntry, Transport,
    TransportError,
};

#[derive(Debug, Default)]
struct Counters {
    cache_hits: AtomicUsize,
    network_attempts: AtomicUsize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClientStats {
    pub cache_hits: usize,
    pub network_attempts: usize,
}

/// Cache-first completion client. Cheap to clone; clones share the cache,
/// transport and counters.
#[derive(Clone)]
pub struct LlmClient {
    config: LlmConfig,
    transport: Arc<dyn Transport>,
    cache: Option<TranscriptCache>,
    replay_only: bool,
    counters: Arc<Counters>,
}

impl std::fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmClient")
            .field("config", &self.config)
            .field("cache", &self.cache)
            .field("replay_only", &self.replay_only)
            .finish_non_exhaustive()
    }
}

impl LlmClient {
    pub fn new(config: LlmConfig, transport: Arc<dyn Transport>) -> Result<Self, LlmError> {
        config.validate()?;
        Ok(Self {
            config,
            transport,
            cache: None,
            replay_only: false,
            counters: Arc::default(),
        })
    }

    pub fn with_cache(mut self, cache: TranscriptCache) -> Self {
        self.cache = Some(cache);
        self
    }

    /// Serve only from the cache; a miss is [`LlmError::ReplayMiss`].
    pub fn replay_only(mut self, on: bool) -> Self {
        self.replay_only = on;
        self
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    pub fn stats(&self) -> ClientStats {
        ClientStats {
            cache_hits: self.counters.cache_hits.load(Ordering::Relaxed),
            network_attempts: self.counters.network_attempts.load(Ordering::Relaxed),
        }
    }

    pub fn complete(&self, prompt: &Prompt) -> Result<String, LlmError> {
        let fingerprint = self.config.request_fingerprint(prompt);
        if let Some(cache) = &self.cache {
            if let Some(entry) = cache.get(&fingerprint)? {
                self.counters.cache_hits.fetch_add(1, Ordering::Relaxed);
                return Ok(entry.response);
            }
        }
        if self.replay_only {
            return Err(LlmError::ReplayMiss { fingerprint });
        }
        let var = &self.config.api_key_env;
        let api_key = std::env::var(var)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| LlmError::MissingCredential { var: var.clone() })?;
        let request = build_request(&self.config, prompt, &api_key);
        let body = self.send_with_retries(&request)?;
        let text = parse_response(self.config.provider, &body)?;
        if let Some(cache) = &self.cache {
            cache.put(&TranscriptEntry::new(&self.config, prompt, text.clone()))?;
        }
        Ok(text)
    }

    fn send_with_retries(&self, request: &super::HttpRequest) -> Result<Value, LlmError> {
        let attempts = self.config.max_retries + 1;
        let mut last = None;
        for attempt in 0..attempts {
            if attempt > 0 {
                std::thread::sleep(self.config.retry_backoff * (1 << (attempt - 1).min(6)));
            }
            self.counters.network_attempts.fetch_add(1, Ordering::Relaxed);
            match self.transport.post_json(request) {
                Ok(v) => return Ok(v),
                Err(TransportError::Status { status, body }) if status == 401 || status == 403 => {
                    return Err(LlmError::Auth { status, body });
                }
                Err(e) if !e.is_retryable() => return Err(to_llm_error(e, attempt + 1)),
                Err(e) => last = Some(e),
            }
        }
        Err(to_llm_error(last.expect("at least one attempt"), attempts))
    }

    /// Completes `prompt` and validates the JSON payload against `schema`.
    /// One repair attempt appends the validation problems to the prompt.
    pub fn complete_structured(
        &self,
        prompt: &Prompt,
        schema: &StructuredSchema,
    ) -> Result<Value, LlmError> {
        let first = self.complete(prompt)?;
        let problems = match parse_and_validate(&first, schema) {
            Ok(v) => return Ok(v),
            Err(p) => p,
        };
        let repair = Prompt {
            system: prompt.system.clone(),
            user: format!(
                "{}\n\nYOUR PREVIOUS RESPONSE WAS REJECTED\n{}\n\nProblems:\n- {}\n\n\
                 Respond again with only a JSON document of the form {}",
                prompt.user,
                first.trim(),
                problems.join("\n- "),
                schema.describe()
            ),
        };
        let second = self.complete(&repair)?;
        parse_and_validate(&second, schema).map_err(|problems| LlmError::Schema {
            schema: schema.name.to_string(),
            problems,
        })
    }
}

fn parse_and_validate(text: &str, schema: &StructuredSchema) -> Result<Value, Vec<String>> {
    let value = extract_json(text).map_err(|e| vec![e])?;
    schema.validate(&value)?;
    Ok(value)
}

fn to_llm_error(e: TransportError, attempts: usize) -> LlmError {
    match e {
        TransportError::Status { status, body } => LlmError::Remote { status, body },
        TransportError::Io(message) => LlmError::Network { attempts, message },
    }
}
