use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{HttpRequest, LlmConfig, LlmError, Prompt};

/// Wire protocol spoken to the service.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    /// `models/{model}:generateContent`
    Gemini,
    /// `chat/completions` as served by OpenAI and most local gateways.
    OpenaiCompatible,
}

impl ProviderKind {
    pub fn default_endpoint(self) -> &'static str {
        match self {
            ProviderKind::Gemini => "https://generativelanguage.googleapis.com/v1beta",
            ProviderKind::OpenaiCompatible => "https://api.openai.com/v1",
        }
    }

    pub fn default_key_env(self) -> &'static str {
        match self {
            ProviderKind::Gemini => "GEMINI_API_KEY",
            ProviderKind::OpenaiCompatible => "OPENAI_API_KEY",
        }
    }
}

impl std::str::FromStr for ProviderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gemini" => Ok(ProviderKind::Gemini),
            "openai" | "openai-compatible" | "openai_compatible" => Ok(ProviderKind::OpenaiCompatible),
            other => Err(format!("unknown provider {other:?} (expected gemini or openai)")),
        }
    }
}

pub(crate) fn build_request(config: &LlmConfig, prompt: &Prompt, api_key: &str) -> HttpRequest {
    let base = config.endpoint.trim_end_matches('/');
    match config.provider {
        ProviderKind::Gemini => HttpRequest {
            url: format!("{base}/models/{}:generateContent", config.model),
            headers: vec![("x-goog-api-key".into(), api_key.into())],
            body: json!({
                "systemInstruction": { "parts": [{ "text": prompt.system }] },
                "contents": [{ "role": "user", "parts": [{ "text": prompt.user }] }],
                "generationConfig": {
                    "temperature": config.temperature,
                    "topP": config.top_p,
                },
            }),
            timeout: config.timeout,
        },
        ProviderKind::OpenaiCompatible => HttpRequest {
            url: format!("{base}/chat/completions"),
            headers: vec![("Authorization".into(), format!("Bearer {api_key}"))],
            body: json!({
                "model": config.model,
                "messages": [
                    { "role": "system", "content": prompt.system },
                    { "role": "user", "content": prompt.user },
                ],
                "temperature": config.temperature,
                "top_p": config.top_p,
            }),
            timeout: config.timeout,
        },
    }
}

pub(crate) fn parse_response(kind: ProviderKind, body: &Value) -> Result<String, LlmError> {
    let text = match kind {
        ProviderKind::Gemini => body
            .pointer("/candidates/0/content/parts")
            .and_then(Value::as_array)
            .map(|parts| {
                parts
                    .iter()
                    .filter_map(|p| p.get("text").and_then(Value::as_str))
                    .collect::<String>()
            }),
        ProviderKind::OpenaiCompatible => body
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string),
    };
    match text {
        Some(t) if !t.trim().is_empty() => Ok(t),
        _ => Err(LlmError::BadResponse(format!(
            "no completion text in {kind:?} response: {}",
            truncate(&body.to_string(), 300)
        ))),
    }
}

fn truncate(s: &str, max: usize) -> &str {
    match s.char_indices().nth(max) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}
