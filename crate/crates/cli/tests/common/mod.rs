#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use fcm_core::llm::{HttpRequest, Transport, TransportError};
use fcm_core::prompts;
use serde_json::{json, Value};

/// Fails every request and counts how many were attempted.
#[derive(Default)]
pub struct Tripwire {
    pub attempts: AtomicUsize,
}

impl Tripwire {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn count(&self) -> usize {
        self.attempts.load(Ordering::SeqCst)
    }
}

impl Transport for Tripwire {
    fn post_json(&self, _: &HttpRequest) -> Result<Value, TransportError> {
        self.attempts.fetch_add(1, Ordering::SeqCst);
        Err(TransportError::Io("network access attempted under test".into()))
    }
}

pub fn gemini_reply(text: &str) -> Value {
    json!({"candidates": [{"content": {"role": "model", "parts": [{"text": text}]}}]})
}

fn system_of(request: &HttpRequest) -> &str {
    request.body.pointer("/systemInstruction/parts/0/text").and_then(Value::as_str).unwrap_or("")
}

/// Stand-in for the remote model on the replay fixture map. Each pipeline
/// stage is recognized by its system prompt and answered with a fixed reply.
#[derive(Default)]
pub struct ScriptedModel {
    pub calls: AtomicUsize,
}

pub const FIXTURE_LATENT_I: &str = "'Stress' strongly decreases 'sleep quality' and moderately causes 'fatigue'. \
'Sleep quality' strongly decreases 'fatigue'. 'Fatigue' moderately decreases 'concentration'.";

pub const FIXTURE_LATENT_II: &str = "Stress strongly erodes sleep quality and moderately adds to fatigue. \
Good sleep quality strongly protects against fatigue, while fatigue in turn moderately drives a loss of concentration.";

impl Transport for ScriptedModel {
    fn post_json(&self, request: &HttpRequest) -> Result<Value, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let system = system_of(request);
        let reply = if system == prompts::ENCODE {
            FIXTURE_LATENT_I.to_string()
        } else if system == prompts::CONTENT_EDIT {
            FIXTURE_LATENT_II.to_string()
        } else if system.starts_with(prompts::DECODE_NOUNS) {
            json!({"candidates": [
                {"surface": "Stress", "sentence_index": 0, "antecedent": null},
                {"surface": "sleep quality", "sentence_index": 0, "antecedent": null},
                {"surface": "fatigue", "sentence_index": 0, "antecedent": null},
                {"surface": "sleep quality", "sentence_index": 1, "antecedent": null},
                {"surface": "fatigue", "sentence_index": 1, "antecedent": null},
                {"surface": "loss of concentration", "sentence_index": 1, "antecedent": null}
            ]})
            .to_string()
        } else if system.starts_with(prompts::DECODE_NODES) {
            format!(
                "```json\n{}\n```",
                json!({"nodes": [
                    {"label": "Stress", "evidence": ["Stress strongly erodes sleep quality"]},
                    {"label": "Sleep quality", "evidence": ["Good sleep quality"]},
                    {"label": "Fatigue", "evidence": ["moderately adds to fatigue"]},
                    {"label": "Loss of concentration", "evidence": ["a loss of concentration"]}
                ]})
            )
        } else if system.starts_with(prompts::DECODE_EDGES) {
            json!({"edges": [
                {"source": "Stress", "target": "Sleep quality", "weight": -0.8,
                 "evidence": "Stress strongly erodes sleep quality"},
                {"source": "Stress", "target": "Fatigue", "weight": 0.55,
                 "evidence": "moderately adds to fatigue"},
                {"source": "Sleep quality", "target": "Fatigue", "weight": -0.8,
                 "evidence": "Good sleep quality strongly protects against fatigue"},
                {"source": "Fatigue", "target": "Loss of concentration", "weight": 0.55,
                 "evidence": "fatigue in turn moderately drives a loss of concentration"}
            ]})
            .to_string()
        } else {
            return Err(TransportError::Status { status: 400, body: "unrecognized prompt".into() });
        };
        Ok(gemini_reply(&reply))
    }
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub fn replay_target() -> PathBuf {
    fixtures_dir().join("replay").join("target.json")
}

pub fn replay_cache() -> PathBuf {
    fixtures_dir().join("replay").join("cache")
}

/// `fcm` followed by `args`, as an argument vector.
pub fn argv<S: AsRef<str>>(args: &[S]) -> Vec<String> {
    std::iter::once("fcm".to_string()).chain(args.iter().map(|s| s.as_ref().to_string())).collect()
}

pub fn path_str(p: &Path) -> String {
    p.display().to_string()
}

/// Every regular file under `dir` as (relative path, bytes), sorted.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out);
    out.sort();
    out
}

/// A manifest with its wall-clock timings removed.
pub fn manifest_without_timings(bytes: &[u8]) -> Value {
    let mut v: Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("timings");
    v
}
