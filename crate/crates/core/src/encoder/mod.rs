//! FCM to text: hedge-table quantization, a deterministic template encoder,
//! and the prompts that drive a language model through the same step.

mod hedge;

pub use hedge::{
    describe_weight, inflections, quantize_weight, HedgeBin, HedgePhrase, HedgeTable, Polarity,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fcm::Fcm;
use crate::llm::{LlmClient, LlmError, Prompt};
use crate::prompts;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodeError {
    #[error("weight {0} is outside [-1, 1]")]
    WeightRange(f64),
    #[error("invalid hedge table: {0}")]
    InvalidTable(String),
    #[error("expected a stage {expected} summary, got stage {actual}")]
    StageMismatch { expected: Stage, actual: Stage },
    #[error("summary text is empty")]
    EmptySummary,
    #[error(transparent)]
    Llm(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Detailed text produced straight from the map.
    I,
    /// Text rewritten for naturalness.
    II,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::I => "I",
            Stage::II => "II",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Deterministic,
    Llm { model: String, config_fingerprint: String },
}

impl Provenance {
    fn of(client: &LlmClient) -> Self {
        Provenance::Llm {
            model: client.config().model.clone(),
            config_fingerprint: client.config().fingerprint(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSummary")]
pub struct LatentSummary {
    pub text: String,
    pub stage: Stage,
    pub word_count: usize,
    pub provenance: Provenance,
}

#[derive(Deserialize)]
struct RawSummary {
    text: String,
    stage: Stage,
    provenance: Provenance,
}

impl TryFrom<RawSummary> for LatentSummary {
    type Error = EncodeError;

    fn try_from(r: RawSummary) -> Result<Self, Self::Error> {
        LatentSummary::new(r.text, r.stage, r.provenance)
    }
}

impl LatentSummary {
    pub fn new(
        text: impl Into<String>,
        stage: Stage,
        provenance: Provenance,
    ) -> Result<Self, EncodeError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(EncodeError::EmptySummary);
        }
        Ok(Self {
            word_count: text.split_whitespace().count(),
            text,
            stage,
            provenance,
        })
    }
}

/// Wraps a label in quotes the decoder can find again.
fn quote(label: &str) -> String {
    if !label.contains('\'') {
        format!("'{label}'")
    } else if !label.contains('"') {
        format!("\"{label}\"")
    } else {
        format!("\u{201c}{label}\u{201d}")
    }
}

fn join_list(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

/// One sentence per source node, sources with more incident edges first.
/// The opening sentence declares every node so isolated ones survive a
/// round trip.
pub fn deterministic_encode(fcm: &Fcm, table: &HedgeTable) -> LatentSummary {
    let labels: Vec<String> = fcm.labels().iter().map(|l| quote(l)).collect();
    let mut text = match labels.as_slice() {
        [only] => format!("The only causal variable is {only}."),
        _ => format!("The causal variables are {}.", join_list(&labels)),
    };

    let importance = fcm.node_degree_importance(0.0);
    let mut sources: Vec<usize> = (0..fcm.len())
        .filter(|&i| (0..fcm.len()).any(|j| fcm.weight(i, j) != 0.0))
        .collect();
    sources.sort_by(|&a, &b| importance[b].cmp(&importance[a]).then(a.cmp(&b)));

    let mut sentences = Vec::with_capacity(sources.len());
    for i in sources {
        // group targets sharing a phrase, in order of first appearance
        let mut groups: Vec<(String, Vec<String>)> = Vec::new();
        for j in 0..fcm.len() {
            let phrase = match quantize_weight(fcm.weight(i, j), table) {
                Ok(Some(p)) => p.to_string(),
                Ok(None) => continue,
                Err(e) => unreachable!("validated FCM weight: {e}"),
            };
            match groups.iter_mut().find(|(p, _)| *p == phrase) {
                Some((_, targets)) => targets.push(labels[j].clone()),
                None => groups.push((phrase, vec![labels[j].clone()])),
            }
        }
        let clauses: Vec<String> = groups
            .iter()
            .map(|(phrase, targets)| format!("{phrase} {}", join_list(targets)))
            .collect();
        sentences.push(format!("{} {}.", labels[i], clauses.join(", and ")));
    }
    text.push_str("\n\n");
    if sentences.is_empty() {
        text.push_str("There are no causal links between the variables.");
    } else {
        text.push_str(&sentences.join(" "));
    }
    LatentSummary::new(text, Stage::I, Provenance::Deterministic).expect("non-empty text")
}

fn format_weight(w: f64) -> String {
    // avoid "-0"
    if w == 0.0 {
        "0".into()
    } else {
        format!("{w}")
    }
}

/// Encoding prompt: the node list and the full edge matrix, one row per
/// source node.
pub fn build_encoding_prompt(fcm: &Fcm) -> Prompt {
    let mut user = String::from("NODE LIST\n");
    for (i, label) in fcm.labels().iter().enumerate() {
        user.push_str(&format!("C{}: {label}\n", i + 1));
    }
    user.push_str("\nEDGE MATRIX\n");
    for i in 0..fcm.len() {
        let row: Vec<String> = (0..fcm.len()).map(|j| format_weight(fcm.weight(i, j))).collect();
        user.push_str(&format!("C{}: {}\n", i + 1, row.join(" ")));
    }
    Prompt::new(prompts::ENCODE, user)
}

fn require_stage(summary: &LatentSummary, expected: Stage) -> Result<(), EncodeError> {
    if summary.stage != expected {
        return Err(EncodeError::StageMismatch {
            expected,
            actual: summary.stage,
        });
    }
    Ok(())
}

pub fn build_content_edit_prompt(latent1: &LatentSummary) -> Result<Prompt, EncodeError> {
    require_stage(latent1, Stage::I)?;
    Ok(Prompt::new(prompts::CONTENT_EDIT, latent1.text.clone()))
}

pub fn llm_encode(fcm: &Fcm, client: &LlmClient) -> Result<LatentSummary, EncodeError> {
    let text = client.complete(&build_encoding_prompt(fcm))?;
    LatentSummary::new(text.trim(), Stage::I, Provenance::of(client))
}

pub fn llm_content_edit(
    latent1: &LatentSummary,
    client: &LlmClient,
) -> Result<LatentSummary, EncodeError> {
    let prompt = build_content_edit_prompt(latent1)?;
    let text = client.complete(&prompt)?;
    LatentSummary::new(text.trim(), Stage::II, Provenance::of(client))
}
