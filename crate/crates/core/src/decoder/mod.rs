//! Text to FCM in three stages: noun detection, node detection and edge
//! extraction. Each stage runs either on the offline template grammar or
//! through a language model.

mod grammar;
mod llm;

use std::collections::HashMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoder::HedgeTable;
use crate::fcm::{Fcm, FcmError};
use crate::llm::{LlmClient, LlmError};
use crate::text::{normalize_label, NegationLexicon};

use grammar::MentionKind;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error("input text is empty")]
    EmptyText,
    #[error("no causal variables recognized in the text")]
    NoNodes,
    #[error("edge endpoint {label:?} is not a node")]
    DanglingEndpoint { label: String },
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: LlmError,
    },
    #[error(transparent)]
    Fcm(#[from] FcmError),
}

pub const STAGE_NOUNS: &str = "noun detection";
pub const STAGE_NODES: &str = "node detection";
pub const STAGE_EDGES: &str = "edge extraction";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounCandidate {
    pub surface: String,
    pub sentence_index: usize,
    pub resolved_antecedent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCandidate {
    pub label: String,
    /// Verbatim quotes from the source text.
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedEdge {
    pub source_label: String,
    pub target_label: String,
    pub weight: f64,
    /// Verbatim quote from the source text.
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeExtraction {
    pub edges: Vec<ExtractedEdge>,
    /// Ordered node pairs looked at; always `n * n - n`.
    pub pairs_examined: usize,
}

/// A reconstructed map with the evidence behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub fcm: Fcm,
    pub nodes: Vec<NodeCandidate>,
    pub edges: Vec<ExtractedEdge>,
    pub pairs_examined: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub enum Backend<'a> {
    Deterministic,
    Llm(&'a LlmClient),
}

#[derive(Debug, Clone, Copy)]
pub struct Decoder<'a> {
    table: &'a HedgeTable,
    lexicon: &'a NegationLexicon,
    backend: Backend<'a>,
}

/// Keeps the last assertion for each ordered pair and emits one edge per
/// pair that has one, counting every pair visited.
pub(crate) fn collect_pairs(
    nodes: &[NodeCandidate],
    asserted: Vec<(usize, usize, f64, String)>,
    warnings: &mut Vec<String>,
) -> EdgeExtraction {
    let mut by_pair: HashMap<(usize, usize), (f64, String)> = HashMap::new();
    for (s, t, w, evidence) in asserted {
        if s == t {
            warnings.push(format!("ignored self-link on {:?}", nodes[s].label));
            continue;
        }
        if let Some((old, _)) = by_pair.insert((s, t), (w, evidence)) {
            warnings.push(format!(
                "edge {:?} -> {:?} asserted more than once; kept the last ({w}, replacing {old})",
                nodes[s].label, nodes[t].label
            ));
        }
    }
    let n = nodes.len();
    let mut edges = Vec::new();
    let mut pairs_examined = 0;
    for s in 0..n {
        for t in 0..n {
            if s == t {
                continue;
            }
            pairs_examined += 1;
            if let Some((weight, evidence)) = by_pair.remove(&(s, t)) {
                edges.push(ExtractedEdge {
                    source_label: nodes[s].label.clone(),
                    target_label: nodes[t].label.clone(),
                    weight,
                    evidence,
                });
            }
        }
    }
    EdgeExtraction { edges, pairs_examined }
}

fn node_index(nodes: &[NodeCandidate]) -> HashMap<String, usize> {
    nodes.iter().enumerate().map(|(i, n)| (normalize_label(&n.label), i)).collect()
}

impl<'a> Decoder<'a> {
    pub fn new(table: &'a HedgeTable, lexicon: &'a NegationLexicon, backend: Backend<'a>) -> Self {
        Self { table, lexicon, backend }
    }

    pub fn detect_nouns(&self, text: &str, warnings: &mut Vec<String>) -> Result<Vec<NounCandidate>, DecodeError> {
        if text.trim().is_empty() {
            return Err(DecodeError::EmptyText);
        }
        match self.backend {
            Backend::Llm(client) => llm::detect_nouns(client, text, warnings),
            Backend::Deterministic => {
                let parsed = grammar::parse(text, &[], self.table, self.lexicon);
                warnings.extend(parsed.warnings.iter().cloned());
                Ok(parsed
                    .mentions
                    .iter()
                    .enumerate()
                    .map(|(i, m)| NounCandidate {
                        surface: m.surface.clone(),
                        sentence_index: m.sentence,
                        resolved_antecedent: match m.kind {
                            MentionKind::Pronoun => parsed.label_of(i).map(str::to_string),
                            _ => None,
                        },
                    })
                    .collect())
            }
        }
    }

    pub fn detect_nodes(
        &self,
        nouns: &[NounCandidate],
        text: &str,
        warnings: &mut Vec<String>,
    ) -> Result<Vec<NodeCandidate>, DecodeError> {
        match self.backend {
            Backend::Llm(client) => llm::detect_nodes(client, nouns, text, warnings),
            Backend::Deterministic => {
                let known: Vec<String> = nouns
                    .iter()
                    .filter(|n| n.resolved_antecedent.is_none())
                    .map(|n| n.surface.clone())
                    .collect();
                // warnings were already reported by noun detection
                let parsed = grammar::parse(text, &known, self.table, self.lexicon);
                let mut causal = vec![false; parsed.mentions.len()];
                for c in &parsed.clauses {
                    for m in [c.source, c.target] {
                        if let Some(r) = parsed.resolve(m) {
                            causal[r] = true;
                        }
                    }
                }
                let mut nodes: Vec<NodeCandidate> = Vec::new();
                let mut index: HashMap<String, usize> = HashMap::new();
                for (i, m) in parsed.mentions.iter().enumerate() {
                    if m.kind == MentionKind::Pronoun {
                        continue;
                    }
                    let declared = parsed.sentences[m.sentence].declaration;
                    let key = normalize_label(&m.surface);
                    let sentence = parsed.sentence_text(text, m.sentence).to_string();
                    match index.get(&key) {
                        Some(&k) => {
                            if !nodes[k].evidence.contains(&sentence) {
                                nodes[k].evidence.push(sentence);
                            }
                        }
                        None if declared || causal[i] || parsed.mentions.iter().enumerate().any(|(j, o)| {
                            causal[j] && normalize_label(&o.surface) == key
                        }) =>
                        {
                            index.insert(key, nodes.len());
                            nodes.push(NodeCandidate {
                                label: m.surface.clone(),
                                evidence: vec![sentence],
                            });
                        }
                        None => {}
                    }
                }
                Ok(nodes)
            }
        }
    }

    pub fn extract_edges(
        &self,
        nodes: &[NodeCandidate],
        text: &str,
        warnings: &mut Vec<String>,
    ) -> Result<EdgeExtraction, DecodeError> {
        if nodes.is_empty() {
            return Err(DecodeError::NoNodes);
        }
        match self.backend {
            Backend::Llm(client) => llm::extract_edges(client, self.table, nodes, text, warnings),
            Backend::Deterministic => {
                let known: Vec<String> = nodes.iter().map(|n| n.label.clone()).collect();
                let parsed = grammar::parse(text, &known, self.table, self.lexicon);
                let index = node_index(nodes);
                let mut asserted = Vec::new();
                for c in &parsed.clauses {
                    let (Some(s), Some(t)) = (parsed.label_of(c.source), parsed.label_of(c.target)) else {
                        continue;
                    };
                    let (Some(&s), Some(&t)) = (index.get(&normalize_label(s)), index.get(&normalize_label(t)))
                    else {
                        continue;
                    };
                    let w = self.table.weight(c.bin, c.polarity) * parsed.sign_of(c.source) * parsed.sign_of(c.target);
                    asserted.push((s, t, w, parsed.sentence_text(text, c.sentence).to_string()));
                }
                Ok(collect_pairs(nodes, asserted, warnings))
            }
        }
    }

    /// Runs all three stages and assembles the map.
    pub fn decode(&self, text: &str) -> Result<Decoded, DecodeError> {
        let mut warnings = Vec::new();
        let nouns = self.detect_nouns(text, &mut warnings)?;
        let nodes = self.detect_nodes(&nouns, text, &mut warnings)?;
        if nodes.is_empty() {
            return Err(DecodeError::NoNodes);
        }
        let extraction = self.extract_edges(&nodes, text, &mut warnings)?;
        let fcm = assemble_fcm(&nodes, &extraction.edges)?;
        Ok(Decoded {
            fcm,
            nodes,
            edges: extraction.edges,
            pairs_examined: extraction.pairs_examined,
            warnings,
        })
    }
}

/// Builds the map; pairs without an edge get weight 0.
pub fn assemble_fcm(nodes: &[NodeCandidate], edges: &[ExtractedEdge]) -> Result<Fcm, DecodeError> {
    let index = node_index(nodes);
    let mut matrix = Array2::zeros((nodes.len(), nodes.len()));
    for e in edges {
        let find = |label: &str| {
            index
                .get(&normalize_label(label))
                .copied()
                .ok_or_else(|| DecodeError::DanglingEndpoint { label: label.to_string() })
        };
        matrix[[find(&e.source_label)?, find(&e.target_label)?]] = e.weight;
    }
    let labels: Vec<&str> = nodes.iter().map(|n| n.label.as_str()).collect();
    Ok(Fcm::new(&labels, matrix)?)
}

/// Offline inverse of [`crate::encoder::deterministic_encode`].
pub fn deterministic_decode(text: &str, table: &HedgeTable, lexicon: &NegationLexicon) -> Result<Decoded, DecodeError> {
    Decoder::new(table, lexicon, Backend::Deterministic).decode(text)
}

/// Three successive model calls, each validated before the next.
pub fn llm_decode(
    text: &str,
    client: &LlmClient,
    table: &HedgeTable,
    lexicon: &NegationLexicon,
) -> Result<Decoded, DecodeError> {
    Decoder::new(table, lexicon, Backend::Llm(client)).decode(text)
}
