use std::collections::HashMap;

use serde_json::Value;

use super::grammar::split_sentences;
use super::{
    collect_pairs, node_index, DecodeError, EdgeExtraction, NodeCandidate, NounCandidate, STAGE_EDGES,
    STAGE_NODES, STAGE_NOUNS,
};
use crate::encoder::HedgeTable;
use crate::llm::{FieldKind, FieldSpec, LlmClient, Prompt, StructuredSchema};
use crate::prompts;
use crate::text::normalize_label;

pub fn nouns_schema() -> StructuredSchema {
    StructuredSchema {
        name: "candidates",
        list_field: "candidates",
        item_fields: vec![
            FieldSpec::new("surface", FieldKind::String),
            FieldSpec::new("sentence_index", FieldKind::Index),
            FieldSpec::new("antecedent", FieldKind::OptionalString),
        ],
    }
}

pub fn nodes_schema() -> StructuredSchema {
    StructuredSchema {
        name: "nodes",
        list_field: "nodes",
        item_fields: vec![
            FieldSpec::new("label", FieldKind::String),
            FieldSpec::new("evidence", FieldKind::StringList),
        ],
    }
}

pub fn edges_schema() -> StructuredSchema {
    StructuredSchema {
        name: "edges",
        list_field: "edges",
        item_fields: vec![
            FieldSpec::new("source", FieldKind::String),
            FieldSpec::new("target", FieldKind::String),
            FieldSpec::new("weight", FieldKind::Number),
            FieldSpec::new("evidence", FieldKind::String),
        ],
    }
}

fn items<'v>(value: &'v Value, field: &str) -> &'v [Value] {
    value[field].as_array().map(Vec::as_slice).unwrap_or(&[])
}

fn str_field<'v>(item: &'v Value, field: &str) -> &'v str {
    item[field].as_str().unwrap_or("")
}

/// Finds `quote` in `text`, first exactly and then ignoring case and runs of
/// whitespace. Returns the matching slice of `text`.
pub(crate) fn locate<'t>(text: &'t str, quote: &str) -> Option<&'t str> {
    let quote = quote.trim().trim_matches(|c| matches!(c, '"' | '\u{201c}' | '\u{201d}' | '\u{2026}')).trim();
    if quote.is_empty() {
        return None;
    }
    if let Some(at) = text.find(quote) {
        return Some(&text[at..at + quote.len()]);
    }
    // (byte offset, folded char) with whitespace runs collapsed
    let fold = |s: &str| -> Vec<(usize, char)> {
        let mut out: Vec<(usize, char)> = Vec::new();
        for (i, c) in s.char_indices() {
            if c.is_whitespace() {
                if out.last().is_some_and(|&(_, p)| p == ' ') {
                    continue;
                }
                out.push((i, ' '));
            } else {
                out.push((i, c.to_lowercase().next().unwrap_or(c)));
            }
        }
        out
    };
    let hay = fold(text);
    let needle: Vec<char> = fold(quote).into_iter().map(|(_, c)| c).collect();
    if needle.len() > hay.len() {
        return None;
    }
    (0..=hay.len() - needle.len()).find_map(|s| {
        hay[s..s + needle.len()].iter().map(|&(_, c)| c).eq(needle.iter().copied()).then(|| {
            let (start, _) = hay[s];
            let (last, c) = hay[s + needle.len() - 1];
            let end = last + text[last..].chars().next().map_or(c.len_utf8(), char::len_utf8);
            &text[start..end]
        })
    })
}

fn stage_err(stage: &'static str) -> impl Fn(crate::llm::LlmError) -> DecodeError {
    move |source| DecodeError::Stage { stage, source }
}

pub fn detect_nouns(
    client: &LlmClient,
    text: &str,
    warnings: &mut Vec<String>,
) -> Result<Vec<NounCandidate>, DecodeError> {
    let sentences = split_sentences(text);
    let mut user = String::from("TEXT\n");
    for (i, r) in sentences.iter().enumerate() {
        user.push_str(&format!("[{i}] {}\n", &text[r.clone()]));
    }
    let schema = nouns_schema();
    let prompt = Prompt::new(prompts::with_schema(prompts::DECODE_NOUNS, &schema.describe()), user);
    let value = client.complete_structured(&prompt, &schema).map_err(stage_err(STAGE_NOUNS))?;
    let mut out = Vec::new();
    for item in items(&value, "candidates") {
        let surface = str_field(item, "surface").trim().to_string();
        let sentence_index = item["sentence_index"].as_u64().unwrap_or(u64::MAX) as usize;
        if surface.is_empty() {
            continue;
        }
        if sentence_index >= sentences.len() {
            warnings.push(format!(
                "{STAGE_NOUNS}: candidate {surface:?} cites sentence {sentence_index} of {}; dropped",
                sentences.len()
            ));
            continue;
        }
        out.push(NounCandidate {
            surface,
            sentence_index,
            resolved_antecedent: item["antecedent"].as_str().map(str::to_string),
        });
    }
    Ok(out)
}

pub fn detect_nodes(
    client: &LlmClient,
    nouns: &[NounCandidate],
    text: &str,
    warnings: &mut Vec<String>,
) -> Result<Vec<NodeCandidate>, DecodeError> {
    let mut user = format!("TEXT\n{}\n\nNOUN CANDIDATES\n", text.trim());
    for n in nouns {
        match &n.resolved_antecedent {
            Some(a) => user.push_str(&format!("- {} (refers to {a}; sentence {})\n", n.surface, n.sentence_index)),
            None => user.push_str(&format!("- {} (sentence {})\n", n.surface, n.sentence_index)),
        }
    }
    let schema = nodes_schema();
    let prompt = Prompt::new(prompts::with_schema(prompts::DECODE_NODES, &schema.describe()), user);
    let value = client.complete_structured(&prompt, &schema).map_err(stage_err(STAGE_NODES))?;
    let mut nodes: Vec<NodeCandidate> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for item in items(&value, "nodes") {
        let label = str_field(item, "label").trim().to_string();
        let key = normalize_label(&label);
        if key.is_empty() {
            warnings.push(format!("{STAGE_NODES}: node with an empty label dropped"));
            continue;
        }
        let mut evidence = Vec::new();
        for q in items(item, "evidence").iter().filter_map(Value::as_str) {
            match locate(text, q) {
                Some(found) => evidence.push(found.to_string()),
                None => warnings.push(format!("{STAGE_NODES}: quote {q:?} for {label:?} not found in text; dropped")),
            }
        }
        match index.get(&key) {
            Some(&k) => {
                for q in evidence {
                    if !nodes[k].evidence.contains(&q) {
                        nodes[k].evidence.push(q);
                    }
                }
            }
            None => {
                index.insert(key, nodes.len());
                nodes.push(NodeCandidate { label, evidence });
            }
        }
    }
    Ok(nodes)
}

pub fn extract_edges(
    client: &LlmClient,
    table: &HedgeTable,
    nodes: &[NodeCandidate],
    text: &str,
    warnings: &mut Vec<String>,
) -> Result<EdgeExtraction, DecodeError> {
    let mut user = format!("TEXT\n{}\n\nNODES\n", text.trim());
    for (i, n) in nodes.iter().enumerate() {
        user.push_str(&format!("{}. {}\n", i + 1, n.label));
    }
    user.push_str("\nHEDGE SCALE\n");
    for b in table.bins() {
        user.push_str(&format!("{}: about {}\n", b.phrase, b.midpoint));
    }
    let schema = edges_schema();
    let prompt = Prompt::new(prompts::with_schema(prompts::DECODE_EDGES, &schema.describe()), user);
    let value = client.complete_structured(&prompt, &schema).map_err(stage_err(STAGE_EDGES))?;

    let index = node_index(nodes);
    let mut asserted = Vec::new();
    for item in items(&value, "edges") {
        let (source, target) = (str_field(item, "source"), str_field(item, "target"));
        let (Some(&s), Some(&t)) = (index.get(&normalize_label(source)), index.get(&normalize_label(target))) else {
            warnings.push(format!("{STAGE_EDGES}: edge {source:?} -> {target:?} names an unknown node; dropped"));
            continue;
        };
        let raw = item["weight"].as_f64().unwrap_or(0.0);
        let weight = raw.clamp(-1.0, 1.0);
        if weight != raw {
            warnings.push(format!("{STAGE_EDGES}: weight {raw} on {source:?} -> {target:?} clamped to {weight}"));
        }
        let quote = str_field(item, "evidence");
        let Some(evidence) = locate(text, quote) else {
            warnings.push(format!(
                "{STAGE_EDGES}: evidence {quote:?} for {source:?} -> {target:?} not found in text; edge dropped"
            ));
            continue;
        };
        if weight == 0.0 {
            continue;
        }
        asserted.push((s, t, weight, evidence.to_string()));
    }
    Ok(collect_pairs(nodes, asserted, warnings))
}
