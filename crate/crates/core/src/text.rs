//! Label normalization, label similarity, and negation markers.

use serde::{Deserialize, Serialize};

/// Lowercases, trims, and collapses internal whitespace.
pub fn normalize_label(label: &str) -> String {
    label
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "of", "for", "to", "or", "and", "in", "on", "with", "by", "at", "from",
];

const ARTICLES: &[&str] = &["a", "an", "the"];

/// Lowercased alphanumeric tokens; hyphens and punctuation split words.
pub fn tokens(label: &str) -> Vec<String> {
    label
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Tokens without stopwords; falls back to all tokens when nothing remains.
pub fn content_tokens(label: &str) -> Vec<String> {
    let all = tokens(label);
    let content: Vec<String> = all
        .iter()
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
        .cloned()
        .collect();
    if content.is_empty() {
        all
    } else {
        content
    }
}

fn common_prefix(a: &str, b: &str) -> usize {
    a.chars().zip(b.chars()).take_while(|(x, y)| x == y).count()
}

/// Similarity of two single words in `[0, 1]`. Words sharing a stem-like
/// prefix of four or more characters ("mitoses"/"mitotic") score at least
/// 0.8.
pub fn token_similarity(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    let chars = strsim::normalized_levenshtein(a, b);
    if common_prefix(a, b) >= 4 {
        chars.max(0.8)
    } else {
        chars
    }
}

const SOFT_MATCH: f64 = 0.75;
const CONTAINMENT_WEIGHT: f64 = 0.8;

/// Edit distance over token sequences where substituting one token for
/// another costs `1 - token_similarity`.
fn soft_edit_distance(a: &[String], b: &[String]) -> f64 {
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64).collect();
    for (i, ta) in a.iter().enumerate() {
        let mut cur = vec![(i + 1) as f64; b.len() + 1];
        for (j, tb) in b.iter().enumerate() {
            let sub = prev[j] + (1.0 - token_similarity(ta, tb));
            cur[j + 1] = sub.min(prev[j + 1] + 1.0).min(cur[j] + 1.0);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Fraction of the shorter sequence's tokens that softly match some token of
/// the longer one.
fn containment(a: &[String], b: &[String]) -> f64 {
    let one_way = |short: &[String], long: &[String]| {
        if short.is_empty() {
            return 0.0;
        }
        let hits = short
            .iter()
            .filter(|s| long.iter().any(|l| token_similarity(s, l) >= SOFT_MATCH))
            .count();
        hits as f64 / short.len() as f64
    };
    match a.len().cmp(&b.len()) {
        std::cmp::Ordering::Less => one_way(a, b),
        std::cmp::Ordering::Greater => one_way(b, a),
        std::cmp::Ordering::Equal => one_way(a, b).max(one_way(b, a)),
    }
}

/// Label similarity in `[0, 1]`: the larger of a normalized soft token edit
/// similarity and a discounted containment score, both over content tokens.
/// Identical labels score 1; a label wholly contained in a longer one
/// ("Worthlessness" in "Feelings of worthlessness") scores 0.8.
pub fn label_similarity(a: &str, b: &str) -> f64 {
    let (ta, tb) = (content_tokens(a), content_tokens(b));
    let longest = ta.len().max(tb.len());
    if longest == 0 {
        return if normalize_label(a) == normalize_label(b) { 1.0 } else { 0.0 };
    }
    let edit = 1.0 - soft_edit_distance(&ta, &tb) / longest as f64;
    edit.max(CONTAINMENT_WEIGHT * containment(&ta, &tb)).clamp(0.0, 1.0)
}

/// Leading markers that turn a label into its opposite ("loss of appetite"
/// versus "appetite").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegationLexicon {
    markers: Vec<String>,
}

impl Default for NegationLexicon {
    fn default() -> Self {
        Self::new([
            "loss of",
            "lack of",
            "reduced",
            "diminished",
            "decreased",
            "no",
            "absence of",
        ])
    }
}

impl NegationLexicon {
    pub fn new<I, S>(markers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut markers: Vec<String> = markers
            .into_iter()
            .map(|m| normalize_label(m.as_ref()))
            .filter(|m| !m.is_empty())
            .collect();
        // longest first so "loss of" wins over a hypothetical "loss"
        markers.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        markers.dedup();
        Self { markers }
    }

    /// One marker per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self::new(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn markers(&self) -> &[String] {
        &self.markers
    }

    /// Splits a leading negation marker (after an optional article) off a
    /// label: `"A loss of appetite"` gives `(true, "appetite")`.
    pub fn strip(&self, label: &str) -> (bool, String) {
        let norm = normalize_label(label);
        let mut rest = norm.as_str();
        if let Some((first, tail)) = rest.split_once(' ') {
            if ARTICLES.contains(&first) {
                rest = tail;
            }
        }
        for marker in &self.markers {
            if let Some(tail) = rest.strip_prefix(marker.as_str()) {
                if let Some(head) = tail.strip_prefix(' ') {
                    if !head.is_empty() {
                        return (true, head.to_string());
                    }
                }
            }
        }
        (false, norm)
    }

    /// True when `text` ends with a marker on a word boundary, optionally
    /// preceded by an article: `"... and a loss of "` qualifies.
    pub fn ends_with_marker(&self, text: &str) -> bool {
        self.suffix_start(text).is_some()
    }

    /// Byte offset in `text` where a trailing marker (and any article just
    /// before it) begins.
    pub fn suffix_start(&self, text: &str) -> Option<usize> {
        let words: Vec<(usize, &str)> = text
            .split_whitespace()
            .map(|w| (w.as_ptr() as usize - text.as_ptr() as usize, w))
            .collect();
        for marker in &self.markers {
            let mw: Vec<&str> = marker.split(' ').collect();
            if mw.len() > words.len() {
                continue;
            }
            let tail = &words[words.len() - mw.len()..];
            if tail.iter().zip(&mw).all(|((_, w), m)| w.to_lowercase() == *m) {
                let k = words.len() - mw.len();
                return Some(match k.checked_sub(1).map(|p| words[p]) {
                    Some((at, w)) if ARTICLES.contains(&w.to_lowercase().as_str()) => at,
                    _ => words[k].0,
                });
            }
        }
        None
    }
}
