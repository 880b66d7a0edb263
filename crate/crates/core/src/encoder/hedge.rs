use std::fmt;

use serde::{Deserialize, Serialize};

use super::EncodeError;
use crate::text::normalize_label;

/// One magnitude bin covering `|w|` in `(lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HedgeBin {
    pub lower: f64,
    pub upper: f64,
    /// Canonical phrase used when encoding.
    pub phrase: String,
    /// Weight magnitude a decoded phrase maps back to.
    pub midpoint: f64,
    /// Further phrases accepted when decoding.
    #[serde(default)]
    pub aliases: Vec<String>,
}

impl HedgeBin {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, magnitude: f64) -> bool {
        magnitude > self.lower && magnitude <= self.upper
    }
}

/// Maps weight magnitudes to hedge words and signs to verbs, and back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTable")]
pub struct HedgeTable {
    bins: Vec<HedgeBin>,
    positive_verbs: Vec<String>,
    negative_verbs: Vec<String>,
    unhedged_bin: usize,
}

#[derive(Serialize, Deserialize)]
struct RawTable {
    bins: Vec<HedgeBin>,
    positive_verbs: Vec<String>,
    negative_verbs: Vec<String>,
    /// Bin assumed for a causal verb with no hedge in front of it.
    unhedged_bin: usize,
}

impl TryFrom<RawTable> for HedgeTable {
    type Error = EncodeError;

    fn try_from(raw: RawTable) -> Result<Self, Self::Error> {
        HedgeTable::new(raw.bins, raw.positive_verbs, raw.negative_verbs, raw.unhedged_bin)
    }
}

impl From<HedgeTable> for RawTable {
    fn from(t: HedgeTable) -> Self {
        RawTable {
            bins: t.bins,
            positive_verbs: t.positive_verbs,
            negative_verbs: t.negative_verbs,
            unhedged_bin: t.unhedged_bin,
        }
    }
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Default for HedgeTable {
    fn default() -> Self {
        let bin = |lower, upper, phrase: &str, midpoint, aliases: &[&str]| HedgeBin {
            lower,
            upper,
            phrase: phrase.into(),
            midpoint,
            aliases: words(aliases),
        };
        Self::new(
            vec![
                bin(0.0, 0.2, "slightly", 0.1, &["weakly", "mildly", "marginally"]),
                bin(0.2, 0.4, "somewhat", 0.3, &["modestly", "partially"]),
                bin(0.4, 0.7, "moderately", 0.55, &["fairly", "noticeably"]),
                bin(
                    0.7,
                    0.9,
                    "strongly",
                    0.8,
                    &["significantly", "substantially", "greatly", "heavily", "markedly"],
                ),
                bin(
                    0.9,
                    1.0,
                    "very strongly",
                    0.95,
                    &["very significantly", "extremely", "overwhelmingly", "dramatically"],
                ),
            ],
            words(&["causes", "increases", "intensifies", "worsens", "raises", "triggers"]),
            words(&["decreases", "reduces", "suppresses", "inhibits", "alleviates"]),
            2,
        )
        .expect("default hedge table is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }
}

/// A quantized weight: a magnitude phrase and a verb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HedgePhrase {
    pub bin: usize,
    pub polarity: Polarity,
    pub magnitude: String,
    pub verb: String,
}

impl fmt::Display for HedgePhrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.magnitude, self.verb)
    }
}

/// Base form, present participle and past tense of a third-person verb
/// ("intensifies" gives "intensify", "intensifying", "intensified").
pub fn inflections(third_person: &str) -> Vec<String> {
    let w = third_person;
    let mut out = vec![w.to_string()];
    if let Some(stem) = w.strip_suffix("ies") {
        out.extend([format!("{stem}y"), format!("{stem}ying"), format!("{stem}ied")]);
    } else if ["sses", "shes", "ches", "xes", "zes"].iter().any(|s| w.ends_with(s)) {
        let base = &w[..w.len() - 2];
        out.extend([base.to_string(), format!("{base}ing"), format!("{base}ed")]);
    } else if let Some(base) = w.strip_suffix('s') {
        out.push(base.to_string());
        match base.strip_suffix('e') {
            Some(b) => out.extend([format!("{b}ing"), format!("{base}d")]),
            None => out.extend([format!("{base}ing"), format!("{base}ed")]),
        }
    }
    out
}

impl HedgeTable {
    pub fn new(
        bins: Vec<HedgeBin>,
        positive_verbs: Vec<String>,
        negative_verbs: Vec<String>,
        unhedged_bin: usize,
    ) -> Result<Self, EncodeError> {
        let bad = |msg: String| Err(EncodeError::InvalidTable(msg));
        if bins.is_empty() {
            return bad("no bins".into());
        }
        let mut expected_lower = 0.0;
        let mut phrases = std::collections::HashSet::new();
        for (i, b) in bins.iter().enumerate() {
            if b.lower != expected_lower {
                return bad(format!(
                    "bin {i} starts at {} but the previous bin ends at {expected_lower}",
                    b.lower
                ));
            }
            if !(b.upper > b.lower) {
                return bad(format!("bin {i} is empty: ({}, {}]", b.lower, b.upper));
            }
            if !b.contains(b.midpoint) {
                return bad(format!(
                    "bin {i} midpoint {} lies outside ({}, {}]",
                    b.midpoint, b.lower, b.upper
                ));
            }
            for p in std::iter::once(&b.phrase).chain(&b.aliases) {
                let key = normalize_label(p);
                if key.is_empty() {
                    return bad(format!("bin {i} has an empty phrase"));
                }
                if !phrases.insert(key) {
                    return bad(format!("phrase {p:?} appears more than once"));
                }
            }
            expected_lower = b.upper;
        }
        if expected_lower != 1.0 {
            return bad(format!("bins end at {expected_lower} instead of 1"));
        }
        if positive_verbs.is_empty() || negative_verbs.is_empty() {
            return bad("both verb sets need at least one verb".into());
        }
        let mut forms = std::collections::HashSet::new();
        for v in positive_verbs.iter().chain(&negative_verbs) {
            if v.is_empty() || v.contains(char::is_whitespace) || v.to_lowercase() != *v {
                return bad(format!("verb {v:?} must be a single lowercase word"));
            }
            for form in inflections(v) {
                if !forms.insert(form.clone()) {
                    return bad(format!("verb form {form:?} is ambiguous"));
                }
            }
        }
        if unhedged_bin >= bins.len() {
            return bad(format!("unhedged_bin {unhedged_bin} is out of range"));
        }
        Ok(Self {
            bins,
            positive_verbs,
            negative_verbs,
            unhedged_bin,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, EncodeError> {
        serde_json::from_str(text).map_err(|e| EncodeError::InvalidTable(e.to_string()))
    }

    pub fn bins(&self) -> &[HedgeBin] {
        &self.bins
    }

    pub fn verbs(&self, polarity: Polarity) -> &[String] {
        match polarity {
            Polarity::Positive => &self.positive_verbs,
            Polarity::Negative => &self.negative_verbs,
        }
    }

    pub fn unhedged_bin(&self) -> usize {
        self.unhedged_bin
    }

    /// Index of the bin containing `|w|`; `None` for zero.
    pub fn bin_of(&self, w: f64) -> Result<Option<usize>, EncodeError> {
        if !(w.abs() <= 1.0) {
            return Err(EncodeError::WeightRange(w));
        }
        if w == 0.0 {
            return Ok(None);
        }
        Ok(self.bins.iter().position(|b| b.contains(w.abs())))
    }

    /// Signed weight a decoded phrase stands for.
    pub fn weight(&self, bin: usize, polarity: Polarity) -> f64 {
        polarity.sign() * self.bins[bin].midpoint
    }

    /// Every accepted magnitude phrase with its bin, longest first.
    pub fn magnitude_phrases(&self) -> Vec<(String, usize)> {
        let mut out: Vec<(String, usize)> = self
            .bins
            .iter()
            .enumerate()
            .flat_map(|(i, b)| {
                std::iter::once(&b.phrase)
                    .chain(&b.aliases)
                    .map(move |p| (normalize_label(p), i))
            })
            .collect();
        out.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        out
    }

    /// Every accepted verb form with its polarity.
    pub fn verb_forms(&self) -> Vec<(String, Polarity)> {
        let mut out = Vec::new();
        for (verbs, pol) in [
            (&self.positive_verbs, Polarity::Positive),
            (&self.negative_verbs, Polarity::Negative),
        ] {
            for v in verbs {
                out.extend(inflections(v).into_iter().map(|f| (f, pol)));
            }
        }
        out
    }
}

/// The canonical phrase for `w`, or `None` when `w` is zero.
pub fn quantize_weight(w: f64, table: &HedgeTable) -> Result<Option<HedgePhrase>, EncodeError> {
    let Some(bin) = table.bin_of(w)? else {
        return Ok(None);
    };
    let polarity = if w > 0.0 {
        Polarity::Positive
    } else {
        Polarity::Negative
    };
    Ok(Some(HedgePhrase {
        bin,
        polarity,
        magnitude: table.bins[bin].phrase.clone(),
        verb: table.verbs(polarity)[0].clone(),
    }))
}

/// Like [`quantize_weight`] but renders zero as `"none"`.
pub fn describe_weight(w: f64, table: &HedgeTable) -> Result<String, EncodeError> {
    Ok(quantize_weight(w, table)?.map_or_else(|| "none".to_string(), |p| p.to_string()))
}
