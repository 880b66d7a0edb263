//! Template grammar for the offline decoder.
//!
//! A sentence is a sequence of mentions (quoted spans, known labels, or
//! subject pronouns) separated by gaps. The last causal verb in a gap, with
//! the hedge right before it, sets the relation from the current subjects to
//! the mentions that follow. A negation marker right before a mention flips
//! the sign of every edge touching that mention.

use std::collections::HashMap;
use std::ops::Range;

use crate::encoder::{HedgeTable, Polarity};
use crate::text::{normalize_label, NegationLexicon};

const QUOTES: &[(char, char)] = &[('\'', '\''), ('"', '"'), ('\u{2018}', '\u{2019}'), ('\u{201c}', '\u{201d}')];

const PRONOUNS: &[&str] = &["it", "they", "this", "these", "which"];

const CONNECTORS: &[&str] = &["and", "or", "as", "well", "also", "both", "a", "an", "the"];

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn char_before(text: &str, at: usize) -> Option<char> {
    text[..at].chars().next_back()
}

fn char_after(text: &str, at: usize) -> Option<char> {
    text[at..].chars().next()
}

/// Quoted span starting at `open` (the byte index of an opening quote), as
/// (outer range, inner range).
fn quoted_at(text: &str, open: usize, limit: usize) -> Option<(Range<usize>, Range<usize>)> {
    let c = char_after(text, open)?;
    let &(_, close) = QUOTES.iter().find(|(o, _)| *o == c)?;
    if char_before(text, open).is_some_and(is_word_char) {
        return None;
    }
    let inner_start = open + c.len_utf8();
    let mut search = inner_start;
    while let Some(rel) = text[search..limit].find(close) {
        let at = search + rel;
        let end = at + close.len_utf8();
        let closes = end >= limit || !char_after(text, end).is_some_and(is_word_char);
        if closes && at > inner_start {
            let inner = &text[inner_start..at];
            if inner.trim().is_empty() {
                return None;
            }
            let lead = inner.len() - inner.trim_start().len();
            let trail = inner.len() - inner.trim_end().len();
            return Some((open..end, inner_start + lead..at - trail));
        }
        search = end;
    }
    None
}

/// Byte ranges of sentences. Splits on `.`, `!` or `?` followed by
/// whitespace or the end, and on newlines, but never inside quotes.
pub(crate) fn split_sentences(text: &str) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    let push = |out: &mut Vec<Range<usize>>, s: usize, e: usize| {
        let piece = &text[s..e];
        let lead = piece.len() - piece.trim_start().len();
        let trimmed = piece.trim();
        if !trimmed.is_empty() {
            out.push(s + lead..s + lead + trimmed.len());
        }
    };
    while i < text.len() {
        let c = char_after(text, i).expect("in bounds");
        if let Some((outer, _)) = quoted_at(text, i, text.len()) {
            i = outer.end;
            continue;
        }
        let next = i + c.len_utf8();
        if c == '\n' {
            push(&mut out, start, i);
            start = next;
        } else if matches!(c, '.' | '!' | '?')
            && char_after(text, next).map_or(true, char::is_whitespace)
        {
            push(&mut out, start, next);
            start = next;
        }
        i = next;
    }
    push(&mut out, start, text.len());
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum MentionKind {
    Quoted,
    Known,
    Pronoun,
}

#[derive(Debug, Clone)]
pub(crate) struct Mention {
    /// Label text for quoted and known mentions; the pronoun itself otherwise.
    pub surface: String,
    pub kind: MentionKind,
    pub sentence: usize,
    pub negated: bool,
    /// For pronouns, the mention they stand for.
    pub antecedent: Option<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct Clause {
    pub source: usize,
    pub target: usize,
    pub polarity: Polarity,
    pub bin: usize,
    pub sentence: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct ParsedSentence {
    pub span: Range<usize>,
    pub declaration: bool,
}

#[derive(Debug, Default)]
pub(crate) struct Parsed {
    pub sentences: Vec<ParsedSentence>,
    pub mentions: Vec<Mention>,
    pub clauses: Vec<Clause>,
    pub warnings: Vec<String>,
}

impl Parsed {
    /// Follows pronoun links to the mention that names the entity.
    pub fn resolve(&self, m: usize) -> Option<usize> {
        let mut cur = m;
        for _ in 0..self.mentions.len() + 1 {
            match self.mentions[cur].kind {
                MentionKind::Pronoun => cur = self.mentions[cur].antecedent?,
                _ => return Some(cur),
            }
        }
        None
    }

    pub fn label_of(&self, m: usize) -> Option<&str> {
        self.resolve(m).map(|r| self.mentions[r].surface.as_str())
    }

    /// Sign contributed by a mention: its own negation, times the negation
    /// of whatever a pronoun stands for.
    pub fn sign_of(&self, m: usize) -> f64 {
        let mut sign = 1.0;
        let mut cur = Some(m);
        let mut hops = 0;
        while let Some(i) = cur {
            if self.mentions[i].negated {
                sign = -sign;
            }
            cur = self.mentions[i].antecedent;
            hops += 1;
            if hops > self.mentions.len() {
                break;
            }
        }
        sign
    }

    pub fn sentence_text<'t>(&self, text: &'t str, s: usize) -> &'t str {
        &text[self.sentences[s].span.clone()]
    }
}

struct Vocabulary {
    verbs: HashMap<String, Polarity>,
    hedges: Vec<(Vec<String>, usize)>,
}

impl Vocabulary {
    fn new(table: &HedgeTable) -> Self {
        Self {
            verbs: table.verb_forms().into_iter().collect(),
            hedges: table
                .magnitude_phrases()
                .into_iter()
                .map(|(p, bin)| (p.split(' ').map(str::to_string).collect(), bin))
                .collect(),
        }
    }
}

/// Lowercased words of `text[range]` with absolute byte offsets.
fn words_in(text: &str, range: Range<usize>) -> Vec<(Range<usize>, String)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text[range.clone()].char_indices() {
        let at = range.start + i;
        match (is_word_char(c), start) {
            (true, None) => start = Some(at),
            (false, Some(s)) => {
                out.push((s..at, text[s..at].to_lowercase()));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s..range.end, text[s..range.end].to_lowercase()));
    }
    out
}

#[derive(Debug)]
struct Relation {
    polarity: Polarity,
    bin: usize,
}

struct Gap {
    relation: Option<Relation>,
    negated: bool,
    connector_only: bool,
}

fn analyze_gap(text: &str, range: Range<usize>, vocab: &Vocabulary, table: &HedgeTable, lexicon: &NegationLexicon) -> Gap {
    let words = words_in(text, range.clone());
    let verb_at = words.iter().rposition(|(_, w)| vocab.verbs.contains_key(w));
    let relation = verb_at.map(|k| {
        let polarity = vocab.verbs[&words[k].1];
        let before: Vec<&str> = words[..k].iter().map(|(_, w)| w.as_str()).collect();
        let bin = vocab
            .hedges
            .iter()
            .find(|(phrase, _)| before.ends_with(&phrase.iter().map(String::as_str).collect::<Vec<_>>()))
            .map_or(table.unhedged_bin(), |(_, bin)| *bin);
        Relation { polarity, bin }
    });
    let tail_start = verb_at.map_or(range.start, |k| words[k].0.end);
    let tail = &text[tail_start..range.end];
    let marker = lexicon.suffix_start(tail);
    let negated = marker.is_some();
    let rest_end = marker.map_or(range.end, |m| tail_start + m);
    let connector_only = verb_at.is_none()
        && words_in(text, range.start..rest_end)
            .iter()
            .all(|(_, w)| CONNECTORS.contains(&w.as_str()));
    Gap {
        relation,
        negated,
        connector_only,
    }
}

fn is_boundary(text: &str, start: usize, end: usize) -> bool {
    !char_before(text, start).is_some_and(is_word_char) && !char_after(text, end).is_some_and(is_word_char)
}

/// Unquoted occurrences of known labels in `range`, longest label first.
fn find_known(text: &str, range: Range<usize>, known: &[String], out: &mut Vec<Range<usize>>) {
    let mut i = range.start;
    'scan: while i < range.end {
        if !char_before(text, i).is_some_and(is_word_char) {
            for label in known {
                let end = i + label.len();
                if end <= range.end
                    && text.is_char_boundary(end)
                    && text[i..end].eq_ignore_ascii_case(label)
                    && is_boundary(text, i, end)
                {
                    out.push(i..end);
                    i = end;
                    continue 'scan;
                }
            }
        }
        i += char_after(text, i).map_or(1, char::len_utf8);
    }
}

/// Parses `text` into mentions and causal clauses. `known` labels are matched
/// unquoted as well.
pub(crate) fn parse(text: &str, known: &[String], table: &HedgeTable, lexicon: &NegationLexicon) -> Parsed {
    let vocab = Vocabulary::new(table);
    let mut known: Vec<String> = known.iter().map(|k| normalize_label(k)).filter(|k| !k.is_empty()).collect();
    known.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    known.dedup();

    let mut parsed = Parsed::default();
    let mut last_subject: Option<usize> = None;
    for (s, span) in split_sentences(text).into_iter().enumerate() {
        let first_mention = parsed.mentions.len();
        let mut found: Vec<(Range<usize>, MentionKind, String)> = Vec::new();

        // quoted spans, then known labels and pronouns in the unquoted gaps
        let mut unquoted = Vec::new();
        let mut i = span.start;
        let mut gap_start = span.start;
        while i < span.end {
            if let Some((outer, inner)) = quoted_at(text, i, span.end) {
                unquoted.push(gap_start..outer.start);
                found.push((outer.clone(), MentionKind::Quoted, text[inner].to_string()));
                i = outer.end;
                gap_start = i;
            } else {
                i += char_after(text, i).map_or(1, char::len_utf8);
            }
        }
        unquoted.push(gap_start..span.end);
        for region in &unquoted {
            let mut hits = Vec::new();
            find_known(text, region.clone(), &known, &mut hits);
            for r in hits {
                found.push((r.clone(), MentionKind::Known, text[r].to_string()));
            }
        }
        found.sort_by_key(|(r, _, _)| r.start);
        let mut pronouns = Vec::new();
        for region in &unquoted {
            for (r, w) in words_in(text, region.clone()) {
                if !PRONOUNS.contains(&w.as_str()) || found.iter().any(|(f, _, _)| f.start <= r.start && r.end <= f.end) {
                    continue;
                }
                // subject pronoun only: a causal verb must follow before the next mention
                let next = found.iter().map(|(f, _, _)| f.start).filter(|&st| st >= r.end).min().unwrap_or(span.end);
                if words_in(text, r.end..next).iter().any(|(_, w)| vocab.verbs.contains_key(w)) {
                    pronouns.push((r.clone(), MentionKind::Pronoun, text[r].to_string()));
                }
            }
        }
        found.extend(pronouns);
        found.sort_by_key(|(r, _, _)| r.start);

        let gaps_text: String = {
            let mut g = String::new();
            let mut at = span.start;
            for (r, _, _) in &found {
                g.push_str(&text[at..r.start]);
                g.push(' ');
                at = r.end;
            }
            g.push_str(&text[at..span.end]);
            normalize_label(&g)
        };
        let declaration = gaps_text.contains("causal variable");

        let mut subjects: Vec<usize> = Vec::new();
        let mut relation: Option<Relation> = None;
        let mut prev_end = span.start;
        for (k, (range, kind, surface)) in found.into_iter().enumerate() {
            let gap = analyze_gap(text, prev_end..range.start, &vocab, table, lexicon);
            prev_end = range.end;
            let idx = parsed.mentions.len();
            let mut mention = Mention {
                surface,
                kind,
                sentence: s,
                negated: gap.negated,
                antecedent: None,
            };
            if kind == MentionKind::Pronoun {
                mention.antecedent = if k == 0 {
                    last_subject
                } else {
                    (first_mention..idx).rev().find(|&m| parsed.mentions[m].kind != MentionKind::Pronoun)
                };
                if mention.antecedent.is_none() {
                    parsed.warnings.push(format!(
                        "sentence {s}: pronoun {:?} has no antecedent; ignored",
                        mention.surface
                    ));
                    continue;
                }
            }
            parsed.mentions.push(mention);
            if declaration {
                continue;
            }
            if k == 0 || kind == MentionKind::Pronoun {
                subjects = vec![idx];
                relation = None;
                continue;
            }
            if let Some(rel) = gap.relation {
                relation = Some(rel);
            } else if !gap.connector_only {
                parsed.warnings.push(format!(
                    "sentence {s}: no causal verb before {:?}; mention not linked",
                    parsed.mentions[idx].surface
                ));
                continue;
            }
            match &relation {
                Some(rel) => {
                    for &src in &subjects {
                        parsed.clauses.push(Clause {
                            source: src,
                            target: idx,
                            polarity: rel.polarity,
                            bin: rel.bin,
                            sentence: s,
                        });
                    }
                }
                None => subjects.push(idx),
            }
        }
        if !declaration && parsed.mentions.len() > first_mention {
            last_subject = Some(first_mention);
        }
        parsed.sentences.push(ParsedSentence { span, declaration });
    }
    parsed
}
