//! Checks that extracted names have textual support in the cleaned payload.
//!
//! Text is casefolded, punctuation becomes whitespace, and whitespace is
//! collapsed. Tokens compare equal after dropping one trailing `s`, so
//! "Cloud recordings" is supported by "cloud recording". A name's similarity
//! is the best Dice coefficient over its tokens and any window of the page
//! whose length is within one token of the name's.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::Regex;

use crate::category::Category;
use crate::diagnostics::{Code, Diagnostic, Ledger, Subject};
use crate::extract::ExtractionRecord;

pub const DEFAULT_GROUNDING_THRESHOLD: f64 = 0.85;

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"<[^>]*>"#).unwrap())
}

fn label_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#"(?:aria-label|alt)="([^"]*)""#).unwrap())
}

fn stem(token: &str) -> String {
    match token.strip_suffix('s') {
        Some(rest) if token.chars().count() > 3 && !rest.ends_with('s') => rest.to_string(),
        _ => token.to_string(),
    }
}

/// Normalized tokens of `text`.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    let folded: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    folded.split_whitespace().map(stem).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub similarity: f64,
    /// Best window of the page, normalized.
    pub nearest: String,
}

#[derive(Debug, Clone)]
pub struct GroundingIndex {
    tokens: Vec<String>,
    /// Tokens joined with single spaces and padded, for substring lookups.
    joined: String,
}

impl GroundingIndex {
    /// Indexes cleaned payload markup: tags are removed, but `aria-label`
    /// and `alt` values count as page text.
    pub fn new(payload: &str) -> Self {
        let labels: Vec<&str> = label_re().captures_iter(payload).map(|c| c.get(1).unwrap().as_str()).collect();
        let text = tag_re().replace_all(payload, " ");
        let mut all = text.into_owned();
        for label in labels {
            all.push(' ');
            all.push_str(label);
        }
        let all = all
            .replace("&lt;", "<")
            .replace("&gt;", ">")
            .replace("&quot;", "\"")
            .replace("&amp;", "&");
        let tokens = normalize_tokens(&all);
        let joined = format!(" {} ", tokens.join(" "));
        GroundingIndex { tokens, joined }
    }

    pub fn lookup(&self, name: &str) -> Match {
        let query = normalize_tokens(name);
        if query.is_empty() {
            return Match { similarity: 0.0, nearest: String::new() };
        }
        let phrase = query.join(" ");
        if self.joined.contains(&format!(" {phrase} ")) {
            return Match { similarity: 1.0, nearest: phrase };
        }
        let mut wanted: HashMap<&str, usize> = HashMap::new();
        for q in &query {
            *wanted.entry(q.as_str()).or_default() += 1;
        }
        let n = query.len();
        let mut best = Match { similarity: 0.0, nearest: String::new() };
        for width in n.saturating_sub(1).max(1)..=n + 1 {
            if width > self.tokens.len() {
                break;
            }
            for window in self.tokens.windows(width) {
                let mut remaining = wanted.clone();
                let mut common = 0;
                for t in window {
                    if let Some(c) = remaining.get_mut(t.as_str()) {
                        if *c > 0 {
                            *c -= 1;
                            common += 1;
                        }
                    }
                }
                let dice = 2.0 * common as f64 / (n + width) as f64;
                if dice > best.similarity {
                    best = Match { similarity: dice, nearest: window.join(" ") };
                }
            }
        }
        best
    }
}

/// Emits `UNGROUNDED_ITEM` for every item name below `threshold`. Nothing is removed.
pub fn ground(records: &[ExtractionRecord], index: &GroundingIndex, threshold: f64) -> Ledger {
    let mut ledger = Ledger::new();
    for category in Category::ALL {
        for record in records.iter().filter(|r| r.category == category) {
            for item in &record.items {
                let found = index.lookup(&item.name);
                if found.similarity < threshold {
                    let evidence = if found.nearest.is_empty() {
                        "no overlapping text on the page".to_string()
                    } else {
                        format!("nearest match \"{}\" (similarity {:.2})", found.nearest, found.similarity)
                    };
                    ledger.push(
                        Diagnostic::new(Code::UngroundedItem, Subject::new(category, item.name.clone()), "name not found on the page")
                            .with_evidence(evidence),
                    );
                }
            }
        }
    }
    ledger
}
