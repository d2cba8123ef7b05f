//! Interpretation of raw strings found on pricing pages: checkmarks, prices,
//! quantities with units, and "unlimited".
//!
//! | raw text                                   | typed as            |
//! |--------------------------------------------|---------------------|
//! | `✔ ✓ ✔️ ✅ ☑ yes included true available`   | boolean `true`      |
//! | `✗ ✘ ❌ ✕ × — – - no false n/a none` (or empty) | boolean `false` |
//! | `unlimited …`, `∞`, `no limit`             | unlimited           |
//! | `[up to] 1,000[.5] [unit]`                 | numeric (+ unit)    |
//! | anything else                              | text                |
//!
//! Matching is case-insensitive on trimmed input.

use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use rust_decimal::Decimal;

use crate::model::Price;

pub const LEXICON_VERSION: &str = "lexicon/1";

pub const TRUE_TOKENS: &[&str] = &[
    "✔", "✓", "✔️", "✅", "☑", "☑️", "yes", "included", "true", "available", "check", "checkmark",
];
pub const FALSE_TOKENS: &[&str] = &[
    "", "✗", "✘", "❌", "✕", "×", "—", "–", "-", "no", "not included", "false", "n/a", "none", "unavailable",
];
pub const UNLIMITED_TOKENS: &[&str] = &["∞", "no limit", "no limits", "unlimited"];
pub const FREE_TOKENS: &[&str] = &["free", "free forever", "$0", "0", "free plan"];
pub const CONTACT_TOKENS: &[&str] = &[
    "contact", "contact sales", "contact us", "custom", "custom pricing", "talk to sales", "let's talk",
    "get a quote", "request a quote", "contact_sales",
];

/// A per-plan value after lexicon typing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypedValue {
    Boolean(bool),
    Numeric { amount: Decimal, unit: Option<String> },
    Unlimited,
    Text(String),
}

fn quantity_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^(?:up to\s+)?(\d{1,3}(?:,\d{3})+|\d+)(\.\d+)?\s*([\p{L}%][\p{L}%/ .\-]*)?$").unwrap()
    })
}

fn money_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(-)?\s*[$€£¥]?\s*(\d{1,3}(?:,\d{3})+|\d+)(\.\d+)?").unwrap())
}

fn number(int_part: &str, frac: Option<&str>) -> Option<Decimal> {
    let mut s = int_part.replace(',', "");
    if let Some(f) = frac {
        s.push_str(f);
    }
    Decimal::from_str(&s).ok()
}

/// Types one raw cell value.
pub fn classify_value(raw: &str) -> TypedValue {
    let trimmed = raw.trim();
    let lower = trimmed.to_lowercase();
    if TRUE_TOKENS.contains(&lower.as_str()) {
        return TypedValue::Boolean(true);
    }
    if FALSE_TOKENS.contains(&lower.as_str()) {
        return TypedValue::Boolean(false);
    }
    if UNLIMITED_TOKENS.contains(&lower.as_str()) || lower.starts_with("unlimited ") {
        return TypedValue::Unlimited;
    }
    if let Some(caps) = quantity_re().captures(trimmed) {
        if let Some(amount) = number(&caps[1], caps.get(2).map(|m| m.as_str())) {
            let unit = caps.get(3).map(|m| m.as_str().trim().to_string()).filter(|u| !u.is_empty());
            return TypedValue::Numeric { amount, unit };
        }
    }
    TypedValue::Text(trimmed.to_string())
}

/// Interprets a displayed price. Returns `None` when no price can be read
/// or the amount is negative.
pub fn parse_price(raw: &str) -> Option<Price> {
    let lower = raw.trim().to_lowercase();
    if FREE_TOKENS.contains(&lower.as_str()) {
        return Some(Price::Free);
    }
    if CONTACT_TOKENS.contains(&lower.as_str()) || lower.starts_with("contact") {
        return Some(Price::ContactSales);
    }
    let caps = money_re().captures(&lower)?;
    if caps.get(1).is_some() {
        return None;
    }
    number(&caps[2], caps.get(3).map(|m| m.as_str())).map(Price::Amount)
}

/// Guesses an ISO-4217 code from a displayed price.
pub fn detect_currency(raw: &str) -> Option<&'static str> {
    let upper = raw.to_uppercase();
    for (needle, code) in [("€", "EUR"), ("£", "GBP"), ("¥", "JPY"), ("EUR", "EUR"), ("GBP", "GBP"), ("USD", "USD"), ("$", "USD")] {
        if upper.contains(needle) {
            return Some(code);
        }
    }
    None
}
