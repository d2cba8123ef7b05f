//! Name normalization shared by every module that compares names.

use std::fmt;

/// Collapses Unicode whitespace runs to single spaces, trims, and lowercases.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// Comparison key for a pricing element name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NameKey(String);

impl NameKey {
    pub fn new(name: &str) -> Self {
        NameKey(normalize_name(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for NameKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// True when the two names are equal after normalization.
pub fn same_name(a: &str, b: &str) -> bool {
    normalize_name(a) == normalize_name(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapses_unicode_whitespace_and_case() {
        assert_eq!(normalize_name("  Pro\u{00A0}\tPlan \n"), "pro plan");
        assert!(same_name("Pro", "pro "));
        assert!(!same_name("Pro", "Pro Plus"));
    }

    #[test]
    fn empty_after_normalization() {
        assert!(NameKey::new(" \u{2003} ").is_empty());
    }
}
