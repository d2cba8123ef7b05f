use std::collections::HashMap;
use std::path::Path;

use sha2::{Digest, Sha256};

/// Estimates how many model tokens a text occupies.
pub trait TokenCounter: Send + Sync {
    fn count(&self, text: &str) -> usize;
    fn id(&self) -> String;
}

/// `ceil(bytes / 4)`.
pub fn estimate_tokens(text: &str) -> usize {
    text.len().div_ceil(4)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ByteHeuristic;

impl TokenCounter for ByteHeuristic {
    fn count(&self, text: &str) -> usize {
        estimate_tokens(text)
    }

    fn id(&self) -> String {
        "bytes/4".into()
    }
}

/// Token counts previously reported by a provider, keyed by the SHA-256 of
/// the counted text. Unrecorded texts fall back to the byte heuristic.
#[derive(Debug, Clone, Default)]
pub struct RecordedTokenCounts {
    counts: HashMap<String, usize>,
}

impl RecordedTokenCounts {
    pub fn new(counts: HashMap<String, usize>) -> Self {
        RecordedTokenCounts { counts }
    }

    /// Reads a JSON object of `{"<sha256 hex>": count}`.
    pub fn load(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let counts = serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
        Ok(RecordedTokenCounts { counts })
    }

    pub fn key(text: &str) -> String {
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn record(&mut self, text: &str, count: usize) {
        self.counts.insert(Self::key(text), count);
    }
}

impl TokenCounter for RecordedTokenCounts {
    fn count(&self, text: &str) -> usize {
        self.counts.get(&Self::key(text)).copied().unwrap_or_else(|| estimate_tokens(text))
    }

    fn id(&self) -> String {
        "recorded".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_is_ceil_bytes_over_four() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens(&"a".repeat(400)), 100);
        assert_eq!(estimate_tokens("abcde"), 2);
    }

    #[test]
    fn recorded_counts_win_over_heuristic() {
        let mut rec = RecordedTokenCounts::default();
        rec.record("hello world", 3);
        assert_eq!(rec.count("hello world"), 3);
        assert_eq!(rec.count("other"), 2);
    }
}
