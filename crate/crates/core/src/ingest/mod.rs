//! Page ingestion: fetching a pricing page and reducing it to a cleaned,
//! token-budgeted payload.

mod clean;
mod fetch;
mod tokens;
mod webdriver;

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use thiserror::Error;

pub use clean::{clean, clean_html, CleanedPayload, CLEANER_VERSION};
pub use fetch::{fetch, Fetcher};
pub use tokens::{estimate_tokens, ByteHeuristic, RecordedTokenCounts, TokenCounter};
pub use webdriver::{WebDriverClient, WebDriverConfig};

/// Where a document came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    HttpUrl,
    WebDriverUrl,
    LocalFile,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::HttpUrl => "HTTP_URL",
            Origin::WebDriverUrl => "WEBDRIVER_URL",
            Origin::LocalFile => "LOCAL_FILE",
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Origin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "http" | "url" | "http_url" => Ok(Origin::HttpUrl),
            "rendered" | "webdriver" | "webdriver_url" => Ok(Origin::WebDriverUrl),
            "file" | "local" | "local_file" => Ok(Origin::LocalFile),
            other => Err(format!("unknown source mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDocument {
    pub origin: Origin,
    pub locator: String,
    pub raw_html: String,
    pub fetched_at: DateTime<Utc>,
    /// Location after redirects; the file path for local files.
    pub final_url: String,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{0}")]
    FetchFailed(String),
    #[error("page did not finish loading within {0} ms")]
    RenderTimeout(u128),
    #[error("no such file: {0}")]
    FileNotFound(String),
    #[error("invalid locator `{0}` for this source mode")]
    InvalidLocator(String),
    #[error("{0} returned no content")]
    EmptyDocument(String),
    #[error("no visible text remains")]
    EmptyAfterClean,
    #[error("token budget must be positive")]
    ZeroBudget,
}

impl IngestError {
    pub fn code(&self) -> &'static str {
        match self {
            IngestError::FetchFailed(_) => "FETCH_FAILED",
            IngestError::RenderTimeout(_) => "RENDER_TIMEOUT",
            IngestError::FileNotFound(_) => "FILE_NOT_FOUND",
            IngestError::InvalidLocator(_) => "INVALID_LOCATOR",
            IngestError::EmptyDocument(_) => "EMPTY_DOCUMENT",
            IngestError::EmptyAfterClean => "EMPTY_AFTER_CLEAN",
            IngestError::ZeroBudget => "ZERO_BUDGET",
        }
    }
}
