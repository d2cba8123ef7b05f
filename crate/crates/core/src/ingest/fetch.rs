use std::path::Path;
use std::time::Duration;

use chrono::Utc;

use super::webdriver::{WebDriverClient, WebDriverConfig};
use super::{IngestError, Origin, SourceDocument};

/// Fetches documents over plain HTTP, through a WebDriver endpoint, or from disk.
/// Never clicks, scrolls, or otherwise interacts with the page.
pub struct Fetcher {
    http: reqwest::blocking::Client,
    webdriver: WebDriverClient,
}

impl Default for Fetcher {
    fn default() -> Self {
        Fetcher::new(Duration::from_secs(30), WebDriverConfig::default())
    }
}

impl Fetcher {
    pub fn new(http_timeout: Duration, webdriver: WebDriverConfig) -> Self {
        let http = reqwest::blocking::Client::builder()
            .timeout(http_timeout)
            .user_agent(concat!("ipricing/", env!("CARGO_PKG_VERSION")))
            .build()
            .expect("HTTP client configuration is static");
        Fetcher { http, webdriver: WebDriverClient::new(webdriver) }
    }

    pub fn fetch(&self, locator: &str, mode: Origin, wait_budget: Duration) -> Result<SourceDocument, IngestError> {
        match mode {
            Origin::LocalFile => read_local(locator),
            Origin::HttpUrl => {
                require_http(locator)?;
                self.fetch_http(locator)
            }
            Origin::WebDriverUrl => {
                require_http(locator)?;
                let (raw_html, final_url) = self.webdriver.render(locator, wait_budget)?;
                finish(Origin::WebDriverUrl, locator, raw_html, final_url)
            }
        }
    }

    fn fetch_http(&self, url: &str) -> Result<SourceDocument, IngestError> {
        let resp = self.http.get(url).send().map_err(|e| IngestError::FetchFailed(format!("{url}: {e}")))?;
        let status = resp.status();
        if status.as_u16() >= 400 {
            return Err(IngestError::FetchFailed(format!("{url}: HTTP {status}")));
        }
        let final_url = resp.url().to_string();
        let body = resp.text().map_err(|e| IngestError::FetchFailed(format!("{url}: {e}")))?;
        finish(Origin::HttpUrl, url, body, final_url)
    }
}

/// Fetches with a default [`Fetcher`].
pub fn fetch(locator: &str, mode: Origin, wait_budget: Duration) -> Result<SourceDocument, IngestError> {
    Fetcher::default().fetch(locator, mode, wait_budget)
}

fn require_http(locator: &str) -> Result<(), IngestError> {
    let lower = locator.to_ascii_lowercase();
    if lower.starts_with("http://") || lower.starts_with("https://") {
        Ok(())
    } else {
        Err(IngestError::InvalidLocator(locator.to_string()))
    }
}

fn read_local(path: &str) -> Result<SourceDocument, IngestError> {
    let p = Path::new(path);
    let bytes = std::fs::read(p).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => IngestError::FileNotFound(path.to_string()),
        _ => IngestError::FetchFailed(format!("{path}: {e}")),
    })?;
    let raw = String::from_utf8_lossy(&bytes).into_owned();
    finish(Origin::LocalFile, path, raw, path.to_string())
}

fn finish(origin: Origin, locator: &str, raw_html: String, final_url: String) -> Result<SourceDocument, IngestError> {
    if raw_html.trim().is_empty() {
        return Err(IngestError::EmptyDocument(locator.to_string()));
    }
    Ok(SourceDocument {
        origin,
        locator: locator.to_string(),
        raw_html,
        fetched_at: Utc::now(),
        final_url,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_file_is_read_verbatim() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("page.html");
        std::fs::write(&path, "<p>Pro plan</p>").unwrap();
        let doc = fetch(path.to_str().unwrap(), Origin::LocalFile, Duration::ZERO).unwrap();
        assert_eq!(doc.raw_html, "<p>Pro plan</p>");
        assert_eq!(doc.origin, Origin::LocalFile);
    }

    #[test]
    fn invalid_utf8_is_replaced() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("latin1.html");
        std::fs::write(&path, b"<p>caf\xe9</p>").unwrap();
        let doc = fetch(path.to_str().unwrap(), Origin::LocalFile, Duration::ZERO).unwrap();
        assert_eq!(doc.raw_html, "<p>caf\u{FFFD}</p>");
    }

    #[test]
    fn missing_file_and_bad_locators() {
        let err = fetch("/definitely/not/here.html", Origin::LocalFile, Duration::ZERO).unwrap_err();
        assert_eq!(err.code(), "FILE_NOT_FOUND");
        let err = fetch("zoom.html", Origin::HttpUrl, Duration::ZERO).unwrap_err();
        assert!(matches!(err, IngestError::InvalidLocator(_)));
    }

    #[test]
    fn unreachable_host_fails_to_fetch() {
        // port 9 on localhost: nothing listens there in the test sandbox
        let fetcher = Fetcher::new(Duration::from_secs(2), WebDriverConfig::default());
        let err = fetcher.fetch("http://127.0.0.1:9/pricing", Origin::HttpUrl, Duration::ZERO).unwrap_err();
        assert_eq!(err.code(), "FETCH_FAILED");
    }
}
