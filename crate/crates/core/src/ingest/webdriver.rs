//! Minimal W3C WebDriver client used to capture script-rendered pages.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use super::IngestError;

#[derive(Debug, Clone)]
pub struct WebDriverConfig {
    /// Base URL of the WebDriver server, e.g. `http://localhost:4444`.
    pub endpoint: String,
    /// Interval between DOM samples.
    pub sample_interval: Duration,
    /// Consecutive identical samples that count as a stable DOM.
    pub stable_samples: u32,
    pub capabilities: Value,
}

impl Default for WebDriverConfig {
    fn default() -> Self {
        WebDriverConfig {
            endpoint: "http://localhost:4444".into(),
            sample_interval: Duration::from_millis(500),
            stable_samples: 2,
            capabilities: json!({
                "alwaysMatch": {
                    "goog:chromeOptions": { "args": ["--headless=new", "--disable-gpu", "--no-sandbox"] },
                    "moz:firefoxOptions": { "args": ["-headless"] }
                }
            }),
        }
    }
}

/// Opens one session per render. Renders through the same client are
/// serialized so a session never serves two fetches at once.
pub struct WebDriverClient {
    config: WebDriverConfig,
    http: reqwest::blocking::Client,
    busy: Mutex<()>,
}

impl WebDriverClient {
    pub fn new(config: WebDriverConfig) -> Self {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .expect("HTTP client configuration is static");
        WebDriverClient { config, http, busy: Mutex::new(()) }
    }

    /// Loads `url`, waits for the DOM to settle or for `wait_budget` to run
    /// out, and returns `(page source, final url)`.
    pub fn render(&self, url: &str, wait_budget: Duration) -> Result<(String, String), IngestError> {
        let _guard = self.busy.lock().unwrap_or_else(|p| p.into_inner());
        let session = self.new_session()?;
        let result = self.render_in(&session, url, wait_budget);
        // best effort; the session is useless either way
        let _ = self.http.delete(self.url(&format!("/session/{session}"))).send();
        result
    }

    fn render_in(&self, session: &str, url: &str, wait_budget: Duration) -> Result<(String, String), IngestError> {
        let started = Instant::now();
        let deadline = started + wait_budget;
        let budget_ms = wait_budget.as_millis();
        self.call("POST", &format!("/session/{session}/timeouts"), Some(json!({ "pageLoad": budget_ms.max(1) as u64 })))?;
        match self.call("POST", &format!("/session/{session}/url"), Some(json!({ "url": url }))) {
            Err(IngestError::FetchFailed(msg)) if msg.contains("timeout") => return Err(IngestError::RenderTimeout(budget_ms)),
            other => {
                other?;
            }
        }

        loop {
            let state = self.call(
                "POST",
                &format!("/session/{session}/execute/sync"),
                Some(json!({ "script": "return document.readyState", "args": [] })),
            )?;
            if state.as_str() == Some("complete") {
                break;
            }
            if Instant::now() >= deadline {
                return Err(IngestError::RenderTimeout(budget_ms));
            }
            std::thread::sleep(self.config.sample_interval);
        }

        let mut previous = self.source(session)?;
        let mut stable = 0;
        while stable < self.config.stable_samples && Instant::now() < deadline {
            std::thread::sleep(self.config.sample_interval);
            let current = self.source(session)?;
            if current == previous {
                stable += 1;
            } else {
                stable = 0;
                previous = current;
            }
        }

        let final_url = self
            .call("GET", &format!("/session/{session}/url"), None)?
            .as_str()
            .unwrap_or(url)
            .to_string();
        Ok((previous, final_url))
    }

    fn new_session(&self) -> Result<String, IngestError> {
        let value = self.call("POST", "/session", Some(json!({ "capabilities": self.config.capabilities })))?;
        value
            .get("sessionId")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| IngestError::FetchFailed("WebDriver did not return a session id".into()))
    }

    fn source(&self, session: &str) -> Result<String, IngestError> {
        let value = self.call("GET", &format!("/session/{session}/source"), None)?;
        value
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| IngestError::FetchFailed("WebDriver page source is not a string".into()))
    }

    fn url(&self, path: &str) -> String {
        format!("{}{}", self.config.endpoint.trim_end_matches('/'), path)
    }

    /// Sends one command and unwraps the `value` member of the reply.
    fn call(&self, method: &str, path: &str, body: Option<Value>) -> Result<Value, IngestError> {
        let url = self.url(path);
        let req = match method {
            "GET" => self.http.get(&url),
            "DELETE" => self.http.delete(&url),
            _ => self.http.post(&url).json(&body.unwrap_or_else(|| json!({}))),
        };
        let resp = req.send().map_err(|e| IngestError::FetchFailed(format!("WebDriver {url}: {e}")))?;
        let status = resp.status();
        let payload: Value = resp
            .json()
            .map_err(|e| IngestError::FetchFailed(format!("WebDriver {url}: malformed reply: {e}")))?;
        let value = payload.get("value").cloned().unwrap_or(Value::Null);
        if let Some(error) = value.get("error").and_then(Value::as_str) {
            let message = value.get("message").and_then(Value::as_str).unwrap_or("");
            return Err(IngestError::FetchFailed(format!("WebDriver {error}: {message}")));
        }
        if !status.is_success() {
            return Err(IngestError::FetchFailed(format!("WebDriver {url}: HTTP {status}")));
        }
        Ok(value)
    }
}
