//! Model providers: a chat-completions HTTP client, a replay provider that
//! answers from recorded files, a null provider, and a recording wrapper.
//!
//! Replay fixtures live at `<dir>/<template>.<hash>.txt`, where `hash` is the
//! first 16 hex digits of the SHA-256 of the cleaned payload text. Each file
//! holds a verbatim response.

use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::prompts::TemplateId;

pub const KEY_ENV_VAR: &str = "PRICING_PROVIDER_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderRequest {
    pub template: TemplateId,
    /// Replay key of the payload the prompt was rendered from.
    pub payload_hash: String,
    pub model: String,
    pub prompt: String,
    pub temperature: f32,
    pub max_output_tokens: u32,
    /// Ask the provider for JSON output when it supports that.
    pub structured_output: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProviderResponse {
    /// Kept verbatim for audit.
    pub raw_text: String,
    pub finish_reason: Option<String>,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProviderError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("request rejected: {0}")]
    Rejected(String),
    #[error("no replay fixture at {0}")]
    MissingFixture(String),
    #[error("no provider configured")]
    Unavailable,
}

impl ProviderError {
    /// Only transport failures and rate limiting are worth another attempt.
    pub fn is_transient(&self) -> bool {
        matches!(self, ProviderError::Transport(_) | ProviderError::RateLimited(_))
    }
}

pub trait Provider: Send + Sync {
    /// Short name recorded in provenance: `http`, `replay`, `null`.
    fn id(&self) -> &str;
    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError>;
}

/// Replay key for a cleaned payload.
pub fn payload_hash(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))[..16].to_string()
}

pub fn replay_path(dir: &Path, template: TemplateId, payload_hash: &str) -> PathBuf {
    dir.join(format!("{}.{}.txt", template.as_str(), payload_hash))
}

/// Spaces requests at least `min_interval` apart across every caller.
#[derive(Debug)]
pub struct RateLimiter {
    min_interval: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(min_interval: Duration) -> Self {
        RateLimiter { min_interval, next_slot: Mutex::new(None) }
    }

    pub fn per_minute(requests: u32) -> Self {
        Self::new(Duration::from_secs(60) / requests.max(1))
    }

    pub fn acquire(&self) {
        let wait = {
            let mut next = self.next_slot.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = next.map_or(now, |n| n.max(now));
            *next = Some(slot + self.min_interval);
            slot - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}

/// OpenAI-style `POST {base}/chat/completions` client.
pub struct HttpProvider {
    base_url: String,
    key: String,
    client: reqwest::blocking::Client,
    limiter: RateLimiter,
}

impl HttpProvider {
    pub fn new(base_url: impl Into<String>, key: impl Into<String>, timeout: Duration, limiter: RateLimiter) -> Result<Self, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok(HttpProvider {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            key: key.into(),
            client,
            limiter,
        })
    }

    /// Reads the key from [`KEY_ENV_VAR`].
    pub fn from_env(base_url: impl Into<String>, timeout: Duration, limiter: RateLimiter) -> Result<Self, ProviderError> {
        let key = std::env::var(KEY_ENV_VAR)
            .map_err(|_| ProviderError::Rejected(format!("environment variable {KEY_ENV_VAR} is not set")))?;
        Self::new(base_url, key, timeout, limiter)
    }
}

impl Provider for HttpProvider {
    fn id(&self) -> &str {
        "http"
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        self.limiter.acquire();
        let mut body = json!({
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        });
        if request.structured_output {
            body["response_format"] = json!({"type": "json_object"});
        }
        let response = self
            .client
            .post(format!("{}/chat/completions", self.base_url))
            .bearer_auth(&self.key)
            .json(&body)
            .send()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response.text().map_err(|e| ProviderError::Transport(e.to_string()))?;
        if status.as_u16() == 429 {
            return Err(ProviderError::RateLimited(text));
        }
        if status.is_server_error() {
            return Err(ProviderError::Transport(format!("HTTP {status}: {text}")));
        }
        if !status.is_success() {
            return Err(ProviderError::Rejected(format!("HTTP {status}: {text}")));
        }
        let json: Value = serde_json::from_str(&text).map_err(|e| ProviderError::Rejected(format!("malformed response body: {e}")))?;
        let choice = &json["choices"][0];
        let raw_text = choice["message"]["content"]
            .as_str()
            .ok_or_else(|| ProviderError::Rejected("response has no message content".into()))?
            .to_string();
        Ok(ProviderResponse {
            raw_text,
            finish_reason: choice["finish_reason"].as_str().map(str::to_string),
            prompt_tokens: json["usage"]["prompt_tokens"].as_u64(),
            completion_tokens: json["usage"]["completion_tokens"].as_u64(),
        })
    }
}

/// Answers from recorded files; never touches the network.
pub struct ReplayProvider {
    dir: PathBuf,
}

impl ReplayProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ReplayProvider { dir: dir.into() }
    }
}

impl Provider for ReplayProvider {
    fn id(&self) -> &str {
        "replay"
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        let path = replay_path(&self.dir, request.template, &request.payload_hash);
        let raw_text = std::fs::read_to_string(&path).map_err(|_| ProviderError::MissingFixture(path.display().to_string()))?;
        Ok(ProviderResponse { raw_text, finish_reason: Some("replay".into()), ..Default::default() })
    }
}

/// Fails every request.
pub struct NullProvider;

impl Provider for NullProvider {
    fn id(&self) -> &str {
        "null"
    }

    fn complete(&self, _: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        Err(ProviderError::Unavailable)
    }
}

/// Forwards to another provider and writes each response into the replay layout.
pub struct RecordingProvider<P> {
    inner: P,
    dir: PathBuf,
}

impl<P: Provider> RecordingProvider<P> {
    pub fn new(inner: P, dir: impl Into<PathBuf>) -> Self {
        RecordingProvider { inner, dir: dir.into() }
    }
}

impl<P: Provider> Provider for RecordingProvider<P> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        let response = self.inner.complete(request)?;
        let path = replay_path(&self.dir, request.template, &request.payload_hash);
        std::fs::create_dir_all(&self.dir)
            .and_then(|_| std::fs::write(&path, &response.raw_text))
            .map_err(|e| ProviderError::Rejected(format!("cannot record {}: {e}", path.display())))?;
        Ok(response)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { attempts: 3, base_delay: Duration::from_millis(500) }
    }
}

impl RetryPolicy {
    /// Calls `provider` until it succeeds, fails permanently, or attempts run
    /// out. Delays double after each transient failure.
    pub fn call(&self, provider: &dyn Provider, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        let mut delay = self.base_delay;
        let mut attempt = 1;
        loop {
            match provider.complete(request) {
                Err(e) if e.is_transient() && attempt < self.attempts => {
                    std::thread::sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicU32, Ordering};

    use super::*;

    struct Flaky {
        calls: AtomicU32,
        failures: u32,
        error: ProviderError,
    }

    impl Provider for Flaky {
        fn id(&self) -> &str {
            "flaky"
        }

        fn complete(&self, _: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
            let n = self.calls.fetch_add(1, Ordering::SeqCst);
            if n < self.failures {
                Err(self.error.clone())
            } else {
                Ok(ProviderResponse { raw_text: "[]".into(), ..Default::default() })
            }
        }
    }

    fn request() -> ProviderRequest {
        ProviderRequest {
            template: TemplateId::Plans,
            payload_hash: payload_hash("x"),
            model: "m".into(),
            prompt: "p".into(),
            temperature: 0.0,
            max_output_tokens: 16,
            structured_output: true,
        }
    }

    fn fast() -> RetryPolicy {
        RetryPolicy { attempts: 3, base_delay: Duration::from_millis(1) }
    }

    #[test]
    fn transient_errors_are_retried_up_to_three_attempts() {
        let p = Flaky { calls: AtomicU32::new(0), failures: 2, error: ProviderError::RateLimited("slow down".into()) };
        assert!(fast().call(&p, &request()).is_ok());
        assert_eq!(p.calls.load(Ordering::SeqCst), 3);

        let p = Flaky { calls: AtomicU32::new(0), failures: 3, error: ProviderError::Transport("reset".into()) };
        assert!(fast().call(&p, &request()).is_err());
        assert_eq!(p.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn permanent_errors_are_not_retried() {
        let p = Flaky { calls: AtomicU32::new(0), failures: 1, error: ProviderError::Rejected("bad key".into()) };
        assert!(fast().call(&p, &request()).is_err());
        assert_eq!(p.calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn recording_then_replaying_returns_the_same_text() {
        let dir = tempfile::tempdir().unwrap();
        let recorder = RecordingProvider::new(
            Flaky { calls: AtomicU32::new(0), failures: 0, error: ProviderError::Unavailable },
            dir.path(),
        );
        let req = request();
        let recorded = recorder.complete(&req).unwrap();
        assert!(replay_path(dir.path(), TemplateId::Plans, &req.payload_hash).exists());
        let replayed = ReplayProvider::new(dir.path()).complete(&req).unwrap();
        assert_eq!(replayed.raw_text, recorded.raw_text);
        assert!(matches!(ReplayProvider::new("/nonexistent").complete(&req), Err(ProviderError::MissingFixture(_))));
        assert_eq!(NullProvider.complete(&req), Err(ProviderError::Unavailable));
    }

    #[test]
    fn payload_hash_is_sixteen_hex_digits() {
        let h = payload_hash("");
        assert_eq!(h, "e3b0c44298fc1c14");
    }

    #[test]
    fn rate_limiter_spaces_requests() {
        let limiter = RateLimiter::new(Duration::from_millis(20));
        let start = Instant::now();
        for _ in 0..3 {
            limiter.acquire();
        }
        assert!(start.elapsed() >= Duration::from_millis(40));
    }
}
