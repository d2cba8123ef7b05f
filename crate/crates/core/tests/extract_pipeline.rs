mod common;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use ipricing::extract::{
    payload_hash, ExtractError, ExtractionSettings, Extractor, HttpProvider, PromptSet, Provider, ProviderError,
    ProviderRequest, ProviderResponse, RateLimiter, RecordingProvider, ReplayProvider, RetryPolicy, TemplateId,
};
use ipricing::ingest::{clean_html, ByteHeuristic, CleanedPayload};
use ipricing::{Category, Code};
use serde_json::{json, Value};
use tiny_http::{Header, Response, Server};

fn zoom_payload() -> CleanedPayload {
    let html = std::fs::read_to_string(common::fixture("zoom.html")).unwrap();
    clean_html(&html, 1_000_000, &ByteHeuristic).unwrap()
}

fn settings() -> ExtractionSettings {
    ExtractionSettings {
        retry: RetryPolicy { attempts: 3, base_delay: Duration::from_millis(5) },
        ..ExtractionSettings::default()
    }
}

/// Answers each pass with a fixed reply and remembers the prompts it saw.
struct Scripted {
    replies: HashMap<TemplateId, String>,
    prompts: Mutex<HashMap<TemplateId, String>>,
}

impl Scripted {
    fn new(replies: &[(TemplateId, &str)]) -> Self {
        Scripted {
            replies: replies.iter().map(|(t, r)| (*t, r.to_string())).collect(),
            prompts: Mutex::new(HashMap::new()),
        }
    }
}

impl Provider for Scripted {
    fn id(&self) -> &str {
        "scripted"
    }

    fn complete(&self, request: &ProviderRequest) -> Result<ProviderResponse, ProviderError> {
        self.prompts.lock().unwrap().insert(request.template, request.prompt.clone());
        let raw_text = self.replies.get(&request.template).cloned().unwrap_or_else(|| "[]".into());
        Ok(ProviderResponse { raw_text, ..Default::default() })
    }
}

const PLANS: &str = r#"[{"name":"Basic","monthlyPrice":"Free"},{"name":"Pro","monthlyPrice":"$15.99"}]"#;

#[test]
fn zoom_replay_bundle_yields_the_expected_counts() {
    let prompts = PromptSet::bundled();
    let provider = ReplayProvider::new(common::fixture("replay"));
    let extraction = Extractor::new(&provider, &prompts, settings()).extract_all(&zoom_payload()).unwrap();
    let counts: Vec<usize> = Category::ALL.iter().map(|c| extraction.record(*c).items.len()).collect();
    assert_eq!(counts, vec![3, 13, 3, 4]);
    assert!(extraction.record(Category::Plans).items.iter().any(|i| i.name == "Business"));
    for record in &extraction.records {
        assert!(!record.provenance.is_empty());
        assert!(record.provenance.iter().all(|p| p.provider == "replay" && p.template_version == "v1"));
    }
    assert_eq!(extraction.record(Category::AddOns).provenance.len(), 2);
}

#[test]
fn later_passes_receive_the_extracted_plan_names() {
    let prompts = PromptSet::bundled();
    let provider = Scripted::new(&[(TemplateId::Plans, PLANS)]);
    Extractor::new(&provider, &prompts, settings()).extract_all(&zoom_payload()).unwrap();
    let seen = provider.prompts.lock().unwrap();
    assert_eq!(seen.len(), 5);
    for t in [TemplateId::Features, TemplateId::UsageLimits, TemplateId::AddOnsInTable] {
        assert!(seen[&t].contains(r#""Basic", "Pro""#), "{t:?}");
    }
    assert!(!seen[&TemplateId::Plans].contains("{prior_plans}"));
}

#[test]
fn empty_replies_give_empty_records_without_errors() {
    let prompts = PromptSet::bundled();
    let provider = Scripted::new(&[(TemplateId::Plans, PLANS)]);
    let extraction = Extractor::new(&provider, &prompts, settings()).extract_all(&zoom_payload()).unwrap();
    assert!(extraction.record(Category::AddOns).items.is_empty());
    assert!(extraction.ledger.is_empty());
}

#[test]
fn fenced_reply_gives_the_same_record_as_the_bare_one() {
    let prompts = PromptSet::bundled();
    let payload = zoom_payload();
    let bare = Scripted::new(&[(TemplateId::Plans, PLANS)]);
    let fenced_text = format!("Sure, here it is.\n```json\n{PLANS}\n```\n");
    let fenced = Scripted::new(&[(TemplateId::Plans, &fenced_text)]);
    let a = Extractor::new(&bare, &prompts, settings()).run_pass(TemplateId::Plans, &payload, &[]).unwrap();
    let b = Extractor::new(&fenced, &prompts, settings()).run_pass(TemplateId::Plans, &payload, &[]).unwrap();
    assert_eq!(a.0.items, b.0.items);
    assert_eq!(a.1, b.1);
}

#[test]
fn add_on_passes_merge_with_the_table_price_winning() {
    let prompts = PromptSet::bundled();
    let provider = Scripted::new(&[
        (TemplateId::Plans, PLANS),
        (TemplateId::AddOnsInTable, r#"[{"name":"Phone Dialing","price":"$10"}]"#),
        (TemplateId::AddOnsFromHtml, r#"[{"name":"phone dialing","price":"$12","unit":"per user"},{"name":"Webinars","price":"$79"}]"#),
    ]);
    let extraction = Extractor::new(&provider, &prompts, settings()).extract_all(&zoom_payload()).unwrap();
    let addons = &extraction.record(Category::AddOns).items;
    assert_eq!(addons.len(), 2);
    assert_eq!(addons[0].name, "Phone Dialing");
    assert_eq!(addons[0].price.as_deref(), Some("$10"));
    assert_eq!(addons[0].unit.as_deref(), Some("per user"));
    assert_eq!(extraction.ledger.codes(), vec![Code::MergeConflict]);
}

#[test]
fn a_failed_later_pass_leaves_partial_results() {
    let prompts = PromptSet::bundled();
    let provider = Scripted::new(&[(TemplateId::Plans, PLANS), (TemplateId::Features, "no table here, sorry")]);
    let extraction = Extractor::new(&provider, &prompts, settings()).extract_all(&zoom_payload()).unwrap();
    assert_eq!(extraction.record(Category::Plans).items.len(), 2);
    assert!(extraction.record(Category::Features).items.is_empty());
    assert_eq!(extraction.ledger.codes(), vec![Code::ExtractionPassFailed]);
    assert_eq!(extraction.ledger.entries()[0].evidence.as_deref(), Some("no table here, sorry"));

    let provider = Scripted::new(&[(TemplateId::Plans, "I found nothing.")]);
    let err = Extractor::new(&provider, &prompts, settings()).extract_all(&zoom_payload()).unwrap_err();
    assert!(matches!(err, ExtractError::ParseFailed { template: TemplateId::Plans, .. }));
    assert_eq!(err.code(), "PARSE_FAILED");
}

/// Request bodies and `Authorization` headers, in arrival order.
type Seen = Arc<Mutex<Vec<(Value, String)>>>;

/// An OpenAI-style completions endpoint that replies with `statuses` in
/// turn (the last one repeats) and records every request body.
fn completions_mock(statuses: Vec<u16>, content: &'static str) -> (String, Seen, Arc<AtomicUsize>) {
    let server = Server::http("127.0.0.1:0").unwrap();
    let addr = server.server_addr().to_ip().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let calls = Arc::new(AtomicUsize::new(0));
    let (seen2, calls2) = (seen.clone(), calls.clone());
    thread::spawn(move || {
        for mut req in server.incoming_requests() {
            let mut body = String::new();
            req.as_reader().read_to_string(&mut body).unwrap();
            let auth = req
                .headers()
                .iter()
                .find(|h| h.field.equiv("Authorization"))
                .map(|h| h.value.to_string())
                .unwrap_or_default();
            assert_eq!(req.url(), "/v1/chat/completions");
            seen2.lock().unwrap().push((serde_json::from_str(&body).unwrap(), auth));
            let n = calls2.fetch_add(1, Ordering::SeqCst);
            let status = statuses[n.min(statuses.len() - 1)];
            let reply = if status == 200 {
                json!({
                    "choices": [{"message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
                    "usage": {"prompt_tokens": 120, "completion_tokens": 30}
                })
                .to_string()
            } else {
                json!({"error": {"message": "try later"}}).to_string()
            };
            let header = Header::from_bytes("Content-Type", "application/json").unwrap();
            let _ = req.respond(Response::from_string(reply).with_status_code(status).with_header(header));
        }
    });
    (format!("http://{addr}/v1"), seen, calls)
}

fn request() -> ProviderRequest {
    ProviderRequest {
        template: TemplateId::Plans,
        payload_hash: payload_hash("<p>Pro</p>"),
        model: "gemini-1.5-flash".into(),
        prompt: "List the plans.".into(),
        temperature: 0.0,
        max_output_tokens: 8192,
        structured_output: true,
    }
}

fn http(base: String) -> HttpProvider {
    HttpProvider::new(base, "secret-key", Duration::from_secs(5), RateLimiter::new(Duration::ZERO)).unwrap()
}

#[test]
fn http_provider_sends_decoding_params_and_retries_rate_limits() {
    let (base, seen, calls) = completions_mock(vec![429, 503, 200], r#"{"items":[{"name":"Pro"}]}"#);
    let provider = http(base);
    let policy = RetryPolicy { attempts: 3, base_delay: Duration::from_millis(5) };
    let response = policy.call(&provider, &request()).unwrap();
    assert_eq!(response.raw_text, r#"{"items":[{"name":"Pro"}]}"#);
    assert_eq!(response.finish_reason.as_deref(), Some("stop"));
    assert_eq!((response.prompt_tokens, response.completion_tokens), (Some(120), Some(30)));
    assert_eq!(calls.load(Ordering::SeqCst), 3);

    let seen = seen.lock().unwrap();
    let (body, auth) = &seen[0];
    assert_eq!(auth, "Bearer secret-key");
    assert_eq!(body["model"], "gemini-1.5-flash");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["max_tokens"], 8192);
    assert_eq!(body["response_format"]["type"], "json_object");
    assert_eq!(body["messages"][0]["content"], "List the plans.");
}

#[test]
fn http_provider_gives_up_on_rejections_and_exhausted_retries() {
    let (base, _, calls) = completions_mock(vec![400], "");
    let policy = RetryPolicy { attempts: 3, base_delay: Duration::from_millis(5) };
    let err = policy.call(&http(base), &request()).unwrap_err();
    assert!(matches!(err, ProviderError::Rejected(_)));
    assert_eq!(calls.load(Ordering::SeqCst), 1);

    let (base, _, calls) = completions_mock(vec![502], "");
    let err = policy.call(&http(base), &request()).unwrap_err();
    assert!(matches!(err, ProviderError::Transport(_)));
    assert_eq!(calls.load(Ordering::SeqCst), 3);
}

#[test]
fn recorded_responses_replay_identically() {
    let (base, _, _) = completions_mock(vec![200], r#"[{"name":"Pro","monthlyPrice":"$10"}]"#);
    let dir = tempfile::tempdir().unwrap();
    let recorder = RecordingProvider::new(http(base), dir.path());
    let live = recorder.complete(&request()).unwrap();
    let replayed = ReplayProvider::new(dir.path()).complete(&request()).unwrap();
    assert_eq!(live.raw_text, replayed.raw_text);

    let mut other = request();
    other.payload_hash = payload_hash("<p>Team</p>");
    let err = ReplayProvider::new(dir.path()).complete(&other).unwrap_err();
    assert!(matches!(err, ProviderError::MissingFixture(_)));
}
