//! `transform` and `record-fixtures`: fetch, clean, extract, process, write.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use chrono::{NaiveDate, Utc};
use clap::Args;
use ipricing::engine::{process, EngineConfig, EngineError, Meta};
use ipricing::extract::{
    ExtractionSettings, Extractor, HttpProvider, NullProvider, PromptSet, Provider, RateLimiter, RecordingProvider,
    ReplayProvider,
};
use ipricing::ingest::{
    clean_html, ByteHeuristic, CleanedPayload, Fetcher, Origin, RecordedTokenCounts, TokenCounter, WebDriverConfig,
    CLEANER_VERSION,
};
use ipricing::lexicon::LEXICON_VERSION;
use ipricing::model::summarize;
use ipricing::modeler::{serialize, write_log};

use crate::{ProviderKind, SourceArgs, EXIT_DIAGNOSTICS, EXIT_OK, EXIT_PIPELINE, EXIT_USAGE};

pub const DEFAULT_BASE_URL: &str = "https://generativelanguage.googleapis.com/v1beta/openai";
pub const DEFAULT_MODEL: &str = "gemini-1.5-flash";

#[derive(Args, Debug, Clone)]
pub struct FetchArgs {
    /// WebDriver endpoint for --rendered-url.
    #[arg(long, default_value = "http://localhost:4444")]
    webdriver: String,
    /// Seconds to wait for a rendered page to settle.
    #[arg(long, default_value_t = 10)]
    wait: u64,
    /// HTTP timeout in seconds for page and provider requests.
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    /// Token budget of the cleaned payload.
    #[arg(long, default_value_t = 1_000_000)]
    budget: usize,
    /// JSON map from payload SHA-256 to provider-reported token counts.
    #[arg(long)]
    token_counts: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// Model id sent to the provider and recorded in the output.
    #[arg(long, default_value = DEFAULT_MODEL)]
    model: String,
    /// Base URL of a chat-completions API; the key is read from PRICING_PROVIDER_KEY.
    #[arg(long, default_value = DEFAULT_BASE_URL)]
    base_url: String,
    /// Prompt set directory; the bundled set is used when omitted.
    #[arg(long)]
    prompts: Option<PathBuf>,
    /// Global cap on provider requests per minute.
    #[arg(long, default_value_t = 15)]
    rate_per_minute: u32,
}

#[derive(Args, Debug)]
pub struct TransformArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output prefix: writes `<out>.pricing.yml` and `<out>.log`. A directory in batch mode.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "replay")]
    provider: ProviderKind,
    /// Replay fixture directory for --provider replay.
    #[arg(long, default_value = "fixtures/replay")]
    replay_dir: PathBuf,
    /// Extraction date recorded in the document; today when omitted.
    #[arg(long, value_parser = parse_date)]
    date: Option<NaiveDate>,
    /// Document currency; detected from prices when omitted.
    #[arg(long, value_parser = parse_currency)]
    currency: Option<String>,
    /// SaaS name; derived from the locator when omitted.
    #[arg(long)]
    saas_name: Option<String>,
    /// Documents processed concurrently in batch mode.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[command(flatten)]
    fetch: FetchArgs,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
pub struct RecordArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Directory that receives the replay fixtures.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    fetch: FetchArgs,
    #[command(flatten)]
    model: ModelArgs,
}

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|_| format!("`{s}` is not a YYYY-MM-DD date"))
}

fn parse_currency(s: &str) -> Result<String, String> {
    if s.len() == 3 && s.chars().all(|c| c.is_ascii_uppercase()) {
        Ok(s.to_string())
    } else {
        Err(format!("`{s}` is not a three-letter uppercase currency code"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Job {
    origin: Origin,
    locator: String,
}

fn single_source(source: &SourceArgs) -> Option<Job> {
    let (origin, locator) = match (&source.url, &source.rendered_url, &source.file) {
        (Some(u), _, _) => (Origin::HttpUrl, u),
        (_, Some(u), _) => (Origin::WebDriverUrl, u),
        (_, _, Some(f)) => (Origin::LocalFile, f),
        _ => return None,
    };
    Some(Job { origin, locator: locator.clone() })
}

/// One locator per line, optionally prefixed by a mode word. Relative file
/// paths resolve against the manifest's directory.
fn read_manifest(path: &Path) -> Result<Vec<Job>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut jobs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (first, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let (origin, locator) = match first.parse::<Origin>() {
            Ok(origin) if !rest.trim().is_empty() => (origin, rest.trim()),
            Ok(_) => return Err(format!("{}:{}: mode without a locator", path.display(), n + 1)),
            Err(_) if line.starts_with("http://") || line.starts_with("https://") => (Origin::HttpUrl, line),
            Err(_) => (Origin::LocalFile, line),
        };
        let locator = if origin == Origin::LocalFile && Path::new(locator).is_relative() {
            base.join(locator).display().to_string()
        } else {
            locator.to_string()
        };
        jobs.push(Job { origin, locator });
    }
    Ok(jobs)
}

/// File stem, or host and path of a URL, as a file-name-safe slug.
fn slug(job: &Job) -> String {
    let raw = match job.origin {
        Origin::LocalFile => {
            let name = Path::new(&job.locator).file_name().and_then(|n| n.to_str()).unwrap_or("page");
            name.split('.').next().unwrap_or(name).to_string()
        }
        _ => job.locator.split_once("://").map_or(job.locator.as_str(), |(_, rest)| rest).to_string(),
    };
    let mut out = String::new();
    for c in raw.to_lowercase().chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    let out = out.trim_matches('-').to_string();
    if out.is_empty() {
        "page".into()
    } else {
        out
    }
}

/// "fixtures/zoom.html" gives "Zoom"; "https://www.zoom.us/pricing" gives "Zoom".
fn default_saas_name(job: &Job) -> String {
    let base = match job.origin {
        Origin::LocalFile => slug(job).split('-').next().unwrap_or("page").to_string(),
        _ => {
            let rest = job.locator.split_once("://").map_or(job.locator.as_str(), |(_, r)| r);
            let host = rest.split(['/', ':', '?']).next().unwrap_or(rest);
            let host = host.strip_prefix("www.").unwrap_or(host);
            host.split('.').next().unwrap_or(host).to_string()
        }
    };
    let mut chars = base.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => "Unknown".into(),
    }
}

struct Stage<'a> {
    fetcher: Fetcher,
    fetch: &'a FetchArgs,
    counter: Box<dyn TokenCounter + Send + Sync>,
    prompts: PromptSet,
}

impl<'a> Stage<'a> {
    fn new(fetch: &'a FetchArgs, model: &ModelArgs) -> Result<Self, String> {
        let counter: Box<dyn TokenCounter + Send + Sync> = match &fetch.token_counts {
            Some(path) => Box::new(RecordedTokenCounts::load(path).map_err(|e| format!("{}: {e}", path.display()))?),
            None => Box::new(ByteHeuristic),
        };
        let prompts = match &model.prompts {
            Some(dir) => PromptSet::load_dir(dir).map_err(|e| e.to_string())?,
            None => PromptSet::bundled(),
        };
        let webdriver = WebDriverConfig { endpoint: fetch.webdriver.clone(), ..WebDriverConfig::default() };
        Ok(Stage { fetcher: Fetcher::new(Duration::from_secs(fetch.timeout), webdriver), fetch, counter, prompts })
    }

    fn payload(&self, job: &Job) -> Result<(String, CleanedPayload), String> {
        let doc = self
            .fetcher
            .fetch(&job.locator, job.origin, Duration::from_secs(self.fetch.wait))
            .map_err(|e| format!("{}: {e}", e.code()))?;
        let payload = clean_html(&doc.raw_html, self.fetch.budget, self.counter.as_ref()).map_err(|e| format!("{}: {e}", e.code()))?;
        Ok((doc.final_url, payload))
    }
}

fn settings(model: &ModelArgs) -> ExtractionSettings {
    ExtractionSettings { model: model.model.clone(), ..ExtractionSettings::default() }
}

fn http_provider(model: &ModelArgs, fetch: &FetchArgs) -> Result<HttpProvider, String> {
    HttpProvider::from_env(&model.base_url, Duration::from_secs(fetch.timeout), RateLimiter::per_minute(model.rate_per_minute))
        .map_err(|e| format!("PROVIDER_ERROR: {e}"))
}

fn transform_one(args: &TransformArgs, stage: &Stage, provider: &dyn Provider, job: &Job, out: &Path) -> u8 {
    let fail = |message: String| {
        eprintln!("{}: {message}", job.locator);
        EXIT_PIPELINE
    };
    let (final_url, payload) = match stage.payload(job) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let extractor = Extractor::new(provider, &stage.prompts, settings(&args.model));
    let extraction = match extractor.extract_all(&payload) {
        Ok(x) => x,
        Err(e) => return fail(format!("{}: {e}", e.code())),
    };
    let source_url = match job.origin {
        Origin::LocalFile => job.locator.clone(),
        _ => final_url,
    };
    let meta = Meta {
        saas_name: args.saas_name.clone().unwrap_or_else(|| default_saas_name(job)),
        source_url,
        extraction_date: args.date.unwrap_or_else(|| Utc::now().date_naive()),
        currency: args.currency.clone(),
    };
    let log_path = with_suffix(out, ".log");
    let processed = match process(extraction, &payload.text, &meta, &EngineConfig::default()) {
        Ok(p) => p,
        Err(e @ EngineError::AssemblyFailed(_)) => {
            let _ = std::fs::write(&log_path, write_log(e.ledger()));
            return fail(format!("{}: {e}; see {}", e.code(), log_path.display()));
        }
    };
    let header = format!(
        "# generated by ipricing {}\n# source: {} {}\n# prompts: {}, provider: {}, model: {}, cleaner: {CLEANER_VERSION}, lexicon: {LEXICON_VERSION}\n",
        env!("CARGO_PKG_VERSION"),
        job.origin,
        job.locator,
        stage.prompts.version,
        provider.id(),
        args.model.model,
    );
    let doc_path = with_suffix(out, ".pricing.yml");
    if let Some(dir) = doc_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        if let Err(e) = std::fs::create_dir_all(dir) {
            return fail(format!("{}: {e}", dir.display()));
        }
    }
    let written = std::fs::write(&doc_path, header + &serialize(&processed.pricing))
        .and_then(|_| std::fs::write(&log_path, write_log(&processed.ledger)));
    if let Err(e) = written {
        return fail(format!("cannot write output: {e}"));
    }
    let counts = summarize(&processed.pricing);
    let errors = processed.ledger.errors().count();
    println!(
        "{}: {} plans, {} features, {} usage limits, {} add-ons; {} diagnostics ({} errors)",
        doc_path.display(),
        counts.plans,
        counts.features,
        counts.usage_limits,
        counts.add_ons,
        processed.ledger.len(),
        errors
    );
    if errors > 0 {
        EXIT_DIAGNOSTICS
    } else {
        EXIT_OK
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Runs `work` over `jobs` on up to `threads` threads; returns the highest exit code.
fn run_jobs(jobs: &[(Job, PathBuf)], threads: usize, work: impl Fn(&Job, &Path) -> u8 + Sync) -> u8 {
    let next = AtomicUsize::new(0);
    let worst = Mutex::new(EXIT_OK);
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((job, out)) = jobs.get(i) else { break };
                let code = work(job, out);
                let mut w = worst.lock().unwrap_or_else(|e| e.into_inner());
                *w = (*w).max(code);
            });
        }
    });
    worst.into_inner().unwrap_or_else(|e| e.into_inner())
}

fn jobs_for(source: &SourceArgs, out: &Path) -> Result<Vec<(Job, PathBuf)>, String> {
    if let Some(manifest) = &source.batch {
        let mut used = std::collections::HashSet::new();
        return Ok(read_manifest(manifest)?
            .into_iter()
            .map(|job| {
                let base = slug(&job);
                let mut name = base.clone();
                let mut n = 2;
                while !used.insert(name.clone()) {
                    name = format!("{base}-{n}");
                    n += 1;
                }
                (job, out.join(name))
            })
            .collect());
    }
    Ok(single_source(source).map(|job| vec![(job, out.to_path_buf())]).unwrap_or_default())
}

pub fn run(args: TransformArgs) -> u8 {
    let jobs = match jobs_for(&args.source, &args.out) {
        Ok(jobs) if jobs.is_empty() => {
            eprintln!("error: no documents to transform");
            return EXIT_USAGE;
        }
        Ok(jobs) => jobs,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let stage = match Stage::new(&args.fetch, &args.model) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let provider: Box<dyn Provider> = match args.provider {
        ProviderKind::Replay => Box::new(ReplayProvider::new(&args.replay_dir)),
        ProviderKind::Null => Box::new(NullProvider),
        ProviderKind::Http => match http_provider(&args.model, &args.fetch) {
            Ok(p) => Box::new(p),
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_PIPELINE;
            }
        },
    };
    run_jobs(&jobs, args.jobs, |job, out| transform_one(&args, &stage, provider.as_ref(), job, out))
}

pub fn record(args: RecordArgs) -> u8 {
    let jobs = match jobs_for(&args.source, &args.out_dir) {
        Ok(jobs) => jobs,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let stage = match Stage::new(&args.fetch, &args.model) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let provider = match http_provider(&args.model, &args.fetch) {
        Ok(p) => RecordingProvider::new(p, &args.out_dir),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_PIPELINE;
        }
    };
    run_jobs(&jobs, 1, |job, _| {
        let payload = match stage.payload(job) {
            Ok((_, p)) => p,
            Err(e) => {
                eprintln!("{}: {e}", job.locator);
                return EXIT_PIPELINE;
            }
        };
        let extractor = Extractor::new(&provider, &stage.prompts, settings(&args.model));
        match extractor.extract_all(&payload) {
            Ok(x) => {
                println!("{}: recorded {} passes into {}", job.locator, 5, args.out_dir.display());
                if x.ledger.has_errors() {
                    EXIT_DIAGNOSTICS
                } else {
                    EXIT_OK
                }
            }
            Err(e) => {
                eprintln!("{}: {}: {e}", job.locator, e.code());
                EXIT_PIPELINE
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_slugs() {
        let file = Job { origin: Origin::LocalFile, locator: "fixtures/zoom.html".into() };
        assert_eq!(slug(&file), "zoom");
        assert_eq!(default_saas_name(&file), "Zoom");
        let url = Job { origin: Origin::HttpUrl, locator: "https://www.zoom.us/pricing?x=1".into() };
        assert_eq!(slug(&url), "www-zoom-us-pricing-x-1");
        assert_eq!(default_saas_name(&url), "Zoom");
    }

    #[test]
    fn manifest_lines() {
        let dir = std::env::temp_dir().join(format!("ipricing-manifest-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("pages.txt");
        std::fs::write(&path, "# pages\nzoom.html\nrendered https://a.test/p\n\nhttps://b.test\nfile /abs/x.html\n").unwrap();
        let jobs = read_manifest(&path).unwrap();
        std::fs::remove_dir_all(&dir).unwrap();
        assert_eq!(
            jobs,
            vec![
                Job { origin: Origin::LocalFile, locator: dir.join("zoom.html").display().to_string() },
                Job { origin: Origin::WebDriverUrl, locator: "https://a.test/p".into() },
                Job { origin: Origin::HttpUrl, locator: "https://b.test".into() },
                Job { origin: Origin::LocalFile, locator: "/abs/x.html".into() },
            ]
        );
    }
}
