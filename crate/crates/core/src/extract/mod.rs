//! The information extractor: prompt passes over a cleaned payload, each
//! turned into an [`ExtractionRecord`].
//!
//! Passes run in a fixed order. Plans come first because the feature, usage
//! limit and in-table add-on prompts are told which plans exist. The two
//! add-on passes are merged into one record, the in-table pass winning
//! conflicts.

mod parse;
mod prompts;
mod provider;

use chrono::{DateTime, Utc};
use indexmap::IndexMap;
use thiserror::Error;

pub use parse::{parse_structured_response, NoArray, ParsedResponse};
pub use prompts::{PromptError, PromptSet, PromptTemplate, TemplateId};
pub use provider::{
    payload_hash, replay_path, HttpProvider, NullProvider, Provider, ProviderError, ProviderRequest,
    ProviderResponse, RateLimiter, RecordingProvider, ReplayProvider, RetryPolicy, KEY_ENV_VAR,
};

use crate::category::Category;
use crate::diagnostics::{Code, Diagnostic, Ledger, Subject};
use crate::ingest::CleanedPayload;
use crate::names::NameKey;

/// One element as the model reported it, before any typing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExtractedItem {
    pub name: String,
    pub description: Option<String>,
    /// Raw cell text per plan name.
    pub values: IndexMap<String, String>,
    /// Raw value shared by all plans (usage limits).
    pub value: Option<String>,
    pub monthly_price: Option<String>,
    pub annual_price: Option<String>,
    /// Add-on price.
    pub price: Option<String>,
    pub unit: Option<String>,
    /// `None` means every plan.
    pub available_for: Option<Vec<String>>,
    pub standalone: bool,
    pub linked_features: Vec<String>,
    pub notes: Vec<String>,
}

impl ExtractedItem {
    pub fn named(name: impl Into<String>) -> Self {
        ExtractedItem { name: name.into(), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub template: TemplateId,
    pub template_version: String,
    pub provider: String,
    pub model: String,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionRecord {
    pub category: Category,
    pub items: Vec<ExtractedItem>,
    pub provenance: Vec<Provenance>,
}

impl ExtractionRecord {
    pub fn new(category: Category, items: Vec<ExtractedItem>) -> Self {
        ExtractionRecord { category, items, provenance: Vec::new() }
    }
}

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("provider failed on the {template} pass: {source}")]
    Provider {
        template: TemplateId,
        #[source]
        source: ProviderError,
    },
    #[error("the {template} response holds no recoverable array")]
    ParseFailed { template: TemplateId, raw: String },
}

impl ExtractError {
    pub fn code(&self) -> &'static str {
        match self {
            ExtractError::Provider { .. } => "PROVIDER_ERROR",
            ExtractError::ParseFailed { .. } => "PARSE_FAILED",
        }
    }

    pub fn template(&self) -> TemplateId {
        match self {
            ExtractError::Provider { template, .. } | ExtractError::ParseFailed { template, .. } => *template,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionSettings {
    pub model: String,
    pub temperature: f32,
    pub max_output_tokens: u32,
    pub retry: RetryPolicy,
}

impl Default for ExtractionSettings {
    fn default() -> Self {
        ExtractionSettings {
            model: "replay".into(),
            temperature: 0.0,
            max_output_tokens: 8192,
            retry: RetryPolicy::default(),
        }
    }
}

/// Records for all four categories plus what went wrong along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// Plans, features, usage limits, add-ons, in that order.
    pub records: Vec<ExtractionRecord>,
    pub ledger: Ledger,
}

impl Extraction {
    pub fn record(&self, category: Category) -> &ExtractionRecord {
        self.records.iter().find(|r| r.category == category).expect("every category has a record")
    }
}

fn pass_category(template: TemplateId) -> Category {
    match template {
        TemplateId::Plans => Category::Plans,
        TemplateId::Features => Category::Features,
        TemplateId::UsageLimits => Category::UsageLimits,
        TemplateId::AddOnsInTable | TemplateId::AddOnsFromHtml => Category::AddOns,
    }
}

pub struct Extractor<'a> {
    provider: &'a dyn Provider,
    prompts: &'a PromptSet,
    settings: ExtractionSettings,
}

impl<'a> Extractor<'a> {
    pub fn new(provider: &'a dyn Provider, prompts: &'a PromptSet, settings: ExtractionSettings) -> Self {
        Extractor { provider, prompts, settings }
    }

    /// Renders one template, calls the provider and parses the reply.
    /// Item-level rejections are returned in the record's ledger.
    pub fn run_pass(
        &self,
        template: TemplateId,
        payload: &CleanedPayload,
        prior_plans: &[String],
    ) -> Result<(ExtractionRecord, Ledger), ExtractError> {
        let request = ProviderRequest {
            template,
            payload_hash: payload_hash(&payload.text),
            model: self.settings.model.clone(),
            prompt: self.prompts.render(template, &payload.text, prior_plans),
            temperature: self.settings.temperature,
            max_output_tokens: self.settings.max_output_tokens,
            structured_output: true,
        };
        let response = self
            .settings
            .retry
            .call(self.provider, &request)
            .map_err(|source| ExtractError::Provider { template, source })?;
        let category = pass_category(template);
        let parsed = parse_structured_response(&response.raw_text, category)
            .map_err(|NoArray| ExtractError::ParseFailed { template, raw: response.raw_text.clone() })?;
        let record = ExtractionRecord {
            category,
            items: parsed.items,
            provenance: vec![Provenance {
                template,
                template_version: self.prompts.get(template).version.clone(),
                provider: self.provider.id().to_string(),
                model: self.settings.model.clone(),
                timestamp: Utc::now(),
            }],
        };
        Ok((record, parsed.ledger))
    }

    /// Runs all five passes. A failing plans pass is an error; a later
    /// failure leaves that category empty and records `EXTRACTION_PASS_FAILED`.
    pub fn extract_all(&self, payload: &CleanedPayload) -> Result<Extraction, ExtractError> {
        let mut ledger = Ledger::new();
        let (plans, plan_ledger) = self.run_pass(TemplateId::Plans, payload, &[])?;
        ledger.extend(plan_ledger);
        let plan_names: Vec<String> = plans.items.iter().map(|i| i.name.clone()).collect();

        let mut later = Vec::new();
        for template in &TemplateId::ALL[1..] {
            let record = match self.run_pass(*template, payload, &plan_names) {
                Ok((record, pass_ledger)) => {
                    ledger.extend(pass_ledger);
                    record
                }
                Err(e) => {
                    ledger.push(
                        Diagnostic::new(Code::ExtractionPassFailed, Subject::new(pass_category(*template), template.as_str()), e.to_string())
                            .with_evidence(match &e {
                                ExtractError::ParseFailed { raw, .. } => raw.clone(),
                                ExtractError::Provider { source, .. } => source.to_string(),
                            }),
                    );
                    ExtractionRecord::new(pass_category(*template), Vec::new())
                }
            };
            later.push(record);
        }
        let from_html = later.pop().expect("five passes");
        let in_table = later.pop().expect("five passes");
        let (merged, merge_ledger) = merge_add_ons(in_table, from_html);
        ledger.extend(merge_ledger);

        let mut records = vec![plans];
        records.extend(later);
        records.push(merged);
        Ok(Extraction { records, ledger })
    }
}

fn conflict<T: PartialEq + Clone + std::fmt::Debug>(
    field: &str,
    kept: &mut Option<T>,
    other: &Option<T>,
    notes: &mut Vec<String>,
) {
    match (kept.as_ref(), other) {
        (None, Some(v)) => *kept = Some(v.clone()),
        (Some(a), Some(b)) if a != b => notes.push(format!("{field}: kept {a:?} over {b:?}")),
        _ => {}
    }
}

/// Merges the two add-on passes by normalized name. Items from the table
/// pass keep their fields; fields it lacks are filled from the other pass;
/// disagreements produce `MERGE_CONFLICT`. Items only in the second pass are
/// appended in their order.
pub fn merge_add_ons(in_table: ExtractionRecord, from_html: ExtractionRecord) -> (ExtractionRecord, Ledger) {
    let mut ledger = Ledger::new();
    let mut items = in_table.items;
    for other in from_html.items {
        let key = NameKey::new(&other.name);
        let Some(kept) = items.iter_mut().find(|i| NameKey::new(&i.name) == key) else {
            items.push(other);
            continue;
        };
        let mut notes = Vec::new();
        conflict("price", &mut kept.price, &other.price, &mut notes);
        conflict("unit", &mut kept.unit, &other.unit, &mut notes);
        conflict("availableFor", &mut kept.available_for, &other.available_for, &mut notes);
        conflict("description", &mut kept.description, &other.description, &mut notes);
        if kept.standalone != other.standalone {
            notes.push(format!("standalone: kept {} over {}", kept.standalone, other.standalone));
        }
        for note in notes {
            ledger.push(Diagnostic::new(
                Code::MergeConflict,
                Subject::new(Category::AddOns, kept.name.clone()),
                format!("add-on passes disagree; {note}"),
            ));
            kept.notes.push(note);
        }
    }
    let mut provenance = in_table.provenance;
    provenance.extend(from_html.provenance);
    (ExtractionRecord { category: Category::AddOns, items, provenance }, ledger)
}
