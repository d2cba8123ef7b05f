//! Versioned prompt templates.
//!
//! A prompt set is a directory holding `VERSION` and one text file per pass.
//! The bundled set is compiled in from `prompts/v1`; any directory with the
//! same layout replaces it at run time.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use regex::{Captures, Regex};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TemplateId {
    Plans,
    Features,
    UsageLimits,
    AddOnsInTable,
    AddOnsFromHtml,
}

impl TemplateId {
    /// Pass order; later passes depend on the plan names found first.
    pub const ALL: [TemplateId; 5] = [
        TemplateId::Plans,
        TemplateId::Features,
        TemplateId::UsageLimits,
        TemplateId::AddOnsInTable,
        TemplateId::AddOnsFromHtml,
    ];

    /// File stem of the template and of its replay fixtures.
    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::Plans => "plans",
            TemplateId::Features => "features",
            TemplateId::UsageLimits => "usage_limits",
            TemplateId::AddOnsInTable => "addons_in_table",
            TemplateId::AddOnsFromHtml => "addons_from_html",
        }
    }

    pub fn needs_prior_plans(self) -> bool {
        matches!(self, TemplateId::Features | TemplateId::UsageLimits | TemplateId::AddOnsInTable)
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub text: String,
    pub version: String,
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("cannot read prompt file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("prompt `{id}` lacks the placeholder {{{placeholder}}}")]
    MissingPlaceholder { id: TemplateId, placeholder: &'static str },
    #[error("prompt set has an empty VERSION")]
    EmptyVersion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    pub version: String,
    templates: BTreeMap<TemplateId, PromptTemplate>,
}

fn placeholder_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{(payload|prior_plans)\}").unwrap())
}

impl PromptSet {
    /// The prompts shipped with the crate.
    pub fn bundled() -> PromptSet {
        let files = [
            (TemplateId::Plans, include_str!("../../prompts/v1/plans.txt")),
            (TemplateId::Features, include_str!("../../prompts/v1/features.txt")),
            (TemplateId::UsageLimits, include_str!("../../prompts/v1/usage_limits.txt")),
            (TemplateId::AddOnsInTable, include_str!("../../prompts/v1/addons_in_table.txt")),
            (TemplateId::AddOnsFromHtml, include_str!("../../prompts/v1/addons_from_html.txt")),
        ];
        let version = include_str!("../../prompts/v1/VERSION");
        Self::from_texts(version, files.iter().map(|(id, t)| (*id, t.to_string())))
            .expect("bundled prompts are well formed")
    }

    pub fn load_dir(dir: &Path) -> Result<PromptSet, PromptError> {
        let read = |name: String| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|source| PromptError::Io {
                path: path.display().to_string(),
                source,
            })
        };
        let version = read("VERSION".into())?;
        let mut texts = Vec::new();
        for id in TemplateId::ALL {
            texts.push((id, read(format!("{}.txt", id.as_str()))?));
        }
        Self::from_texts(&version, texts)
    }

    fn from_texts(
        version: &str,
        texts: impl IntoIterator<Item = (TemplateId, String)>,
    ) -> Result<PromptSet, PromptError> {
        let version = version.trim().to_string();
        if version.is_empty() {
            return Err(PromptError::EmptyVersion);
        }
        let mut templates = BTreeMap::new();
        for (id, text) in texts {
            if !text.contains("{payload}") {
                return Err(PromptError::MissingPlaceholder { id, placeholder: "payload" });
            }
            if id.needs_prior_plans() && !text.contains("{prior_plans}") {
                return Err(PromptError::MissingPlaceholder { id, placeholder: "prior_plans" });
            }
            templates.insert(id, PromptTemplate { id, text, version: version.clone() });
        }
        Ok(PromptSet { version, templates })
    }

    pub fn get(&self, id: TemplateId) -> &PromptTemplate {
        &self.templates[&id]
    }

    /// Fills the placeholders in one pass, so text inside the payload is never
    /// itself treated as a placeholder.
    pub fn render(&self, id: TemplateId, payload: &str, prior_plans: &[String]) -> String {
        let plans = if prior_plans.is_empty() {
            "(none found)".to_string()
        } else {
            prior_plans.iter().map(|p| format!("\"{p}\"")).collect::<Vec<_>>().join(", ")
        };
        placeholder_re()
            .replace_all(&self.get(id).text, |caps: &Captures| match &caps[1] {
                "payload" => payload.to_string(),
                _ => plans.clone(),
            })
            .into_owned()
    }
}
