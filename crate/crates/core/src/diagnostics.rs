//! Coded warnings and errors shared by model validation and the process engine.
//!
//! Every code belongs to a closed registry with a fixed severity. The ledger
//! keeps entries in generation order; nothing reorders them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::category::Category;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    Warning,
    Error,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Warning => "WARNING",
            Severity::Error => "ERROR",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

macro_rules! codes {
    ($( $variant:ident => ($text:literal, $sev:ident, $doc:literal) ),* $(,)?) => {
        /// Closed registry of diagnostic codes.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Code {
            $( #[doc = $doc] $variant, )*
        }

        impl Code {
            pub const ALL: &'static [Code] = &[$(Code::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self { $( Code::$variant => $text, )* }
            }

            pub fn severity(self) -> Severity {
                match self { $( Code::$variant => Severity::$sev, )* }
            }

            pub fn description(self) -> &'static str {
                match self { $( Code::$variant => $doc, )* }
            }

            pub fn parse(text: &str) -> Option<Code> {
                match text { $( $text => Some(Code::$variant), )* _ => None }
            }
        }
    };
}

codes! {
    // model validation
    EmptyName => ("EMPTY_NAME", Error, "An element name is empty after normalization."),
    DuplicateFeature => ("DUPLICATE_FEATURE", Error, "Two features share a normalized name."),
    DuplicateUsageLimit => ("DUPLICATE_USAGE_LIMIT", Error, "Two usage limits share a normalized name."),
    DuplicatePlan => ("DUPLICATE_PLAN", Error, "Two plans share a normalized name."),
    DuplicateAddOn => ("DUPLICATE_ADDON", Error, "Two add-ons share a normalized name."),
    AddOnNamedLikePlan => ("ADDON_PLAN_NAME_COLLISION", Error, "An add-on has the same normalized name as a plan."),
    DanglingReference => ("DANGLING_REFERENCE", Error, "A cross-reference names an element that is not declared."),
    ValueTypeMismatch => ("VALUE_TYPE_MISMATCH", Error, "A feature value does not match the feature's value type."),
    NegativeAmount => ("NEGATIVE_AMOUNT", Error, "A price or usage-limit amount is negative."),
    EmptyUnit => ("EMPTY_UNIT", Error, "A finite usage-limit value has an empty unit."),
    InvalidCurrency => ("INVALID_CURRENCY", Error, "A currency is not a three-letter ISO-4217 style code."),
    NoSubscribableOffer => ("NO_SUBSCRIBABLE_OFFER", Error, "The pricing has no plan and no standalone add-on."),
    // process engine
    DuplicateMerged => ("DUPLICATE_MERGED", Warning, "Items with equal normalized names were merged; the first occurrence won."),
    ValueConflict => ("VALUE_CONFLICT", Warning, "Merged duplicates disagreed on a field; both values are listed."),
    MergeConflict => ("MERGE_CONFLICT", Warning, "The two add-on passes disagreed on a field; the table pass won."),
    AnnualExceedsMonthly => ("ANNUAL_EXCEEDS_MONTHLY", Warning, "Annual price is greater than twelve monthly payments."),
    ImplausibleDiscount => ("IMPLAUSIBLE_DISCOUNT", Warning, "Annual price is below a quarter of twelve monthly payments."),
    UngroundedItem => ("UNGROUNDED_ITEM", Warning, "An extracted name has no close textual match in the source page."),
    PlanAddOnCollision => ("PLAN_ADDON_COLLISION", Warning, "A name was extracted both as a plan and as an add-on."),
    OrphanValue => ("ORPHAN_VALUE", Warning, "A feature or usage limit carries a value for a plan that was not extracted."),
    SuspectPlanCount => ("SUSPECT_PLAN_COUNT", Warning, "More plans were extracted than the configured threshold."),
    LowRowCoverage => ("LOW_ROW_COVERAGE", Warning, "Fewer features and usage limits were extracted than the page has table rows."),
    ItemRejected => ("ITEM_REJECTED", Warning, "A response object was skipped because a required key was missing."),
    UnparsedPrice => ("UNPARSED_PRICE", Warning, "A price string could not be interpreted; a fallback was used."),
    UnparsedValue => ("UNPARSED_VALUE", Warning, "A per-plan value could not be interpreted and was dropped."),
    DroppedLink => ("DROPPED_LINK", Warning, "A reference to an unknown element was removed during assembly."),
    DroppedItem => ("DROPPED_ITEM", Warning, "An item was removed during assembly."),
    UsageLimitCandidate => ("USAGE_LIMIT_CANDIDATE", Warning, "A feature carries numeric values with units and may be a usage limit."),
    ExtractionPassFailed => ("EXTRACTION_PASS_FAILED", Error, "An extraction pass failed; results are partial."),
}

/// What a diagnostic is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subject {
    pub scope: Scope,
    pub item: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Pricing,
    Category(Category),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Pricing => f.write_str("pricing"),
            Scope::Category(c) => f.write_str(c.as_str()),
        }
    }
}

impl Subject {
    pub fn new(category: Category, item: impl Into<String>) -> Self {
        Subject {
            scope: Scope::Category(category),
            item: item.into(),
        }
    }

    pub fn pricing(item: impl Into<String>) -> Self {
        Subject {
            scope: Scope::Pricing,
            item: item.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub message: String,
    pub subject: Subject,
    pub evidence: Option<String>,
}

impl Diagnostic {
    pub fn new(code: Code, subject: Subject, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            severity: code.severity(),
            message: message.into(),
            subject,
            evidence: None,
        }
    }

    pub fn with_evidence(mut self, evidence: impl Into<String>) -> Self {
        self.evidence = Some(evidence.into());
        self
    }
}

/// Ordered list of diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ledger {
    entries: Vec<Diagnostic>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, diagnostic: Diagnostic) {
        self.entries.push(diagnostic);
    }

    pub fn emit(&mut self, code: Code, subject: Subject, message: impl Into<String>) {
        self.push(Diagnostic::new(code, subject, message));
    }

    pub fn extend(&mut self, other: Ledger) {
        self.entries.extend(other.entries);
    }

    pub fn entries(&self) -> &[Diagnostic] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.entries.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.entries.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn codes(&self) -> Vec<Code> {
        self.entries.iter().map(|d| d.code).collect()
    }

    pub fn count(&self, code: Code) -> usize {
        self.entries.iter().filter(|d| d.code == code).count()
    }

    pub fn contains(&self, code: Code) -> bool {
        self.count(code) > 0
    }
}

impl IntoIterator for Ledger {
    type Item = Diagnostic;
    type IntoIter = std::vec::IntoIter<Diagnostic>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.into_iter()
    }
}

impl FromIterator<Diagnostic> for Ledger {
    fn from_iter<T: IntoIterator<Item = Diagnostic>>(iter: T) -> Self {
        Ledger {
            entries: iter.into_iter().collect(),
        }
    }
}
