//! The process engine: checks extracted records against the page and each
//! other, then assembles a [`Pricing`].
//!
//! Warnings never stop the pipeline. Every merge, retype or drop leaves a
//! ledger entry, and the ledger order is fixed: extraction notes, duplicate
//! merging, billing, grounding, cross checks, row coverage, assembly and
//! model validation.

mod assemble;
mod grounding;
mod rules;

use thiserror::Error;

pub use assemble::{assemble, Meta};
pub use grounding::{ground, normalize_tokens, GroundingIndex, Match, DEFAULT_GROUNDING_THRESHOLD};
pub use rules::{check_billing_consistency, check_row_coverage, cross_validate, data_rows, dedupe};

use crate::category::Category;
use crate::diagnostics::Ledger;
use crate::extract::Extraction;
use crate::model::Pricing;

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub grounding_threshold: f64,
    pub suspect_plan_count: usize,
    /// Minimum share of table data rows expected to become features or usage limits.
    pub min_row_coverage: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            grounding_threshold: DEFAULT_GROUNDING_THRESHOLD,
            suspect_plan_count: 8,
            min_row_coverage: 0.5,
        }
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no plan and no standalone add-on could be assembled")]
    AssemblyFailed(Ledger),
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        "ASSEMBLY_FAILED"
    }

    pub fn ledger(&self) -> &Ledger {
        match self {
            EngineError::AssemblyFailed(ledger) => ledger,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Processed {
    pub pricing: Pricing,
    pub ledger: Ledger,
}

/// Runs every rule over `extraction` and assembles the pricing.
pub fn process(extraction: Extraction, payload: &str, meta: &Meta, config: &EngineConfig) -> Result<Processed, EngineError> {
    let Extraction { mut records, mut ledger } = extraction;
    ledger.extend(dedupe(&mut records));
    ledger.extend(check_billing_consistency(rules::items(&records, Category::Plans)));
    ledger.extend(ground(&records, &GroundingIndex::new(payload), config.grounding_threshold));
    ledger.extend(cross_validate(&records, config.suspect_plan_count));
    ledger.extend(check_row_coverage(&records, payload, config.min_row_coverage));
    match assemble(&records, meta) {
        Ok((pricing, assembly)) => {
            ledger.extend(assembly);
            Ok(Processed { pricing, ledger })
        }
        Err(assembly) => {
            ledger.extend(assembly);
            Err(EngineError::AssemblyFailed(ledger))
        }
    }
}
