//! Tooling for turning static SaaS pricing pages into validated,
//! machine-readable pricing documents, and for scoring extraction quality.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`ingest`] fetches a page and reduces it to a cleaned payload.
//! 2. [`extract`] runs prompt-templated model passes over the payload.
//! 3. [`engine`] deduplicates, grounds and cross-checks the extracted
//!    records, then assembles a [`model::Pricing`].
//! 4. [`modeler`] writes the pricing document and the diagnostics log.
//!
//! [`eval`] implements point-based scoring against gold annotations.

pub mod category;
pub mod diagnostics;
pub mod engine;
pub mod eval;
pub mod extract;
pub mod ingest;
pub mod lexicon;
pub mod model;
pub mod modeler;
pub mod names;

pub use category::Category;
pub use diagnostics::{Code, Diagnostic, Ledger, Severity, Subject};
