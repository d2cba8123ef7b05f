use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Pricing;
use crate::diagnostics::Ledger;
use crate::names::normalize_name;

/// Default bound on brute-force candidates: 2^26.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;

/// Cardinalities of the four element lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryCounts {
    pub plans: usize,
    pub features: usize,
    pub usage_limits: usize,
    pub add_ons: usize,
}

pub fn summarize(p: &Pricing) -> SummaryCounts {
    SummaryCounts {
        plans: p.plans.len(),
        features: p.features.len(),
        usage_limits: p.usage_limits.len(),
        add_ons: p.add_ons.len(),
    }
}

/// Purchase rules between add-ons, supplied alongside a pricing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SubscriptionConstraints {
    /// add-on → add-ons that must be in the same subscription
    pub depends_on: BTreeMap<String, BTreeSet<String>>,
    /// add-on → add-ons that cannot be in the same subscription
    pub excludes: BTreeMap<String, BTreeSet<String>>,
    /// add-ons that may be bought without a plan
    pub standalone_allowed: BTreeSet<String>,
}

#[derive(Debug, Error)]
pub enum AnalyzeError {
    #[error("pricing has validation errors")]
    InvalidModel(Ledger),
    #[error("constraints reference unknown add-on `{0}`")]
    UnknownAddOn(String),
    #[error("add-on `{0}` depends on itself")]
    SelfDependency(String),
    #[error("add-on `{0}` excludes itself")]
    SelfExclusion(String),
    #[error("{candidates} candidate subscriptions exceed the cap of {cap}")]
    CapExceeded { candidates: u128, cap: u64 },
}

impl AnalyzeError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalyzeError::CapExceeded { .. } => "ENUMERATION_CAP_EXCEEDED",
            AnalyzeError::InvalidModel(_) => "INVALID_MODEL",
            _ => "INVALID_CONSTRAINTS",
        }
    }
}

/// Bitmask form of the constraints, indexed by add-on position.
struct Rules {
    requires: Vec<u64>,
    excludes: Vec<u64>,
    standalone: u64,
}

impl Rules {
    fn resolve(p: &Pricing, c: &SubscriptionConstraints) -> Result<Self, AnalyzeError> {
        let index = |name: &str| -> Result<usize, AnalyzeError> {
            let key = normalize_name(name);
            p.add_ons
                .iter()
                .position(|a| normalize_name(&a.name) == key)
                .ok_or_else(|| AnalyzeError::UnknownAddOn(name.to_string()))
        };
        let k = p.add_ons.len();
        let mut requires = vec![0u64; k];
        let mut excludes = vec![0u64; k];
        for (name, deps) in &c.depends_on {
            let a = index(name)?;
            for dep in deps {
                let b = index(dep)?;
                if a == b {
                    return Err(AnalyzeError::SelfDependency(name.clone()));
                }
                requires[a] |= 1 << b;
            }
        }
        for (name, others) in &c.excludes {
            let a = index(name)?;
            for other in others {
                let b = index(other)?;
                if a == b {
                    return Err(AnalyzeError::SelfExclusion(name.clone()));
                }
                excludes[a] |= 1 << b;
                excludes[b] |= 1 << a;
            }
        }
        let mut standalone = 0u64;
        for name in &c.standalone_allowed {
            standalone |= 1 << index(name)?;
        }
        for (i, addon) in p.add_ons.iter().enumerate() {
            if addon.standalone {
                standalone |= 1 << i;
            }
        }
        Ok(Rules { requires, excludes, standalone })
    }

    fn admits(&self, subset: u64) -> bool {
        let mut rest = subset;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.requires[i] & !subset != 0 || self.excludes[i] & subset != 0 {
                return false;
            }
        }
        true
    }

    /// Counts admissible subsets of `mask`, including the empty one.
    fn count_subsets(&self, mask: u64) -> u64 {
        let mut count = 0;
        let mut s = mask;
        loop {
            if self.admits(s) {
                count += 1;
            }
            if s == 0 {
                break;
            }
            s = (s - 1) & mask;
        }
        count
    }
}

/// Counts the distinct valid subscriptions of a pricing by exhaustive enumeration.
///
/// A subscription is one plan with a subset of the add-ons available for it,
/// or no plan with a non-empty subset of standalone add-ons. Standalone
/// add-ons are the union of `c.standalone_allowed` and add-ons flagged
/// standalone in the model. Dependencies and exclusions apply to both forms.
pub fn configuration_space(p: &Pricing, c: &SubscriptionConstraints, cap: u64) -> Result<u64, AnalyzeError> {
    let ledger = super::validate_model(p);
    if ledger.has_errors() {
        return Err(AnalyzeError::InvalidModel(ledger));
    }
    let rules = Rules::resolve(p, c)?;

    let k = p.add_ons.len() as u32;
    let rows = p.plans.len() as u128 + u128::from(rules.standalone != 0);
    let candidates = if k >= 64 { u128::MAX } else { rows.saturating_mul(1u128 << k) };
    if candidates > u128::from(cap) {
        return Err(AnalyzeError::CapExceeded { candidates, cap });
    }

    let mut total = 0u64;
    for plan in &p.plans {
        let available = p
            .add_ons
            .iter()
            .enumerate()
            .filter(|(_, a)| a.available_for.includes(&plan.name))
            .fold(0u64, |m, (i, _)| m | 1 << i);
        total += rules.count_subsets(available);
    }
    if rules.standalone != 0 {
        // the empty subset is not a subscription without a plan
        total += rules.count_subsets(rules.standalone) - 1;
    }
    Ok(total)
}
