//! Draft judgments from a predicted pricing and a gold annotation.
//!
//! The draft is meant to be reviewed and edited before scoring.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::metrics::{Judgment, Verdict};
use crate::category::Category;
use crate::lexicon::{classify_value, parse_price, TypedValue};
use crate::model::{LimitValue, Pricing};
use crate::names::normalize_name;

/// Expected items for one SaaS, stored as `<saas>.gold.json`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GoldAnnotation {
    pub saas: String,
    pub plans: Vec<GoldPlan>,
    pub features: Vec<GoldFeature>,
    pub usage_limits: Vec<GoldUsageLimit>,
    pub add_ons: Vec<GoldAddOn>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GoldPlan {
    pub name: String,
    pub monthly_price: Option<String>,
    /// Only visible after interacting with the page.
    pub dynamic: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GoldFeature {
    pub name: String,
    /// Plans in which the feature is available.
    pub available_in: Option<Vec<String>>,
    pub dynamic: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GoldUsageLimit {
    pub name: String,
    /// Plan name → displayed value, e.g. `"5 GB"` or `"unlimited"`.
    pub values: BTreeMap<String, String>,
    pub dynamic: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct GoldAddOn {
    pub name: String,
    pub price: Option<String>,
    pub dynamic: bool,
}

struct GoldEntry {
    name: String,
    dynamic: bool,
}

/// Matches predicted items against gold items by normalized name.
///
/// Matched items are `CORRECT`, or `PARTIAL` when a checked value differs;
/// predicted-only items are `HALLUCINATED`; gold-only items are `MISSED`, or
/// `ABSENT_DYNAMIC` when the gold marks them dynamic.
pub fn judge(pred: &Pricing, gold: &GoldAnnotation) -> Vec<Judgment> {
    let mut out = Vec::new();

    let plan_names: Vec<String> = pred.plans.iter().map(|p| p.name.clone()).collect();
    judge_category(
        &mut out,
        Category::Plans,
        &plan_names,
        gold.plans.iter().map(|g| GoldEntry { name: g.name.clone(), dynamic: g.dynamic }),
        |name, gi| {
            let g = &gold.plans[gi];
            let plan = pred.plan(name)?;
            let expected = parse_price(g.monthly_price.as_deref()?)?;
            (plan.monthly_price != expected)
                .then(|| format!("monthly price {} but expected {}", plan.monthly_price, expected))
        },
    );

    let feature_names: Vec<String> = pred.features.iter().map(|f| f.name.clone()).collect();
    judge_category(
        &mut out,
        Category::Features,
        &feature_names,
        gold.features.iter().map(|g| GoldEntry { name: g.name.clone(), dynamic: g.dynamic }),
        |name, gi| {
            let expected: BTreeSet<String> =
                gold.features[gi].available_in.as_ref()?.iter().map(|n| normalize_name(n)).collect();
            let feature = pred.feature(name)?;
            let actual: BTreeSet<String> = pred
                .plans
                .iter()
                .filter(|plan| {
                    plan.feature_values
                        .iter()
                        .find(|(k, _)| normalize_name(k) == normalize_name(&feature.name))
                        .map(|(_, v)| v)
                        .unwrap_or(&feature.default_value)
                        .is_available()
                })
                .map(|plan| normalize_name(&plan.name))
                .collect();
            (actual != expected).then(|| {
                format!(
                    "available in [{}] but expected [{}]",
                    actual.into_iter().collect::<Vec<_>>().join(", "),
                    expected.into_iter().collect::<Vec<_>>().join(", ")
                )
            })
        },
    );

    let limit_names: Vec<String> = pred.usage_limits.iter().map(|u| u.name.clone()).collect();
    judge_category(
        &mut out,
        Category::UsageLimits,
        &limit_names,
        gold.usage_limits.iter().map(|g| GoldEntry { name: g.name.clone(), dynamic: g.dynamic }),
        |name, gi| {
            let limit = pred.usage_limit(name)?;
            let mut wrong = Vec::new();
            for (plan_name, raw) in &gold.usage_limits[gi].values {
                let expected = match classify_value(raw) {
                    TypedValue::Unlimited => LimitValue::Unlimited,
                    TypedValue::Numeric { amount, unit } => LimitValue::Finite { amount, unit: unit.unwrap_or_default() },
                    _ => continue,
                };
                let actual = pred
                    .plan(plan_name)
                    .and_then(|p| {
                        p.usage_limit_values
                            .iter()
                            .find(|(k, _)| normalize_name(k) == normalize_name(&limit.name))
                            .map(|(_, v)| v)
                    })
                    .unwrap_or(&limit.value);
                if !limit_values_match(actual, &expected) {
                    wrong.push(plan_name.clone());
                }
            }
            (!wrong.is_empty()).then(|| format!("value differs for plan(s) {}", wrong.join(", ")))
        },
    );

    let addon_names: Vec<String> = pred.add_ons.iter().map(|a| a.name.clone()).collect();
    judge_category(
        &mut out,
        Category::AddOns,
        &addon_names,
        gold.add_ons.iter().map(|g| GoldEntry { name: g.name.clone(), dynamic: g.dynamic }),
        |name, gi| {
            let addon = pred.add_on(name)?;
            let expected = parse_price(gold.add_ons[gi].price.as_deref()?)?;
            (addon.price != expected).then(|| format!("price {} but expected {}", addon.price, expected))
        },
    );

    out
}

fn limit_values_match(a: &LimitValue, b: &LimitValue) -> bool {
    match (a, b) {
        (LimitValue::Unlimited, LimitValue::Unlimited) => true,
        (LimitValue::Finite { amount: x, unit: u }, LimitValue::Finite { amount: y, unit: v }) => {
            x == y && (v.is_empty() || normalize_name(u) == normalize_name(v))
        }
        _ => false,
    }
}

fn judge_category(
    out: &mut Vec<Judgment>,
    category: Category,
    predicted: &[String],
    gold: impl Iterator<Item = GoldEntry>,
    mismatch: impl Fn(&str, usize) -> Option<String>,
) {
    let gold: Vec<GoldEntry> = gold.collect();
    let mut matched = vec![false; gold.len()];
    for name in predicted {
        let key = normalize_name(name);
        match gold.iter().position(|g| normalize_name(&g.name) == key) {
            Some(gi) if !matched[gi] => {
                matched[gi] = true;
                out.push(match mismatch(name, gi) {
                    Some(note) => Judgment::partial(category, name.clone(), note),
                    None => Judgment::new(category, name.clone(), Verdict::Correct),
                });
            }
            _ => out.push(Judgment::new(category, name.clone(), Verdict::Hallucinated)),
        }
    }
    for (g, seen) in gold.iter().zip(matched) {
        if !seen {
            let verdict = if g.dynamic { Verdict::AbsentDynamic } else { Verdict::Missed };
            out.push(Judgment::new(category, g.name.clone(), verdict));
        }
    }
}
