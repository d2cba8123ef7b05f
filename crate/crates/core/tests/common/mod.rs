#![allow(dead_code)]

use std::path::PathBuf;

use chrono::NaiveDate;
use indexmap::IndexMap;
use ipricing::model::{
    AddOn, Availability, Feature, FeatureValue, LimitValue, Plan, Price, Pricing, UsageLimit, ValueType,
};
use rand::seq::SliceRandom;
use rand::Rng;
use rust_decimal::Decimal;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn fixture(rel: &str) -> PathBuf {
    workspace_root().join("fixtures").join(rel)
}

// Characters that stress YAML quoting and name normalization.
const ALPHABET: &[&str] = &[
    "a", "b", "Z", "7", " ", "  ", "-", ":", "#", "\"", "'", "\\", "{", "}", "[", "]", ",", "&", "*", "!", "|", ">",
    "%", "@", "`", "\t", "\n", "é", "ß", "日本", "✔", "—", "🚀", "\u{00a0}", "\u{2028}", "\u{feff}", "\u{7}", "yes",
    "null", "~", "0x1F", "1e3", ".inf", "true",
];

pub fn random_text<R: Rng>(rng: &mut R, max_parts: usize) -> String {
    let parts = rng.gen_range(0..=max_parts);
    (0..parts).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

/// A name that is non-empty after normalization and unused so far.
pub fn unique_name<R: Rng>(rng: &mut R, taken: &mut Vec<String>) -> String {
    loop {
        let base = random_text(rng, 4);
        let name = format!("{}{}", base, rng.gen_range(0..1000));
        let key = ipricing::names::normalize_name(&name);
        if !key.is_empty() && !taken.contains(&key) {
            taken.push(key);
            return name;
        }
    }
}

pub fn random_decimal<R: Rng>(rng: &mut R) -> Decimal {
    Decimal::new(rng.gen_range(0..10_000_000), rng.gen_range(0..4))
}

pub fn random_price<R: Rng>(rng: &mut R) -> Price {
    match rng.gen_range(0..6) {
        0 => Price::Free,
        1 => Price::ContactSales,
        _ => Price::Amount(random_decimal(rng)),
    }
}

fn random_limit<R: Rng>(rng: &mut R) -> LimitValue {
    if rng.gen_bool(0.2) {
        LimitValue::Unlimited
    } else {
        let mut unit = random_text(rng, 3);
        if unit.trim().is_empty() {
            unit.push_str("GB");
        }
        LimitValue::Finite { amount: random_decimal(rng), unit }
    }
}

fn random_feature_value<R: Rng>(rng: &mut R, t: ValueType) -> FeatureValue {
    match t {
        ValueType::Boolean => FeatureValue::Boolean(rng.gen()),
        ValueType::Numeric => FeatureValue::Numeric(random_decimal(rng)),
        ValueType::Text => FeatureValue::Text(random_text(rng, 5)),
    }
}

fn maybe_text<R: Rng>(rng: &mut R) -> Option<String> {
    rng.gen_bool(0.5).then(|| random_text(rng, 6))
}

/// A random pricing that passes validation.
pub fn random_pricing<R: Rng>(rng: &mut R) -> Pricing {
    let currencies = ["USD", "EUR", "GBP", "JPY"];
    let date = NaiveDate::from_ymd_opt(rng.gen_range(2000..2100), rng.gen_range(1..=12), rng.gen_range(1..=28)).unwrap();
    let mut p = Pricing::shell(
        random_text(rng, 6),
        random_text(rng, 4),
        date,
        *currencies.choose(rng).unwrap(),
    );

    let mut taken = Vec::new();
    for _ in 0..rng.gen_range(0..6) {
        let value_type = *[ValueType::Boolean, ValueType::Numeric, ValueType::Text].choose(rng).unwrap();
        p.features.push(Feature {
            name: unique_name(rng, &mut taken),
            description: maybe_text(rng),
            value_type,
            default_value: random_feature_value(rng, value_type),
        });
    }

    let mut taken = Vec::new();
    for _ in 0..rng.gen_range(0..4) {
        let linked = p
            .features
            .iter()
            .filter(|_| rng.gen_bool(0.3))
            .map(|f| f.name.clone())
            .collect();
        p.usage_limits.push(UsageLimit {
            name: unique_name(rng, &mut taken),
            description: maybe_text(rng),
            value: random_limit(rng),
            linked_features: linked,
        });
    }

    // plans and add-ons share a namespace
    let mut taken = Vec::new();
    for _ in 0..rng.gen_range(1..5) {
        let mut plan = Plan::new(unique_name(rng, &mut taken), random_price(rng), *currencies.choose(rng).unwrap());
        plan.description = maybe_text(rng);
        plan.annual_price = rng.gen_bool(0.5).then(|| random_price(rng));
        plan.feature_values = feature_values(rng, &p.features);
        plan.usage_limit_values = limit_values(rng, &p.usage_limits);
        p.plans.push(plan);
    }
    for _ in 0..rng.gen_range(0..4) {
        let mut addon = AddOn::new(unique_name(rng, &mut taken), random_price(rng));
        addon.description = maybe_text(rng);
        addon.unit = rng.gen_bool(0.5).then(|| random_text(rng, 3));
        addon.standalone = rng.gen();
        if rng.gen_bool(0.5) {
            let names = p.plans.iter().filter(|_| rng.gen_bool(0.5)).map(|x| x.name.clone()).collect();
            addon.available_for = Availability::Plans(names);
        }
        addon.feature_values = feature_values(rng, &p.features);
        addon.usage_limit_values = limit_values(rng, &p.usage_limits);
        addon.usage_limit_extensions = limit_values(rng, &p.usage_limits);
        p.add_ons.push(addon);
    }
    p
}

fn feature_values<R: Rng>(rng: &mut R, features: &[Feature]) -> IndexMap<String, FeatureValue> {
    let mut out = IndexMap::new();
    for f in features {
        if rng.gen_bool(0.6) {
            out.insert(f.name.clone(), random_feature_value(rng, f.value_type));
        }
    }
    out
}

fn limit_values<R: Rng>(rng: &mut R, limits: &[UsageLimit]) -> IndexMap<String, LimitValue> {
    let mut out = IndexMap::new();
    for u in limits {
        if rng.gen_bool(0.5) {
            out.insert(u.name.clone(), random_limit(rng));
        }
    }
    out
}

/// `plans` plans with `addons` add-ons, all priced at 1 and available everywhere.
pub fn priced_shell(plans: usize, addons: usize) -> Pricing {
    let mut p = Pricing::shell("T", "", NaiveDate::from_ymd_opt(2024, 1, 1).unwrap(), "USD");
    for i in 0..plans {
        p.plans.push(Plan::new(format!("P{i}"), Price::Amount(Decimal::ONE), "USD"));
    }
    for i in 0..addons {
        p.add_ons.push(AddOn::new(format!("A{i}"), Price::Amount(Decimal::ONE)));
    }
    p
}
