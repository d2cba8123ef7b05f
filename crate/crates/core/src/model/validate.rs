use std::collections::{BTreeMap, HashMap};

use indexmap::IndexMap;
use rust_decimal::Decimal;

use super::{Availability, FeatureValue, LimitValue, Price, Pricing};
use crate::category::Category;
use crate::diagnostics::{Code, Ledger, Subject};
use crate::names::normalize_name;

/// Checks every structural invariant of a pricing.
///
/// The model is valid iff the returned ledger has no `ERROR` entries.
/// Entries do not depend on the order of the element lists beyond their own
/// position in the ledger.
pub fn validate_model(p: &Pricing) -> Ledger {
    let mut ledger = Ledger::new();

    check_currency(&mut ledger, Subject::pricing(&p.saas_name), &p.currency);

    check_names(&mut ledger, Category::Features, Code::DuplicateFeature, p.features.iter().map(|f| f.name.as_str()));
    check_names(&mut ledger, Category::UsageLimits, Code::DuplicateUsageLimit, p.usage_limits.iter().map(|u| u.name.as_str()));
    check_names(&mut ledger, Category::Plans, Code::DuplicatePlan, p.plans.iter().map(|x| x.name.as_str()));
    check_names(&mut ledger, Category::AddOns, Code::DuplicateAddOn, p.add_ons.iter().map(|a| a.name.as_str()));

    let features: HashMap<String, &super::Feature> =
        p.features.iter().map(|f| (normalize_name(&f.name), f)).collect();
    let limits: HashMap<String, &super::UsageLimit> =
        p.usage_limits.iter().map(|u| (normalize_name(&u.name), u)).collect();
    let plans: HashMap<String, &super::Plan> =
        p.plans.iter().map(|x| (normalize_name(&x.name), x)).collect();

    for f in &p.features {
        let subject = Subject::new(Category::Features, &f.name);
        if f.default_value.value_type() != f.value_type {
            ledger.emit(
                Code::ValueTypeMismatch,
                subject,
                format!("default value is {} but the feature is {}", f.default_value.value_type().as_str(), f.value_type.as_str()),
            );
        }
    }

    for u in &p.usage_limits {
        let subject = Subject::new(Category::UsageLimits, &u.name);
        check_limit_value(&mut ledger, &subject, "value", &u.value);
        for linked in &u.linked_features {
            if !features.contains_key(&normalize_name(linked)) {
                ledger.emit(Code::DanglingReference, subject.clone(), format!("linked feature `{linked}` is not declared"));
            }
        }
    }

    for plan in &p.plans {
        let subject = Subject::new(Category::Plans, &plan.name);
        check_price(&mut ledger, &subject, "monthlyPrice", &plan.monthly_price);
        if let Some(annual) = &plan.annual_price {
            check_price(&mut ledger, &subject, "annualPrice", annual);
        }
        check_currency(&mut ledger, subject.clone(), &plan.currency);
        check_feature_values(&mut ledger, &subject, &features, &plan.feature_values);
        check_limit_values(&mut ledger, &subject, &limits, "usageLimits", &plan.usage_limit_values);
    }

    for addon in &p.add_ons {
        let subject = Subject::new(Category::AddOns, &addon.name);
        if plans.contains_key(&normalize_name(&addon.name)) && !addon.name.trim().is_empty() {
            ledger.emit(
                Code::AddOnNamedLikePlan,
                subject.clone(),
                format!("add-on `{}` has the same name as a plan", addon.name),
            );
        }
        check_price(&mut ledger, &subject, "price", &addon.price);
        if let Availability::Plans(names) = &addon.available_for {
            for name in names {
                if !plans.contains_key(&normalize_name(name)) {
                    ledger.emit(Code::DanglingReference, subject.clone(), format!("availableFor names unknown plan `{name}`"));
                }
            }
        }
        check_feature_values(&mut ledger, &subject, &features, &addon.feature_values);
        check_limit_values(&mut ledger, &subject, &limits, "usageLimits", &addon.usage_limit_values);
        check_limit_values(&mut ledger, &subject, &limits, "usageLimitExtensions", &addon.usage_limit_extensions);
    }

    if p.plans.is_empty() && !p.add_ons.iter().any(|a| a.standalone) {
        ledger.emit(
            Code::NoSubscribableOffer,
            Subject::pricing(&p.saas_name),
            "the pricing declares no plan and no standalone add-on",
        );
    }

    ledger
}

fn check_names<'a>(
    ledger: &mut Ledger,
    category: Category,
    duplicate: Code,
    names: impl Iterator<Item = &'a str>,
) {
    // BTreeMap keeps the report independent of list order.
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut empties = 0usize;
    for name in names {
        let key = normalize_name(name);
        if key.is_empty() {
            empties += 1;
        } else {
            *seen.entry(key).or_default() += 1;
        }
    }
    if empties > 0 {
        ledger.emit(Code::EmptyName, Subject::new(category, ""), format!("{empties} element(s) with an empty name"));
    }
    for (key, count) in seen.into_iter().filter(|(_, c)| *c > 1) {
        ledger.emit(duplicate, Subject::new(category, key.clone()), format!("name `{key}` is declared {count} times"));
    }
}

fn check_currency(ledger: &mut Ledger, subject: Subject, currency: &str) {
    let ok = currency.len() == 3 && currency.bytes().all(|b| b.is_ascii_uppercase());
    if !ok {
        ledger.emit(Code::InvalidCurrency, subject, format!("`{currency}` is not a three-letter currency code"));
    }
}

fn check_price(ledger: &mut Ledger, subject: &Subject, field: &str, price: &Price) {
    if let Price::Amount(a) = price {
        if a.is_sign_negative() && !a.is_zero() {
            ledger.emit(Code::NegativeAmount, subject.clone(), format!("{field} is negative ({a})"));
        }
    }
}

fn check_limit_value(ledger: &mut Ledger, subject: &Subject, field: &str, value: &LimitValue) {
    if let LimitValue::Finite { amount, unit } = value {
        if *amount < Decimal::ZERO {
            ledger.emit(Code::NegativeAmount, subject.clone(), format!("{field} amount is negative ({amount})"));
        }
        if unit.trim().is_empty() {
            ledger.emit(Code::EmptyUnit, subject.clone(), format!("{field} has an empty unit"));
        }
    }
}

fn check_feature_values(
    ledger: &mut Ledger,
    subject: &Subject,
    features: &HashMap<String, &super::Feature>,
    values: &IndexMap<String, FeatureValue>,
) {
    for (name, value) in values {
        match features.get(&normalize_name(name)) {
            None => ledger.emit(Code::DanglingReference, subject.clone(), format!("value for undeclared feature `{name}`")),
            Some(f) if f.value_type != value.value_type() => ledger.emit(
                Code::ValueTypeMismatch,
                subject.clone(),
                format!("feature `{name}` is {} but the value is {}", f.value_type.as_str(), value.value_type().as_str()),
            ),
            Some(_) => {}
        }
    }
}

fn check_limit_values(
    ledger: &mut Ledger,
    subject: &Subject,
    limits: &HashMap<String, &super::UsageLimit>,
    field: &str,
    values: &IndexMap<String, LimitValue>,
) {
    for (name, value) in values {
        if !limits.contains_key(&normalize_name(name)) {
            ledger.emit(Code::DanglingReference, subject.clone(), format!("{field} names undeclared usage limit `{name}`"));
        }
        check_limit_value(ledger, subject, &format!("{field}.{name}"), value);
    }
}
