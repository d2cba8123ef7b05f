//! Record-level checks: duplicate merging, billing consistency, plan/add-on
//! cross checks and table row coverage.

use std::collections::{BTreeSet, HashMap};

use rust_decimal::Decimal;

use crate::category::Category;
use crate::diagnostics::{Code, Diagnostic, Ledger, Subject};
use crate::extract::{ExtractedItem, ExtractionRecord};
use crate::lexicon::parse_price;
use crate::model::Price;
use crate::names::NameKey;

pub(crate) fn items(records: &[ExtractionRecord], category: Category) -> &[ExtractedItem] {
    records.iter().find(|r| r.category == category).map_or(&[], |r| r.items.as_slice())
}

/// Keeps `kept` unless empty; reports a conflict when both are set and differ.
fn merge_field<T: PartialEq + Clone + std::fmt::Debug>(
    field: &str,
    kept: &mut Option<T>,
    other: &Option<T>,
    conflicts: &mut Vec<String>,
) {
    match (kept.as_ref(), other) {
        (None, Some(v)) => *kept = Some(v.clone()),
        (Some(a), Some(b)) if a != b => conflicts.push(format!("{field}: {a:?} vs {b:?}")),
        _ => {}
    }
}

fn merge_item(kept: &mut ExtractedItem, dup: ExtractedItem) -> Vec<String> {
    let mut conflicts = Vec::new();
    for (plan, value) in dup.values {
        let key = NameKey::new(&plan);
        match kept.values.iter().find(|(p, _)| NameKey::new(p) == key) {
            Some((_, v)) if *v != value => conflicts.push(format!("value for `{plan}`: {v:?} vs {value:?}")),
            Some(_) => {}
            None => {
                kept.values.insert(plan, value);
            }
        }
    }
    merge_field("description", &mut kept.description, &dup.description, &mut conflicts);
    merge_field("value", &mut kept.value, &dup.value, &mut conflicts);
    merge_field("monthlyPrice", &mut kept.monthly_price, &dup.monthly_price, &mut conflicts);
    merge_field("annualPrice", &mut kept.annual_price, &dup.annual_price, &mut conflicts);
    merge_field("price", &mut kept.price, &dup.price, &mut conflicts);
    merge_field("unit", &mut kept.unit, &dup.unit, &mut conflicts);
    merge_field("availableFor", &mut kept.available_for, &dup.available_for, &mut conflicts);
    if kept.standalone != dup.standalone {
        conflicts.push(format!("standalone: {} vs {}", kept.standalone, dup.standalone));
    }
    for link in dup.linked_features {
        if !kept.linked_features.iter().any(|l| NameKey::new(l) == NameKey::new(&link)) {
            kept.linked_features.push(link);
        }
    }
    kept.notes.extend(dup.notes);
    conflicts
}

/// Merges items with equal normalized names within each record. The first
/// occurrence keeps its fields; the later one only fills gaps.
pub fn dedupe(records: &mut [ExtractionRecord]) -> Ledger {
    let mut ledger = Ledger::new();
    for record in records.iter_mut() {
        let mut kept: Vec<ExtractedItem> = Vec::with_capacity(record.items.len());
        let mut index: HashMap<NameKey, usize> = HashMap::new();
        for item in std::mem::take(&mut record.items) {
            let key = NameKey::new(&item.name);
            match index.get(&key) {
                None => {
                    index.insert(key, kept.len());
                    kept.push(item);
                }
                Some(&at) => {
                    let first = &mut kept[at];
                    let subject = Subject::new(record.category, first.name.clone());
                    let dup_name = item.name.clone();
                    let conflicts = merge_item(first, item);
                    ledger.push(Diagnostic::new(
                        Code::DuplicateMerged,
                        subject.clone(),
                        format!("`{dup_name}` merged into `{}`", first.name),
                    ));
                    for c in conflicts {
                        ledger.push(Diagnostic::new(Code::ValueConflict, subject.clone(), format!("first occurrence kept; {c}")));
                    }
                }
            }
        }
        record.items = kept;
    }
    ledger
}

/// Flags annual prices above twelve monthly payments or below a quarter of them.
pub fn check_billing_consistency(plans: &[ExtractedItem]) -> Ledger {
    let mut ledger = Ledger::new();
    for plan in plans {
        let amount = |raw: &Option<String>| match raw.as_deref().and_then(parse_price) {
            Some(Price::Amount(a)) => Some(a),
            _ => None,
        };
        let (Some(monthly), Some(annual)) = (amount(&plan.monthly_price), amount(&plan.annual_price)) else {
            continue;
        };
        let twelve = monthly * Decimal::from(12);
        let subject = Subject::new(Category::Plans, plan.name.clone());
        if annual > twelve {
            ledger.push(Diagnostic::new(
                Code::AnnualExceedsMonthly,
                subject,
                format!("annual price {annual} exceeds 12 x monthly {monthly} = {twelve}"),
            ));
        } else if annual * Decimal::from(4) < twelve {
            ledger.push(Diagnostic::new(
                Code::ImplausibleDiscount,
                subject,
                format!("annual price {annual} is below a quarter of 12 x monthly {monthly} = {twelve}"),
            ));
        }
    }
    ledger
}

/// Plan/add-on name collisions, values for unknown plans, and plan counts
/// above `suspect_plan_count`.
pub fn cross_validate(records: &[ExtractionRecord], suspect_plan_count: usize) -> Ledger {
    let mut ledger = Ledger::new();
    let plans = items(records, Category::Plans);
    let plan_keys: BTreeSet<NameKey> = plans.iter().map(|p| NameKey::new(&p.name)).collect();
    for add_on in items(records, Category::AddOns) {
        if plan_keys.contains(&NameKey::new(&add_on.name)) {
            ledger.push(Diagnostic::new(
                Code::PlanAddOnCollision,
                Subject::new(Category::AddOns, add_on.name.clone()),
                "extracted both as a plan and as an add-on",
            ));
        }
    }
    for category in [Category::Features, Category::UsageLimits] {
        for item in items(records, category) {
            for plan in item.values.keys() {
                if !plan_keys.contains(&NameKey::new(plan)) {
                    ledger.push(Diagnostic::new(
                        Code::OrphanValue,
                        Subject::new(category, item.name.clone()),
                        format!("value given for unknown plan `{plan}`"),
                    ));
                }
            }
        }
    }
    if plans.len() > suspect_plan_count {
        ledger.push(Diagnostic::new(
            Code::SuspectPlanCount,
            Subject::pricing("plans"),
            format!("{} plans extracted; more than {suspect_plan_count} often means other products were included", plans.len()),
        ));
    }
    ledger
}

/// Table rows with at least one data cell.
pub fn data_rows(payload: &str) -> usize {
    payload.lines().filter(|l| l.starts_with("<tr") && l.contains("<td")).count()
}

/// Warns when features and usage limits together cover less than
/// `min_ratio` of the payload's data rows.
pub fn check_row_coverage(records: &[ExtractionRecord], payload: &str, min_ratio: f64) -> Ledger {
    let mut ledger = Ledger::new();
    let rows = data_rows(payload);
    let extracted = items(records, Category::Features).len() + items(records, Category::UsageLimits).len();
    if rows > 0 && (extracted as f64) < min_ratio * rows as f64 {
        ledger.push(Diagnostic::new(
            Code::LowRowCoverage,
            Subject::pricing("tables"),
            format!("{extracted} features and usage limits extracted from {rows} table rows; rows may have been skipped"),
        ));
    }
    ledger
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(name: &str, monthly: &str, annual: &str) -> ExtractedItem {
        ExtractedItem {
            monthly_price: Some(monthly.into()),
            annual_price: Some(annual.into()),
            ..ExtractedItem::named(name)
        }
    }

    #[test]
    fn duplicate_plans_merge_into_the_first() {
        let mut records = vec![ExtractionRecord::new(
            Category::Plans,
            vec![ExtractedItem::named("Pro"), ExtractedItem::named("pro ")],
        )];
        let ledger = dedupe(&mut records);
        assert_eq!(records[0].items, vec![ExtractedItem::named("Pro")]);
        assert_eq!(ledger.codes(), vec![Code::DuplicateMerged]);
    }

    #[test]
    fn no_duplicates_is_identity() {
        let items = vec![ExtractedItem::named("A"), ExtractedItem::named("B")];
        let mut records = vec![ExtractionRecord::new(Category::Features, items.clone())];
        assert!(dedupe(&mut records).is_empty());
        assert_eq!(records[0].items, items);
    }

    #[test]
    fn conflicting_values_keep_the_first() {
        let mut a = ExtractedItem::named("SSO");
        a.values.insert("Pro".into(), "✔".into());
        let mut b = ExtractedItem::named("sso");
        b.values.insert("Pro".into(), "—".into());
        b.values.insert("Basic".into(), "—".into());
        let mut records = vec![ExtractionRecord::new(Category::Features, vec![a, b])];
        let ledger = dedupe(&mut records);
        assert_eq!(ledger.codes(), vec![Code::DuplicateMerged, Code::ValueConflict]);
        assert!(ledger.entries()[1].message.contains("\"✔\" vs \"—\""));
        let merged = &records[0].items[0];
        assert_eq!(merged.values["Pro"], "✔");
        assert_eq!(merged.values["Basic"], "—");
    }

    #[test]
    fn billing_bounds() {
        assert!(check_billing_consistency(&[plan("A", "$10", "$120")]).is_empty());
        assert_eq!(check_billing_consistency(&[plan("A", "$10", "$130")]).codes(), vec![Code::AnnualExceedsMonthly]);
        assert_eq!(check_billing_consistency(&[plan("A", "$10", "$24")]).codes(), vec![Code::ImplausibleDiscount]);
        assert!(check_billing_consistency(&[plan("A", "$10", "$30")]).is_empty());
        assert!(check_billing_consistency(&[plan("A", "Free", "$500"), plan("B", "Contact sales", "$1")]).is_empty());
    }
}
