//! Builds a [`Pricing`] from deduplicated records.
//!
//! Per-plan cells are typed with the lexicon. A feature whose cells are all
//! checkmarks or crosses is BOOLEAN with default `false`; all quantities make
//! it NUMERIC with default `0`; anything else is TEXT with default `""` and
//! the cells kept verbatim. A feature with no cells at all is BOOLEAN with
//! default `true`: the page lists it without distinguishing plans.
//!
//! A usage limit's default is its shared value when given, else the value of
//! the first plan that has one.

use chrono::NaiveDate;
use rust_decimal::Decimal;

use crate::category::Category;
use crate::diagnostics::{Code, Diagnostic, Ledger, Subject};
use crate::extract::{ExtractedItem, ExtractionRecord};
use crate::lexicon::{classify_value, detect_currency, parse_price, TypedValue};
use crate::model::{
    validate_model, AddOn, Availability, Feature, FeatureValue, LimitValue, Plan, Price, Pricing, UsageLimit, ValueType,
};
use crate::names::{normalize_name, NameKey};

use super::rules::items;

/// Document metadata not taken from the records.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Meta {
    pub saas_name: String,
    pub source_url: String,
    pub extraction_date: NaiveDate,
    /// Detected from displayed prices when `None`, falling back to USD.
    pub currency: Option<String>,
}

const FALLBACK_UNIT: &str = "units";

struct Assembler {
    ledger: Ledger,
    plan_names: Vec<String>,
}

impl Assembler {
    fn warn(&mut self, code: Code, category: Category, item: &str, message: String) {
        self.ledger.push(Diagnostic::new(code, Subject::new(category, item), message));
    }

    fn resolve_plan(&self, name: &str) -> Option<&str> {
        let key = NameKey::new(name);
        self.plan_names.iter().find(|p| NameKey::new(p) == key).map(String::as_str)
    }

    /// Per-plan cells keyed by canonical plan name, in plan order. Cells for
    /// unknown plans are dropped with `DROPPED_LINK`.
    fn plan_cells(&mut self, category: Category, item: &ExtractedItem) -> Vec<(String, String)> {
        let mut cells: Vec<(usize, String, String)> = Vec::new();
        for (plan, raw) in &item.values {
            match self.resolve_plan(plan) {
                Some(canonical) => {
                    let pos = self.plan_names.iter().position(|p| p == canonical).unwrap();
                    cells.push((pos, canonical.to_string(), raw.clone()));
                }
                None => self.warn(Code::DroppedLink, category, &item.name, format!("value for unknown plan `{plan}` dropped")),
            }
        }
        cells.sort_by_key(|(pos, _, _)| *pos);
        cells.into_iter().map(|(_, plan, raw)| (plan, raw)).collect()
    }

    fn price(&mut self, category: Category, item: &str, field: &str, raw: Option<&str>) -> Price {
        match raw.and_then(parse_price) {
            Some(p) => p,
            None => {
                let shown = raw.map_or("missing".to_string(), |r| format!("{r:?} unreadable"));
                self.warn(Code::UnparsedPrice, category, item, format!("{field} {shown}; recorded as contact_sales"));
                Price::ContactSales
            }
        }
    }

    fn plan(&mut self, item: &ExtractedItem, currency: &str) -> Plan {
        let monthly = self.price(Category::Plans, &item.name, "monthly price", item.monthly_price.as_deref());
        let mut plan = Plan::new(item.name.clone(), monthly, currency);
        plan.description = item.description.clone();
        if let Some(raw) = item.annual_price.as_deref() {
            plan.annual_price = parse_price(raw);
            if plan.annual_price.is_none() {
                self.warn(Code::UnparsedPrice, Category::Plans, &item.name, format!("annual price {raw:?} unreadable; omitted"));
            }
        }
        plan
    }

    fn feature(&mut self, item: &ExtractedItem, plans: &mut [Plan]) -> Feature {
        let cells = self.plan_cells(Category::Features, item);
        let typed: Vec<TypedValue> = cells.iter().map(|(_, raw)| classify_value(raw)).collect();
        let (value_type, default_value) = if typed.is_empty() {
            (ValueType::Boolean, FeatureValue::Boolean(true))
        } else if typed.iter().all(|t| matches!(t, TypedValue::Boolean(_))) {
            (ValueType::Boolean, FeatureValue::Boolean(false))
        } else if typed.iter().all(|t| matches!(t, TypedValue::Numeric { .. })) {
            (ValueType::Numeric, FeatureValue::Numeric(Decimal::ZERO))
        } else {
            (ValueType::Text, FeatureValue::Text(String::new()))
        };
        let mut units: Vec<&str> = Vec::new();
        for ((plan_name, raw), t) in cells.iter().zip(&typed) {
            let value = match (value_type, t) {
                (ValueType::Boolean, TypedValue::Boolean(b)) => FeatureValue::Boolean(*b),
                (ValueType::Numeric, TypedValue::Numeric { amount, unit }) => {
                    if let Some(u) = unit.as_deref() {
                        if !units.contains(&u) {
                            units.push(u);
                        }
                    }
                    FeatureValue::Numeric(*amount)
                }
                _ => FeatureValue::Text(raw.trim().to_string()),
            };
            let plan = plans.iter_mut().find(|p| &p.name == plan_name).expect("resolved plan");
            plan.feature_values.insert(item.name.clone(), value);
        }
        if !units.is_empty() {
            self.warn(
                Code::UsageLimitCandidate,
                Category::Features,
                &item.name,
                format!("numeric values carry units ({}); this may be a usage limit", units.join(", ")),
            );
        }
        Feature {
            name: item.name.clone(),
            description: item.description.clone(),
            value_type,
            default_value,
        }
    }

    fn limit_value(&mut self, item: &ExtractedItem, raw: &str) -> Option<LimitValue> {
        let unit_for = |this: &mut Self, given: Option<String>| {
            given.or_else(|| item.unit.clone()).unwrap_or_else(|| {
                this.warn(Code::UnparsedValue, Category::UsageLimits, &item.name, format!("{raw:?} has no unit; using `{FALLBACK_UNIT}`"));
                FALLBACK_UNIT.to_string()
            })
        };
        match classify_value(raw) {
            TypedValue::Unlimited => Some(LimitValue::Unlimited),
            TypedValue::Numeric { amount, unit } => Some(LimitValue::Finite { amount, unit: unit_for(self, unit) }),
            TypedValue::Boolean(false) => Some(LimitValue::Finite { amount: Decimal::ZERO, unit: unit_for(self, None) }),
            _ => {
                self.warn(Code::UnparsedValue, Category::UsageLimits, &item.name, format!("value {raw:?} is not a quantity; dropped"));
                None
            }
        }
    }

    fn usage_limit(&mut self, item: &ExtractedItem, plans: &mut [Plan], features: &[Feature]) -> Option<UsageLimit> {
        let cells = self.plan_cells(Category::UsageLimits, item);
        let mut per_plan = Vec::new();
        for (plan, raw) in &cells {
            if let Some(v) = self.limit_value(item, raw) {
                per_plan.push((plan.clone(), v));
            }
        }
        let shared = match item.value.as_deref() {
            Some(raw) => self.limit_value(item, raw),
            None => None,
        };
        let Some(default) = shared.or_else(|| per_plan.first().map(|(_, v)| v.clone())) else {
            self.warn(Code::DroppedItem, Category::UsageLimits, &item.name, "no readable value; usage limit dropped".into());
            return None;
        };
        for (plan_name, value) in per_plan {
            let plan = plans.iter_mut().find(|p| p.name == plan_name).expect("resolved plan");
            plan.usage_limit_values.insert(item.name.clone(), value);
        }
        let mut linked = Vec::new();
        for link in &item.linked_features {
            match features.iter().find(|f| NameKey::new(&f.name) == NameKey::new(link)) {
                Some(f) if !linked.contains(&f.name) => linked.push(f.name.clone()),
                Some(_) => {}
                None => self.warn(Code::DroppedLink, Category::UsageLimits, &item.name, format!("linked feature `{link}` not extracted; link dropped")),
            }
        }
        Some(UsageLimit {
            name: item.name.clone(),
            description: item.description.clone(),
            value: default,
            linked_features: linked,
        })
    }

    fn add_on(&mut self, item: &ExtractedItem) -> Option<AddOn> {
        if self.resolve_plan(&item.name).is_some() {
            self.warn(Code::DroppedItem, Category::AddOns, &item.name, "add-on has the name of a plan; the plan is kept".into());
            return None;
        }
        let raw_price = item.price.as_deref().or(item.monthly_price.as_deref());
        let mut add_on = AddOn::new(item.name.clone(), self.price(Category::AddOns, &item.name, "price", raw_price));
        add_on.description = item.description.clone();
        add_on.unit = item.unit.clone();
        add_on.standalone = item.standalone;
        add_on.available_for = match &item.available_for {
            None => Availability::All,
            Some(list) if list.is_empty() => Availability::All,
            Some(list) if list.iter().any(|p| matches!(normalize_name(p).as_str(), "all" | "all plans")) => Availability::All,
            Some(list) => {
                let mut resolved: Vec<String> = Vec::new();
                for name in list {
                    match self.resolve_plan(name).map(str::to_string) {
                        Some(p) if !resolved.contains(&p) => resolved.push(p),
                        Some(_) => {}
                        None => self.warn(Code::DroppedLink, Category::AddOns, &item.name, format!("availableFor names unknown plan `{name}`; dropped")),
                    }
                }
                Availability::Plans(resolved)
            }
        };
        Some(add_on)
    }
}

fn pick_currency(records: &[ExtractionRecord]) -> String {
    let plans = items(records, Category::Plans).iter().flat_map(|p| [&p.monthly_price, &p.annual_price]);
    let add_ons = items(records, Category::AddOns).iter().map(|a| &a.price);
    plans
        .chain(add_ons)
        .flatten()
        .find_map(|raw| detect_currency(raw))
        .unwrap_or("USD")
        .to_string()
}

/// Assembles and validates. Fails with the full ledger when the result
/// would not validate, which happens only when no plan and no standalone
/// add-on survive.
pub fn assemble(records: &[ExtractionRecord], meta: &Meta) -> Result<(Pricing, Ledger), Ledger> {
    let currency = meta.currency.clone().unwrap_or_else(|| pick_currency(records));
    let mut asm = Assembler {
        ledger: Ledger::new(),
        plan_names: items(records, Category::Plans).iter().map(|p| p.name.clone()).collect(),
    };
    let mut pricing = Pricing::shell(meta.saas_name.clone(), meta.source_url.clone(), meta.extraction_date, currency.clone());
    pricing.plans = items(records, Category::Plans).iter().map(|i| asm.plan(i, &currency)).collect();
    for item in items(records, Category::Features) {
        let feature = asm.feature(item, &mut pricing.plans);
        pricing.features.push(feature);
    }
    for item in items(records, Category::UsageLimits) {
        if let Some(limit) = asm.usage_limit(item, &mut pricing.plans, &pricing.features) {
            pricing.usage_limits.push(limit);
        }
    }
    pricing.add_ons = items(records, Category::AddOns).iter().filter_map(|i| asm.add_on(i)).collect();

    let mut ledger = asm.ledger;
    let validation = validate_model(&pricing);
    let failed = validation.has_errors();
    ledger.extend(validation);
    if failed {
        Err(ledger)
    } else {
        Ok((pricing, ledger))
    }
}

#[cfg(test)]
mod tests {
    use rust_decimal::dec;

    use super::*;

    fn meta() -> Meta {
        Meta {
            saas_name: "Test".into(),
            source_url: "file:test.html".into(),
            extraction_date: NaiveDate::from_ymd_opt(2024, 5, 1).unwrap(),
            currency: None,
        }
    }

    fn cells(name: &str, pairs: &[(&str, &str)]) -> ExtractedItem {
        let mut item = ExtractedItem::named(name);
        for (plan, raw) in pairs {
            item.values.insert(plan.to_string(), raw.to_string());
        }
        item
    }

    fn plan(name: &str, price: &str) -> ExtractedItem {
        ExtractedItem { monthly_price: Some(price.into()), ..ExtractedItem::named(name) }
    }

    fn records(plans: Vec<ExtractedItem>, features: Vec<ExtractedItem>, limits: Vec<ExtractedItem>, add_ons: Vec<ExtractedItem>) -> Vec<ExtractionRecord> {
        vec![
            ExtractionRecord::new(Category::Plans, plans),
            ExtractionRecord::new(Category::Features, features),
            ExtractionRecord::new(Category::UsageLimits, limits),
            ExtractionRecord::new(Category::AddOns, add_ons),
        ]
    }

    #[test]
    fn lexicon_typing() {
        let recs = records(
            vec![plan("Basic", "Free"), plan("Pro", "€13.33")],
            vec![cells("SSO", &[("Basic", "—"), ("Pro", "✔")]), cells("Storage", &[("Basic", "5 GB"), ("Pro", "10 GB")]), cells("Support", &[("Basic", "Email"), ("Pro", "✔")])],
            vec![cells("Participants", &[("Basic", "100"), ("pro", "Unlimited")])],
            vec![],
        );
        let mut limit = recs[2].items[0].clone();
        limit.unit = Some("participants".into());
        let recs = records(recs[0].items.clone(), recs[1].items.clone(), vec![limit], vec![]);
        let (p, ledger) = assemble(&recs, &meta()).unwrap();
        assert_eq!(p.currency, "EUR");
        assert_eq!(p.features[0].value_type, ValueType::Boolean);
        assert_eq!(p.plans[1].feature_values["SSO"], FeatureValue::Boolean(true));
        assert_eq!(p.features[1].value_type, ValueType::Numeric);
        assert_eq!(p.plans[0].feature_values["Storage"], FeatureValue::Numeric(dec!(5)));
        assert_eq!(p.features[2].value_type, ValueType::Text);
        assert_eq!(p.plans[1].feature_values["Support"], FeatureValue::Text("✔".into()));
        assert_eq!(p.usage_limits[0].value, LimitValue::Finite { amount: dec!(100), unit: "participants".into() });
        assert_eq!(p.plans[1].usage_limit_values["Participants"], LimitValue::Unlimited);
        assert_eq!(ledger.codes(), vec![Code::UsageLimitCandidate]);
    }

    #[test]
    fn features_without_plans_fail() {
        let recs = records(vec![], vec![cells("SSO", &[])], vec![], vec![]);
        let ledger = assemble(&recs, &meta()).unwrap_err();
        assert!(ledger.contains(Code::NoSubscribableOffer));
    }

    #[test]
    fn standalone_add_on_alone_is_enough() {
        let add_on = ExtractedItem { price: Some("$10".into()), standalone: true, ..ExtractedItem::named("Phone") };
        let (p, _) = assemble(&records(vec![], vec![], vec![], vec![add_on]), &meta()).unwrap();
        assert_eq!(p.add_ons.len(), 1);
    }

    #[test]
    fn repairs_are_recorded() {
        let add_on_like_plan = ExtractedItem { price: Some("$5".into()), ..ExtractedItem::named("pro") };
        let restricted = ExtractedItem {
            price: Some("call us".into()),
            available_for: Some(vec!["Pro".into(), "Enterprise".into()]),
            ..ExtractedItem::named("Webinars")
        };
        let recs = records(
            vec![plan("Pro", "$10")],
            vec![cells("SSO", &[("Pro", "✔"), ("Enterprise", "✔")])],
            vec![],
            vec![add_on_like_plan, restricted],
        );
        let (p, ledger) = assemble(&recs, &meta()).unwrap();
        assert_eq!(p.add_ons.len(), 1);
        assert_eq!(p.add_ons[0].available_for, Availability::Plans(vec!["Pro".into()]));
        assert_eq!(p.add_ons[0].price, Price::ContactSales);
        assert_eq!(
            ledger.codes(),
            vec![Code::DroppedLink, Code::DroppedItem, Code::UnparsedPrice, Code::DroppedLink]
        );
    }
}
