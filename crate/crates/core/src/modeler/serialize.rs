//! Deterministic writer for pricing documents.
//!
//! The output is a YAML subset: fixed top-level key order, collections in
//! declaration order, strings always double quoted, sentinels as plain
//! words. Equal models give byte-equal text.

use std::fmt::Write;

use crate::model::{AddOn, Availability, Feature, FeatureValue, LimitValue, Plan, Price, Pricing, UsageLimit};

/// Double-quoted scalar. Control and line-separator characters are escaped
/// so every string stays on one line.
pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() || matches!(c, '\u{2028}' | '\u{2029}' | '\u{feff}' | '\u{fffe}' | '\u{ffff}') => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn price(p: &Price) -> String {
    match p {
        Price::Amount(a) => a.to_string(),
        Price::Free => "free".into(),
        Price::ContactSales => "contact_sales".into(),
    }
}

fn feature_value(v: &FeatureValue) -> String {
    match v {
        FeatureValue::Boolean(b) => b.to_string(),
        FeatureValue::Numeric(n) => n.to_string(),
        FeatureValue::Text(t) => quote(t),
    }
}

fn limit_value(v: &LimitValue) -> String {
    match v {
        LimitValue::Finite { amount, unit } => format!("{{amount: {amount}, unit: {}}}", quote(unit)),
        LimitValue::Unlimited => "unlimited".into(),
    }
}

fn name_list(names: &[String]) -> String {
    format!("[{}]", names.iter().map(|n| quote(n)).collect::<Vec<_>>().join(", "))
}

struct Writer {
    out: String,
}

impl Writer {
    fn line(&mut self, indent: usize, text: &str) {
        for _ in 0..indent {
            self.out.push(' ');
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn map<'a, V: 'a>(&mut self, indent: usize, key: &str, entries: impl ExactSizeIterator<Item = (&'a String, &'a V)>, render: impl Fn(&V) -> String) {
        if entries.len() == 0 {
            self.line(indent, &format!("{key}: {{}}"));
            return;
        }
        self.line(indent, &format!("{key}:"));
        for (name, value) in entries {
            self.line(indent + 2, &format!("{}: {}", quote(name), render(value)));
        }
    }

    fn list<T>(&mut self, key: &str, items: &[T], render: impl Fn(&mut Self, &T)) {
        if items.is_empty() {
            self.line(0, &format!("{key}: []"));
            return;
        }
        self.line(0, &format!("{key}:"));
        for item in items {
            render(self, item);
        }
    }

    fn description(&mut self, description: &Option<String>) {
        if let Some(d) = description {
            self.line(4, &format!("description: {}", quote(d)));
        }
    }

    fn feature(&mut self, f: &Feature) {
        self.line(2, &format!("- name: {}", quote(&f.name)));
        self.description(&f.description);
        self.line(4, &format!("valueType: {}", f.value_type.as_str()));
        self.line(4, &format!("defaultValue: {}", feature_value(&f.default_value)));
    }

    fn usage_limit(&mut self, u: &UsageLimit) {
        self.line(2, &format!("- name: {}", quote(&u.name)));
        self.description(&u.description);
        self.line(4, &format!("value: {}", limit_value(&u.value)));
        self.line(4, &format!("linkedFeatures: {}", name_list(&u.linked_features)));
    }

    fn plan(&mut self, p: &Plan) {
        self.line(2, &format!("- name: {}", quote(&p.name)));
        self.description(&p.description);
        self.line(4, &format!("monthlyPrice: {}", price(&p.monthly_price)));
        if let Some(annual) = &p.annual_price {
            self.line(4, &format!("annualPrice: {}", price(annual)));
        }
        self.line(4, &format!("currency: {}", quote(&p.currency)));
        self.map(4, "featureValues", p.feature_values.iter(), feature_value);
        self.map(4, "usageLimitValues", p.usage_limit_values.iter(), limit_value);
    }

    fn add_on(&mut self, a: &AddOn) {
        self.line(2, &format!("- name: {}", quote(&a.name)));
        self.description(&a.description);
        self.line(4, &format!("price: {}", price(&a.price)));
        if let Some(unit) = &a.unit {
            self.line(4, &format!("unit: {}", quote(unit)));
        }
        let available = match &a.available_for {
            Availability::All => "all".to_string(),
            Availability::Plans(names) => name_list(names),
        };
        self.line(4, &format!("availableFor: {available}"));
        self.line(4, &format!("standalone: {}", a.standalone));
        self.map(4, "featureValues", a.feature_values.iter(), feature_value);
        self.map(4, "usageLimitValues", a.usage_limit_values.iter(), limit_value);
        self.map(4, "usageLimitExtensions", a.usage_limit_extensions.iter(), limit_value);
    }
}

/// Renders a pricing document.
pub fn serialize(p: &Pricing) -> String {
    let mut w = Writer { out: String::new() };
    w.line(0, &format!("saasName: {}", quote(&p.saas_name)));
    w.line(0, &format!("syntaxVersion: {}", quote(&p.syntax_version)));
    w.line(0, &format!("sourceUrl: {}", quote(&p.source_url)));
    w.line(0, &format!("extractionDate: {}", p.extraction_date.format("%Y-%m-%d")));
    w.line(0, &format!("currency: {}", quote(&p.currency)));
    w.list("features", &p.features, Writer::feature);
    w.list("usageLimits", &p.usage_limits, Writer::usage_limit);
    w.list("plans", &p.plans, Writer::plan);
    w.list("addOns", &p.add_ons, Writer::add_on);
    w.out
}
