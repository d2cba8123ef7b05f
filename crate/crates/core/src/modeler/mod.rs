//! The results modeler: pricing documents and diagnostics logs.
//!
//! The document schema is described in `docs/pricing-format.md`.

mod log;
mod parse;
mod serialize;

pub use log::write_log;
pub use parse::{parse, parse_unchecked, ParseError};
pub use serialize::serialize;

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;
    use rust_decimal::dec;

    use super::*;
    use crate::category::Category;
    use crate::diagnostics::{Code, Diagnostic, Ledger, Subject};
    use crate::model::*;

    fn minimal() -> Pricing {
        let mut p = Pricing::shell("Acme", "https://acme.test/pricing", NaiveDate::from_ymd_opt(2024, 5, 1).unwrap(), "USD");
        p.features.push(Feature {
            name: "SSO".into(),
            description: None,
            value_type: ValueType::Boolean,
            default_value: FeatureValue::Boolean(false),
        });
        p.plans.push(Plan::new("Free", Price::Free, "USD"));
        p
    }

    #[test]
    fn minimal_round_trip() {
        let p = minimal();
        let text = serialize(&p);
        assert_eq!(
            text,
            "saasName: \"Acme\"\nsyntaxVersion: \"1.0\"\nsourceUrl: \"https://acme.test/pricing\"\nextractionDate: 2024-05-01\ncurrency: \"USD\"\n\
             features:\n  - name: \"SSO\"\n    valueType: BOOLEAN\n    defaultValue: false\nusageLimits: []\n\
             plans:\n  - name: \"Free\"\n    monthlyPrice: free\n    currency: \"USD\"\n    featureValues: {}\n    usageLimitValues: {}\naddOns: []\n"
        );
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn tricky_strings_and_values_survive() {
        let mut p = minimal();
        p.saas_name = "Q\"uote\\ \u{1} tab\t nl\n \u{2028} emoji 🚀 # : - [x]".into();
        p.features.push(Feature {
            name: "true".into(),
            description: Some("".into()),
            value_type: ValueType::Text,
            default_value: FeatureValue::Text("123".into()),
        });
        p.usage_limits.push(UsageLimit {
            name: "Storage".into(),
            description: None,
            value: LimitValue::Finite { amount: dec!(5.50), unit: "GB".into() },
            linked_features: vec!["SSO".into()],
        });
        p.plans[0].annual_price = Some(Price::Amount(dec!(0)));
        p.plans[0].feature_values.insert("true".into(), FeatureValue::Text("false".into()));
        p.plans[0].usage_limit_values.insert("Storage".into(), LimitValue::Unlimited);
        let mut a = AddOn::new("Seats", Price::ContactSales);
        a.available_for = Availability::Plans(vec!["Free".into()]);
        a.standalone = true;
        a.unit = Some("per user/month".into());
        a.usage_limit_extensions.insert("Storage".into(), LimitValue::Finite { amount: dec!(1000000000000.25), unit: "GB".into() });
        p.add_ons.push(a);
        let text = serialize(&p);
        assert_eq!(parse(&text).unwrap(), p);
        assert_eq!(serialize(&parse(&text).unwrap()), text);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let e = parse("").unwrap_err();
        assert_eq!(e.code(), "SYNTAX_ERROR");
        let e = parse("saasName: \"x\"\nsaasName: \"y\"\n").unwrap_err();
        assert_eq!(e, ParseError::Syntax { line: 2, column: 1, message: "duplicate key `saasName`".into() });
        let e = parse("a: [\n").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { .. }));
        let text = serialize(&minimal()).replace("valueType: BOOLEAN", "valueType: COLOR");
        let e = parse(&text).unwrap_err();
        assert_eq!(e, ParseError::Syntax { line: 8, column: 16, message: "unknown value type `COLOR`".into() });
    }

    #[test]
    fn invalid_models_are_semantic_errors() {
        let mut p = minimal();
        p.plans.push(Plan::new("free", Price::Free, "USD"));
        let e = parse(&serialize(&p)).unwrap_err();
        assert_eq!(e.code(), "SEMANTIC_ERROR");
        assert!(matches!(e, ParseError::Semantic(l) if l.contains(Code::DuplicatePlan)));
        assert!(parse_unchecked(&serialize(&p)).is_ok());
    }

    #[test]
    fn log_lines() {
        assert_eq!(write_log(&Ledger::new()), "");
        let mut ledger = Ledger::new();
        ledger.push(Diagnostic::new(Code::UngroundedItem, Subject::new(Category::Plans, "Quantum Tier"), "name not found on the page").with_evidence("no overlapping text\non the page"));
        ledger.push(Diagnostic::new(Code::SuspectPlanCount, Subject::pricing("plans"), "16 plans"));
        assert_eq!(
            write_log(&ledger),
            "WARNING UNGROUNDED_ITEM [plans/Quantum Tier] name not found on the page — no overlapping text on the page\n\
             WARNING SUSPECT_PLAN_COUNT [pricing/plans] 16 plans\n"
        );
    }
}
