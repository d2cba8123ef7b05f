mod common;

use ipricing::model::{validate_model, Availability, FeatureValue, LimitValue, Price, Pricing};
use ipricing::{Code, Diagnostic};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;

fn sorted(p: &Pricing) -> Vec<Diagnostic> {
    let mut d = validate_model(p).entries().to_vec();
    d.sort();
    d
}

/// Breaks a valid model in one of several ways.
fn corrupt(rng: &mut ChaCha8Rng, p: &mut Pricing) {
    match rng.gen_range(0..6) {
        0 => {
            let dup = p.plans[0].clone();
            p.plans.push(dup);
        }
        1 => {
            p.plans[0].feature_values.insert("ghost".into(), FeatureValue::Boolean(true));
        }
        2 => p.plans[0].monthly_price = Price::Amount(Decimal::NEGATIVE_ONE),
        3 => {
            let bad = LimitValue::Finite { amount: Decimal::ONE, unit: " ".into() };
            p.plans[0].usage_limit_values.insert("ghost".into(), bad);
        }
        4 => {
            let mut addon = ipricing::model::AddOn::new(p.plans[0].name.to_uppercase(), Price::Free);
            addon.available_for = Availability::Plans(vec!["nowhere".into()]);
            p.add_ons.push(addon);
        }
        _ => p.currency = "usd".into(),
    }
}

#[test]
fn diagnostics_do_not_depend_on_list_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut saw_errors = 0;
    for _ in 0..200 {
        let mut p = common::random_pricing(&mut rng);
        for _ in 0..rng.gen_range(0..3) {
            corrupt(&mut rng, &mut p);
        }
        let expected = sorted(&p);
        saw_errors += usize::from(expected.iter().any(|d| d.code.severity() == ipricing::Severity::Error));

        let mut q = p.clone();
        q.features.shuffle(&mut rng);
        q.usage_limits.shuffle(&mut rng);
        q.plans.shuffle(&mut rng);
        q.add_ons.shuffle(&mut rng);
        assert_eq!(sorted(&q), expected);
    }
    assert!(saw_errors > 50, "corruption produced too few invalid models ({saw_errors})");
}

#[test]
fn generated_models_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let p = common::random_pricing(&mut rng);
        let ledger = validate_model(&p);
        assert!(!ledger.has_errors(), "{:?}", ledger.codes());
        assert!(!ledger.contains(Code::NoSubscribableOffer));
    }
}

#[test]
fn validation_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let mut p = common::random_pricing(&mut rng);
        corrupt(&mut rng, &mut p);
        let before = p.clone();
        assert_eq!(validate_model(&p), validate_model(&p));
        assert_eq!(p, before);
    }
}
