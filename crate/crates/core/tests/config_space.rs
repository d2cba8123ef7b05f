mod common;

use std::collections::{BTreeMap, BTreeSet};

use ipricing::model::{
    configuration_space, AddOn, Availability, Plan, Price, SubscriptionConstraints, DEFAULT_ENUMERATION_CAP,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rust_decimal::Decimal;
use serde::Deserialize;

#[test]
fn unconstrained_count_is_plans_times_subsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..50 {
        let n = rng.gen_range(1..=5);
        let k = rng.gen_range(0..=12);
        let p = common::priced_shell(n, k);
        let got = configuration_space(&p, &SubscriptionConstraints::default(), DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(got, (n as u64) << k, "n={n} k={k}");
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct OracleCase {
    plans: Vec<String>,
    add_ons: Vec<OracleAddOn>,
    constraints: SubscriptionConstraints,
    expected: u64,
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct OracleAddOn {
    name: String,
    available_for: serde_json::Value,
    standalone: bool,
}

#[test]
fn constrained_counts_match_the_enumeration_oracle() {
    let text = std::fs::read_to_string(common::fixture("config_space/constrained.json")).unwrap();
    let cases: Vec<OracleCase> = serde_json::from_str(&text).unwrap();
    assert_eq!(cases.len(), 20);
    for (i, case) in cases.iter().enumerate() {
        let mut p = common::priced_shell(0, 0);
        for name in &case.plans {
            p.plans.push(Plan::new(name.clone(), Price::Amount(Decimal::TEN), "USD"));
        }
        for a in &case.add_ons {
            let mut addon = AddOn::new(a.name.clone(), Price::Amount(Decimal::ONE));
            addon.standalone = a.standalone;
            addon.available_for = match &a.available_for {
                serde_json::Value::String(s) if s == "all" => Availability::All,
                v => Availability::Plans(serde_json::from_value(v.clone()).unwrap()),
            };
            p.add_ons.push(addon);
        }
        let got = configuration_space(&p, &case.constraints, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(got, case.expected, "case {i}");
    }
}

#[test]
fn dependency_fixture_from_the_cli_docs() {
    let p = common::priced_shell(2, 3);
    let c = SubscriptionConstraints {
        depends_on: BTreeMap::from([("A1".to_string(), BTreeSet::from(["A0".to_string()]))]),
        ..Default::default()
    };
    assert_eq!(configuration_space(&p, &c, DEFAULT_ENUMERATION_CAP).unwrap(), 12);
}

#[test]
fn cap_is_enforced_before_enumeration() {
    // a candidate count equal to the cap is allowed
    let p = common::priced_shell(2, 9);
    assert_eq!(configuration_space(&p, &SubscriptionConstraints::default(), 1 << 10).unwrap(), 1 << 10);
    let p = common::priced_shell(3, 9);
    assert!(configuration_space(&p, &SubscriptionConstraints::default(), 1 << 10).is_err());

    // the default cap sits at 2^26 candidates
    assert_eq!(DEFAULT_ENUMERATION_CAP, 1 << 26);

    let p = common::priced_shell(2, 26);
    let err = configuration_space(&p, &SubscriptionConstraints::default(), DEFAULT_ENUMERATION_CAP).unwrap_err();
    assert_eq!(err.code(), "ENUMERATION_CAP_EXCEEDED");

    let p = common::priced_shell(1, 40);
    let err = configuration_space(&p, &SubscriptionConstraints::default(), DEFAULT_ENUMERATION_CAP).unwrap_err();
    assert_eq!(err.code(), "ENUMERATION_CAP_EXCEEDED");
}

#[test]
fn growing_availability_never_shrinks_the_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(94);
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=6);
        let mut p = common::priced_shell(n, k);
        let mut c = SubscriptionConstraints::default();
        for i in 0..k {
            p.add_ons[i].available_for = Availability::Plans(
                (0..n).filter(|_| rng.gen_bool(0.3)).map(|j| format!("P{j}")).collect(),
            );
            p.add_ons[i].standalone = rng.gen_bool(0.15);
            if i > 0 && rng.gen_bool(0.3) {
                c.depends_on.entry(format!("A{i}")).or_default().insert(format!("A{}", rng.gen_range(0..i)));
            }
            if i > 0 && rng.gen_bool(0.2) {
                c.excludes.entry(format!("A{i}")).or_default().insert(format!("A{}", rng.gen_range(0..i)));
            }
        }
        let before = configuration_space(&p, &c, DEFAULT_ENUMERATION_CAP).unwrap();
        let target = rng.gen_range(0..k);
        let plan = format!("P{}", rng.gen_range(0..n));
        if let Availability::Plans(names) = &mut p.add_ons[target].available_for {
            if !names.contains(&plan) {
                names.push(plan);
            }
        }
        let after = configuration_space(&p, &c, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!(after >= before, "{before} -> {after}");
    }
}
