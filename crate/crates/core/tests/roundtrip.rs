mod common;

use ipricing::model::validate_model;
use ipricing::modeler::{parse, serialize};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_inverts_serialize(seed in any::<u64>()) {
        let p = common::random_pricing(&mut ChaCha8Rng::seed_from_u64(seed));
        let ledger = validate_model(&p);
        prop_assert!(ledger.is_empty() || !ledger.has_errors(), "generator produced an invalid model: {ledger:?}");

        let text = serialize(&p);
        prop_assert_eq!(serialize(&p), text.clone());
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(&back, &p, "document:\n{}", text);
        prop_assert_eq!(serialize(&back), text);
    }
}

#[test]
fn serializer_is_byte_deterministic_across_clones() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let p = common::random_pricing(&mut rng);
        let a = serialize(&p);
        let b = serialize(&p.clone());
        assert_eq!(a.as_bytes(), b.as_bytes());
    }
}
