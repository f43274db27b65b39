mod common;

use flcsp_core::cspir::{canonicalize, compare_structural, parse_model, print_model};
use flcsp_core::translate::translate_source;
use proptest::prelude::*;

use common::{generated_config, random_program};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_programs_translate_and_round_trip(seed in any::<u64>()) {
        let src = random_program(seed);
        let m = translate_source(&src, &generated_config())
            .map_err(|e| TestCaseError::fail(format!("{e}\n{src}")))?;
        let text = print_model(&m);
        let back = parse_model(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(print_model(&back), text);
    }

    #[test]
    fn translation_is_deterministic(seed in any::<u64>()) {
        let src = random_program(seed);
        let a = translate_source(&src, &generated_config()).unwrap();
        let b = translate_source(&src, &generated_config()).unwrap();
        prop_assert_eq!(print_model(&a), print_model(&b));
    }

    #[test]
    fn canonicalization_is_idempotent_and_reflexive(seed in any::<u64>()) {
        let m = translate_source(&random_program(seed), &generated_config()).unwrap();
        let c = canonicalize(&m);
        prop_assert_eq!(&canonicalize(&c), &c);
        prop_assert!(compare_structural(&m, &m).equal);
        prop_assert!(compare_structural(&m, &c).equal);
    }

    #[test]
    fn distinct_programs_compare_consistently(a in any::<u64>(), b in any::<u64>()) {
        let ma = translate_source(&random_program(a), &generated_config()).unwrap();
        let mb = translate_source(&random_program(b), &generated_config()).unwrap();
        let ab = compare_structural(&ma, &mb);
        let ba = compare_structural(&mb, &ma);
        prop_assert_eq!(ab.equal, ba.equal);
        prop_assert_eq!(ab.equal, canonical_text_equal(&ma, &mb));
    }
}

/// Equality of the printed canonical forms.
fn canonical_text_equal(a: &flcsp_core::cspir::CspModel, b: &flcsp_core::cspir::CspModel) -> bool {
    print_model(&canonicalize(a)) == print_model(&canonicalize(b))
}

#[test]
fn generator_covers_every_construct() {
    let all: String = (0..100).map(random_program).collect();
    for needle in ["for k", "while cnt", "if nodeId", "else:", "rcvMsgs(", "broadcastMsg(", "sendMsg(", "rcvMsg()"] {
        assert!(all.contains(needle), "{needle}");
    }
}
