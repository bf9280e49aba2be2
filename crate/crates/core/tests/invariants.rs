//! Step-level invariants of the interpreter.

mod common;

use proptest::prelude::*;

#[test]
fn ten_thousand_steps() {
    let v = common::runtime_invariants();
    assert!(v.passed, "{}", v.detail);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn invariants_hold_for_any_seed(seed in any::<u64>()) {
        let (_, _, errs) = common::runtime_invariants_run(1_000, seed);
        prop_assert!(errs.is_empty(), "{:?}", errs);
    }
}
