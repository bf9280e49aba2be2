mod common;

#[test]
fn curated_pairs_never_diverge() {
    let v = common::semantic_soundness();
    assert!(v.passed, "{}", v.detail);
}

#[test]
fn figure_pairs_and_mutants() {
    let v = common::figure_pairs();
    assert!(v.passed, "{}", v.detail);
}

#[test]
fn weakened_pair_separates_invalid_runs() {
    let v = common::type_weakening();
    assert!(v.passed, "{}", v.detail);
}
