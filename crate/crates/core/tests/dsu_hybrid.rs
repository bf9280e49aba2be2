mod common;

#[test]
fn hybrid_runs_match_pure_new_runs() {
    let v = common::dsu_hybrid(50);
    assert!(v.passed, "{}", v.detail);
}
