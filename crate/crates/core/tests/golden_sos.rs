//! Step-by-step configuration traces checked against hand-reviewed goldens.
//! Regenerate with `BLESS=1 cargo test --test golden_sos` and review the diff.

mod common;

use std::fs;

#[test]
fn golden_traces_match() {
    let bless = std::env::var_os("BLESS").is_some();
    let cases = common::golden_cases(&common::golden_dir());
    assert!(cases.len() >= 20, "only {} golden programs", cases.len());
    let mut mismatches = Vec::new();
    for case in &cases {
        let (got, finished) = common::render_trace_checked(&case.source);
        assert!(finished, "{} does not finish within {} steps", case.name, common::GOLDEN_MAX_STEPS);
        if bless {
            fs::write(&case.trace_path, &got).unwrap();
        } else if case.expected.as_deref() != Some(got.as_str()) {
            mismatches.push(case.name.clone());
        }
    }
    assert!(mismatches.is_empty(), "golden mismatch: {mismatches:?}");
}

#[test]
fn golden_set_covers_every_rule() {
    let mut seen = std::collections::BTreeSet::new();
    for case in common::golden_cases(&common::golden_dir()) {
        for line in case.expected.unwrap_or_default().lines().skip(1) {
            seen.insert(line.split_whitespace().nth(1).unwrap().to_string());
        }
    }
    let rules = [
        "Seq", "EEval'", "ECrash", "As-Scl", "As-Arr", "As-Err1", "As-Err2", "As-Err3", "In-1", "In-2", "In-3",
        "In-4", "In-5", "In-6", "Out-1", "Out-2", "Out-3", "If-T", "If-F", "Wh-T", "Wh-F", "Crash",
    ];
    let missing: Vec<_> = rules.iter().filter(|r| !seen.contains(**r)).collect();
    assert!(missing.is_empty(), "rules without a golden trace: {missing:?}");
}

#[test]
fn runs_are_deterministic() {
    for case in common::golden_cases(&common::golden_dir()) {
        assert_eq!(common::render_trace(&case.source), common::render_trace(&case.source));
    }
}
