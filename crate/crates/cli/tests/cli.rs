//! Exit codes and JSON verdicts of the binary over the corpus.

use serde_json::Value;
use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(rel: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(rel);
    p.to_string_lossy().into_owned()
}

fn dsu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsu-check")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json_tail(o: &Output) -> Value {
    let text = String::from_utf8_lossy(&o.stdout);
    let line = text.lines().last().expect("some output");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("bad json {line:?}: {e}"))
}

const EQUIV: &[&str] = &[
    "reorder_init", "trailing_skip", "duplicate", "if_motion", "loop_body", "loop_dup", "array_reorder",
    "enum_branch", "prompt_loop", "div_guarded", "nested_loops",
];

#[test]
fn check_equiv_accepts_every_curated_pair() {
    for name in EQUIV {
        let o = dsu(&["check-equiv", &corpus(&format!("equiv/{name}.old.w")), &corpus(&format!("equiv/{name}.new.w"))]);
        assert_eq!(code(&o), 0, "{name}");
        assert_eq!(json_tail(&o)["accepted"], Value::Bool(true), "{name}");
    }
}

#[test]
fn check_equiv_rejects_a_changed_output() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.w"), dir.path().join("b.w"));
    fs::write(&a, "long a; input a; output a;").unwrap();
    fs::write(&b, "long a; input a; output a + 1;").unwrap();
    let o = dsu(&["check-equiv", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(json_tail(&o)["accepted"], Value::Bool(false));
}

#[test]
fn check_update_classes_match_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let rho = dir.path().join("rho.json");
    fs::write(&rho, r#"{"b": 0}"#).unwrap();
    let cases: &[(&str, &str, &[&str], i32)] = &[
        ("config", "config.new.w", &["--class", "config", "--rho", rho.to_str().unwrap()], 0),
        ("enum", "enum.new.w", &["--class", "enum"], 0),
        ("enum", "enum.mutant.w", &["--class", "enum"], 1),
        ("exit", "exit.new.w", &["--class", "exit"], 0),
        ("exit", "exit.mutant.w", &["--class", "exit"], 1),
        ("init", "init.new.w", &["--class", "init"], 0),
        ("init", "init.mutant.w", &["--class", "init"], 1),
        ("weaken", "weaken.new.w", &["--class", "weaken"], 0),
        ("prompt", "prompt.new.w", &["--class", "prompt"], 0),
        ("exit", "exit.new.w", &["--class", "auto"], 0),
    ];
    for (old, new, extra, want) in cases {
        let (o, n) = (corpus(&format!("updates/{old}.old.w")), corpus(&format!("updates/{new}")));
        let mut args = vec!["check-update", o.as_str(), n.as_str()];
        args.extend_from_slice(extra);
        let out = dsu(&args);
        assert_eq!(code(&out), *want, "{new} {extra:?}");
        let reports = json_tail(&out);
        let any = reports.as_array().unwrap().iter().any(|r| r["verdict"]["accepted"] == Value::Bool(true));
        assert_eq!(any, *want == 0, "{new}: {reports}");
    }
}

#[test]
fn run_prints_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("in.txt");
    fs::write(&inputs, "3, 0").unwrap();
    let o = dsu(&["run", &corpus("updates/exit.old.w"), "--inputs", inputs.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.starts_with("in 3\nout 3\nin 0\n"), "{text}");
    assert_eq!(json_tail(&o)["outcome"], "terminated");
}

#[test]
fn run_reports_fuel_exhaustion() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("loop.w");
    fs::write(&p, "while (1) { skip; }").unwrap();
    let o = dsu(&["run", p.to_str().unwrap(), "--fuel", "50"]);
    assert_eq!(code(&o), 2);
    assert_eq!(json_tail(&o)["outcome"], "fuelExhausted");
}

#[test]
fn dsu_sim_is_compatible_on_exit_pair() {
    let dir = tempfile::tempdir().unwrap();
    let inputs = dir.path().join("in.txt");
    fs::write(&inputs, "3 4 0").unwrap();
    let o = dsu(&[
        "dsu-sim", "--old", &corpus("updates/exit.old.w"), "--new", &corpus("updates/exit.new.w"),
        "--inputs", inputs.to_str().unwrap(), "--at-output", "2",
    ]);
    assert_eq!(code(&o), 0);
    let v = json_tail(&o);
    assert_eq!(v["mapped"], true);
    assert_eq!(v["hybridEqualsPureNew"], true);
}

#[test]
fn difftest_exit_codes_follow_counts() {
    let o = dsu(&[
        "difftest", "--old", &corpus("equiv/duplicate.old.w"), "--new", &corpus("equiv/duplicate.new.w"),
        "--trials", "20", "--seed", "3",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json_tail(&o)["counts"]["diverged"], 0);

    let o = dsu(&[
        "difftest", "--old", &corpus("updates/config.old.w"), "--new", &corpus("updates/config.new.w"),
        "--trials", "20",
    ]);
    assert_eq!(code(&o), 1, "undefined config variable reads as a crash in every new run");
}

#[test]
fn usage_and_type_errors_exit_3() {
    assert_eq!(code(&dsu(&["no-such-command"])), 3);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.w");
    fs::write(&p, "int x; long y; x := y;").unwrap();
    assert_eq!(code(&dsu(&["typecheck", p.to_str().unwrap()])), 3);
    assert_eq!(code(&dsu(&["--help"])), 0);
}
