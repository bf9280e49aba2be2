#![allow(dead_code)]

use dsu_core::interp::{init_config, step_in_place};
use dsu_core::lang::load;
use std::fs;
use std::path::{Path, PathBuf};

pub const GOLDEN_MAX_STEPS: usize = 30;

pub struct GoldenCase {
    pub name: String,
    pub source: String,
    pub trace_path: PathBuf,
    pub expected: Option<String>,
}

pub fn golden_cases(dir: &Path) -> Vec<GoldenCase> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "w"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let trace_path = p.with_extension("trace");
            GoldenCase {
                name: p.file_stem().unwrap().to_string_lossy().into_owned(),
                source: fs::read_to_string(&p).unwrap(),
                expected: fs::read_to_string(&trace_path).ok(),
                trace_path,
            }
        })
        .collect()
}

/// Inputs come from an optional first line `// inputs: 1 2 3`.
pub fn golden_inputs(source: &str) -> Vec<i64> {
    source
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("// inputs:"))
        .map(|rest| rest.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .unwrap_or_default()
}

/// One line per configuration, each prefixed by the rule that produced it.
/// A crashed run shows one extra Crash step to pin the fixpoint.
pub fn render_trace(source: &str) -> String {
    let checked = load(source).unwrap_or_else(|e| panic!("golden program rejected: {e}"));
    let mut c = init_config(&checked, &golden_inputs(source));
    let mut out = format!(" 0 {:<8} {c}\n", "init");
    for n in 1..=GOLDEN_MAX_STEPS {
        let was_crashed = c.state.crash;
        let Some(rule) = step_in_place(&mut c) else { break };
        out.push_str(&format!("{n:>2} {:<8} {c}\n", rule.to_string()));
        if was_crashed {
            break;
        }
    }
    out
}

// ---- shared fixtures ----

use dsu_core::analysis::{def_stmt, imp, imp_stmt, ovar, tvar, use_expr, use_seq, def_seq, Var, VarSet};
use dsu_core::corpus::{self, CorpusPair, EQUIV_PAIRS};
use dsu_core::difftest::{mutate_pair, run_campaign, scramble, trial, trial_inputs, CampaignConfig, Comparison, MutationKind};
use dsu_core::dsu::{empirical_backward_compat, simulate_update, update_point_at, CompatStatus, InconclusiveReason, UpdatePair};
use dsu_core::equiv::{check_out, Checker, Kind};
use dsu_core::interp::{CrashCause, Config, Outcome as RunOutcome, Term};
use dsu_core::lang::{check, erase_labels, Checked, Stmt};
use dsu_core::update_classes::{
    check_config_vars, check_enum_extension, check_exit_on_error, check_missing_init, check_type_weakening, Rho,
    UpdateClassReport,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of one acceptance criterion.
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Verdict {
        Verdict { passed, detail: detail.into() }
    }
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn load_pair(p: &CorpusPair) -> (Checked, Checked) {
    let old = load(p.old).unwrap_or_else(|e| panic!("{} old: {e}", p.name));
    let new = load(p.new).unwrap_or_else(|e| panic!("{} new: {e}", p.name));
    (old, new)
}

/// Every typechecked program in the corpus and the golden set.
pub fn corpus_programs() -> Vec<Checked> {
    let mut out = Vec::new();
    for p in corpus::all_pairs() {
        let (o, n) = load_pair(p);
        out.push(o);
        out.push(n);
    }
    for case in golden_cases(&golden_dir()) {
        out.push(load(&case.source).unwrap());
    }
    out
}

/// Statements at every nesting level, in preorder.
pub fn all_stmts(seq: &[Stmt], out: &mut Vec<Stmt>) {
    for s in seq {
        out.push(s.clone());
        match s {
            Stmt::If(_, t, f) => {
                all_stmts(t, out);
                all_stmts(f, out);
            }
            Stmt::While(_, _, b) => all_stmts(b, out),
            _ => {}
        }
    }
}

fn enum_max(c: &Checked) -> i64 {
    c.env.enums.values().map(|ls| ls.len() as i64).max().unwrap_or(0)
}

fn random_subset(universe: &[Var], rng: &mut ChaCha8Rng) -> VarSet {
    let k = rng.gen_range(0..=3.min(universe.len()));
    VarSet::of(universe.choose_multiple(rng, k).cloned())
}

// ---- 1. SOS conformance ----

pub fn sos_conformance() -> Verdict {
    let cases = golden_cases(&golden_dir());
    let mut bad = Vec::new();
    for case in &cases {
        let (got, finished) = render_trace_checked(&case.source);
        if !finished {
            bad.push(format!("{}: longer than {GOLDEN_MAX_STEPS} steps", case.name));
        } else if case.expected.as_deref() != Some(got.as_str()) {
            bad.push(format!("{}: trace differs", case.name));
        }
    }
    let passed = cases.len() >= 20 && bad.is_empty();
    Verdict::new(passed, format!("{} programs, mismatches {:?}", cases.len(), bad))
}

/// The rendered trace, and whether the run ended (terminated or crashed) within the step bound.
pub fn render_trace_checked(source: &str) -> (String, bool) {
    let trace = render_trace(source);
    let last = trace.lines().last().unwrap_or_default();
    let finished = last.contains(" Crash ") || last.contains("<skip;> f=0");
    (trace, finished)
}

// ---- 2. Imp algebra ----

/// Unrolls `while (e) { body }` explicitly: the union of Imp(body^i, X ∪ Use(e)) until it
/// stops growing, checked for one more unrolling past that point.
pub fn imp_while_unrolled(cond_use: &VarSet, body: &[Stmt], def: &VarSet, x: &VarSet) -> VarSet {
    if def.is_disjoint(x) {
        return x.clone();
    }
    let start = x.union(cond_use);
    let mut union = start.clone();
    let mut unrolled: Vec<Stmt> = Vec::new();
    let mut stable_rounds = 0;
    while stable_rounds < 2 {
        unrolled.extend_from_slice(body);
        let next = union.union(&imp(&unrolled, &start));
        stable_rounds = if next == union { stable_rounds + 1 } else { 0 };
        union = next;
    }
    union
}

/// Checks both Imp laws and the loop fixpoint on one scrambled sequence. Returns violations.
pub fn imp_algebra_case(base: &[Stmt], seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seq = scramble(base, seed, rng.gen_range(1..=8), 5);
    let mut errs = Vec::new();
    if dsu_core::difftest::depth(&seq) > 5 {
        errs.push(format!("seed {seed}: depth above 5"));
    }
    let mut universe: Vec<Var> = use_seq(&seq).union(&def_seq(&seq)).iter().cloned().collect();
    universe.extend([Var::Io, Var::Input]);
    universe.dedup();
    let x = random_subset(&universe, &mut rng);
    let y = random_subset(&universe, &mut rng);
    let whole = imp(&seq, &x);
    for k in 0..=seq.len() {
        let split = imp(&seq[..k], &imp(&seq[k..], &x));
        if split != whole {
            errs.push(format!("seed {seed}: prefix law fails at split {k}"));
        }
    }
    if imp(&seq, &x.union(&y)) != imp(&seq, &x).union(&imp(&seq, &y)) {
        errs.push(format!("seed {seed}: union law fails"));
    }
    let mut stmts = Vec::new();
    all_stmts(&seq, &mut stmts);
    for s in &stmts {
        if let Stmt::While(_, e, body) = s {
            let expected = imp_while_unrolled(&use_expr(e), body, &def_stmt(s), &x);
            if imp_stmt(s, &x) != expected {
                errs.push(format!("seed {seed}: loop fixpoint differs from the unrolled union"));
            }
        }
    }
    errs
}

pub fn imp_algebra(cases: u64) -> Verdict {
    let bases: Vec<Vec<Stmt>> = corpus_programs().into_iter().map(|c| c.program.entry).collect();
    let mut errs = Vec::new();
    for seed in 0..cases {
        errs.extend(imp_algebra_case(&bases[seed as usize % bases.len()], seed));
    }
    Verdict::new(errs.is_empty(), format!("{cases} sequences, violations {:?}", &errs[..errs.len().min(5)]))
}

// ---- 3. checker consistency ----

/// Every proven sub-query must agree with the analyses. Returns (queries checked, violations).
pub fn consistency_of(old: &Checked, new: &Checked) -> (usize, Vec<String>) {
    let (a, b) = (erase_labels(&old.program.entry), erase_labels(&new.program.entry));
    let (e1, e2) = (&old.env, &new.env);
    let mut checker = Checker::new(e1, e2);
    checker.out(&a, &b);
    checker.term(&a, &b);
    for x in use_seq(&a).union(&def_seq(&a)).iter() {
        checker.comp(&a, &b, x);
    }
    let mut n = 0;
    let mut errs = Vec::new();
    for (kind, s1, s2, x) in checker.proven() {
        n += 1;
        let ok = match kind {
            Kind::Comp => {
                let x = VarSet::single(x.expect("comp queries name a variable").clone());
                imp(s1, &x) == imp(s2, &x)
            }
            Kind::Term => tvar(s1, e1) == tvar(s2, e2),
            Kind::Out => ovar(s1, e1) == ovar(s2, e2),
        };
        if !ok {
            errs.push(format!("{kind:?} {:?}", x.map(|v| v.to_string())));
        }
    }
    (n, errs)
}

/// Mutants of corpus programs, cycling through every mutation kind.
pub fn mutated_pairs(count: usize) -> Vec<(Checked, Checked)> {
    let programs = corpus_programs();
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        let base = &programs[seed as usize % programs.len()];
        let kind = MutationKind::ALL[(seed / programs.len() as u64) as usize % MutationKind::ALL.len()];
        seed += 1;
        let Ok(mutant) = mutate_pair(&base.program, &base.env, kind, seed) else { continue };
        if let Ok(new) = check(&mutant) {
            out.push((base.clone(), new));
        }
        if seed > 100 * count as u64 {
            panic!("too few applicable mutations");
        }
    }
    out
}

pub fn checker_consistency(mutants: usize) -> Verdict {
    let mut pairs: Vec<(Checked, Checked)> = corpus::all_pairs().map(load_pair).collect();
    pairs.extend(mutated_pairs(mutants));
    let (mut queries, mut errs) = (0, Vec::new());
    for (o, n) in &pairs {
        let (q, e) = consistency_of(o, n);
        queries += q;
        errs.extend(e);
    }
    Verdict::new(
        errs.is_empty() && queries > 0,
        format!("{} pairs, {queries} accepted queries, violations {}", pairs.len(), errs.len()),
    )
}

// ---- 4. semantic soundness ----

pub fn semantic_soundness() -> Verdict {
    let mut shapes: Vec<&str> = Vec::new();
    let (mut trials, mut diverged, mut fuel, mut equal, mut rejected) = (0, 0, 0, 0, Vec::new());
    for (i, p) in EQUIV_PAIRS.iter().enumerate() {
        let (o, n) = load_pair(p);
        if !check_out(&o.program.entry, &n.program.entry, &o.env, &n.env).accepted {
            rejected.push(p.name);
            continue;
        }
        shapes.push(p.shape);
        let cfg = CampaignConfig { trials: 100, fuel: 100_000, seed: 1000 + i as u64, ..CampaignConfig::default() };
        let r = run_campaign(&UpdatePair::new(&o, &n), &cfg);
        trials += r.trials;
        diverged += r.counts.diverged;
        fuel += r.counts.inconclusive_fuel;
        equal += r.counts.equal + r.counts.prefix_old_new;
    }
    let covered = ["reordering", "trailing skip", "duplicate statement", "if-motion", "loop-body congruence"]
        .iter()
        .all(|s| shapes.contains(s));
    let pairs = EQUIV_PAIRS.len() - rejected.len();
    let passed = pairs >= 10 && rejected.is_empty() && covered && diverged == 0 && fuel * 20 <= trials;
    Verdict::new(
        passed,
        format!("{pairs} pairs, {trials} trials, compatible {equal}, diverged {diverged}, one-sided fuel {fuel}, shapes covered {covered}"),
    )
}

// ---- 5. figure pairs ----

fn campaign_clean(old: &Checked, new: &Checked, rho: Option<&Rho>, report: &UpdateClassReport, seed: u64) -> (usize, usize) {
    let pair = match rho {
        Some(r) => UpdatePair::new(old, new).with_rho(r),
        None => UpdatePair::new(old, new),
    };
    let cfg = CampaignConfig { trials: 200, seed, assumptions: report.assumptions.clone(), ..CampaignConfig::default() };
    let r = run_campaign(&pair, &cfg);
    (r.counts.diverged, r.counts.equal + r.counts.prefix_old_new)
}

pub fn figure_pairs() -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut expect = |name: &str, cond: bool| {
        if !cond {
            ok = false;
            notes.push(name.to_string());
        }
    };

    let (o, n) = load_pair(&corpus::CONFIG);
    let rho: Rho = [(corpus::CONFIG_VAR.to_string(), 0)].into();
    let flipped: Rho = [(corpus::CONFIG_VAR.to_string(), 1)].into();
    let r = check_config_vars(&o, &n, &rho);
    expect("config accepted", r.accepted());
    expect("flipped rho rejected", !check_config_vars(&o, &n, &flipped).accepted());
    let (div, compat) = campaign_clean(&o, &n, Some(&rho), &r, 51);
    expect("config campaign", div == 0 && compat > 0);

    let (o, n) = load_pair(&corpus::ENUM);
    let m = load(corpus::ENUM_MUTANT).unwrap();
    let r = check_enum_extension(&o, &n).unwrap();
    expect("enum accepted", r.accepted());
    expect("enum mutant rejected", !check_enum_extension(&o, &m).unwrap().accepted());
    let (div, compat) = campaign_clean(&o, &n, None, &r, 52);
    expect("enum campaign", div == 0 && compat > 0);

    let (o, n) = load_pair(&corpus::EXIT);
    let m = load(corpus::EXIT_MUTANT).unwrap();
    let r = check_exit_on_error(&o, &n);
    expect("exit accepted", r.accepted());
    expect("exit mutant rejected", !check_exit_on_error(&o, &m).accepted());
    let (div, compat) = campaign_clean(&o, &n, None, &r, 53);
    expect("exit campaign", div == 0 && compat > 0);

    let (o, n) = load_pair(&corpus::INIT);
    let m = load(corpus::INIT_MUTANT).unwrap();
    let r = check_missing_init(&o, &n);
    expect("init accepted", r.accepted());
    expect("init mutant rejected", !check_missing_init(&o, &m).accepted());
    let (div, compat) = campaign_clean(&o, &n, None, &r, 54);
    expect("init campaign", div == 0 && compat > 0);

    let passed = ok;
    let detail = if notes.is_empty() { "4 figures accepted, 4 mutants rejected, 0 diverged".to_string() } else { format!("failed: {notes:?}") };
    Verdict::new(passed, detail)
}

// ---- 6. DSU hybrid ----

pub fn dsu_hybrid(trials: u64) -> Verdict {
    let fuel = 100_000;
    let (mut points, mut failures) = (0, Vec::new());
    for (i, p) in EQUIV_PAIRS.iter().enumerate() {
        let (o, n) = load_pair(p);
        if !check_out(&o.program.entry, &n.program.entry, &o.env, &n.env).accepted {
            continue;
        }
        let pair = UpdatePair::new(&o, &n);
        let cfg = CampaignConfig::default();
        for t in 0..trials {
            let inputs = trial_inputs(7000 + 100 * i as u64 + t, &cfg, enum_max(&o).max(enum_max(&n)));
            let compat = empirical_backward_compat(&pair, &inputs, fuel).status;
            for j in 1..=3 {
                if update_point_at(&pair, &inputs, fuel, j).is_err() {
                    continue;
                }
                points += 1;
                let r = simulate_update(&pair, &inputs, j, fuel);
                let good = r.mapped && r.hybrid_equals_pure_new == Some(true) && compat == CompatStatus::Compatible;
                if !good {
                    failures.push(format!("{} inputs {inputs:?} at output {j}: {:?} {:?}", p.name, r.error, compat));
                }
            }
        }
    }
    Verdict::new(
        failures.is_empty() && points > 0,
        format!("{points} update points, failures {}{}", failures.len(), failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()),
    )
}

// ---- 7. runtime invariants ----

fn def_exclusion(c: &Config, s: &Stmt) -> Result<(), String> {
    let mut run = Config { rest: Term::from_seq(std::slice::from_ref(s)).collect(), state: c.state.clone() };
    for _ in 0..500 {
        if run.state.crash || run.is_terminal() {
            break;
        }
        dsu_core::interp::step_in_place(&mut run);
    }
    let def = def_stmt(s);
    let (before, after) = (&c.state.store, &run.state.store);
    for (x, v) in &before.scalars {
        if !def.contains(&Var::named(x)) && after.scalars.get(x) != Some(v) {
            return Err(format!("`{x}` changed"));
        }
    }
    for (a, v) in &before.arrays {
        if !def.contains(&Var::named(a)) && after.arrays.get(a) != Some(v) {
            return Err(format!("`{a}` changed"));
        }
    }
    if !def.contains(&Var::Input) && after.input != before.input {
        return Err("id_I changed".into());
    }
    if !def.contains(&Var::Io) && after.io != before.io {
        return Err("id_IO changed".into());
    }
    Ok(())
}

/// Steps corpus runs on random inputs until `target` steps are checked. Returns (steps, def samples, violations).
pub fn runtime_invariants_run(target: u64, seed: u64) -> (u64, u64, Vec<String>) {
    let programs = corpus_programs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut steps, mut samples, mut errs) = (0u64, 0u64, Vec::new());
    let mut run = 0usize;
    while steps < target {
        let prog = &programs[run % programs.len()];
        run += 1;
        let cfg = CampaignConfig::default();
        let inputs = trial_inputs(rng.gen(), &cfg, enum_max(prog));
        let mut stmts = Vec::new();
        all_stmts(&prog.program.entry, &mut stmts);
        let mut c = dsu_core::interp::init_config(prog, &inputs);
        for _ in 0..2_000 {
            if c.is_terminal() || steps >= target {
                break;
            }
            let before = c.clone();
            let was_crashed = c.state.crash;
            dsu_core::interp::step_in_place(&mut c);
            steps += 1;
            if before.state.crash && !c.state.crash {
                errs.push("crash flag cleared".to_string());
            }
            if before.state.overflow && !c.state.overflow {
                errs.push("overflow flag cleared".to_string());
            }
            for (l, &k) in &c.state.loops {
                if k > before.state.loops.get(l).copied().unwrap_or(0) + 1 {
                    errs.push(format!("loop counter {l:?} jumped"));
                }
            }
            let (io0, io1) = (&before.state.store.io, &c.state.store.io);
            if io1.len() > io0.len() + 1 || io1[..io0.len().min(io1.len())] != io0[..] {
                errs.push("io sequence not extended by at most one event".to_string());
            }
            let ins = io1.iter().filter(|e| !e.is_out()).count();
            if ins + c.state.store.input.len() != inputs.len() {
                errs.push("input count mismatch".to_string());
            }
            if !was_crashed && rng.gen_ratio(1, 8) {
                if let Some(s) = stmts.choose(&mut rng) {
                    samples += 1;
                    if let Err(e) = def_exclusion(&before, s) {
                        errs.push(format!("def exclusion: {e}"));
                    }
                }
            }
            if was_crashed {
                break;
            }
        }
    }
    (steps, samples, errs)
}

pub fn runtime_invariants() -> Verdict {
    let (steps, samples, errs) = runtime_invariants_run(10_000, 77);
    Verdict::new(
        errs.is_empty() && steps >= 10_000 && samples > 0,
        format!("{steps} steps, {samples} def-exclusion samples, violations {}", errs.len()),
    )
}

// ---- 8. type weakening ----

pub const OVERFLOWING_INPUT: i64 = 1 << 30;

pub fn type_weakening() -> Verdict {
    let (o, n) = load_pair(&corpus::WEAKEN);
    let report = check_type_weakening(&o, &n);
    let pair = UpdatePair::new(&o, &n);
    let cfg = CampaignConfig { assumptions: report.assumptions.clone(), ..CampaignConfig::default() };
    let over = trial(&pair, &cfg, vec![OVERFLOWING_INPUT]);
    let over_ok = over.comparison == Comparison::Inconclusive { reason: InconclusiveReason::InvalidOldRun }
        && over.old_result.cause == Some(CrashCause::ValueMismatch)
        && over.new_result.outcome == RunOutcome::Terminated;
    let ordinary: Vec<i64> = (-8..=8).chain([1000, -70_000, 536_870_911, -(1 << 30)]).collect();
    let others_equal = ordinary.iter().all(|&v| trial(&pair, &cfg, vec![v]).comparison == Comparison::Equal);
    Verdict::new(
        report.accepted() && over_ok && others_equal,
        format!(
            "accepted {}, overflow trial {:?}, {} ordinary inputs all Equal {others_equal}",
            report.accepted(),
            over.comparison,
            ordinary.len()
        ),
    )
}
