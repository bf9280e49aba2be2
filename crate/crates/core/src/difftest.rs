//! Differential testing: random inputs, program mutants and campaigns that
//! run an old and a new program side by side.

use crate::analysis::{def_stmt, imp, use_expr, use_stmt, Var, VarSet};
use crate::dsu::{compare_traces, old_run_invalid, CompatStatus, EventEq, InconclusiveReason, UpdatePair};
use crate::interp::{run_observed, Config, CrashCause, RunResult, RunSummary, Term};
use crate::lang::{BaseType, BinOp, Expr, Lval, Program, Stmt, TypeEnv, VarType};
use crate::update_classes::{Assumption, Rho};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// `length` integers drawn uniformly from `lo..=hi`, deterministic per seed.
pub fn gen_inputs(seed: u64, length: usize, (lo, hi): (i64, i64)) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..length).map(|_| rng.gen_range(lo..=hi)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationKind {
    Reorder,
    DuplicateSkip,
    IfMotion,
    TrailingSkip,
    PrependGuard,
    PrependInit,
}

impl MutationKind {
    pub const ALL: [MutationKind; 6] = [
        MutationKind::Reorder,
        MutationKind::DuplicateSkip,
        MutationKind::IfMotion,
        MutationKind::TrailingSkip,
        MutationKind::PrependGuard,
        MutationKind::PrependInit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationKind::Reorder => "reorder",
            MutationKind::DuplicateSkip => "duplicate-skip",
            MutationKind::IfMotion => "if-motion",
            MutationKind::TrailingSkip => "trailing-skip",
            MutationKind::PrependGuard => "prepend-guard",
            MutationKind::PrependInit => "prepend-init",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        MutationKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown mutation `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MutateError {
    #[error("no site for mutation {0}")]
    NoApplicableSite(MutationKind),
}

/// Every statement sequence of `seq` in preorder, with the condition of the enclosing construct.
fn visit_seqs(seq: &mut Vec<Stmt>, cond: Option<&Expr>, f: &mut dyn FnMut(&mut Vec<Stmt>, Option<&Expr>)) {
    f(seq, cond);
    for s in seq.iter_mut() {
        match s {
            Stmt::If(e, t, el) => {
                let e = e.clone();
                visit_seqs(t, Some(&e), f);
                visit_seqs(el, Some(&e), f);
            }
            Stmt::While(_, e, b) => {
                let e = e.clone();
                visit_seqs(b, Some(&e), f);
            }
            _ => {}
        }
    }
}

fn independent(a: &Stmt, b: &Stmt) -> bool {
    let (da, db) = (def_stmt(a), def_stmt(b));
    a != b
        && !(a.is_skip() || b.is_skip())
        && da.is_disjoint(&use_stmt(b).union(&db))
        && db.is_disjoint(&use_stmt(a))
}

fn idempotent_assign(s: &Stmt) -> bool {
    match s {
        Stmt::Assign(l, e) => {
            let base = Var::Named(l.base().to_string());
            let mut reads = use_expr(e);
            if let Lval::Elem(_, crate::lang::Index::Var(i)) = l {
                reads.insert(Var::Named(i.clone()));
            }
            !reads.contains(&base)
        }
        _ => false,
    }
}

fn local_sites(kind: MutationKind, seq: &[Stmt]) -> Vec<usize> {
    match kind {
        MutationKind::Reorder => (0..seq.len().saturating_sub(1)).filter(|&i| independent(&seq[i], &seq[i + 1])).collect(),
        MutationKind::DuplicateSkip => (0..seq.len()).filter(|&i| idempotent_assign(&seq[i])).collect(),
        MutationKind::IfMotion => (0..seq.len().saturating_sub(1)).filter(|&i| matches!(seq[i], Stmt::If(..))).collect(),
        MutationKind::PrependGuard => vec![0],
        MutationKind::TrailingSkip | MutationKind::PrependInit => vec![],
    }
}

fn numeric_scalars(vars: &VarSet, env: &TypeEnv) -> Vec<String> {
    vars.iter()
        .filter_map(|v| match v {
            Var::Named(n) if matches!(env.vars.get(n), Some(VarType::Scalar(BaseType::Int | BaseType::Long))) => {
                Some(n.clone())
            }
            _ => None,
        })
        .collect()
}

/// A guard expression over variables of the enclosing condition, which are defined at that point.
fn guard_expr(cond: Option<&Expr>, env: &TypeEnv, rng: &mut ChaCha8Rng) -> Expr {
    let vars = cond.map(|c| numeric_scalars(&use_expr(c), env)).unwrap_or_default();
    match vars.choose(rng) {
        Some(v) => {
            let c = rng.gen_range(-8..=8);
            let diff = Expr::bin(BinOp::Sub, Expr::var(v), Expr::Int(c));
            Expr::bin(BinOp::Div, Expr::Int(1), diff)
        }
        None => Expr::Int(1),
    }
}

fn apply_local(kind: MutationKind, seq: &mut Vec<Stmt>, i: usize, cond: Option<&Expr>, env: &TypeEnv, rng: &mut ChaCha8Rng) {
    match kind {
        MutationKind::Reorder => seq.swap(i, i + 1),
        MutationKind::DuplicateSkip => {
            let s = seq[i].clone();
            seq.insert(i + 1, s);
        }
        MutationKind::IfMotion => {
            let moved = seq.remove(i + 1);
            if let Stmt::If(_, t, f) = &mut seq[i] {
                for branch in [t, f] {
                    if branch.as_slice() == [Stmt::Skip] {
                        branch[0] = moved.clone();
                    } else {
                        branch.push(moved.clone());
                    }
                }
            }
        }
        MutationKind::PrependGuard => {
            let g = Stmt::If(guard_expr(cond, env, rng), vec![Stmt::Skip], vec![Stmt::Skip]);
            seq.insert(0, g);
        }
        MutationKind::TrailingSkip | MutationKind::PrependInit => unreachable!("whole-program mutations"),
    }
}

fn init_stmt(p: &Program, env: &TypeEnv, rng: &mut ChaCha8Rng) -> Option<Stmt> {
    let imported = imp(&p.entry, &VarSet::single(Var::Io));
    let candidates: Vec<(String, Expr)> = imported
        .iter()
        .filter_map(|v| {
            let Var::Named(n) = v else { return None };
            match env.vars.get(n)? {
                VarType::Scalar(BaseType::Int | BaseType::Long) => Some((n.clone(), Expr::Int(0))),
                VarType::Scalar(BaseType::Enum(t)) => Some((n.clone(), Expr::Label(env.enums[t][0].clone()))),
                _ => None,
            }
        })
        .collect();
    let (x, e) = candidates.choose(rng)?.clone();
    let e = match e {
        Expr::Int(_) => Expr::Int(rng.gen_range(-8..=8)),
        Expr::Label(_) => {
            let Some(VarType::Scalar(BaseType::Enum(t))) = env.vars.get(&x) else { unreachable!() };
            Expr::Label(env.enums[t].choose(rng).expect("enums are nonempty").clone())
        }
        other => other,
    };
    Some(Stmt::Assign(Lval::Var(x), e))
}

/// A mutant of `p` in the shape `kind`, choosing the site with `seed`.
pub fn mutate_pair(p: &Program, env: &TypeEnv, kind: MutationKind, seed: u64) -> Result<Program, MutateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entry = p.entry.clone();
    match kind {
        MutationKind::TrailingSkip => entry.push(Stmt::Skip),
        MutationKind::PrependInit => {
            let s = init_stmt(p, env, &mut rng).ok_or(MutateError::NoApplicableSite(kind))?;
            entry.insert(0, s);
        }
        _ => {
            let mut sites = Vec::new();
            let mut n = 0;
            visit_seqs(&mut entry.clone(), None, &mut |seq, _| {
                sites.extend(local_sites(kind, seq).into_iter().map(|i| (n, i)));
                n += 1;
            });
            let &(target, i) = sites.choose(&mut rng).ok_or(MutateError::NoApplicableSite(kind))?;
            let mut n = 0;
            visit_seqs(&mut entry, None, &mut |seq, cond| {
                if n == target {
                    apply_local(kind, seq, i, cond, env, &mut rng);
                }
                n += 1;
            });
        }
    }
    Ok(crate::lang::label_loops(&p.with_entry(entry)))
}

/// Nesting depth of a statement sequence; a sequence of simple statements has depth 1.
pub fn depth(seq: &[Stmt]) -> usize {
    1 + seq
        .iter()
        .map(|s| match s {
            Stmt::If(_, t, f) => depth(t).max(depth(f)),
            Stmt::While(_, _, b) => depth(b),
            _ => 0,
        })
        .max()
        .unwrap_or(0)
}

fn conditions(seq: &[Stmt], out: &mut Vec<Expr>) {
    for s in seq {
        match s {
            Stmt::If(e, t, f) => {
                out.push(e.clone());
                conditions(t, out);
                conditions(f, out);
            }
            Stmt::While(_, e, b) => {
                out.push(e.clone());
                conditions(b, out);
            }
            _ => {}
        }
    }
}

fn simple_stmts(seq: &[Stmt], out: &mut Vec<Stmt>) {
    for s in seq {
        match s {
            Stmt::If(_, t, f) => {
                simple_stmts(t, out);
                simple_stmts(f, out);
            }
            Stmt::While(_, _, b) => simple_stmts(b, out),
            other => out.push(other.clone()),
        }
    }
}

/// Structural rewrites of `seq` for exercising the analyses. The result need not typecheck.
pub fn scramble(seq: &[Stmt], seed: u64, rounds: usize, max_depth: usize) -> Vec<Stmt> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = Vec::new();
    simple_stmts(seq, &mut pool);
    pool.push(Stmt::Skip);
    let mut conds = Vec::new();
    conditions(seq, &mut conds);
    conds.push(Expr::Int(1));
    let mut cur = seq.to_vec();
    for _ in 0..rounds {
        let mut n_seqs = 0;
        visit_seqs(&mut cur.clone(), None, &mut |_, _| n_seqs += 1);
        let target = rng.gen_range(0..n_seqs);
        let op = rng.gen_range(0..6);
        let stmt = pool.choose(&mut rng).unwrap().clone();
        let cond = conds.choose(&mut rng).unwrap().clone();
        let mut next = cur.clone();
        let mut n = 0;
        visit_seqs(&mut next, None, &mut |s, _| {
            if n == target {
                let i = rng.gen_range(0..s.len());
                match op {
                    0 => s.insert(rng.gen_range(0..=s.len()), stmt.clone()),
                    1 if s.len() > 1 => {
                        s.remove(i);
                    }
                    2 => s[i] = Stmt::If(cond.clone(), vec![s[i].clone()], vec![Stmt::Skip]),
                    3 => s[i] = Stmt::While(crate::lang::LoopLabel(0), cond.clone(), vec![s[i].clone()]),
                    4 if i + 1 < s.len() => s.swap(i, i + 1),
                    _ => s.insert(i + 1, s[i].clone()),
                }
            }
            n += 1;
        });
        if depth(&next) <= max_depth {
            cur = next;
        }
    }
    let mut next = 0;
    crate::lang::relabel_seq(&mut cur, &mut next);
    cur
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "camelCase")]
pub enum Comparison {
    Equal,
    /// The old output prefix is reproduced, but the traces are not identical.
    PrefixOldNew,
    Diverged { index: usize },
    Inconclusive { reason: InconclusiveReason },
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialReport {
    pub seed: u64,
    pub inputs: Vec<i64>,
    pub old_result: RunSummary,
    pub new_result: RunSummary,
    pub comparison: Comparison,
    pub assumption_violations: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub trials: usize,
    pub fuel: u64,
    pub seed: u64,
    pub input_len: usize,
    pub range: (i64, i64),
    pub assumptions: Vec<Assumption>,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig { trials: 100, fuel: 100_000, seed: 0, input_len: 8, range: (-8, 8), assumptions: vec![] }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignCounts {
    pub equal: usize,
    pub prefix_old_new: usize,
    pub diverged: usize,
    pub inconclusive_fuel: usize,
    pub inconclusive_invalid_old_run: usize,
    pub inconclusive_assumption_violated: usize,
}

impl CampaignCounts {
    pub fn inconclusive(&self) -> usize {
        self.inconclusive_fuel + self.inconclusive_invalid_old_run + self.inconclusive_assumption_violated
    }

    fn add(&mut self, c: &Comparison) {
        match c {
            Comparison::Equal => self.equal += 1,
            Comparison::PrefixOldNew => self.prefix_old_new += 1,
            Comparison::Diverged { .. } => self.diverged += 1,
            Comparison::Inconclusive { reason: InconclusiveReason::Fuel } => self.inconclusive_fuel += 1,
            Comparison::Inconclusive { reason: InconclusiveReason::InvalidOldRun } => {
                self.inconclusive_invalid_old_run += 1
            }
            Comparison::Inconclusive { reason: InconclusiveReason::AssumptionViolated } => {
                self.inconclusive_assumption_violated += 1
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignReport {
    pub seed: u64,
    pub trials: usize,
    pub fuel: u64,
    pub counts: CampaignCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_divergence: Option<TrialReport>,
    #[serde(skip)]
    pub reports: Vec<TrialReport>,
}

impl CampaignReport {
    /// 0 when nothing diverged and some trial was conclusive, 1 on divergence, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.counts.diverged > 0 {
            1
        } else if self.counts.inconclusive() == self.trials {
            2
        } else {
            0
        }
    }
}

struct Monitors {
    event_eq: EventEq,
    new_labels: BTreeSet<String>,
    weakened: bool,
    guard: bool,
    no_undefined: bool,
    init: bool,
}

impl Monitors {
    fn from(assumptions: &[Assumption]) -> Self {
        let mut m = Monitors {
            event_eq: EventEq::Exact,
            new_labels: BTreeSet::new(),
            weakened: false,
            guard: false,
            no_undefined: false,
            init: false,
        };
        for a in assumptions {
            match a {
                Assumption::OutputsComparedModuloPrompt => m.event_eq = EventEq::ModuloPrompt,
                Assumption::NoInputOfNewLabels { labels } => m.new_labels.extend(labels.iter().cloned()),
                Assumption::NoOverflowOnWeakened { .. } => m.weakened = true,
                Assumption::GuardDoesNotCrash => m.guard = true,
                Assumption::OldRunReadsNoUndefined => m.no_undefined = true,
                Assumption::InitDoesNotCrash => m.init = true,
                // Initial values are never labels, and configuration values are seeded by the pair.
                Assumption::NoInitialValueInNewLabels { .. } | Assumption::ConfigValues { .. } => {}
            }
        }
        m
    }
}

fn enum_input_label(c: &Config) -> Option<&str> {
    let Some(Term::Input(x)) = c.head() else { return None };
    let env = &c.state.env;
    let Some(VarType::Scalar(BaseType::Enum(t))) = env.vars.get(x) else { return None };
    let v = *c.state.store.input.front()?;
    let labels = env.enums.get(t)?;
    usize::try_from(v).ok().filter(|&k| k >= 1).and_then(|k| labels.get(k - 1)).map(String::as_str)
}

fn is_guard(t: Option<&Term>) -> bool {
    matches!(t, Some(Term::If(_, a, b)) if a.as_slice() == [Stmt::Skip] && b.as_slice() == [Stmt::Skip])
}

/// Length of the longest init prefix `new` adds in front of `old`.
fn init_len(old: &[Stmt], new: &[Stmt]) -> usize {
    crate::update_classes::init_prefix_len(old, new).unwrap_or(0)
}

fn run_trial(pair: &UpdatePair, cfg: &CampaignConfig, m: &Monitors, seed: u64, inputs: Vec<i64>) -> TrialReport {
    let mut violations = Vec::new();
    let old: RunResult = run_observed(pair.old_start(&inputs), cfg.fuel, |_| {});
    let mut bad_label = None;
    let init_terms: Vec<Term> = {
        let k = init_len(&pair.old.program.entry, &pair.new.program.entry);
        Term::from_seq(&pair.new.program.entry[k..]).collect()
    };
    let mut reached_old_code = !m.init || init_terms.len() == pair.new.program.entry.len();
    let new = run_observed(pair.new_start(&inputs), cfg.fuel, |c| {
        if !m.new_labels.is_empty() && bad_label.is_none() {
            if let Some(l) = enum_input_label(c).filter(|l| m.new_labels.contains(*l)) {
                bad_label = Some(l.to_string());
            }
        }
        if !reached_old_code && c.rest.iter().eq(init_terms.iter()) {
            reached_old_code = true;
        }
    });
    if let Some(l) = bad_label {
        violations.push(format!("an input converts to the new label `{l}`"));
    }
    if m.weakened && matches!(old.cause, Some(CrashCause::ValueMismatch | CrashCause::IndexOob)) {
        violations.push("the old run leaves the range of a weakened type".to_string());
    }
    if m.guard && new.final_config.state.crash && is_guard(new.final_config.head()) {
        violations.push("an added guard crashed".to_string());
    }
    if m.no_undefined && old.undefined_read {
        violations.push("the old run reads an undefined variable".to_string());
    }
    if m.init && new.final_config.state.crash && !reached_old_code {
        violations.push("the added initialization crashed".to_string());
    }
    let comparison = if old_run_invalid(&old) {
        Comparison::Inconclusive { reason: InconclusiveReason::InvalidOldRun }
    } else if !violations.is_empty() {
        Comparison::Inconclusive { reason: InconclusiveReason::AssumptionViolated }
    } else {
        match compare_traces(&old.trace, old.outcome, &new.trace, new.outcome, m.event_eq) {
            CompatStatus::Compatible => {
                let same = old.trace.len() == new.trace.len()
                    && old.trace.iter().zip(&new.trace).all(|(a, b)| m.event_eq.same(a, b))
                    && old.outcome == new.outcome;
                if same {
                    Comparison::Equal
                } else {
                    Comparison::PrefixOldNew
                }
            }
            CompatStatus::Incompatible { index } => Comparison::Diverged { index },
            CompatStatus::Inconclusive { reason } => Comparison::Inconclusive { reason },
        }
    };
    TrialReport {
        seed,
        inputs,
        old_result: old.summary(),
        new_result: new.summary(),
        comparison,
        assumption_violations: violations,
    }
}

fn max_enum_len(pair: &UpdatePair) -> i64 {
    pair.old.env.enums.values().chain(pair.new.env.enums.values()).map(|l| l.len() as i64).max().unwrap_or(0)
}

/// Inputs for one trial: values from the range, mixed with enumeration indices when there are enums.
pub fn trial_inputs(seed: u64, cfg: &CampaignConfig, enum_max: i64) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = cfg.range;
    (0..cfg.input_len)
        .map(|_| if enum_max > 0 && rng.gen_bool(0.5) { rng.gen_range(1..=enum_max) } else { rng.gen_range(lo..=hi) })
        .collect()
}

fn assumed_rho(cfg: &CampaignConfig) -> Option<Rho> {
    cfg.assumptions.iter().find_map(|a| match a {
        Assumption::ConfigValues { rho } => Some(rho.clone()),
        _ => None,
    })
}

/// One trial on given inputs, with the campaign's fuel and assumptions.
pub fn trial(pair: &UpdatePair, cfg: &CampaignConfig, inputs: Vec<i64>) -> TrialReport {
    let rho = assumed_rho(cfg);
    let pair = match (&rho, pair.rho) {
        (Some(r), None) => pair.with_rho(r),
        _ => *pair,
    };
    run_trial(&pair, cfg, &Monitors::from(&cfg.assumptions), cfg.seed, inputs)
}

pub fn run_campaign(pair: &UpdatePair, cfg: &CampaignConfig) -> CampaignReport {
    let rho = assumed_rho(cfg);
    let pair = match (&rho, pair.rho) {
        (Some(r), None) => pair.with_rho(r),
        _ => *pair,
    };
    let m = Monitors::from(&cfg.assumptions);
    let enum_max = max_enum_len(&pair);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut counts = CampaignCounts::default();
    let mut reports = Vec::with_capacity(cfg.trials);
    for _ in 0..cfg.trials {
        let seed: u64 = rng.gen();
        let inputs = trial_inputs(seed, cfg, enum_max);
        let r = run_trial(&pair, cfg, &m, seed, inputs);
        counts.add(&r.comparison);
        reports.push(r);
    }
    let first_divergence = reports.iter().find(|r| matches!(r.comparison, Comparison::Diverged { .. })).cloned();
    CampaignReport { seed: cfg.seed, trials: cfg.trials, fuel: cfg.fuel, counts, first_divergence, reports }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{check, inline_stmts, load, Checked};

    #[test]
    fn inputs_are_deterministic() {
        assert!(gen_inputs(1, 0, (0, 9)).is_empty());
        assert_eq!(gen_inputs(1, 5, (0, 9)), gen_inputs(1, 5, (0, 9)));
        assert!(gen_inputs(3, 100, (-8, 8)).iter().all(|v| (-8..=8).contains(v)));
    }

    fn mutate(src: &str, kind: MutationKind) -> Result<String, MutateError> {
        let c = load(src).unwrap();
        let p = mutate_pair(&c.program, &c.env, kind, 7)?;
        check(&p).unwrap();
        Ok(inline_stmts(&p.entry))
    }

    #[test]
    fn mutation_shapes() {
        assert_eq!(mutate("output 1;", MutationKind::TrailingSkip).unwrap(), "output 1; skip;");
        assert_eq!(
            mutate("long x; long y; x := 1; y := 2;", MutationKind::Reorder).unwrap(),
            "y := 2; x := 1;"
        );
        assert_eq!(
            mutate("long x; x := 1; output x;", MutationKind::DuplicateSkip).unwrap(),
            "x := 1; x := 1; output x;"
        );
        assert_eq!(
            mutate("long x; x := 1; if (x) { x := 2; } output x;", MutationKind::IfMotion).unwrap(),
            "x := 1; if (x) { x := 2; output x; } else { output x; }"
        );
        assert_eq!(
            mutate("output 1;", MutationKind::PrependGuard).unwrap(),
            "if (1) { skip; } else { skip; } output 1;"
        );
        let g = mutate("long a; input a; while (a) { output a; input a; }", MutationKind::PrependGuard).unwrap();
        assert!(g.contains("if (1) {") || g.contains("1 / (a - "), "{g}");
        let init = mutate("long b; output b;", MutationKind::PrependInit).unwrap();
        assert!(init.starts_with("b := "), "{init}");
    }

    #[test]
    fn no_site() {
        assert_eq!(
            mutate("output 1;", MutationKind::Reorder),
            Err(MutateError::NoApplicableSite(MutationKind::Reorder))
        );
        assert_eq!(
            mutate("long x; x := x + 1;", MutationKind::DuplicateSkip),
            Err(MutateError::NoApplicableSite(MutationKind::DuplicateSkip))
        );
        assert!(mutate("long x; input x; output x;", MutationKind::PrependInit).is_err());
    }

    #[test]
    fn scramble_respects_depth() {
        let c = load("long a; input a; while (a) { if (a > 1) { output a; } input a; }").unwrap();
        for seed in 0..50 {
            assert!(depth(&scramble(&c.program.entry, seed, 8, 5)) <= 5);
        }
    }

    fn campaign(a: &Checked, b: &Checked, assumptions: Vec<Assumption>, trials: usize) -> CampaignReport {
        let cfg = CampaignConfig { trials, fuel: 10_000, seed: 1, assumptions, ..Default::default() };
        run_campaign(&UpdatePair::new(a, b), &cfg)
    }

    #[test]
    fn identical_programs_are_equal() {
        let p = load("long x; input x; output x * 2;").unwrap();
        let r = campaign(&p, &p, vec![], 10);
        assert_eq!(r.counts.equal, 10);
    }

    #[test]
    fn missing_init_campaign() {
        let o = load("long a; long b; long c; input a; input c; if (a > 0) { b := c + 1; } output b + c;").unwrap();
        let n = load("long a; long b; long c; b := 2; input a; input c; if (a > 0) { b := c + 1; } output b + c;")
            .unwrap();
        let r = campaign(&o, &n, vec![Assumption::OldRunReadsNoUndefined, Assumption::InitDoesNotCrash], 200);
        assert_eq!(r.counts.diverged, 0);
        for t in &r.reports {
            let expected = if t.inputs[0] > 0 {
                Comparison::Equal
            } else {
                Comparison::Inconclusive { reason: InconclusiveReason::InvalidOldRun }
            };
            assert_eq!(t.comparison, expected, "{:?}", t.inputs);
        }
    }

    #[test]
    fn enum_campaign_flags_new_labels() {
        let o = load("enum k {o1}; enum k a; long c; input a; input c; if (a == o1) { output 2 + c; }").unwrap();
        let n = load(
            "enum k {o1, o2}; enum k a; long c; input a; input c; if (a == o1) { output 2 + c; } if (a == o2) { output 3 + c; }",
        )
        .unwrap();
        let r = campaign(&o, &n, vec![Assumption::NoInputOfNewLabels { labels: vec!["o2".into()] }], 200);
        assert_eq!(r.counts.diverged, 0);
        for t in r.reports.iter().filter(|t| t.inputs[0] == 2) {
            assert!(!t.assumption_violations.is_empty());
            assert!(matches!(t.comparison, Comparison::Inconclusive { .. }));
        }
        assert!(r.counts.equal > 0);
    }

    #[test]
    fn divergence_is_reported() {
        let o = load("long x; input x; output x;").unwrap();
        let n = load("long x; input x; output x + 1;").unwrap();
        let r = campaign(&o, &n, vec![], 5);
        assert_eq!(r.counts.diverged, 5);
        assert_eq!(r.first_divergence.unwrap().comparison, Comparison::Diverged { index: 1 });
    }

    #[test]
    fn guard_crash_is_an_assumption_violation() {
        let o = load("long a; input a; while (a != 0) { output a; input a; }").unwrap();
        let n = load("long a; input a; while (a != 0) { if (1 / (a - 5)) { skip; } else { skip; } output a; input a; }")
            .unwrap();
        let r = campaign(&o, &n, vec![Assumption::GuardDoesNotCrash], 200);
        assert_eq!(r.counts.diverged, 0);
        assert!(r.counts.inconclusive_assumption_violated > 0);
        let without = campaign(&o, &n, vec![], 200);
        assert!(without.counts.diverged > 0);
    }
}
