//! Checkers for the classes of updates that are backward compatible under
//! stated assumptions: new configuration variables, enumeration extension,
//! type weakening, exit-on-error, prompt change and missing initialization.

use crate::analysis::{def_seq, imp_stmt, use_seq, Var, VarSet};
use crate::equiv::{Checker, Derivation, Verdict, D};
use crate::lang::{
    erase_labels, inline_stmts, BaseType, Checked, EnumDecl, Expr, Lval, Stmt, VarDecl, VarType,
};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use thiserror::Error;

/// Values of new configuration variables.
pub type Rho = BTreeMap<String, i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum UpdateClass {
    BehavioralEquiv,
    ConfigVars,
    EnumExtension,
    TypeWeakening,
    ExitOnError,
    PromptChange,
    MissingInit,
}

impl fmt::Display for UpdateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UpdateClass::BehavioralEquiv => "behavioral-equivalence",
            UpdateClass::ConfigVars => "config-vars",
            UpdateClass::EnumExtension => "enum-extension",
            UpdateClass::TypeWeakening => "type-weakening",
            UpdateClass::ExitOnError => "exit-on-error",
            UpdateClass::PromptChange => "prompt-change",
            UpdateClass::MissingInit => "missing-init",
        };
        f.write_str(s)
    }
}

/// A condition on executions under which an accepted update is backward compatible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Assumption {
    /// The new program starts with these configuration values.
    ConfigValues { rho: Rho },
    /// No input is converted to one of the new labels.
    NoInputOfNewLabels { labels: Vec<String> },
    /// No variable starts out holding one of the new labels.
    NoInitialValueInNewLabels { labels: Vec<String> },
    /// Runs of the old program stay within the old types of these variables.
    NoOverflowOnWeakened { vars: Vec<String> },
    /// Evaluating an added guard never crashes.
    GuardDoesNotCrash,
    /// Outputs are compared by prompt label rather than by prompt value.
    OutputsComparedModuloPrompt,
    /// Runs of the old program never read an undefined variable.
    OldRunReadsNoUndefined,
    /// The added initialization itself does not crash.
    InitDoesNotCrash,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct UpdateClassReport {
    pub class: UpdateClass,
    pub verdict: Verdict,
    pub assumptions: Vec<Assumption>,
}

impl UpdateClassReport {
    fn new(class: UpdateClass, verdict: Verdict, assumptions: Vec<Assumption>) -> Self {
        UpdateClassReport { class, verdict, assumptions }
    }

    pub fn accepted(&self) -> bool {
        self.verdict.accepted
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpdateError {
    #[error("enumeration declarations are incomparable: {0}")]
    IncomparableEnums(String),
}

fn leaf(rule: &'static str, old: &[Stmt], new: &[Stmt]) -> Rc<Derivation> {
    Rc::new(Derivation {
        rule,
        lhs: inline_stmts(old),
        rhs: inline_stmts(new),
        var: None,
        premises: vec![],
    })
}

enum Special {
    Config(Rho),
    Enum { new_labels: BTreeSet<String>, assigned: BTreeSet<String> },
    Exit,
}

/// Prover for `new ≈ old` in one of the three recursive update relations.
struct ClassProver<'a> {
    ck: Checker<'a>,
    special: Special,
    memo: HashMap<(Vec<Stmt>, Vec<Stmt>), D>,
}

fn node(rule: &'static str, old: &[Stmt], new: &[Stmt], premises: Vec<Rc<Derivation>>) -> D {
    Some(Rc::new(Derivation { rule, lhs: inline_stmts(old), rhs: inline_stmts(new), var: None, premises }))
}

fn one(s: &Stmt) -> Vec<Stmt> {
    vec![s.clone()]
}

fn skip_if_empty(seq: &[Stmt]) -> Vec<Stmt> {
    if seq.is_empty() {
        vec![Stmt::Skip]
    } else {
        seq.to_vec()
    }
}

impl<'a> ClassProver<'a> {
    fn prefix(&self) -> &'static str {
        match self.special {
            Special::Config(_) => "config",
            Special::Enum { .. } => "enum",
            Special::Exit => "exit",
        }
    }

    fn rel(&mut self, old: &[Stmt], new: &[Stmt]) -> D {
        let key = (old.to_vec(), new.to_vec());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        self.memo.insert(key.clone(), None);
        let result = self.rel_rules(old, new);
        self.memo.insert(key, result.clone());
        result
    }

    fn guard_case(&mut self, old: &[Stmt], new: &[Stmt]) -> D {
        match &self.special {
            Special::Config(rho) => {
                if let [Stmt::If(Expr::Lval(Lval::Var(id)), t, f)] = new {
                    if let Some(v) = rho.get(id) {
                        let (rule, branch) = if *v != 0 { ("config.1.then", t) } else { ("config.1.else", f) };
                        let branch = branch.clone();
                        let d = self.rel(old, &branch)?;
                        return node(rule, old, new, vec![d]);
                    }
                }
                None
            }
            Special::Enum { new_labels, assigned } => {
                if let [Stmt::If(Expr::EnumEq(id, l), _, f)] = new {
                    if new_labels.contains(l) && !assigned.contains(id) {
                        let f = f.clone();
                        let d = self.rel(old, &f)?;
                        return node("enum.1", old, new, vec![d]);
                    }
                }
                None
            }
            Special::Exit => {
                let [Stmt::If(_, t, f), rest @ ..] = new else { return None };
                let is_guard = t.as_slice() == [Stmt::Skip] && f.as_slice() == [Stmt::Skip];
                let rest_matches = rest == old || (rest.is_empty() && old == [Stmt::Skip]);
                if is_guard && rest_matches {
                    return node("exit.1", old, new, vec![]);
                }
                None
            }
        }
    }

    fn congruence(&mut self, old: &[Stmt], new: &[Stmt]) -> D {
        match (old, new) {
            ([Stmt::If(e1, t1, f1)], [Stmt::If(e2, t2, f2)]) if e1 == e2 => {
                let dt = self.rel(t1, t2)?;
                let df = self.rel(f1, f2)?;
                node(if_rule(self.prefix()), old, new, vec![dt, df])
            }
            ([Stmt::While(_, e1, b1)], [Stmt::While(_, e2, b2)]) if e1 == e2 => {
                let db = self.rel(b1, b2)?;
                node(while_rule(self.prefix()), old, new, vec![db])
            }
            _ => None,
        }
    }

    fn behavioral(&mut self, old: &[Stmt], new: &[Stmt]) -> D {
        let d = self.ck.out(old, new)?;
        node(out_rule(self.prefix()), old, new, vec![d])
    }

    fn sequence(&mut self, old: &[Stmt], new: &[Stmt]) -> D {
        if old.len().max(new.len()) < 2 {
            return None;
        }
        let mut splits: Vec<(Vec<Stmt>, Stmt, Vec<Stmt>, Stmt)> = Vec::new();
        let (o_last, o_pre) = old.split_last().expect("nonempty");
        let (n_last, n_pre) = new.split_last().expect("nonempty");
        splits.push((skip_if_empty(o_pre), o_last.clone(), skip_if_empty(n_pre), n_last.clone()));
        // The shorter side may be read with an implicit trailing skip.
        if old.len() < new.len() {
            splits.push((old.to_vec(), Stmt::Skip, skip_if_empty(n_pre), n_last.clone()));
        } else if new.len() < old.len() {
            splits.push((skip_if_empty(o_pre), o_last.clone(), new.to_vec(), Stmt::Skip));
        }
        for (op, ol, np, nl) in splits {
            if let Some(d) = self.sequence_split(old, new, &op, &ol, &np, &nl) {
                return Some(d);
            }
        }
        None
    }

    fn sequence_split(
        &mut self,
        old: &[Stmt],
        new: &[Stmt],
        op: &[Stmt],
        ol: &Stmt,
        np: &[Stmt],
        nl: &Stmt,
    ) -> D {
        let mut premises = vec![self.rel(op, np)?];
        premises.push(self.ck.term(op, np)?);
        let io = VarSet::single(Var::Io);
        let xs = imp_stmt(ol, &io).union(&imp_stmt(nl, &io));
        for x in xs.iter() {
            premises.push(self.ck.comp(op, np, x)?);
        }
        premises.push(self.rel(&one(ol), &one(nl))?);
        node(seq_rule(self.prefix()), old, new, premises)
    }

    fn rel_rules(&mut self, old: &[Stmt], new: &[Stmt]) -> D {
        if let Some(d) = self.guard_case(old, new) {
            return Some(d);
        }
        if matches!(self.special, Special::Config(_)) {
            if let Some(d) = self.behavioral(old, new) {
                return Some(d);
            }
            if let Some(d) = self.congruence(old, new) {
                return Some(d);
            }
        } else {
            if let Some(d) = self.congruence(old, new) {
                return Some(d);
            }
            if let Some(d) = self.behavioral(old, new) {
                return Some(d);
            }
        }
        self.sequence(old, new)
    }
}

fn if_rule(p: &str) -> &'static str {
    match p {
        "config" => "config.if",
        "enum" => "enum.if",
        _ => "exit.if",
    }
}

fn while_rule(p: &str) -> &'static str {
    match p {
        "config" => "config.while",
        "enum" => "enum.while",
        _ => "exit.while",
    }
}

fn out_rule(p: &str) -> &'static str {
    match p {
        "config" => "config.out",
        "enum" => "enum.out",
        _ => "exit.out",
    }
}

fn seq_rule(p: &str) -> &'static str {
    match p {
        "config" => "config.seq",
        "enum" => "enum.seq",
        _ => "exit.seq",
    }
}

fn prove(old: &Checked, new: &Checked, special: Special) -> D {
    let (s1, s2) = (erase_labels(&old.program.entry), erase_labels(&new.program.entry));
    let mut prover = ClassProver { ck: Checker::new(&old.env, &new.env), special, memo: HashMap::new() };
    prover.rel(&s1, &s2)
}

fn verdict(d: D, reason: impl FnOnce() -> String) -> Verdict {
    match d {
        Some(d) => Verdict::accept(d),
        None => Verdict::reject(reason()),
    }
}

pub fn check_behavioral(old: &Checked, new: &Checked) -> UpdateClassReport {
    let v = Checker::new(&old.env, &new.env).out_verdict(&old.program.entry, &new.program.entry);
    UpdateClassReport::new(UpdateClass::BehavioralEquiv, v, vec![])
}

pub fn check_config_vars(old: &Checked, new: &Checked, rho: &Rho) -> UpdateClassReport {
    let assumptions = vec![Assumption::ConfigValues { rho: rho.clone() }];
    let report = |v| UpdateClassReport::new(UpdateClass::ConfigVars, v, assumptions.clone());
    if rho.is_empty() {
        return report(Verdict::reject("no configuration variables given"));
    }
    let old_vars = use_seq(&old.program.entry).union(&def_seq(&old.program.entry));
    let new_defs = def_seq(&new.program.entry);
    for id in rho.keys() {
        match new.env.vars.get(id) {
            Some(VarType::Scalar(BaseType::Int | BaseType::Long)) => {}
            _ => return report(Verdict::reject(format!("`{id}` is not a numeric scalar of the new program"))),
        }
        let v = Var::Named(id.clone());
        if old_vars.contains(&v) {
            return report(Verdict::reject(format!("`{id}` already occurs in the old program")));
        }
        if new_defs.contains(&v) {
            return report(Verdict::reject(format!("`{id}` is assigned in the new program")));
        }
    }
    let d = prove(old, new, Special::Config(rho.clone()));
    report(verdict(d, || "no rule relates the programs under the given configuration".into()))
}

/// Scalars that the new program tests as a bare `if` condition but the old one never mentions.
pub fn config_candidates(old: &Checked, new: &Checked) -> Vec<String> {
    fn collect(seq: &[Stmt], out: &mut BTreeSet<String>) {
        for s in seq {
            match s {
                Stmt::If(e, t, f) => {
                    if let Expr::Lval(Lval::Var(id)) = e {
                        out.insert(id.clone());
                    }
                    collect(t, out);
                    collect(f, out);
                }
                Stmt::While(_, _, b) => collect(b, out),
                _ => {}
            }
        }
    }
    let mut found = BTreeSet::new();
    collect(&new.program.entry, &mut found);
    let old_vars = use_seq(&old.program.entry).union(&def_seq(&old.program.entry));
    let new_defs = def_seq(&new.program.entry);
    found
        .into_iter()
        .filter(|id| {
            let v = Var::Named(id.clone());
            !old_vars.contains(&v) && !new_defs.contains(&v)
        })
        .collect()
}

/// Try every 0/1 valuation of the candidate configuration variables (at most ten).
pub fn infer_rho(old: &Checked, new: &Checked) -> Option<(Rho, UpdateClassReport)> {
    let candidates = config_candidates(old, new);
    if candidates.is_empty() || candidates.len() > 10 {
        return None;
    }
    for bits in 0u32..(1 << candidates.len()) {
        let rho: Rho = candidates.iter().enumerate().map(|(i, id)| (id.clone(), ((bits >> i) & 1) as i64)).collect();
        let report = check_config_vars(old, new, &rho);
        if report.accepted() {
            return Some((rho, report));
        }
    }
    None
}

/// New labels of `new` relative to `old`, when the enumerations are a strict extension.
pub fn enum_extension_labels(old: &[EnumDecl], new: &[EnumDecl]) -> Result<Option<Vec<String>>, UpdateError> {
    if old.len() != new.len() {
        return Err(UpdateError::IncomparableEnums(format!(
            "{} enumerations versus {}",
            old.len(),
            new.len()
        )));
    }
    let mut added = Vec::new();
    for (o, n) in old.iter().zip(new) {
        if o.name != n.name {
            return Err(UpdateError::IncomparableEnums(format!("`{}` versus `{}`", o.name, n.name)));
        }
        if n.labels.len() < o.labels.len() || n.labels[..o.labels.len()] != o.labels[..] {
            return Err(UpdateError::IncomparableEnums(format!(
                "labels of `{}` are not an extension",
                o.name
            )));
        }
        added.extend(n.labels[o.labels.len()..].iter().cloned());
    }
    Ok(if added.is_empty() { None } else { Some(added) })
}

fn assigned_vars(seq: &[Stmt], out: &mut BTreeSet<String>) {
    for s in seq {
        match s {
            Stmt::Assign(l, _) => {
                out.insert(l.base().to_string());
            }
            Stmt::If(_, t, f) => {
                assigned_vars(t, out);
                assigned_vars(f, out);
            }
            Stmt::While(_, _, b) => assigned_vars(b, out),
            _ => {}
        }
    }
}

pub fn check_enum_extension(old: &Checked, new: &Checked) -> Result<UpdateClassReport, UpdateError> {
    let Some(labels) = enum_extension_labels(&old.program.enums, &new.program.enums)? else {
        return Ok(UpdateClassReport::new(
            UpdateClass::EnumExtension,
            Verdict::reject("the enumerations are identical, so nothing was extended"),
            vec![],
        ));
    };
    let assumptions = vec![
        Assumption::NoInputOfNewLabels { labels: labels.clone() },
        Assumption::NoInitialValueInNewLabels { labels: labels.clone() },
    ];
    let mut assigned = BTreeSet::new();
    assigned_vars(&new.program.entry, &mut assigned);
    let special = Special::Enum { new_labels: labels.iter().cloned().collect(), assigned };
    let d = prove(old, new, special);
    let v = verdict(d, || "no rule relates the programs by enumeration extension".into());
    Ok(UpdateClassReport::new(UpdateClass::EnumExtension, v, assumptions))
}

fn weakens(old: &VarType, new: &VarType) -> bool {
    match (old, new) {
        (VarType::Scalar(BaseType::Int), VarType::Scalar(BaseType::Long)) => true,
        (VarType::Array(BaseType::Int, n), VarType::Array(BaseType::Long, m)) => n == m,
        (VarType::Array(b1, n), VarType::Array(b2, m)) => b1 == b2 && m > n,
        _ => false,
    }
}

/// Variables whose declared type is weakened from `old` to `new`, or why the declarations differ otherwise.
pub fn weakened_vars(old: &[VarDecl], new: &[VarDecl]) -> Result<Vec<String>, String> {
    if old.len() != new.len() {
        return Err("the programs declare a different number of variables".into());
    }
    let mut weakened = Vec::new();
    for (o, n) in old.iter().zip(new) {
        if o.name != n.name {
            return Err(format!("declaration `{}` corresponds to `{}`", o.name, n.name));
        }
        if o.ty == n.ty {
            continue;
        }
        if !weakens(&o.ty, &n.ty) {
            return Err(format!("the type of `{}` is not weakened", o.name));
        }
        weakened.push(o.name.clone());
    }
    Ok(weakened)
}

pub fn check_type_weakening(old: &Checked, new: &Checked) -> UpdateClassReport {
    let (p1, p2) = (&old.program, &new.program);
    let reject = |why: String| UpdateClassReport::new(UpdateClass::TypeWeakening, Verdict::reject(why), vec![]);
    if p1.prompt != p2.prompt || p1.enums != p2.enums {
        return reject("prompts or enumerations differ".into());
    }
    if erase_labels(&p1.entry) != erase_labels(&p2.entry) {
        return reject("the statements differ".into());
    }
    match weakened_vars(&p1.vars, &p2.vars) {
        Err(why) => reject(why),
        Ok(vars) if vars.is_empty() => reject("no variable type is weakened".into()),
        Ok(vars) => UpdateClassReport::new(
            UpdateClass::TypeWeakening,
            Verdict::accept(leaf("weaken.decls", &p1.entry, &p2.entry)),
            vec![Assumption::NoOverflowOnWeakened { vars }],
        ),
    }
}

pub fn check_exit_on_error(old: &Checked, new: &Checked) -> UpdateClassReport {
    let d = prove(old, new, Special::Exit);
    let v = verdict(d, || "no rule relates the programs by added error checks".into());
    UpdateClassReport::new(UpdateClass::ExitOnError, v, vec![Assumption::GuardDoesNotCrash])
}

pub fn check_prompt_change(old: &Checked, new: &Checked) -> UpdateClassReport {
    let (p1, p2) = (&old.program, &new.program);
    let reject = |why: &str| UpdateClassReport::new(UpdateClass::PromptChange, Verdict::reject(why), vec![]);
    if p1.enums != p2.enums || p1.vars != p2.vars || erase_labels(&p1.entry) != erase_labels(&p2.entry) {
        return reject("only the prompt table may change");
    }
    let table = |p: &crate::lang::Program| -> BTreeMap<String, i64> {
        p.prompt.iter().flatten().map(|e| (e.label.clone(), e.value)).collect()
    };
    if table(p1) == table(p2) {
        return reject("the prompt tables are identical");
    }
    UpdateClassReport::new(
        UpdateClass::PromptChange,
        Verdict::accept(leaf("prompt.change", &p1.entry, &p2.entry)),
        vec![Assumption::OutputsComparedModuloPrompt],
    )
}

/// Length of the initialization prefix when `new` is `init; old`.
pub fn init_prefix_len(old: &[Stmt], new: &[Stmt]) -> Option<usize> {
    if new.len() <= old.len() {
        return None;
    }
    let k = new.len() - old.len();
    (erase_labels(&new[k..]) == erase_labels(old)).then_some(k)
}

pub fn check_missing_init(old: &Checked, new: &Checked) -> UpdateClassReport {
    let assumptions = vec![Assumption::OldRunReadsNoUndefined, Assumption::InitDoesNotCrash];
    let reject = |why: String| UpdateClassReport::new(UpdateClass::MissingInit, Verdict::reject(why), assumptions.clone());
    let (s1, s2) = (&old.program.entry, &new.program.entry);
    let Some(k) = init_prefix_len(s1, s2) else {
        return reject("the new statements do not end with the old ones".into());
    };
    let init = &s2[..k];
    if let Some(bad) = init.iter().find(|s| !matches!(s, Stmt::Assign(_, e) if e.is_literal())) {
        return reject(format!("`{}` is not an assignment of a literal", inline_stmts(std::slice::from_ref(bad))));
    }
    let needed = crate::analysis::imp(s1, &VarSet::single(Var::Io));
    let defs = def_seq(init);
    if !defs.is_subset(&needed) {
        return reject(format!("{} is not read before it matters to the output", defs.minus(&needed)));
    }
    UpdateClassReport::new(UpdateClass::MissingInit, Verdict::accept(leaf("init.prefix", s1, s2)), assumptions)
}

/// Which classes, if any, accept the update. Behavioral equivalence is tried first.
pub fn classify_update(old: &Checked, new: &Checked, rho: Option<&Rho>) -> Vec<UpdateClassReport> {
    let mut all = vec![check_behavioral(old, new)];
    match rho {
        Some(r) => all.push(check_config_vars(old, new, r)),
        None => {
            if let Some((_, report)) = infer_rho(old, new) {
                all.push(report);
            }
        }
    }
    if let Ok(r) = check_enum_extension(old, new) {
        all.push(r);
    }
    all.push(check_type_weakening(old, new));
    all.push(check_exit_on_error(old, new));
    all.push(check_prompt_change(old, new));
    all.push(check_missing_init(old, new));
    all.into_iter().filter(UpdateClassReport::accepted).collect()
}
