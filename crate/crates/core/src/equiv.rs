//! Syntactic checkers for three program relations:
//!
//! * `comp`: both sides compute the same final value of one variable,
//! * `term`: both sides terminate in the same way,
//! * `out`: both sides produce the same output sequence.
//!
//! Each checker tries the rules in order and returns a derivation tree when
//! one applies. Empty prefixes are read as `skip`. Queries are memoized, and a
//! query that is still being proved counts as failed, so cyclic attempts are
//! rejected rather than looping.

use crate::analysis::{def_stmt, imp_stmt, ovar, tvar, use_expr, Var, VarSet};
use crate::lang::{erase_labels, inline_stmts, BaseType, Expr, Lval, Stmt, TypeEnv, VarType};
use serde::Serialize;
use std::collections::HashMap;
use std::rc::Rc;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub rule: &'static str,
    pub lhs: String,
    pub rhs: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<Rc<Derivation>>,
}

impl Derivation {
    /// Every rule name in the tree, depth first.
    pub fn rules(&self) -> Vec<&'static str> {
        let mut out = vec![self.rule];
        for p in &self.premises {
            out.extend(p.rules());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivation: Option<Rc<Derivation>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
}

impl Verdict {
    pub fn accept(d: Rc<Derivation>) -> Verdict {
        Verdict { accepted: true, derivation: Some(d), failure_reason: None }
    }

    pub fn reject(reason: impl Into<String>) -> Verdict {
        Verdict { accepted: false, derivation: None, failure_reason: Some(reason.into()) }
    }

    fn from_option(d: Option<Rc<Derivation>>, reason: impl FnOnce() -> String) -> Verdict {
        match d {
            Some(d) => Verdict::accept(d),
            None => Verdict::reject(reason()),
        }
    }
}

pub type D = Option<Rc<Derivation>>;

/// The three relations a [`Checker`] proves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Comp,
    Term,
    Out,
}

type Key = (Kind, Vec<Stmt>, Vec<Stmt>, Option<Var>);

/// A memoizing prover for one pair of typing environments: the left side is
/// typed in `env1` and the right side in `env2`.
pub struct Checker<'a> {
    env1: &'a TypeEnv,
    env2: &'a TypeEnv,
    memo: HashMap<Key, D>,
}

fn skip_if_empty(seq: &[Stmt]) -> Vec<Stmt> {
    if seq.is_empty() {
        vec![Stmt::Skip]
    } else {
        seq.to_vec()
    }
}

/// Prefix (never empty) and last statement.
fn split(seq: &[Stmt]) -> (Vec<Stmt>, &Stmt) {
    let (last, prefix) = seq.split_last().expect("nonempty sequence");
    (skip_if_empty(prefix), last)
}

fn concat(a: &[Stmt], b: &[Stmt]) -> Vec<Stmt> {
    a.iter().chain(b).cloned().collect()
}

fn one(s: &Stmt) -> &[Stmt] {
    std::slice::from_ref(s)
}

fn all_skip(seq: &[Stmt]) -> bool {
    seq.iter().all(Stmt::is_skip)
}

impl<'a> Checker<'a> {
    pub fn new(env1: &'a TypeEnv, env2: &'a TypeEnv) -> Checker<'a> {
        Checker { env1, env2, memo: HashMap::new() }
    }

    /// Every query proven so far, including the premises of larger proofs.
    pub fn proven(&self) -> impl Iterator<Item = (Kind, &[Stmt], &[Stmt], Option<&Var>)> {
        self.memo
            .iter()
            .filter(|(_, d)| d.is_some())
            .map(|((k, a, b, x), _)| (*k, a.as_slice(), b.as_slice(), x.as_ref()))
    }

    fn node(rule: &'static str, a: &[Stmt], b: &[Stmt], var: Option<&Var>, premises: Vec<Rc<Derivation>>) -> D {
        Some(Rc::new(Derivation {
            rule,
            lhs: inline_stmts(a),
            rhs: inline_stmts(b),
            var: var.map(|v| v.to_string()),
            premises,
        }))
    }

    fn memoized(&mut self, key: Key, prove: impl FnOnce(&mut Self) -> D) -> D {
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        self.memo.insert(key.clone(), None);
        let result = prove(self);
        self.memo.insert(key, result.clone());
        result
    }

    /// Prove `a ≡ b` for every variable in `vars`, collecting the premises.
    fn comp_all(&mut self, a: &[Stmt], b: &[Stmt], vars: &VarSet, out: &mut Vec<Rc<Derivation>>) -> bool {
        for y in vars.iter() {
            match self.comp(a, b, y) {
                Some(d) => out.push(d),
                None => return false,
            }
        }
        true
    }

    // ---- equivalent computation of one variable ----

    pub fn comp(&mut self, a: &[Stmt], b: &[Stmt], x: &Var) -> D {
        let key = (Kind::Comp, a.to_vec(), b.to_vec(), Some(x.clone()));
        self.memoized(key, |me| me.comp_rules(a, b, x))
    }

    fn comp_rules(&mut self, a: &[Stmt], b: &[Stmt], x: &Var) -> D {
        if a.len() == 1 && b.len() == 1 {
            let (s1, s2) = (&a[0], &b[0]);
            let defs = def_stmt(s1).union(&def_stmt(s2));
            if s1.is_simple() && s2.is_simple() {
                if s1 == s2 {
                    return Self::node("comp.1a.same", a, b, Some(x), vec![]);
                }
                if let (Stmt::Input(i1), Stmt::Input(i2)) = (s1, s2) {
                    if *x != Var::Named(i1.clone()) && *x != Var::Named(i2.clone()) {
                        return Self::node("comp.1a.input", a, b, Some(x), vec![]);
                    }
                } else if !defs.contains(x) {
                    return Self::node("comp.1a.undefined", a, b, Some(x), vec![]);
                }
            }
            let both_def = def_stmt(s1).contains(x) && def_stmt(s2).contains(x);
            match (s1, s2) {
                (Stmt::If(e1, t1, f1), Stmt::If(e2, t2, f2)) if e1 == e2 && both_def => {
                    if let (Some(dt), Some(df)) = (self.comp(t1, t2, x), self.comp(f1, f2, x)) {
                        return Self::node("comp.1b", a, b, Some(x), vec![dt, df]);
                    }
                }
                (Stmt::While(_, e1, b1), Stmt::While(_, e2, b2)) if e1 == e2 && both_def => {
                    let xs = VarSet::single(x.clone());
                    let ys = imp_stmt(s1, &xs).union(&imp_stmt(s2, &xs));
                    let mut premises = vec![];
                    if self.comp_all(b1, b2, &ys, &mut premises) {
                        return Self::node("comp.1c", a, b, Some(x), premises);
                    }
                }
                _ => {}
            }
            if !defs.contains(x) {
                return Self::node("comp.1d", a, b, Some(x), vec![]);
            }
            return None;
        }

        let (p1, s1) = split(a);
        let (p2, s2) = split(b);
        let (d1, d2) = (def_stmt(s1), def_stmt(s2));
        if d1.contains(x) && d2.contains(x) {
            let xs = VarSet::single(x.clone());
            let ys = imp_stmt(s1, &xs).union(&imp_stmt(s2, &xs));
            let mut premises = vec![];
            if self.comp_all(&p1, &p2, &ys, &mut premises) {
                if let Some(d) = self.comp(one(s1), one(s2), x) {
                    premises.push(d);
                    return Self::node("comp.2a", a, b, Some(x), premises);
                }
            }
        }
        if !d2.contains(x) {
            if let Some(d) = self.comp(a, &p2, x) {
                return Self::node("comp.2b.right", a, b, Some(x), vec![d]);
            }
        }
        if !d1.contains(x) {
            if let Some(d) = self.comp(&p1, b, x) {
                return Self::node("comp.2b.left", a, b, Some(x), vec![d]);
            }
        }
        if let (Stmt::If(e1, t1, f1), Stmt::If(e2, t2, f2)) = (s1, s2) {
            if e1 == e2 {
                let mut premises = vec![];
                if self.comp_all(&p1, &p2, &use_expr(e1), &mut premises) {
                    let (r1, r2) = (&a[..a.len() - 1], &b[..b.len() - 1]);
                    let then_side = self.comp(&concat(r1, t1), &concat(r2, t2), x);
                    let else_side = self.comp(&concat(r1, f1), &concat(r2, f2), x);
                    if let (Some(dt), Some(df)) = (then_side, else_side) {
                        premises.push(dt);
                        premises.push(df);
                        return Self::node("comp.2c", a, b, Some(x), premises);
                    }
                }
            }
        }
        None
    }

    // ---- same termination behaviour ----

    fn same_input_type(&self, i1: &str, i2: &str) -> bool {
        let resolve = |env: &TypeEnv, x: &str| -> Option<(VarType, Option<Vec<String>>)> {
            let ty = env.vars.get(x)?.clone();
            let labels = match ty.base() {
                BaseType::Enum(n) => env.enums.get(n).cloned(),
                _ => None,
            };
            Some((ty, labels))
        };
        match (resolve(self.env1, i1), resolve(self.env2, i2)) {
            (Some(t1), Some(t2)) => t1 == t2,
            _ => false,
        }
    }

    fn evaluates_safely(env: &TypeEnv, s: &Stmt) -> Option<Expr> {
        match s {
            Stmt::Output(e) => Some(e.clone()),
            Stmt::Assign(l @ Lval::Var(_), e) if !env.possible_value_mismatch(l, e) => Some(e.clone()),
            _ => None,
        }
    }

    pub fn term(&mut self, a: &[Stmt], b: &[Stmt]) -> D {
        let key = (Kind::Term, a.to_vec(), b.to_vec(), None);
        self.memoized(key, |me| me.term_rules(a, b))
    }

    fn term_rules(&mut self, a: &[Stmt], b: &[Stmt]) -> D {
        if a.len() == 1 && b.len() == 1 {
            let (s1, s2) = (&a[0], &b[0]);
            if s1.is_simple() && s2.is_simple() {
                if s1 == s2 {
                    return Self::node("term.1a.same", a, b, None, vec![]);
                }
                if let (Stmt::Input(i1), Stmt::Input(i2)) = (s1, s2) {
                    if self.same_input_type(i1, i2) {
                        return Self::node("term.1a.input", a, b, None, vec![]);
                    }
                }
                if let (Some(e1), Some(e2)) =
                    (Self::evaluates_safely(self.env1, s1), Self::evaluates_safely(self.env2, s2))
                {
                    if e1 == e2 {
                        return Self::node("term.1a.expr", a, b, None, vec![]);
                    }
                }
                return None;
            }
            match (s1, s2) {
                (Stmt::If(e1, t1, f1), Stmt::If(e2, t2, f2)) if e1 == e2 => {
                    if all_skip(t1) && all_skip(f1) && all_skip(t2) && all_skip(f2) {
                        return Self::node("term.1b.skip", a, b, None, vec![]);
                    }
                    if let (Some(dt), Some(df)) = (self.term(t1, t2), self.term(f1, f2)) {
                        return Self::node("term.1b", a, b, None, vec![dt, df]);
                    }
                }
                (Stmt::While(_, e1, b1), Stmt::While(_, e2, b2)) if e1 == e2 => {
                    if let Some(dt) = self.term(b1, b2) {
                        let ys = tvar(a, self.env1).union(&tvar(b, self.env2));
                        let mut premises = vec![dt];
                        if self.comp_all(b1, b2, &ys, &mut premises) {
                            return Self::node("term.1c", a, b, None, premises);
                        }
                    }
                }
                _ => {}
            }
            return None;
        }

        let (p1, s1) = split(a);
        let (p2, s2) = split(b);
        if !s1.is_skip() && !s2.is_skip() {
            if let Some(dp) = self.term(&p1, &p2) {
                let ys = tvar(one(s1), self.env1).union(&tvar(one(s2), self.env2));
                let mut premises = vec![dp];
                if self.comp_all(&p1, &p2, &ys, &mut premises) {
                    if let Some(ds) = self.term(one(s1), one(s2)) {
                        premises.push(ds);
                        return Self::node("term.2a", a, b, None, premises);
                    }
                }
            }
        }
        if s1.is_skip() {
            if let Some(d) = self.term(&p1, b) {
                return Self::node("term.2b.left", a, b, None, vec![d]);
            }
        }
        if s2.is_skip() {
            if let Some(d) = self.term(a, &p2) {
                return Self::node("term.2b.right", a, b, None, vec![d]);
            }
        }
        if let Some(d) = self.term_duplicate(a, b, false) {
            return Self::node("term.2c.left", a, b, None, vec![d]);
        }
        if let Some(d) = self.term_duplicate(b, a, true) {
            return Self::node("term.2c.right", a, b, None, vec![d]);
        }
        if a.len() >= 2 && b.len() >= 2 {
            let (n, m) = (a.len(), b.len());
            let (s1, s1n) = (&a[n - 2], &a[n - 1]);
            let (s2, s2n) = (&b[m - 2], &b[m - 1]);
            let tv1 = tvar(one(s1n), self.env1);
            let tv2 = tvar(one(s2n), self.env2);
            if def_stmt(s1).is_disjoint(&tv1) && def_stmt(s2).is_disjoint(&tv2) {
                let (q1, q2) = (skip_if_empty(&a[..n - 2]), skip_if_empty(&b[..m - 2]));
                if let Some(dp) = self.term(&q1, &q2) {
                    let ys = tvar(&a[n - 2..], self.env1).union(&tvar(&b[m - 2..], self.env2));
                    let mut premises = vec![dp];
                    if self.comp_all(&q1, &q2, &ys, &mut premises) {
                        if let (Some(x1), Some(x2)) = (self.term(one(s1), one(s2n)), self.term(one(s1n), one(s2))) {
                            premises.push(x1);
                            premises.push(x2);
                            return Self::node("term.2d", a, b, None, premises);
                        }
                    }
                }
            }
        }
        None
    }

    /// `dup` ends with a statement that repeats an earlier one. With `flipped`
    /// the duplicated side is the right-hand program.
    fn term_duplicate(&mut self, dup: &[Stmt], other: &[Stmt], flipped: bool) -> D {
        let n = dup.len();
        if n < 2 || dup[n - 1].is_skip() {
            return None;
        }
        let last = &dup[n - 1];
        let env = if flipped { self.env2 } else { self.env1 };
        let tv_last = tvar(one(last), env);
        for p in 0..n - 1 {
            let between: VarSet = dup[p..n - 1].iter().fold(VarSet::new(), |acc, s| acc.union(&def_stmt(s)));
            if !between.is_disjoint(&tv_last) {
                continue;
            }
            // Both copies are typed in the same environment.
            let same = if flipped {
                let mut inner = Checker::new(self.env2, self.env2);
                inner.term(one(&dup[p]), one(last))
            } else {
                let mut inner = Checker::new(self.env1, self.env1);
                inner.term(one(&dup[p]), one(last))
            };
            let Some(same) = same else { continue };
            let rest = if flipped { self.term(other, &dup[..n - 1]) } else { self.term(&dup[..n - 1], other) };
            if let Some(rest) = rest {
                return Self::node("term.2c.dup", &dup[p..=p], one(last), None, vec![same, rest]);
            }
        }
        None
    }

    // ---- same output behaviour ----

    pub fn out(&mut self, a: &[Stmt], b: &[Stmt]) -> D {
        let key = (Kind::Out, a.to_vec(), b.to_vec(), None);
        self.memoized(key, |me| me.out_rules(a, b))
    }

    fn out_rules(&mut self, a: &[Stmt], b: &[Stmt]) -> D {
        if a.len() == 1 && b.len() == 1 {
            let (s1, s2) = (&a[0], &b[0]);
            let (o1, o2) = (s1.contains_output(), s2.contains_output());
            if s1.is_simple() && s2.is_simple() {
                if !o1 && !o2 {
                    return Self::node("out.1a.silent", a, b, None, vec![]);
                }
                if s1 == s2 {
                    return Self::node("out.1a.same", a, b, None, vec![]);
                }
                return None;
            }
            match (s1, s2) {
                (Stmt::If(e1, t1, f1), Stmt::If(e2, t2, f2)) if e1 == e2 && o1 && o2 => {
                    if let (Some(dt), Some(df)) = (self.out(t1, t2), self.out(f1, f2)) {
                        return Self::node("out.1b", a, b, None, vec![dt, df]);
                    }
                }
                (Stmt::While(_, e1, b1), Stmt::While(_, e2, b2)) if e1 == e2 && o1 && o2 => {
                    if let Some(db) = self.out(b1, b2) {
                        let ys = ovar(a, self.env1).union(&ovar(b, self.env2));
                        let mut premises = vec![db];
                        if self.comp_all(b1, b2, &ys, &mut premises) {
                            if let Some(dt) = self.term(b1, b2) {
                                premises.push(dt);
                                return Self::node("out.1c", a, b, None, premises);
                            }
                        }
                    }
                }
                _ => {}
            }
            if !o1 && !o2 {
                return Self::node("out.1d", a, b, None, vec![]);
            }
            return None;
        }

        let (p1, s1) = split(a);
        let (p2, s2) = split(b);
        let (o1, o2) = (s1.contains_output(), s2.contains_output());
        if o1 && o2 {
            if let Some(dp) = self.out(&p1, &p2) {
                let ys = ovar(one(s1), self.env1).union(&ovar(one(s2), self.env2));
                let mut premises = vec![dp];
                if self.comp_all(&p1, &p2, &ys, &mut premises) {
                    if let Some(dt) = self.term(&p1, &p2) {
                        premises.push(dt);
                        if let Some(ds) = self.out(one(s1), one(s2)) {
                            premises.push(ds);
                            return Self::node("out.2a", a, b, None, premises);
                        }
                    }
                }
            }
        }
        if !o1 {
            if let Some(d) = self.out(&p1, b) {
                return Self::node("out.2b.left", a, b, None, vec![d]);
            }
        }
        if !o2 {
            if let Some(d) = self.out(a, &p2) {
                return Self::node("out.2b.right", a, b, None, vec![d]);
            }
        }
        None
    }

    // ---- verdict entry points ----

    pub fn comp_verdict(&mut self, a: &[Stmt], b: &[Stmt], x: &Var) -> Verdict {
        let (a, b) = (erase_labels(a), erase_labels(b));
        let d = self.comp(&a, &b, x);
        Verdict::from_option(d, || format!("no rule proves that both programs compute the same `{x}`"))
    }

    pub fn term_verdict(&mut self, a: &[Stmt], b: &[Stmt]) -> Verdict {
        let (a, b) = (erase_labels(a), erase_labels(b));
        let d = self.term(&a, &b);
        Verdict::from_option(d, || "no rule proves that both programs terminate the same way".to_string())
    }

    pub fn out_verdict(&mut self, a: &[Stmt], b: &[Stmt]) -> Verdict {
        let (a, b) = (erase_labels(a), erase_labels(b));
        let d = self.out(&a, &b);
        Verdict::from_option(d, || "no rule proves that both programs produce the same outputs".to_string())
    }
}

pub fn check_comp(a: &[Stmt], b: &[Stmt], x: &Var, env1: &TypeEnv, env2: &TypeEnv) -> Verdict {
    Checker::new(env1, env2).comp_verdict(a, b, x)
}

pub fn check_term(a: &[Stmt], b: &[Stmt], env1: &TypeEnv, env2: &TypeEnv) -> Verdict {
    Checker::new(env1, env2).term_verdict(a, b)
}

pub fn check_out(a: &[Stmt], b: &[Stmt], env1: &TypeEnv, env2: &TypeEnv) -> Verdict {
    Checker::new(env1, env2).out_verdict(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{load, Checked};

    fn pair(old: &str, new: &str) -> (Checked, Checked) {
        (load(old).unwrap(), load(new).unwrap())
    }

    fn comp(old: &str, new: &str, x: &str) -> Verdict {
        let (a, b) = pair(old, new);
        check_comp(&a.program.entry, &b.program.entry, &Var::named(x), &a.env, &b.env)
    }

    fn term(old: &str, new: &str) -> Verdict {
        let (a, b) = pair(old, new);
        check_term(&a.program.entry, &b.program.entry, &a.env, &b.env)
    }

    fn out(old: &str, new: &str) -> Verdict {
        let (a, b) = pair(old, new);
        check_out(&a.program.entry, &b.program.entry, &a.env, &b.env)
    }

    const XY: &str = "long x; long y; long z;";

    #[test]
    fn independent_assignments_commute() {
        let v = comp(&format!("{XY} x := 1; y := 2;"), &format!("{XY} y := 2; x := 1;"), "x");
        assert!(v.accepted, "{v:?}");
        let d = v.derivation.unwrap();
        assert_eq!(d.rule, "comp.2b.left");
        assert!(d.rules().contains(&"comp.2a"));
    }

    #[test]
    fn dependent_assignments_do_not_commute() {
        let v = comp(&format!("{XY} x := 1; y := x;"), &format!("{XY} y := x; x := 1;"), "y");
        assert!(!v.accepted);
        assert!(v.failure_reason.is_some());
    }

    #[test]
    fn inputs_into_different_variables() {
        assert!(comp(&format!("{XY} input x;"), &format!("{XY} input y;"), "id_IO").accepted);
        assert!(!comp(&format!("{XY} input x;"), &format!("{XY} input y;"), "x").accepted);
    }

    #[test]
    fn statement_motion_into_branches() {
        let old = format!("{XY} z := 5; if (x) {{ y := z; }} else {{ y := 0; }}");
        let new = format!("{XY} if (x) {{ z := 5; y := z; }} else {{ z := 5; y := 0; }}");
        let v = comp(&old, &new, "y");
        assert!(v.accepted, "{v:?}");
    }

    #[test]
    fn trailing_skip_and_reorder_terminate_alike() {
        assert!(term(&format!("{XY} x := 1;"), &format!("{XY} x := 1; skip;")).accepted);
        let v = term(&format!("{XY} x := y; z := 4;"), &format!("{XY} z := 4; x := y;"));
        assert!(v.accepted, "{v:?}");
        assert!(!term(&format!("{XY} x := 1;"), &format!("{XY} x := 1 / y;")).accepted);
    }

    #[test]
    fn duplicated_statement_terminates_alike() {
        let v = term(&format!("{XY} x := y + 1;"), &format!("{XY} x := y + 1; x := y + 1;"));
        assert!(v.accepted, "{v:?}");
        assert!(v.derivation.unwrap().rules().contains(&"term.2c.dup"));
    }

    #[test]
    fn output_reorder_rejected_silent_reorder_accepted() {
        assert!(!out(&format!("{XY} output 1; output 2;"), &format!("{XY} output 2; output 1;")).accepted);
        let v = out(
            &format!("{XY} input x; y := 2; z := x + 1; output y + z;"),
            &format!("{XY} input x; z := x + 1; y := 2; output y + z;"),
        );
        assert!(v.accepted, "{v:?}");
    }

    #[test]
    fn loops_with_congruent_bodies() {
        let old = format!("{XY} input x; while (x > 0) {{ y := x; z := 1; output y + z; x := x - 1; }}");
        let new = format!("{XY} input x; while (x > 0) {{ z := 1; y := x; output y + z; x := x - 1; }}");
        let v = out(&old, &new);
        assert!(v.accepted, "{v:?}");
        assert!(v.derivation.unwrap().rules().contains(&"out.1c"));
    }

    #[test]
    fn different_output_expressions_rejected() {
        assert!(!out(&format!("{XY} input x; output x;"), &format!("{XY} input x; output x + 0;")).accepted);
    }
}
