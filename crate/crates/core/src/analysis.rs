//! Syntactic variable sets: Use, Def, Imp, the termination sets LVar, CVar,
//! TVar and their output-restricted forms Impₒ, TVarₒ and OVar.
//!
//! Besides program variables, sets may contain the pseudo-variables `id_I`
//! (the remaining input) and `id_IO` (the I/O history).

use crate::lang::{BinOp, Expr, Index, Lval, Stmt, TypeEnv};
use serde::{Serialize, Serializer};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Named(String),
    Input,
    Io,
}

impl Var {
    pub fn named(s: &str) -> Var {
        match s {
            "id_I" => Var::Input,
            "id_IO" => Var::Io,
            other => Var::Named(other.to_string()),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Named(s) => f.write_str(s),
            Var::Input => f.write_str("id_I"),
            Var::Io => f.write_str("id_IO"),
        }
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarSet(BTreeSet<Var>);

impl VarSet {
    pub fn new() -> VarSet {
        VarSet::default()
    }

    pub fn of(vars: impl IntoIterator<Item = Var>) -> VarSet {
        VarSet(vars.into_iter().collect())
    }

    /// Parse names, mapping `id_I` and `id_IO` to the pseudo-variables.
    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>) -> VarSet {
        VarSet(names.into_iter().map(Var::named).collect())
    }

    pub fn single(v: Var) -> VarSet {
        VarSet::of([v])
    }

    pub fn name(s: &str) -> VarSet {
        VarSet::single(Var::Named(s.to_string()))
    }

    pub fn insert(&mut self, v: Var) {
        self.0.insert(v);
    }

    pub fn extend(&mut self, other: &VarSet) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn minus(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &VarSet) -> VarSet {
        VarSet(self.0.intersection(&other.0).cloned().collect())
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.0.contains(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Var> {
        self.0.iter()
    }

    pub fn names(&self) -> Vec<String> {
        self.0.iter().map(|v| v.to_string()).collect()
    }
}

impl FromIterator<Var> for VarSet {
    fn from_iter<I: IntoIterator<Item = Var>>(iter: I) -> Self {
        VarSet(iter.into_iter().collect())
    }
}

impl Serialize for VarSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names().join(", "))
    }
}

fn named(s: &str) -> Var {
    Var::Named(s.to_string())
}

pub fn idx_lval(l: &Lval) -> VarSet {
    match l {
        Lval::Elem(_, Index::Var(i)) => VarSet::name(i),
        _ => VarSet::new(),
    }
}

pub fn use_lval(l: &Lval) -> VarSet {
    let mut s = idx_lval(l);
    s.insert(named(l.base()));
    s
}

pub fn use_expr(e: &Expr) -> VarSet {
    let mut out = VarSet::new();
    collect_use(e, &mut out);
    out
}

fn collect_use(e: &Expr, out: &mut VarSet) {
    match e {
        Expr::Int(_) | Expr::Label(_) => {}
        Expr::Lval(l) => out.extend(&use_lval(l)),
        Expr::EnumEq(id, _) => out.insert(named(id)),
        Expr::Unary(_, inner) => collect_use(inner, out),
        Expr::Binary(_, l, r) => {
            collect_use(l, out);
            collect_use(r, out);
        }
    }
}

fn may_fail(e: &Expr) -> bool {
    match e {
        Expr::Int(_) | Expr::Label(_) => false,
        Expr::Lval(_) | Expr::EnumEq(..) => true,
        Expr::Unary(_, inner) => may_fail(inner),
        Expr::Binary(op, l, r) => matches!(op, BinOp::Div | BinOp::Rem) || may_fail(l) || may_fail(r),
    }
}

/// Variables whose values decide whether evaluating `e` fails: all of Use(e)
/// when `e` reads a variable or divides, otherwise none.
pub fn err_expr(e: &Expr) -> VarSet {
    if may_fail(e) {
        use_expr(e)
    } else {
        VarSet::new()
    }
}

pub fn use_stmt(s: &Stmt) -> VarSet {
    match s {
        Stmt::Skip => VarSet::new(),
        Stmt::Assign(l, e) => use_expr(e).union(&idx_lval(l)),
        Stmt::Output(e) => {
            let mut u = use_expr(e);
            u.insert(Var::Io);
            u
        }
        Stmt::Input(_) => VarSet::of([Var::Input, Var::Io]),
        Stmt::If(e, t, f) => use_expr(e).union(&use_seq(t)).union(&use_seq(f)),
        Stmt::While(_, e, b) => use_expr(e).union(&use_seq(b)),
    }
}

pub fn def_stmt(s: &Stmt) -> VarSet {
    match s {
        Stmt::Skip => VarSet::new(),
        Stmt::Assign(l, _) => VarSet::name(l.base()),
        Stmt::Input(x) => VarSet::of([Var::Input, Var::Io, named(x)]),
        Stmt::Output(_) => VarSet::single(Var::Io),
        Stmt::If(_, t, f) => def_seq(t).union(&def_seq(f)),
        Stmt::While(_, _, b) => def_seq(b),
    }
}

pub fn use_seq(seq: &[Stmt]) -> VarSet {
    seq.iter().fold(VarSet::new(), |acc, s| acc.union(&use_stmt(s)))
}

pub fn def_seq(seq: &[Stmt]) -> VarSet {
    seq.iter().fold(VarSet::new(), |acc, s| acc.union(&def_stmt(s)))
}

pub fn size_stmt(s: &Stmt) -> usize {
    match s {
        Stmt::If(_, t, f) => 1 + size(t) + size(f),
        Stmt::While(_, _, b) => 1 + size(b),
        _ => 1,
    }
}

pub fn size(seq: &[Stmt]) -> usize {
    seq.iter().map(size_stmt).sum()
}

pub fn has_output(seq: &[Stmt]) -> bool {
    seq.iter().any(Stmt::contains_output)
}

pub fn has_while(seq: &[Stmt]) -> bool {
    seq.iter().any(Stmt::contains_while)
}

/// Imp(S, X): variables whose values before `seq` determine the values of X after it.
pub fn imp(seq: &[Stmt], x: &VarSet) -> VarSet {
    seq.iter().rev().fold(x.clone(), |acc, s| imp_stmt(s, &acc))
}

pub fn imp_stmt(s: &Stmt, x: &VarSet) -> VarSet {
    let def = def_stmt(s);
    if def.is_disjoint(x) {
        return x.clone();
    }
    match s {
        Stmt::If(e, t, f) => {
            let mut out = use_expr(e);
            for y in x.iter() {
                let y = VarSet::single(y.clone());
                out.extend(&imp(t, &y));
                out.extend(&imp(f, &y));
            }
            out
        }
        Stmt::While(_, e, body) => {
            let mut acc = use_expr(e).union(x);
            loop {
                let next = acc.union(&imp(body, &acc));
                if next == acc {
                    return acc;
                }
                acc = next;
            }
        }
        simple => {
            let mut out = use_stmt(simple).union(&x.minus(&def));
            // A write to one array cell leaves the other cells intact.
            if let Stmt::Assign(Lval::Elem(a, _), _) = simple {
                let a = named(a);
                if x.contains(&a) {
                    out.insert(a);
                }
            }
            out
        }
    }
}

fn split_last(seq: &[Stmt]) -> (&[Stmt], &Stmt) {
    let (last, prefix) = seq.split_last().expect("nonempty sequence");
    (prefix, last)
}

/// Variables that decide whether loops in `seq` terminate.
pub fn lvar(seq: &[Stmt]) -> VarSet {
    if !has_while(seq) {
        return VarSet::new();
    }
    if seq.len() > 1 {
        let (prefix, last) = split_last(seq);
        return lvar(prefix).union(&imp(prefix, &lvar(std::slice::from_ref(last))));
    }
    match &seq[0] {
        Stmt::If(e, t, f) => use_expr(e).union(&lvar(t)).union(&lvar(f)),
        Stmt::While(_, e, b) => imp(seq, &use_expr(e).union(&lvar(b))),
        _ => VarSet::new(),
    }
}

/// Variables that decide whether `seq` crashes.
pub fn cvar(seq: &[Stmt], env: &TypeEnv) -> VarSet {
    if seq.is_empty() {
        return VarSet::new();
    }
    if seq.len() > 1 {
        let (prefix, last) = split_last(seq);
        return cvar(prefix, env).union(&imp(prefix, &cvar(std::slice::from_ref(last), env)));
    }
    match &seq[0] {
        Stmt::Skip => VarSet::new(),
        Stmt::Assign(l, e) => {
            if env.possible_value_mismatch(l, e) {
                idx_lval(l).union(&use_expr(e))
            } else {
                idx_lval(l).union(&err_expr(e))
            }
        }
        Stmt::Input(_) => VarSet::single(Var::Input),
        Stmt::Output(e) => err_expr(e),
        Stmt::If(e, t, f) => {
            let branches = cvar(t, env).union(&cvar(f, env));
            if branches.is_empty() {
                err_expr(e)
            } else {
                use_expr(e).union(&branches)
            }
        }
        Stmt::While(_, e, b) => imp(seq, &use_expr(e).union(&cvar(b, env))),
    }
}

pub fn tvar(seq: &[Stmt], env: &TypeEnv) -> VarSet {
    lvar(seq).union(&cvar(seq, env))
}

/// Variables that decide the output sequence of `seq`, apart from termination.
pub fn imp_o(seq: &[Stmt]) -> VarSet {
    if !has_output(seq) {
        return VarSet::single(Var::Io);
    }
    if seq.len() > 1 {
        let (prefix, last) = split_last(seq);
        let last = std::slice::from_ref(last);
        return if has_output(last) { imp(prefix, &imp_o(last)) } else { imp_o(prefix) };
    }
    match &seq[0] {
        Stmt::Output(e) => {
            let mut u = use_expr(e);
            u.insert(Var::Io);
            u
        }
        Stmt::If(e, t, f) => use_expr(e).union(&imp_o(t)).union(&imp_o(f)),
        Stmt::While(..) => imp(seq, &VarSet::single(Var::Io)),
        _ => VarSet::single(Var::Io),
    }
}

pub fn tvar_o(seq: &[Stmt], env: &TypeEnv) -> VarSet {
    if !has_output(seq) {
        return VarSet::new();
    }
    if seq.len() > 1 {
        let (prefix, last) = split_last(seq);
        let last = std::slice::from_ref(last);
        return if has_output(last) {
            tvar(prefix, env).union(&imp(prefix, &tvar_o(last, env)))
        } else {
            tvar_o(prefix, env)
        };
    }
    match &seq[0] {
        Stmt::Output(e) => err_expr(e),
        Stmt::If(e, t, f) => use_expr(e).union(&tvar_o(t, env)).union(&tvar_o(f, env)),
        Stmt::While(..) => tvar(seq, env),
        _ => VarSet::new(),
    }
}

pub fn ovar(seq: &[Stmt], env: &TypeEnv) -> VarSet {
    imp_o(seq).union(&tvar_o(seq, env))
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisReport {
    #[serde(rename = "use")]
    pub use_: VarSet,
    pub def: VarSet,
    pub lvar: VarSet,
    pub cvar: VarSet,
    pub tvar: VarSet,
    pub imp_o: VarSet,
    pub tvar_o: VarSet,
    pub ovar: VarSet,
    pub size: usize,
}

pub fn analyze(seq: &[Stmt], env: &TypeEnv) -> AnalysisReport {
    AnalysisReport {
        use_: use_seq(seq),
        def: def_seq(seq),
        lvar: lvar(seq),
        cvar: cvar(seq, env),
        tvar: tvar(seq, env),
        imp_o: imp_o(seq),
        tvar_o: tvar_o(seq, env),
        ovar: ovar(seq, env),
        size: size(seq),
    }
}
