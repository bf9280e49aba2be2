use crate::lang::{
    inline_stmts, pretty_expr, BaseType, Checked, Expr, Index, Lval, LoopLabel, Stmt, TypeEnv,
    VarType,
};
use serde::Serialize;
use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

/// A runtime value. `Undef` marks an uninitialized cell of the given type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Value {
    Long(i64),
    Label(String),
    Undef(BaseType),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Long(n) => write!(f, "{n}"),
            Value::Label(l) => f.write_str(l),
            Value::Undef(_) => f.write_str("⊥"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum IoEvent {
    In(i64),
    Out {
        value: i64,
        #[serde(skip_serializing_if = "Option::is_none")]
        prompt: Option<String>,
    },
}

impl IoEvent {
    pub fn out(value: i64) -> IoEvent {
        IoEvent::Out { value, prompt: None }
    }

    pub fn is_out(&self) -> bool {
        matches!(self, IoEvent::Out { .. })
    }
}

impl fmt::Display for IoEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IoEvent::In(v) => write!(f, "in {v}"),
            IoEvent::Out { value, prompt: None } => write!(f, "out {value}"),
            IoEvent::Out { value, prompt: Some(p) } => write!(f, "out {value} #pmpt:{p}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CrashCause {
    DivByZero,
    #[serde(rename = "indexOOB")]
    IndexOob,
    ValueMismatch,
    UndefinedRead,
    EmptyInput,
}

/// σ together with the pending input sequence and the I/O history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Store {
    pub scalars: BTreeMap<String, Value>,
    /// Cell `k` of an array lives at position `k - 1`.
    pub arrays: BTreeMap<String, Vec<Value>>,
    pub input: VecDeque<i64>,
    pub io: Vec<IoEvent>,
}

#[derive(Clone, Debug)]
pub struct ExecState {
    pub crash: bool,
    pub overflow: bool,
    pub crash_cause: Option<CrashCause>,
    pub undefined_read: bool,
    pub loops: BTreeMap<LoopLabel, u64>,
    pub store: Store,
    pub env: Arc<TypeEnv>,
}

impl PartialEq for ExecState {
    fn eq(&self, other: &Self) -> bool {
        self.crash == other.crash
            && self.overflow == other.overflow
            && self.crash_cause == other.crash_cause
            && self.undefined_read == other.undefined_read
            && self.loops == other.loops
            && self.store == other.store
    }
}

/// An operand that is either still an expression or already evaluated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Pending(Expr),
    Val(Value),
}

impl Operand {
    pub fn from_expr(e: &Expr) -> Operand {
        match e {
            Expr::Int(n) => Operand::Val(Value::Long(*n)),
            Expr::Label(l) => Operand::Val(Value::Label(l.clone())),
            other => Operand::Pending(other.clone()),
        }
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Pending(e) => f.write_str(&pretty_expr(e)),
            Operand::Val(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Var(String),
    Elem(String, Operand),
}

/// Runtime statement. Unlike [`Stmt`] it can hold partially evaluated operands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Assign(Target, Operand),
    Input(String),
    /// Output with the prompt label it was rewritten from, if any.
    Output(Operand, Option<String>),
    Skip,
    If(Operand, Vec<Stmt>, Vec<Stmt>),
    While { label: LoopLabel, cond: Expr, test: Option<Value>, body: Vec<Stmt> },
}

impl Term {
    pub fn from_stmt(s: &Stmt) -> Term {
        match s {
            Stmt::Assign(Lval::Var(x), e) => Term::Assign(Target::Var(x.clone()), Operand::from_expr(e)),
            Stmt::Assign(Lval::Elem(a, idx), e) => {
                let idx = match idx {
                    Index::Lit(k) => Operand::Val(Value::Long(*k)),
                    Index::Var(i) => Operand::Pending(Expr::var(i)),
                };
                Term::Assign(Target::Elem(a.clone(), idx), Operand::from_expr(e))
            }
            Stmt::Input(x) => Term::Input(x.clone()),
            Stmt::Output(e) => Term::Output(Operand::from_expr(e), None),
            Stmt::Skip => Term::Skip,
            Stmt::If(e, t, f) => Term::If(Operand::from_expr(e), t.clone(), f.clone()),
            Stmt::While(label, cond, body) => Term::While {
                label: *label,
                cond: cond.clone(),
                test: None,
                body: body.clone(),
            },
        }
    }

    pub fn from_seq(seq: &[Stmt]) -> impl Iterator<Item = Term> + '_ {
        seq.iter().map(Term::from_stmt)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Assign(Target::Var(x), rhs) => write!(f, "{x} := {rhs};"),
            Term::Assign(Target::Elem(a, i), rhs) => write!(f, "{a}[{i}] := {rhs};"),
            Term::Input(x) => write!(f, "input {x};"),
            Term::Output(v, None) => write!(f, "output {v};"),
            Term::Output(v, Some(p)) => write!(f, "output {v} #{p};"),
            Term::Skip => f.write_str("skip;"),
            Term::If(c, t, e) => {
                write!(f, "if ({c}) {{ {} }} else {{ {} }}", inline_stmts(t), inline_stmts(e))
            }
            Term::While { label, cond, test, body } => {
                write!(f, "while@{label} ({}", pretty_expr(cond))?;
                if let Some(v) = test {
                    write!(f, " => {v}")?;
                }
                write!(f, ") {{ {} }}", inline_stmts(body))
            }
        }
    }
}

/// A configuration: the remaining program and the execution state.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub rest: VecDeque<Term>,
    pub state: ExecState,
}

impl Config {
    /// Only `skip` is left and nothing crashed.
    pub fn is_terminal(&self) -> bool {
        !self.state.crash && self.rest.len() == 1 && self.rest[0] == Term::Skip
    }

    pub fn head(&self) -> Option<&Term> {
        self.rest.front()
    }

    /// Override the initial value of a scalar, e.g. for configuration variables.
    pub fn set_scalar(&mut self, name: &str, value: Value) {
        self.state.store.scalars.insert(name.to_string(), value);
    }

    pub fn outputs_emitted(&self) -> usize {
        self.state.store.io.iter().filter(|e| e.is_out()).count()
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rest: Vec<String> = self.rest.iter().map(|t| t.to_string()).collect();
        let st = &self.state;
        write!(f, "<{}> f={} of={}", rest.join(" "), st.crash as u8, st.overflow as u8)?;
        let loops: Vec<String> = st.loops.iter().map(|(l, n)| format!("{l}:{n}")).collect();
        if !loops.is_empty() {
            write!(f, " lc={{{}}}", loops.join(","))?;
        }
        let mut cells: Vec<String> = st
            .store
            .scalars
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        for (k, vs) in &st.store.arrays {
            let vs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
            cells.push(format!("{k}=[{}]", vs.join(",")));
        }
        cells.sort();
        let input: Vec<String> = st.store.input.iter().map(|v| v.to_string()).collect();
        let io: Vec<String> = st.store.io.iter().map(|e| e.to_string()).collect();
        write!(
            f,
            " σ={{{}}} in=[{}] io=[{}]",
            cells.join(","),
            input.join(","),
            io.join(",")
        )
    }
}

fn collect_labels(seq: &[Stmt], out: &mut BTreeMap<LoopLabel, u64>) {
    for s in seq {
        match s {
            Stmt::If(_, t, f) => {
                collect_labels(t, out);
                collect_labels(f, out);
            }
            Stmt::While(l, _, b) => {
                out.insert(*l, 0);
                collect_labels(b, out);
            }
            _ => {}
        }
    }
}

/// Initial configuration: every cell undefined and every loop counter zero.
pub fn init_config(checked: &Checked, inputs: &[i64]) -> Config {
    init_config_with(&checked.program.entry, Arc::new(checked.env.clone()), inputs)
}

pub fn init_config_with(entry: &[Stmt], env: Arc<TypeEnv>, inputs: &[i64]) -> Config {
    let mut scalars = BTreeMap::new();
    let mut arrays = BTreeMap::new();
    for (name, ty) in &env.vars {
        match ty {
            VarType::Scalar(b) => {
                scalars.insert(name.clone(), Value::Undef(b.clone()));
            }
            VarType::Array(b, n) => {
                arrays.insert(name.clone(), vec![Value::Undef(b.clone()); *n as usize]);
            }
        }
    }
    let mut loops = BTreeMap::new();
    collect_labels(entry, &mut loops);
    Config {
        rest: Term::from_seq(entry).collect(),
        state: ExecState {
            crash: false,
            overflow: false,
            crash_cause: None,
            undefined_read: false,
            loops,
            store: Store { scalars, arrays, input: inputs.iter().copied().collect(), io: Vec::new() },
            env,
        },
    }
}
