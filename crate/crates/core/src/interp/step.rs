//! The small-step relation. One call to [`step_in_place`] applies one rule.
//!
//! Granularity: evaluating an expression operand (EEval') is a single step,
//! and literals are already values. An array assignment first evaluates its
//! index, then its right-hand side, then writes. Removing a leading `skip`
//! from a sequence is its own step (Seq).

use super::eval::eval;
use super::state::{Config, CrashCause, IoEvent, Operand, Target, Term, Value};
use crate::lang::{fits_int, BaseType, LabelInfo, VarType};
use serde::Serialize;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    Seq,
    EEval,
    ECrash,
    AsScl,
    AsArr,
    AsErr1,
    AsErr2,
    AsErr3,
    In1,
    In2,
    In3,
    In4,
    In5,
    In6,
    Out1,
    Out2,
    Out3,
    IfT,
    IfF,
    WhT,
    WhF,
    Crash,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::Seq => "Seq",
            Rule::EEval => "EEval'",
            Rule::ECrash => "ECrash",
            Rule::AsScl => "As-Scl",
            Rule::AsArr => "As-Arr",
            Rule::AsErr1 => "As-Err1",
            Rule::AsErr2 => "As-Err2",
            Rule::AsErr3 => "As-Err3",
            Rule::In1 => "In-1",
            Rule::In2 => "In-2",
            Rule::In3 => "In-3",
            Rule::In4 => "In-4",
            Rule::In5 => "In-5",
            Rule::In6 => "In-6",
            Rule::Out1 => "Out-1",
            Rule::Out2 => "Out-2",
            Rule::Out3 => "Out-3",
            Rule::IfT => "If-T",
            Rule::IfF => "If-F",
            Rule::WhT => "Wh-T",
            Rule::WhF => "Wh-F",
            Rule::Crash => "Crash",
        };
        f.write_str(s)
    }
}

fn crash(c: &mut Config, cause: CrashCause) {
    let st = &mut c.state;
    st.crash = true;
    st.crash_cause = Some(cause);
    if cause == CrashCause::UndefinedRead {
        st.undefined_read = true;
    }
}

/// Evaluate a pending operand in place. Returns the rule that fired.
fn eval_operand(c: &mut Config, get: impl Fn(&mut Term) -> &mut Operand) -> Rule {
    let head = c.rest.front_mut().expect("nonempty");
    let Operand::Pending(e) = get(head).clone() else { unreachable!("operand already a value") };
    match eval(&e, &c.state.store) {
        Ok(r) => {
            c.state.overflow |= r.overflow;
            *get(c.rest.front_mut().expect("nonempty")) = Operand::Val(r.value);
            Rule::EEval
        }
        Err(cause) => {
            crash(c, cause);
            Rule::ECrash
        }
    }
}

fn replace_head(c: &mut Config, with: Vec<Term>) {
    c.rest.pop_front();
    for t in with.into_iter().rev() {
        c.rest.push_front(t);
    }
}

/// Apply one rule. Returns `None` on a terminal configuration. A crashed
/// configuration is a fixpoint and reports [`Rule::Crash`].
pub fn step_in_place(c: &mut Config) -> Option<Rule> {
    if c.state.crash {
        return Some(Rule::Crash);
    }
    if c.is_terminal() {
        return None;
    }
    let head = c.rest.front().expect("configurations are never empty").clone();
    let rule = match head {
        Term::Skip => {
            c.rest.pop_front();
            Rule::Seq
        }
        Term::Assign(Target::Elem(_, Operand::Pending(_)), _) => eval_operand(c, |t| match t {
            Term::Assign(Target::Elem(_, i), _) => i,
            _ => unreachable!(),
        }),
        Term::Assign(_, Operand::Pending(_)) => eval_operand(c, |t| match t {
            Term::Assign(_, rhs) => rhs,
            _ => unreachable!(),
        }),
        Term::Assign(target, Operand::Val(v)) => assign(c, target, v),
        Term::Input(x) => input(c, &x),
        Term::Output(Operand::Pending(_), _) => eval_operand(c, |t| match t {
            Term::Output(v, _) => v,
            _ => unreachable!(),
        }),
        Term::Output(Operand::Val(v), origin) => output(c, v, origin),
        Term::If(Operand::Pending(_), ..) => eval_operand(c, |t| match t {
            Term::If(cond, ..) => cond,
            _ => unreachable!(),
        }),
        Term::If(Operand::Val(v), t, f) => match v {
            Value::Long(0) => {
                replace_head(c, Term::from_seq(&f).collect());
                Rule::IfF
            }
            Value::Long(_) => {
                replace_head(c, Term::from_seq(&t).collect());
                Rule::IfT
            }
            _ => {
                crash(c, CrashCause::ValueMismatch);
                Rule::ECrash
            }
        },
        Term::While { label, cond, test, body } => {
            let test = match test {
                Some(v) => Some(v),
                None => match Operand::from_expr(&cond) {
                    Operand::Val(v) => Some(v),
                    Operand::Pending(_) => None,
                },
            };
            match test {
                None => match eval(&cond, &c.state.store) {
                    Ok(r) => {
                        c.state.overflow |= r.overflow;
                        if let Some(Term::While { test, .. }) = c.rest.front_mut() {
                            *test = Some(r.value);
                        }
                        Rule::EEval
                    }
                    Err(cause) => {
                        crash(c, cause);
                        Rule::ECrash
                    }
                },
                Some(Value::Long(0)) => {
                    c.state.loops.insert(label, 0);
                    replace_head(c, vec![Term::Skip]);
                    Rule::WhF
                }
                Some(Value::Long(_)) => {
                    *c.state.loops.entry(label).or_insert(0) += 1;
                    let mut terms: Vec<Term> = Term::from_seq(&body).collect();
                    terms.push(Term::While { label, cond, test: None, body });
                    replace_head(c, terms);
                    Rule::WhT
                }
                Some(_) => {
                    crash(c, CrashCause::ValueMismatch);
                    Rule::ECrash
                }
            }
        }
    };
    Some(rule)
}

/// Functional form of [`step_in_place`]: terminal and crashed configurations map to themselves.
pub fn step(c: &Config) -> Config {
    let mut next = c.clone();
    step_in_place(&mut next);
    next
}

fn assign(c: &mut Config, target: Target, v: Value) -> Rule {
    let env = c.state.env.clone();
    match target {
        Target::Var(x) => {
            if matches!(env.vars.get(&x), Some(VarType::Scalar(BaseType::Int))) && !value_fits_int(&v) {
                crash(c, CrashCause::ValueMismatch);
                return Rule::AsErr2;
            }
            c.state.store.scalars.insert(x, v);
            replace_head(c, vec![Term::Skip]);
            Rule::AsScl
        }
        Target::Elem(a, Operand::Val(idx)) => {
            let Value::Long(k) = idx else {
                crash(c, CrashCause::ValueMismatch);
                return Rule::ECrash;
            };
            let size = c.state.store.arrays.get(&a).map_or(0, Vec::len);
            if k < 1 || k as u64 > size as u64 {
                crash(c, CrashCause::IndexOob);
                return Rule::AsErr1;
            }
            if matches!(env.vars.get(&a), Some(VarType::Array(BaseType::Int, _))) && !value_fits_int(&v) {
                crash(c, CrashCause::ValueMismatch);
                return Rule::AsErr3;
            }
            c.state.store.arrays.get_mut(&a).expect("checked above")[(k - 1) as usize] = v;
            replace_head(c, vec![Term::Skip]);
            Rule::AsArr
        }
        Target::Elem(_, Operand::Pending(_)) => unreachable!("index evaluated first"),
    }
}

fn value_fits_int(v: &Value) -> bool {
    match v {
        Value::Long(n) => fits_int(*n),
        _ => true,
    }
}

fn input(c: &mut Config, x: &str) -> Rule {
    let Some(&v) = c.state.store.input.front() else {
        crash(c, CrashCause::EmptyInput);
        return Rule::In6;
    };
    let ty = c.state.env.vars.get(x).cloned();
    let (value, rule) = match ty {
        Some(VarType::Scalar(BaseType::Int)) => {
            if !fits_int(v) {
                crash(c, CrashCause::ValueMismatch);
                return Rule::In3;
            }
            (Value::Long(v), Rule::In2)
        }
        Some(VarType::Scalar(BaseType::Enum(name))) => {
            let labels = c.state.env.enums.get(&name).cloned().unwrap_or_default();
            match usize::try_from(v).ok().filter(|&k| k >= 1 && k <= labels.len()) {
                Some(k) => (Value::Label(labels[k - 1].clone()), Rule::In4),
                None => {
                    crash(c, CrashCause::ValueMismatch);
                    return Rule::In5;
                }
            }
        }
        _ => (Value::Long(v), Rule::In1),
    };
    let st = &mut c.state;
    st.store.input.pop_front();
    st.store.scalars.insert(x.to_string(), value);
    st.store.io.push(IoEvent::In(v));
    replace_head(c, vec![Term::Skip]);
    rule
}

fn output(c: &mut Config, v: Value, origin: Option<String>) -> Rule {
    match v {
        Value::Long(n) => {
            c.state.store.io.push(IoEvent::Out { value: n, prompt: origin });
            replace_head(c, vec![Term::Skip]);
            Rule::Out1
        }
        Value::Label(l) => match c.state.env.labels.get(&l).cloned() {
            Some(LabelInfo::Prompt { value }) => {
                *c.rest.front_mut().expect("nonempty") =
                    Term::Output(Operand::Val(Value::Long(value)), Some(l));
                Rule::Out3
            }
            Some(LabelInfo::Enum { index, .. }) => {
                c.state.store.io.push(IoEvent::out(index));
                replace_head(c, vec![Term::Skip]);
                Rule::Out2
            }
            None => {
                crash(c, CrashCause::ValueMismatch);
                Rule::ECrash
            }
        },
        Value::Undef(_) => {
            crash(c, CrashCause::UndefinedRead);
            Rule::ECrash
        }
    }
}

