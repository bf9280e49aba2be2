//! Whole-expression evaluation with two's-complement wraparound.

use super::state::{CrashCause, Store, Value};
use crate::lang::{BinOp, Expr, Index, Lval, UnOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluated {
    pub value: Value,
    pub overflow: bool,
}

pub fn eval(e: &Expr, store: &Store) -> Result<Evaluated, CrashCause> {
    let mut overflow = false;
    let value = eval_inner(e, store, &mut overflow)?;
    Ok(Evaluated { value, overflow })
}

fn defined(v: &Value) -> Result<Value, CrashCause> {
    match v {
        Value::Undef(_) => Err(CrashCause::UndefinedRead),
        other => Ok(other.clone()),
    }
}

fn as_long(v: Value) -> Result<i64, CrashCause> {
    match v {
        Value::Long(n) => Ok(n),
        _ => Err(CrashCause::ValueMismatch),
    }
}

pub(crate) fn read_scalar(store: &Store, x: &str) -> Result<Value, CrashCause> {
    store.scalars.get(x).map_or(Err(CrashCause::UndefinedRead), defined)
}

/// Cell `k` of array `a`, or `IndexOob` when `k` is outside `1..=n`.
pub(crate) fn read_cell(store: &Store, a: &str, k: i64) -> Result<Value, CrashCause> {
    let cells = store.arrays.get(a).ok_or(CrashCause::UndefinedRead)?;
    let pos = usize::try_from(k - 1).map_err(|_| CrashCause::IndexOob)?;
    cells.get(pos).map_or(Err(CrashCause::IndexOob), defined)
}

pub(crate) fn read_lval(store: &Store, l: &Lval) -> Result<Value, CrashCause> {
    match l {
        Lval::Var(x) => read_scalar(store, x),
        Lval::Elem(a, Index::Lit(k)) => read_cell(store, a, *k),
        Lval::Elem(a, Index::Var(i)) => {
            let k = as_long(read_scalar(store, i)?)?;
            read_cell(store, a, k)
        }
    }
}

fn flag(b: bool) -> Value {
    Value::Long(b as i64)
}

fn eval_inner(e: &Expr, store: &Store, of: &mut bool) -> Result<Value, CrashCause> {
    match e {
        Expr::Int(n) => Ok(Value::Long(*n)),
        Expr::Label(l) => Ok(Value::Label(l.clone())),
        Expr::Lval(l) => read_lval(store, l),
        Expr::EnumEq(id, l) => match read_scalar(store, id)? {
            Value::Label(v) => Ok(flag(&v == l)),
            _ => Err(CrashCause::ValueMismatch),
        },
        Expr::Unary(UnOp::Neg, inner) => {
            let v = as_long(eval_inner(inner, store, of)?)?;
            let (r, o) = v.overflowing_neg();
            *of |= o;
            Ok(Value::Long(r))
        }
        Expr::Unary(UnOp::Not, inner) => {
            let v = as_long(eval_inner(inner, store, of)?)?;
            Ok(flag(v == 0))
        }
        Expr::Binary(op, l, r) => {
            let lv = eval_inner(l, store, of)?;
            let rv = eval_inner(r, store, of)?;
            if let (Value::Label(a), Value::Label(b)) = (&lv, &rv) {
                return match op {
                    BinOp::Eq => Ok(flag(a == b)),
                    BinOp::Ne => Ok(flag(a != b)),
                    _ => Err(CrashCause::ValueMismatch),
                };
            }
            let (a, b) = (as_long(lv)?, as_long(rv)?);
            let (value, o) = match op {
                BinOp::Add => a.overflowing_add(b),
                BinOp::Sub => a.overflowing_sub(b),
                BinOp::Mul => a.overflowing_mul(b),
                BinOp::Div | BinOp::Rem if b == 0 => return Err(CrashCause::DivByZero),
                BinOp::Div => a.overflowing_div(b),
                BinOp::Rem => a.overflowing_rem(b),
                BinOp::Lt => (i64::from(a < b), false),
                BinOp::Le => (i64::from(a <= b), false),
                BinOp::Eq => (i64::from(a == b), false),
                BinOp::Ne => (i64::from(a != b), false),
                BinOp::Gt => (i64::from(a > b), false),
                BinOp::Ge => (i64::from(a >= b), false),
                BinOp::And => (i64::from(a != 0 && b != 0), false),
                BinOp::Or => (i64::from(a != 0 || b != 0), false),
            };
            *of |= o;
            Ok(Value::Long(value))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::BaseType;
    use std::collections::{BTreeMap, VecDeque};

    fn store(pairs: &[(&str, Value)]) -> Store {
        Store {
            scalars: pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            arrays: BTreeMap::from([(
                "a".to_string(),
                vec![Value::Long(10), Value::Undef(BaseType::Long)],
            )]),
            input: VecDeque::new(),
            io: vec![],
        }
    }

    fn ev(e: &Expr, s: &Store) -> Result<Evaluated, CrashCause> {
        eval(e, s)
    }

    #[test]
    fn wraps_and_flags_overflow() {
        let s = store(&[("x", Value::Long(i64::MAX))]);
        let r = ev(&Expr::bin(BinOp::Add, Expr::var("x"), Expr::Int(1)), &s).unwrap();
        assert_eq!(r, Evaluated { value: Value::Long(i64::MIN), overflow: true });
        let r = ev(&Expr::bin(BinOp::Div, Expr::Int(i64::MIN), Expr::Int(-1)), &s).unwrap();
        assert_eq!(r, Evaluated { value: Value::Long(i64::MIN), overflow: true });
        let r = ev(&Expr::bin(BinOp::Sub, Expr::var("x"), Expr::Int(1)), &s).unwrap();
        assert!(!r.overflow);
    }

    #[test]
    fn errors() {
        let s = store(&[("x", Value::Long(0)), ("u", Value::Undef(BaseType::Int))]);
        let div = Expr::bin(BinOp::Rem, Expr::Int(3), Expr::var("x"));
        assert_eq!(ev(&div, &s), Err(CrashCause::DivByZero));
        assert_eq!(ev(&Expr::var("u"), &s), Err(CrashCause::UndefinedRead));
        let oob = Expr::Lval(Lval::Elem("a".into(), Index::Var("x".into())));
        assert_eq!(ev(&oob, &s), Err(CrashCause::IndexOob));
        let undef_cell = Expr::Lval(Lval::Elem("a".into(), Index::Lit(2)));
        assert_eq!(ev(&undef_cell, &s), Err(CrashCause::UndefinedRead));
    }

    #[test]
    fn comparisons_logic_and_labels() {
        let s = store(&[("c", Value::Label("o2".into())), ("x", Value::Long(-7))]);
        assert_eq!(ev(&Expr::EnumEq("c".into(), "o2".into()), &s).unwrap().value, Value::Long(1));
        assert_eq!(ev(&Expr::EnumEq("c".into(), "o1".into()), &s).unwrap().value, Value::Long(0));
        let e = Expr::bin(BinOp::And, Expr::var("x"), Expr::Unary(UnOp::Not, Box::new(Expr::Int(0))));
        assert_eq!(ev(&e, &s).unwrap().value, Value::Long(1));
        let e = Expr::bin(BinOp::Rem, Expr::var("x"), Expr::Int(3));
        assert_eq!(ev(&e, &s).unwrap().value, Value::Long(-1));
        let e = Expr::Lval(Lval::Elem("a".into(), Index::Lit(1)));
        assert_eq!(ev(&e, &s).unwrap().value, Value::Long(10));
    }
}
