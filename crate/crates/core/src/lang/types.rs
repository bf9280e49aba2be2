//! Static typing. `int` is the 32-bit range and subsumes into `long`.

use super::ast::*;
use super::TypeError;
use serde::Serialize;
use std::collections::BTreeMap;

/// What a declared label denotes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum LabelInfo {
    /// Label of enumeration `enum_name`, 1-based position `index`.
    Enum { enum_name: String, index: i64 },
    Prompt { value: i64 },
}

/// Type of an expression, after subsumption is taken into account only where asked.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ExprType {
    Int,
    Long,
    Pmpt,
    Enum(String),
}

impl ExprType {
    pub fn is_numeric(&self) -> bool {
        matches!(self, ExprType::Int | ExprType::Long)
    }

    /// `self` may be used where `target` is expected.
    pub fn fits(&self, target: &BaseType) -> bool {
        match (self, target) {
            (ExprType::Int, BaseType::Int | BaseType::Long) => true,
            (ExprType::Long, BaseType::Long) => true,
            (ExprType::Pmpt, BaseType::Pmpt) => true,
            (ExprType::Enum(a), BaseType::Enum(b)) => a == b,
            _ => false,
        }
    }
}

impl From<&BaseType> for ExprType {
    fn from(b: &BaseType) -> Self {
        match b {
            BaseType::Int => ExprType::Int,
            BaseType::Long => ExprType::Long,
            BaseType::Pmpt => ExprType::Pmpt,
            BaseType::Enum(n) => ExprType::Enum(n.clone()),
        }
    }
}

pub fn fits_int(v: i64) -> bool {
    i32::try_from(v).is_ok()
}

/// The typing environment Γ of a well-typed program.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TypeEnv {
    pub vars: BTreeMap<String, VarType>,
    pub enums: BTreeMap<String, Vec<String>>,
    pub labels: BTreeMap<String, LabelInfo>,
    pub prompt: BTreeMap<String, i64>,
}

fn rule(rule: &'static str, message: impl Into<String>) -> TypeError {
    TypeError::Rule { rule, message: message.into() }
}

impl TypeEnv {
    pub fn from_decls(p: &Program) -> Result<TypeEnv, TypeError> {
        let mut env = TypeEnv::default();
        for entry in p.prompt.iter().flatten() {
            env.prompt.insert(entry.label.clone(), entry.value);
            env.labels.insert(entry.label.clone(), LabelInfo::Prompt { value: entry.value });
        }
        for e in &p.enums {
            env.enums.insert(e.name.clone(), e.labels.clone());
            for (i, l) in e.labels.iter().enumerate() {
                env.labels.insert(
                    l.clone(),
                    LabelInfo::Enum { enum_name: e.name.clone(), index: i as i64 + 1 },
                );
            }
        }
        for v in &p.vars {
            if let BaseType::Enum(n) = v.ty.base() {
                if !env.enums.contains_key(n) {
                    return Err(TypeError::UnknownEnum { name: n.clone() });
                }
            }
            if let VarType::Array(_, 0) = v.ty {
                return Err(rule("Tvar2", format!("array `{}` must have positive size", v.name)));
            }
            env.vars.insert(v.name.clone(), v.ty.clone());
        }
        Ok(env)
    }

    pub fn var_type(&self, name: &str) -> Result<&VarType, TypeError> {
        self.vars.get(name).ok_or_else(|| TypeError::UndeclaredVariable { name: name.to_string() })
    }

    pub fn scalar_type(&self, name: &str) -> Result<&BaseType, TypeError> {
        match self.var_type(name)? {
            VarType::Scalar(b) => Ok(b),
            VarType::Array(..) => Err(rule("Topnd", format!("array `{name}` used without an index"))),
        }
    }

    pub fn lval_type(&self, l: &Lval) -> Result<BaseType, TypeError> {
        match l {
            Lval::Var(x) => self.scalar_type(x).cloned(),
            Lval::Elem(a, idx) => {
                let (elem, size) = match self.var_type(a)? {
                    VarType::Array(b, n) => (b.clone(), *n),
                    VarType::Scalar(_) => {
                        return Err(rule("Tarray1", format!("`{a}` is not an array")));
                    }
                };
                match idx {
                    Index::Lit(k) => {
                        if *k < 1 || *k > size as i64 {
                            return Err(rule(
                                "Tarray2",
                                format!("index {k} outside 1..{size} for `{a}`"),
                            ));
                        }
                    }
                    Index::Var(i) => {
                        let t = ExprType::from(self.scalar_type(i)?);
                        if !t.is_numeric() {
                            return Err(rule("Tarray1", format!("index `{i}` of `{a}` is not numeric")));
                        }
                    }
                }
                Ok(elem)
            }
        }
    }

    /// Minimal type of `e`, or the rule it violates.
    pub fn expr_type(&self, e: &Expr) -> Result<ExprType, TypeError> {
        match e {
            Expr::Int(n) => Ok(if fits_int(*n) { ExprType::Int } else { ExprType::Long }),
            Expr::Label(l) => match self.labels.get(l) {
                Some(LabelInfo::Enum { enum_name, .. }) => Ok(ExprType::Enum(enum_name.clone())),
                Some(LabelInfo::Prompt { .. }) => Ok(ExprType::Pmpt),
                None => Err(rule("Tlabels", format!("unknown label `{l}`"))),
            },
            Expr::Lval(l) => Ok(ExprType::from(&self.lval_type(l)?)),
            Expr::EnumEq(id, l) => {
                let t = self.scalar_type(id)?;
                let ok = match (t, self.labels.get(l)) {
                    (BaseType::Enum(n), Some(LabelInfo::Enum { enum_name, .. })) => n == enum_name,
                    (BaseType::Pmpt, Some(LabelInfo::Prompt { .. })) => true,
                    _ => false,
                };
                if ok {
                    Ok(ExprType::Long)
                } else {
                    Err(rule("Tequiv", format!("`{id}` cannot be compared with label `{l}`")))
                }
            }
            Expr::Unary(op, inner) => {
                let t = self.expr_type(inner)?;
                if !t.is_numeric() {
                    return Err(rule("Topnd", "unary operator applied to a non-numeric operand"));
                }
                Ok(if *op == UnOp::Neg { t } else { ExprType::Int })
            }
            Expr::Binary(op, l, r) => {
                let (tl, tr) = (self.expr_type(l)?, self.expr_type(r)?);
                if matches!(op, BinOp::Eq | BinOp::Ne) && !tl.is_numeric() && tl == tr {
                    return Ok(ExprType::Int);
                }
                if !tl.is_numeric() || !tr.is_numeric() {
                    return Err(rule(
                        "Topnd",
                        format!("operator `{}` applied to a non-numeric operand", op.symbol()),
                    ));
                }
                if op.is_arithmetic() {
                    Ok(if tl == ExprType::Int && tr == ExprType::Int { ExprType::Int } else { ExprType::Long })
                } else {
                    Ok(ExprType::Int)
                }
            }
        }
    }

    fn check_cond(&self, e: &Expr, which: &'static str) -> Result<(), TypeError> {
        if self.expr_type(e)?.is_numeric() {
            Ok(())
        } else {
            Err(rule(which, "condition must be numeric"))
        }
    }

    pub fn check_stmt(&self, s: &Stmt) -> Result<(), TypeError> {
        match s {
            Stmt::Skip => Ok(()),
            Stmt::Assign(l, e) => {
                let target = self.lval_type(l)?;
                let t = self.expr_type(e)?;
                if t.fits(&target) {
                    Ok(())
                } else {
                    Err(rule(
                        "Tassign",
                        format!("cannot assign {t:?} to `{}` of type {target}", l.base()),
                    ))
                }
            }
            Stmt::Input(x) => match self.scalar_type(x)? {
                BaseType::Pmpt => Err(TypeError::InputOfPromptType { name: x.clone() }),
                _ => Ok(()),
            },
            Stmt::Output(e) => self.expr_type(e).map(|_| ()),
            Stmt::If(e, t, f) => {
                self.check_cond(e, "Tif")?;
                self.check_seq(t)?;
                self.check_seq(f)
            }
            Stmt::While(_, e, b) => {
                self.check_cond(e, "Twhile")?;
                self.check_seq(b)
            }
        }
    }

    pub fn check_seq(&self, seq: &[Stmt]) -> Result<(), TypeError> {
        seq.iter().try_for_each(|s| self.check_stmt(s))
    }

    /// Γ ⊢ lval : int and the minimal type of `e` is long; the assignment may crash.
    pub fn possible_value_mismatch(&self, l: &Lval, e: &Expr) -> bool {
        matches!(self.lval_type(l), Ok(BaseType::Int)) && matches!(self.expr_type(e), Ok(ExprType::Long))
    }
}

pub fn typecheck(p: &Program) -> Result<TypeEnv, TypeError> {
    let env = TypeEnv::from_decls(p)?;
    env.check_seq(&p.entry)?;
    Ok(env)
}
