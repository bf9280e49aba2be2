//! Abstract syntax of the typed While language.

use serde::Serialize;
use std::fmt;

/// Loop label assigned to each `while` in source order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LoopLabel(pub u32);

impl fmt::Display for LoopLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum BaseType {
    Int,
    Long,
    Pmpt,
    Enum(String),
}

impl fmt::Display for BaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseType::Int => f.write_str("int"),
            BaseType::Long => f.write_str("long"),
            BaseType::Pmpt => f.write_str("pmpt"),
            BaseType::Enum(name) => write!(f, "enum {name}"),
        }
    }
}

/// Declared type of a variable. Array sizes are always positive after typing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum VarType {
    Scalar(BaseType),
    Array(BaseType, u32),
}

impl VarType {
    pub fn base(&self) -> &BaseType {
        match self {
            VarType::Scalar(b) | VarType::Array(b, _) => b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct VarDecl {
    pub name: String,
    pub ty: VarType,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EnumDecl {
    pub name: String,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PromptEntry {
    pub label: String,
    pub value: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Index {
    Lit(i64),
    Var(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Lval {
    Var(String),
    Elem(String, Index),
}

impl Lval {
    /// The variable or array written through this lvalue.
    pub fn base(&self) -> &str {
        match self {
            Lval::Var(x) | Lval::Elem(x, _) => x,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Eq,
    Ne,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem)
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Eq | BinOp::Ne | BinOp::Gt | BinOp::Ge
        )
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Expr {
    Int(i64),
    /// A prompt label or enumeration label used as a value.
    Label(String),
    Lval(Lval),
    /// `id == label`, the enum membership test.
    EnumEq(String, String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Lval(Lval::Var(name.to_string()))
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Expr::Int(_) | Expr::Label(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Stmt {
    Assign(Lval, Expr),
    Input(String),
    Output(Expr),
    Skip,
    If(Expr, Vec<Stmt>, Vec<Stmt>),
    While(LoopLabel, Expr, Vec<Stmt>),
}

impl Stmt {
    /// Assignment, input, output and skip.
    pub fn is_simple(&self) -> bool {
        !matches!(self, Stmt::If(..) | Stmt::While(..))
    }

    pub fn is_skip(&self) -> bool {
        matches!(self, Stmt::Skip)
    }

    pub fn contains_output(&self) -> bool {
        match self {
            Stmt::Output(_) => true,
            Stmt::If(_, t, f) => seq_contains_output(t) || seq_contains_output(f),
            Stmt::While(_, _, b) => seq_contains_output(b),
            _ => false,
        }
    }

    pub fn contains_while(&self) -> bool {
        match self {
            Stmt::While(..) => true,
            Stmt::If(_, t, f) => t.iter().any(Stmt::contains_while) || f.iter().any(Stmt::contains_while),
            _ => false,
        }
    }
}

pub fn seq_contains_output(seq: &[Stmt]) -> bool {
    seq.iter().any(Stmt::contains_output)
}

/// A whole program: optional prompt table, enumerations, variables and entry.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Program {
    pub prompt: Option<Vec<PromptEntry>>,
    pub enums: Vec<EnumDecl>,
    pub vars: Vec<VarDecl>,
    pub entry: Vec<Stmt>,
}

impl Program {
    pub fn var_decl(&self, name: &str) -> Option<&VarDecl> {
        self.vars.iter().find(|d| d.name == name)
    }

    pub fn with_entry(&self, entry: Vec<Stmt>) -> Program {
        Program { entry, ..self.clone() }
    }
}

/// Renumber every loop label in source order (outer before inner), starting at 0.
pub fn label_loops(program: &Program) -> Program {
    let mut next = 0;
    let mut entry = program.entry.clone();
    relabel_seq(&mut entry, &mut next);
    program.with_entry(entry)
}

pub(crate) fn relabel_seq(seq: &mut [Stmt], next: &mut u32) {
    for s in seq {
        match s {
            Stmt::If(_, t, f) => {
                relabel_seq(t, next);
                relabel_seq(f, next);
            }
            Stmt::While(label, _, body) => {
                *label = LoopLabel(*next);
                *next += 1;
                relabel_seq(body, next);
            }
            _ => {}
        }
    }
}

/// Copy of `seq` with every loop label set to 0, so structural equality ignores labels.
pub fn erase_labels(seq: &[Stmt]) -> Vec<Stmt> {
    seq.iter()
        .map(|s| match s {
            Stmt::If(e, t, f) => Stmt::If(e.clone(), erase_labels(t), erase_labels(f)),
            Stmt::While(_, e, b) => Stmt::While(LoopLabel(0), e.clone(), erase_labels(b)),
            other => other.clone(),
        })
        .collect()
}

pub fn count_loops(seq: &[Stmt]) -> usize {
    seq.iter()
        .map(|s| match s {
            Stmt::If(_, t, f) => count_loops(t) + count_loops(f),
            Stmt::While(_, _, b) => 1 + count_loops(b),
            _ => 0,
        })
        .sum()
}
