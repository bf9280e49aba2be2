//! Recursive-descent parser. Identifiers that name a declared prompt or enum
//! label become [`Expr::Label`]; `id == label` becomes [`Expr::EnumEq`].

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;
use std::collections::BTreeSet;

pub const RESERVED: &[&str] = &["id_I", "id_IO"];

pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, labels: BTreeSet::new(), declared: BTreeSet::new(), loops: 0 };
    p.program()
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    labels: BTreeSet<String>,
    declared: BTreeSet<String>,
    loops: u32,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let t = &self.tokens[self.pos];
        Err(ParseError::Syntax { line: t.line, col: t.col, message: message.into() })
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Kw(k) => format!("keyword `{k}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<(), ParseError> {
        if *self.peek() == Tok::Sym(sym) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{sym}`, found {}", Self::describe(self.peek())))
        }
    }

    fn eat_sym(&mut self, sym: &'static str) -> bool {
        if *self.peek() == Tok::Sym(sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if RESERVED.contains(&s.as_str()) => {
                self.error(format!("`{s}` is reserved"))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {}", Self::describe(&other))),
        }
    }

    fn declare(&mut self, name: &str) -> Result<(), ParseError> {
        if !self.declared.insert(name.to_string()) {
            return Err(ParseError::DuplicateIdentifier { name: name.to_string() });
        }
        Ok(())
    }

    fn int_literal(&mut self) -> Result<i64, ParseError> {
        let negative = self.eat_sym("-");
        match *self.peek() {
            Tok::Num(n) => {
                let v = if negative { -(n as i128) } else { n as i128 };
                match i64::try_from(v) {
                    Ok(v) => {
                        self.bump();
                        Ok(v)
                    }
                    Err(_) => self.error(format!("integer literal {v} does not fit in 64 bits")),
                }
            }
            ref other => self.error(format!("expected integer, found {}", Self::describe(other))),
        }
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        let mut prompt = None;
        if *self.peek() == Tok::Kw("prompt") {
            self.bump();
            self.expect_sym("{")?;
            let mut entries = Vec::new();
            loop {
                let label = self.ident()?;
                self.declare(&label)?;
                self.expect_sym(":")?;
                let value = self.int_literal()?;
                self.labels.insert(label.clone());
                entries.push(PromptEntry { label, value });
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("}")?;
            self.eat_sym(";");
            prompt = Some(entries);
        }
        let mut enums = Vec::new();
        while *self.peek() == Tok::Kw("enum") && *self.peek_at(2) == Tok::Sym("{") {
            self.bump();
            let name = self.ident()?;
            self.declare(&name)?;
            self.expect_sym("{")?;
            let mut labels = Vec::new();
            loop {
                let label = self.ident()?;
                self.declare(&label)?;
                self.labels.insert(label.clone());
                labels.push(label);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("}")?;
            self.eat_sym(";");
            enums.push(EnumDecl { name, labels });
        }
        let mut vars = Vec::new();
        while let Some(base) = self.type_start()? {
            let name = self.ident()?;
            self.declare(&name)?;
            let ty = if self.eat_sym("[") {
                let n = self.int_literal()?;
                self.expect_sym("]")?;
                let n = u32::try_from(n).map_err(|_| ParseError::Syntax {
                    line: self.tokens[self.pos].line,
                    col: self.tokens[self.pos].col,
                    message: format!("array size {n} is not a valid size"),
                })?;
                VarType::Array(base, n)
            } else {
                VarType::Scalar(base)
            };
            self.expect_sym(";")?;
            vars.push(VarDecl { name, ty });
        }
        let entry = self.stmts_until_eof()?;
        Ok(Program { prompt, enums, vars, entry })
    }

    fn type_start(&mut self) -> Result<Option<BaseType>, ParseError> {
        let base = match self.peek() {
            Tok::Kw("int") => BaseType::Int,
            Tok::Kw("long") => BaseType::Long,
            Tok::Kw("pmpt") => BaseType::Pmpt,
            Tok::Kw("enum") => {
                self.bump();
                let name = self.ident()?;
                return Ok(Some(BaseType::Enum(name)));
            }
            _ => return Ok(None),
        };
        self.bump();
        Ok(Some(base))
    }

    fn stmts_until_eof(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut out = Vec::new();
        while *self.peek() != Tok::Eof {
            out.push(self.stmt()?);
        }
        if out.is_empty() {
            return self.error("a program needs at least one statement");
        }
        Ok(out)
    }

    fn block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while *self.peek() != Tok::Sym("}") {
            if *self.peek() == Tok::Eof {
                return self.error("unterminated block");
            }
            out.push(self.stmt()?);
        }
        self.bump();
        if out.is_empty() {
            return self.error("a block needs at least one statement");
        }
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        match self.peek().clone() {
            Tok::Kw("skip") => {
                self.bump();
                self.expect_sym(";")?;
                Ok(Stmt::Skip)
            }
            Tok::Kw("input") => {
                self.bump();
                let x = self.ident()?;
                self.expect_sym(";")?;
                Ok(Stmt::Input(x))
            }
            Tok::Kw("output") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(";")?;
                Ok(Stmt::Output(e))
            }
            Tok::Kw("if") => {
                self.bump();
                self.expect_sym("(")?;
                let cond = self.expr()?;
                self.expect_sym(")")?;
                let then_branch = self.block()?;
                let else_branch = if *self.peek() == Tok::Kw("else") {
                    self.bump();
                    self.block()?
                } else {
                    vec![Stmt::Skip]
                };
                Ok(Stmt::If(cond, then_branch, else_branch))
            }
            Tok::Kw("while") => {
                self.bump();
                let label = LoopLabel(self.loops);
                self.loops += 1;
                self.expect_sym("(")?;
                let cond = self.expr()?;
                self.expect_sym(")")?;
                let body = self.block()?;
                Ok(Stmt::While(label, cond, body))
            }
            Tok::Ident(_) => {
                let lval = self.lval()?;
                self.expect_sym(":=")?;
                let e = self.expr()?;
                self.expect_sym(";")?;
                Ok(Stmt::Assign(lval, e))
            }
            other => self.error(format!("expected a statement, found {}", Self::describe(&other))),
        }
    }

    fn lval(&mut self) -> Result<Lval, ParseError> {
        let name = self.ident()?;
        if self.eat_sym("[") {
            let idx = match self.peek() {
                Tok::Ident(_) => Index::Var(self.ident()?),
                _ => Index::Lit(self.int_literal()?),
            };
            self.expect_sym("]")?;
            Ok(Lval::Elem(name, idx))
        } else {
            Ok(Lval::Var(name))
        }
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Sym("+") => BinOp::Add,
            Tok::Sym("-") => BinOp::Sub,
            Tok::Sym("*") => BinOp::Mul,
            Tok::Sym("/") => BinOp::Div,
            Tok::Sym("%") => BinOp::Rem,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Sym("&&") => BinOp::And,
            Tok::Sym("||") => BinOp::Or,
            _ => return None,
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.expr_prec(1)
    }

    // Precedence climbing; all binary operators are left-associative.
    fn expr_prec(&mut self, min: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.precedence() < min {
                break;
            }
            self.bump();
            let rhs = self.expr_prec(op.precedence() + 1)?;
            lhs = make_binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Sym("-") => {
                if let Tok::Num(_) = self.peek_at(1) {
                    return Ok(Expr::Int(self.int_literal()?));
                }
                self.bump();
                Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)))
            }
            Tok::Sym("!") => {
                self.bump();
                Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(_) => Ok(Expr::Int(self.int_literal()?)),
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) if self.labels.contains(&name) => {
                self.bump();
                Ok(Expr::Label(name))
            }
            Tok::Ident(_) => Ok(Expr::Lval(self.lval()?)),
            other => self.error(format!("expected an expression, found {}", Self::describe(&other))),
        }
    }
}

fn make_binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    if op == BinOp::Eq {
        match (&lhs, &rhs) {
            (Expr::Lval(Lval::Var(id)), Expr::Label(l)) | (Expr::Label(l), Expr::Lval(Lval::Var(id))) => {
                return Expr::EnumEq(id.clone(), l.clone());
            }
            _ => {}
        }
    }
    Expr::bin(op, lhs, rhs)
}
