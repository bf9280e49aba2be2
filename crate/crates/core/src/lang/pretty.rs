//! Canonical concrete syntax. Output re-parses to the same AST.

use super::ast::*;
use std::fmt::Write;

pub fn pretty_program(p: &Program) -> String {
    let mut out = String::new();
    if let Some(entries) = &p.prompt {
        let body: Vec<String> = entries.iter().map(|e| format!("{}: {}", e.label, e.value)).collect();
        let _ = writeln!(out, "prompt {{{}}}", body.join(", "));
    }
    for e in &p.enums {
        let _ = writeln!(out, "enum {} {{{}}};", e.name, e.labels.join(", "));
    }
    for v in &p.vars {
        let _ = match &v.ty {
            VarType::Scalar(b) => writeln!(out, "{b} {};", v.name),
            VarType::Array(b, n) => writeln!(out, "{b} {}[{n}];", v.name),
        };
    }
    write_seq(&mut out, &p.entry, 0);
    out
}

pub fn pretty_stmts(seq: &[Stmt]) -> String {
    let mut out = String::new();
    write_seq(&mut out, seq, 0);
    out
}

/// Single-line rendering, used in derivations and diagnostics.
pub fn inline_stmts(seq: &[Stmt]) -> String {
    seq.iter().map(inline_stmt).collect::<Vec<_>>().join(" ")
}

pub fn inline_stmt(s: &Stmt) -> String {
    match s {
        Stmt::If(e, t, f) => format!(
            "if ({}) {{ {} }} else {{ {} }}",
            pretty_expr(e),
            inline_stmts(t),
            inline_stmts(f)
        ),
        Stmt::While(_, e, b) => format!("while ({}) {{ {} }}", pretty_expr(e), inline_stmts(b)),
        simple => simple_stmt(simple),
    }
}

fn simple_stmt(s: &Stmt) -> String {
    match s {
        Stmt::Assign(l, e) => format!("{} := {};", pretty_lval(l), pretty_expr(e)),
        Stmt::Input(x) => format!("input {x};"),
        Stmt::Output(e) => format!("output {};", pretty_expr(e)),
        Stmt::Skip => "skip;".to_string(),
        _ => unreachable!("compound statement"),
    }
}

fn write_seq(out: &mut String, seq: &[Stmt], depth: usize) {
    for s in seq {
        write_stmt(out, s, depth);
    }
}

fn write_stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = "    ".repeat(depth);
    match s {
        Stmt::If(e, t, f) => {
            let _ = writeln!(out, "{pad}if ({}) {{", pretty_expr(e));
            write_seq(out, t, depth + 1);
            let _ = writeln!(out, "{pad}}} else {{");
            write_seq(out, f, depth + 1);
            let _ = writeln!(out, "{pad}}}");
        }
        Stmt::While(_, e, b) => {
            let _ = writeln!(out, "{pad}while ({}) {{", pretty_expr(e));
            write_seq(out, b, depth + 1);
            let _ = writeln!(out, "{pad}}}");
        }
        simple => {
            let _ = writeln!(out, "{pad}{}", simple_stmt(simple));
        }
    }
}

pub fn pretty_lval(l: &Lval) -> String {
    match l {
        Lval::Var(x) => x.clone(),
        Lval::Elem(a, Index::Lit(n)) => format!("{a}[{n}]"),
        Lval::Elem(a, Index::Var(i)) => format!("{a}[{i}]"),
    }
}

pub fn pretty_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

// `ctx` is the minimum precedence the surrounding context accepts without parentheses.
fn write_expr(out: &mut String, e: &Expr, ctx: u8) {
    match e {
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Label(l) => out.push_str(l),
        Expr::Lval(l) => out.push_str(&pretty_lval(l)),
        Expr::EnumEq(id, l) => {
            let prec = BinOp::Eq.precedence();
            if prec < ctx {
                let _ = write!(out, "({id} == {l})");
            } else {
                let _ = write!(out, "{id} == {l}");
            }
        }
        Expr::Unary(op, inner) => {
            out.push(if *op == UnOp::Neg { '-' } else { '!' });
            // `-5` would re-parse as a literal, and `--x` is fine but `- -5` is not.
            let needs_parens = matches!(**inner, Expr::Int(_) | Expr::Binary(..) | Expr::EnumEq(..));
            if needs_parens {
                out.push('(');
                write_expr(out, inner, 0);
                out.push(')');
            } else {
                write_expr(out, inner, 7);
            }
        }
        Expr::Binary(op, l, r) => {
            let prec = op.precedence();
            let paren = prec < ctx;
            if paren {
                out.push('(');
            }
            write_expr(out, l, prec);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, r, prec + 1);
            if paren {
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_program;
    use super::*;

    #[test]
    fn parenthesizes_only_when_needed() {
        let p = parse_program("x := (1 - 2) - (3 - 4) * 5;").unwrap();
        assert_eq!(pretty_stmts(&p.entry), "x := 1 - 2 - (3 - 4) * 5;\n");
    }

    #[test]
    fn round_trips_program() {
        let src = "prompt {hi: 7}\nenum c {o1, o2};\nenum c a;\nlong b[2];\nwhile (b[1] < 3) {\n    if (a == o1) {\n        output hi;\n    } else {\n        skip;\n    }\n    b[1] := b[1] + -1;\n}\n";
        let p = parse_program(src).unwrap();
        assert_eq!(pretty_program(&p), src);
    }

    #[test]
    fn negated_literal_keeps_its_shape() {
        let e = Expr::Unary(UnOp::Neg, Box::new(Expr::Int(3)));
        let text = format!("x := {};", pretty_expr(&e));
        let p = parse_program(&text).unwrap();
        assert_eq!(p.entry[0], Stmt::Assign(Lval::Var("x".into()), e));
    }
}
