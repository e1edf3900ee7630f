//! Canonical source rendering. `parse_contract(print_contract(c)) == c`.

use alloc::string::String;
use core::fmt::Write;

use num_traits::Signed;

use super::ast::*;
use crate::bval::BVal;
use crate::wallet::TokenId;

pub fn print_contract(c: &Contract) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "contract {} {{", c.name);
    for m in &c.maps {
        let _ = writeln!(s, "    map {}(arity={});", m.name, m.arity);
    }
    for v in &c.vars {
        match &v.init {
            Some(init) => {
                let _ = writeln!(s, "    var {} = {};", v.name, literal(init));
            }
            None => {
                let _ = writeln!(s, "    var {};", v.name);
            }
        }
    }
    for r in &c.rules {
        s.push('\n');
        print_rule(&mut s, r);
    }
    s.push_str("}\n");
    s
}

fn print_rule(s: &mut String, r: &Rule) {
    let _ = writeln!(s, "    {}({}) {{", r.name, r.params.join(", "));
    for rc in &r.receives {
        let _ = writeln!(s, "        receive({}:{});", print_expr(&rc.amount), token(rc.token));
    }
    if let Some(e) = &r.require {
        let _ = writeln!(s, "        require({});", print_expr(e));
    }
    if !r.effects.is_empty() {
        s.push_str("        ");
        for (i, st) in r.effects.iter().enumerate() {
            if i > 0 {
                s.push_str(" | ");
            }
            print_stmt(s, st);
        }
        s.push_str(";\n");
    }
    s.push_str("    }\n");
}

fn print_stmt(s: &mut String, st: &Stmt) {
    match st {
        Stmt::Assign { var, value } => {
            let _ = write!(s, "{var} = {}", print_expr(value));
        }
        Stmt::MapAssign { map, index, value } => {
            let _ = write!(s, "{map}[{}] = {}", list(index), print_expr(value));
        }
        Stmt::Send { to, amount, token: t } => {
            let mut target = String::new();
            expr_prec(&mut target, to, UNARY);
            let _ = write!(s, "{target}.send({}:{})", print_expr(amount), token(*t));
        }
    }
}

fn token(t: TokenId) -> String {
    let mut s = String::new();
    let _ = write!(s, "T{}", t.0);
    s
}

fn literal(v: &BVal) -> String {
    let mut s = String::new();
    match v {
        BVal::Bool(b) => {
            let _ = write!(s, "{b}");
        }
        BVal::Int(n) => {
            let _ = write!(s, "{n}");
        }
        BVal::Str(x) => {
            s.push('"');
            for c in x.chars() {
                match c {
                    '"' => s.push_str("\\\""),
                    '\\' => s.push_str("\\\\"),
                    '\n' => s.push_str("\\n"),
                    '\t' => s.push_str("\\t"),
                    c => s.push(c),
                }
            }
            s.push('"');
        }
    }
    s
}

fn list(es: &[Expr]) -> String {
    let mut s = String::new();
    for (i, e) in es.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        expr_prec(&mut s, e, 0);
    }
    s
}

pub fn print_expr(e: &Expr) -> String {
    let mut s = String::new();
    expr_prec(&mut s, e, 0);
    s
}

const UNARY: u8 = 6;

/// Writes `e` so that it parses back as an operand of binding strength `ctx`.
fn expr_prec(s: &mut String, e: &Expr, ctx: u8) {
    match e {
        Expr::Const(v @ BVal::Int(n)) if n.is_negative() && ctx >= UNARY => {
            let _ = write!(s, "({})", literal(v));
        }
        Expr::Const(v) => s.push_str(&literal(v)),
        Expr::Name(n) => s.push_str(n),
        Expr::Index { map, args } => {
            let _ = write!(s, "{map}[{}]", list(args));
        }
        Expr::Unary(op, inner) => {
            let wrap = ctx > UNARY;
            if wrap {
                s.push('(');
            }
            match op {
                UnOp::Not => s.push_str("not "),
                UnOp::Neg => s.push('-'),
            }
            if *op == UnOp::Neg && matches!(**inner, Expr::Const(BVal::Int(_))) {
                let _ = write!(s, "({})", print_expr(inner));
            } else {
                expr_prec(s, inner, UNARY);
            }
            if wrap {
                s.push(')');
            }
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            let wrap = ctx > p;
            if wrap {
                s.push('(');
            }
            expr_prec(s, l, p);
            let _ = write!(s, " {} ", op.symbol());
            expr_prec(s, r, p + 1);
            if wrap {
                s.push(')');
            }
        }
        Expr::If(c, a, b) => {
            let wrap = ctx > 0;
            if wrap {
                s.push('(');
            }
            let _ = write!(
                s,
                "if {} then {} else {}",
                print_expr(c),
                print_expr(a),
                print_expr(b)
            );
            if wrap {
                s.push(')');
            }
        }
        Expr::Hash(args) => {
            let _ = write!(s, "hash({})", list(args));
        }
        Expr::ToStr(args) => {
            let _ = write!(s, "toStr({})", list(args));
        }
        Expr::Len(a) => {
            let _ = write!(s, "len({})", print_expr(a));
        }
        Expr::SignedBy(a) => {
            let _ = write!(s, "signedBy({})", print_expr(a));
        }
        Expr::Substr(a, b, c) => {
            let _ = write!(
                s,
                "substr({}, {}, {})",
                print_expr(a),
                print_expr(b),
                print_expr(c)
            );
        }
        Expr::ValidFrom => s.push_str("validFrom"),
        Expr::ValidTo => s.push_str("validTo"),
    }
}
