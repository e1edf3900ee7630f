//! Recursive-descent parser for `.hurf` sources.
//!
//! ```text
//! contract Name {
//!     map m(arity=1);
//!     var x = 3;
//!     rule(p1, p2) {
//!         receive(p1:T1);
//!         require(p1 > 0);
//!         m[p2] = m[p2] + p1 | x = 0;
//!     }
//! }
//! ```

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::bval::BVal;
use crate::wallet::TokenId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub fn new(line: u32, col: u32, message: &str) -> Self {
        ParseError {
            line,
            col,
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl core::error::Error for ParseError {}

pub fn parse_contract(src: &str) -> Result<Contract, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let c = p.contract()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(c)
}

/// Parses a single expression, for tools and tests.
pub fn parse_expr(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    p.expect(&Tok::Eof, "end of input")?;
    Ok(e)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: &str) -> Result<T, ParseError> {
        let t = &self.toks[self.pos];
        Err(ParseError::new(t.line, t.col, msg))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(t) {
            Ok(())
        } else {
            self.error(&format!("expected {what}"))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_keyword(kw) {
            self.next();
            Ok(())
        } else {
            self.error(&format!("expected `{kw}`"))
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.next();
                Ok(s)
            }
            Tok::Ident(s) => self.error(&format!("`{s}` is reserved")),
            _ => self.error("expected a name"),
        }
    }

    fn contract(&mut self) -> Result<Contract, ParseError> {
        self.keyword("contract")?;
        let name = self.name()?;
        self.expect(&Tok::LBrace, "`{`")?;
        let mut c = Contract {
            name,
            vars: Vec::new(),
            maps: Vec::new(),
            rules: Vec::new(),
        };
        let mut state_names = BTreeSet::new();
        let mut rule_names = BTreeSet::new();
        loop {
            if self.eat(&Tok::RBrace) {
                break;
            }
            if self.is_keyword("map") {
                self.next();
                let at = self.pos;
                let name = self.name()?;
                self.expect(&Tok::LParen, "`(`")?;
                self.keyword("arity")?;
                self.expect(&Tok::Assign, "`=`")?;
                let arity = match self.next() {
                    Tok::Int(n) => usize::try_from(n)
                        .ok()
                        .filter(|a| *a >= 1)
                        .ok_or_else(|| self.err_at(at, "map arity must be at least 1"))?,
                    _ => return self.error("expected the map arity"),
                };
                self.expect(&Tok::RParen, "`)`")?;
                self.expect(&Tok::Semi, "`;`")?;
                if !state_names.insert(name.clone()) {
                    return Err(self.err_at(at, &format!("duplicate declaration of `{name}`")));
                }
                c.maps.push(MapDecl { name, arity });
            } else if self.is_keyword("var") {
                self.next();
                let at = self.pos;
                let name = self.name()?;
                let init = if self.eat(&Tok::Assign) {
                    Some(self.literal()?)
                } else {
                    None
                };
                self.expect(&Tok::Semi, "`;`")?;
                if !state_names.insert(name.clone()) {
                    return Err(self.err_at(at, &format!("duplicate declaration of `{name}`")));
                }
                c.vars.push(VarDecl { name, init });
            } else {
                let at = self.pos;
                let r = self.rule()?;
                if !rule_names.insert(r.name.clone()) {
                    return Err(self.err_at(at, &format!("duplicate rule `{}`", r.name)));
                }
                c.rules.push(r);
            }
        }
        Ok(c)
    }

    fn err_at(&self, pos: usize, msg: &str) -> ParseError {
        let t = &self.toks[pos];
        ParseError::new(t.line, t.col, msg)
    }

    fn literal(&mut self) -> Result<BVal, ParseError> {
        let neg = self.eat(&Tok::Minus);
        match self.next() {
            Tok::Int(n) => Ok(BVal::Int(if neg { -n } else { n })),
            Tok::Str(s) if !neg => Ok(BVal::Str(s)),
            Tok::Ident(s) if !neg && s == "true" => Ok(BVal::Bool(true)),
            Tok::Ident(s) if !neg && s == "false" => Ok(BVal::Bool(false)),
            _ => {
                self.pos -= 1;
                self.error("expected a literal")
            }
        }
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let name = self.name()?;
        self.expect(&Tok::LParen, "`(`")?;
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                params.push(self.name()?);
                if self.eat(&Tok::RParen) {
                    break;
                }
                self.expect(&Tok::Comma, "`,` or `)`")?;
            }
        }
        self.expect(&Tok::LBrace, "`{`")?;
        let mut rule = Rule {
            name,
            params,
            receives: Vec::new(),
            require: None,
            effects: Vec::new(),
        };
        loop {
            if self.is_keyword("receive") && self.peek_at(1) == &Tok::LParen {
                self.next();
                self.next();
                let amount = self.expr()?;
                self.expect(&Tok::Colon, "`:`")?;
                let token = self.token_id()?;
                self.expect(&Tok::RParen, "`)`")?;
                self.expect(&Tok::Semi, "`;`")?;
                rule.receives.push(Receive { amount, token });
            } else if self.is_keyword("require") && self.peek_at(1) == &Tok::LParen {
                if rule.require.is_some() {
                    return self.error("a rule has at most one `require`");
                }
                self.next();
                self.next();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                self.expect(&Tok::Semi, "`;`")?;
                rule.require = Some(e);
            } else {
                break;
            }
        }
        if self.eat(&Tok::RBrace) {
            return Ok(rule);
        }
        loop {
            rule.effects.push(self.stmt()?);
            if !self.eat(&Tok::Bar) {
                break;
            }
        }
        self.eat(&Tok::Semi);
        self.expect(&Tok::RBrace, "`|`, `;` or `}`")?;
        Ok(rule)
    }

    fn token_id(&mut self) -> Result<TokenId, ParseError> {
        if let Tok::Ident(s) = self.peek().clone() {
            if let Some(rest) = s.strip_prefix('T') {
                if rest.is_empty() {
                    self.next();
                    return Ok(TokenId(1));
                }
                if rest.bytes().all(|b| b.is_ascii_digit()) {
                    if let Ok(n) = rest.parse::<u32>() {
                        self.next();
                        return Ok(TokenId(n));
                    }
                }
            }
        }
        self.error("expected a token such as `T`, `T0`, `T1`")
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let start = self.pos;
        if let Tok::Ident(_) = self.peek() {
            if self.peek_at(1) == &Tok::Assign {
                let var = self.name()?;
                self.next();
                let value = self.expr()?;
                return Ok(Stmt::Assign { var, value });
            }
            if self.peek_at(1) == &Tok::LBracket {
                let map = self.name()?;
                self.next();
                let index = self.args(&Tok::RBracket)?;
                if self.eat(&Tok::Assign) {
                    let value = self.expr()?;
                    return Ok(Stmt::MapAssign { map, index, value });
                }
                self.pos = start;
            }
        }
        let to = self.unary()?;
        self.expect(&Tok::Dot, "an assignment or `.send(...)`")?;
        self.keyword("send")?;
        self.expect(&Tok::LParen, "`(`")?;
        let amount = self.expr()?;
        self.expect(&Tok::Colon, "`:`")?;
        let token = self.token_id()?;
        self.expect(&Tok::RParen, "`)`")?;
        Ok(Stmt::Send { to, amount, token })
    }

    /// Comma-separated expressions up to and including `close`.
    fn args(&mut self, close: &Tok) -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(&Tok::Comma, "`,`")?;
        }
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        if self.is_keyword("if") {
            return self.if_expr();
        }
        self.binary(1)
    }

    fn if_expr(&mut self) -> Result<Expr, ParseError> {
        self.keyword("if")?;
        let c = self.expr()?;
        self.keyword("then")?;
        let a = self.expr()?;
        self.keyword("else")?;
        let b = self.expr()?;
        Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)))
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::OrOr => BinOp::Or,
            Tok::AndAnd => BinOp::And,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::At => BinOp::Concat,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Mod,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut left = self.unary()?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.next();
            let right = self.binary(prec + 1)?;
            left = Expr::bin(op, left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_keyword("not") || self.peek() == &Tok::Bang {
            self.next();
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        if self.eat(&Tok::Minus) {
            if let Tok::Int(n) = self.peek().clone() {
                self.next();
                return Ok(Expr::Const(BVal::Int(-n)));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        if self.is_keyword("if") {
            return self.if_expr();
        }
        self.primary()
    }

    fn call1(&mut self) -> Result<Box<Expr>, ParseError> {
        self.expect(&Tok::LParen, "`(`")?;
        let e = self.expr()?;
        self.expect(&Tok::RParen, "`)`")?;
        Ok(Box::new(e))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.next();
                Ok(Expr::Const(BVal::Int(n)))
            }
            Tok::Str(s) => {
                self.next();
                Ok(Expr::Const(BVal::Str(s)))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(s) => match s.as_str() {
                "true" | "false" => {
                    self.next();
                    Ok(Expr::Const(BVal::Bool(s == "true")))
                }
                "validFrom" => {
                    self.next();
                    Ok(Expr::ValidFrom)
                }
                "validTo" => {
                    self.next();
                    Ok(Expr::ValidTo)
                }
                "hash" | "toStr" => {
                    self.next();
                    self.expect(&Tok::LParen, "`(`")?;
                    let args = self.args(&Tok::RParen)?;
                    if args.is_empty() {
                        return self.error("expected at least one argument");
                    }
                    Ok(if s == "hash" {
                        Expr::Hash(args)
                    } else {
                        Expr::ToStr(args)
                    })
                }
                "len" => {
                    self.next();
                    Ok(Expr::Len(self.call1()?))
                }
                "signedBy" => {
                    self.next();
                    Ok(Expr::SignedBy(self.call1()?))
                }
                "substr" => {
                    self.next();
                    self.expect(&Tok::LParen, "`(`")?;
                    let a = self.expr()?;
                    self.expect(&Tok::Comma, "`,`")?;
                    let b = self.expr()?;
                    self.expect(&Tok::Comma, "`,`")?;
                    let c = self.expr()?;
                    self.expect(&Tok::RParen, "`)`")?;
                    Ok(Expr::Substr(Box::new(a), Box::new(b), Box::new(c)))
                }
                _ => {
                    let name = self.name()?;
                    if self.eat(&Tok::LBracket) {
                        let args = self.args(&Tok::RBracket)?;
                        if args.is_empty() {
                            return self.error("expected a map index");
                        }
                        Ok(Expr::Index { map: name, args })
                    } else {
                        Ok(Expr::Name(name))
                    }
                }
            },
            _ => self.error("expected an expression"),
        }
    }
}
