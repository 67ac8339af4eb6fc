//! Recursive-descent parser.
//!
//! Declarations are layout-insensitive. A new declaration begins at
//! `type`, `network`, or an identifier followed by `:` or `=`; application
//! arguments stop there.

use std::collections::HashSet;

use thiserror::Error;

use super::lexer::{Spanned, Token};
use super::surface::{BinOp, Loc, SBinder, SExpr, SExprKind, SType, SurfaceDecl};
use crate::diagnostics::Span;
use crate::expr::{CmpOp, Quantifier};
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

struct Parser<'a> {
    tokens: &'a [Spanned],
    pos: usize,
    end: Span,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos).map(|t| &t.token)
    }

    fn peek_at(&self, offset: usize) -> Option<&'a Token> {
        self.tokens.get(self.pos + offset).map(|t| &t.token)
    }

    fn span(&self) -> Span {
        self.tokens.get(self.pos).map(|t| t.span).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<&'a Spanned> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let found = match self.peek() {
            Some(t) => format!("unexpected {t}"),
            None => "unexpected end of input".to_string(),
        };
        ParseError {
            span: self.span(),
            message: found,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, token: &Token, label: &str) -> PResult<Span> {
        let span = self.span();
        if self.eat(token) {
            Ok(span)
        } else {
            Err(self.error(&[label]))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        let span = self.span();
        match self.peek() {
            Some(Token::Ident(name)) => {
                self.pos += 1;
                Ok((name.clone(), span))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn at_decl_boundary(&self) -> bool {
        match self.peek() {
            Some(Token::KwType | Token::KwNetwork) => true,
            Some(Token::Ident(_)) => {
                matches!(self.peek_at(1), Some(Token::Colon | Token::Equals))
            }
            _ => false,
        }
    }

    fn program(&mut self) -> PResult<Vec<SurfaceDecl>> {
        let mut decls = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        while self.peek().is_some() {
            let decl = self.decl()?;
            if !seen.insert(decl.name().to_string()) {
                return Err(ParseError {
                    span: decl.span(),
                    message: format!("duplicate declaration of `{}`", decl.name()),
                    expected: Vec::new(),
                });
            }
            decls.push(decl);
        }
        Ok(decls)
    }

    fn decl(&mut self) -> PResult<SurfaceDecl> {
        let start = self.span();
        match self.peek() {
            Some(Token::KwType) => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(&Token::Equals, "`=`")?;
                let ty = self.ty()?;
                Ok(SurfaceDecl::TypeSynonym { name, ty, loc: Loc(start) })
            }
            Some(Token::KwNetwork) => {
                self.bump();
                let (name, _) = self.ident()?;
                self.expect(&Token::Colon, "`:`")?;
                let ty = self.ty()?;
                Ok(SurfaceDecl::Network { name, ty, loc: Loc(start) })
            }
            Some(Token::Ident(_)) => {
                let (name, _) = self.ident()?;
                if self.peek() != Some(&Token::Colon) {
                    return Err(ParseError {
                        span: start,
                        message: format!("definition of `{name}` has no type signature"),
                        expected: vec!["`:`".into()],
                    });
                }
                self.bump();
                let sig = self.ty()?;
                let def_span = self.span();
                match self.peek() {
                    Some(Token::Ident(n)) if *n == name => {
                        self.bump();
                    }
                    _ => {
                        return Err(ParseError {
                            span: def_span,
                            message: format!("signature for `{name}` has no definition"),
                            expected: vec![format!("`{name}`")],
                        })
                    }
                }
                let mut params = Vec::new();
                while let Some(Token::Ident(p)) = self.peek() {
                    params.push((p.clone(), Loc(self.span())));
                    self.bump();
                }
                self.expect(&Token::Equals, "`=`")?;
                let body = self.expr()?;
                Ok(SurfaceDecl::FunDef { name, sig, params, body, loc: Loc(start) })
            }
            _ => Err(self.error(&["`type`", "`network`", "identifier"])),
        }
    }

    fn ty(&mut self) -> PResult<SType> {
        let dom = self.btype()?;
        if self.eat(&Token::Arrow) {
            let cod = self.ty()?;
            Ok(SType::fun(dom, cod))
        } else {
            Ok(dom)
        }
    }

    fn btype(&mut self) -> PResult<SType> {
        if let Some(Token::Ident(n)) = self.peek() {
            if n == "Tensor" {
                self.bump();
                let elem = self.atype()?;
                self.expect(&Token::LBracket, "`[`")?;
                let mut dims = Vec::new();
                loop {
                    match self.peek() {
                        Some(Token::Nat(d)) => {
                            dims.push(*d);
                            self.bump();
                        }
                        _ => return Err(self.error(&["dimension literal"])),
                    }
                    if !self.eat(&Token::Comma) {
                        break;
                    }
                }
                self.expect(&Token::RBracket, "`]`")?;
                return Ok(SType::Tensor(Box::new(elem), dims));
            }
        }
        self.atype()
    }

    fn atype(&mut self) -> PResult<SType> {
        let span = self.span();
        match self.peek() {
            Some(Token::LParen) => {
                self.bump();
                let t = self.ty()?;
                self.expect(&Token::RParen, "`)`")?;
                Ok(t)
            }
            Some(Token::Ident(n)) => {
                self.bump();
                Ok(match n.as_str() {
                    "Bool" => SType::Bool,
                    "Prop" => SType::Prop,
                    "Nat" => SType::Nat,
                    "Int" => SType::Int,
                    "Rat" => SType::Rat,
                    "Real" => SType::Real,
                    "Tensor" => return Err(self.error(&["`(`"])),
                    other => SType::Named(other.to_string(), Loc(span)),
                })
            }
            _ => Err(self.error(&["type"])),
        }
    }

    fn expr(&mut self) -> PResult<SExpr> {
        match self.peek() {
            Some(Token::KwForall | Token::KwExists | Token::KwIf) => self.prefix_form(),
            Some(Token::KwLet) => Err(ParseError {
                span: self.span(),
                message: "`let` is not available in specifications".into(),
                expected: Vec::new(),
            }),
            _ => self.implies(),
        }
    }

    fn prefix_form(&mut self) -> PResult<SExpr> {
        let start = self.span();
        match self.bump().map(|t| &t.token) {
            Some(Token::KwIf) => {
                let c = self.expr()?;
                self.expect(&Token::KwThen, "`then`")?;
                let t = self.expr()?;
                self.expect(&Token::KwElse, "`else`")?;
                let f = self.expr()?;
                Ok(SExpr::new(SExprKind::If(Box::new(c), Box::new(t), Box::new(f)), start))
            }
            Some(tok @ (Token::KwForall | Token::KwExists)) => {
                let q = if *tok == Token::KwForall { Quantifier::Forall } else { Quantifier::Exists };
                let binders = self.binders()?;
                self.expect(&Token::Dot, "`.`")?;
                let body = self.expr()?;
                Ok(SExpr::new(SExprKind::Quant(q, binders, Box::new(body)), start))
            }
            _ => unreachable!("prefix_form called on a non-prefix token"),
        }
    }

    fn binders(&mut self) -> PResult<Vec<SBinder>> {
        let mut out = Vec::new();
        loop {
            match self.peek() {
                Some(Token::Ident(_)) => {
                    let (name, span) = self.ident()?;
                    out.push(SBinder { name, ty: None, loc: Loc(span) });
                }
                Some(Token::LParen) => {
                    self.bump();
                    let mut names = vec![self.ident()?];
                    while let Some(Token::Ident(_)) = self.peek() {
                        names.push(self.ident()?);
                    }
                    self.expect(&Token::Colon, "`:`")?;
                    let ty = self.ty()?;
                    self.expect(&Token::RParen, "`)`")?;
                    for (name, span) in names {
                        out.push(SBinder { name, ty: Some(ty.clone()), loc: Loc(span) });
                    }
                }
                _ => break,
            }
        }
        if out.is_empty() {
            return Err(self.error(&["binder"]));
        }
        Ok(out)
    }

    /// Right operand of a binary operator: a quantifier or `if` may appear
    /// here and extends as far right as possible.
    fn operand(&mut self, level: fn(&mut Self) -> PResult<SExpr>) -> PResult<SExpr> {
        match self.peek() {
            Some(Token::KwForall | Token::KwExists | Token::KwIf) => self.prefix_form(),
            _ => level(self),
        }
    }

    fn implies(&mut self) -> PResult<SExpr> {
        let lhs = self.or()?;
        if self.eat(&Token::Implies) {
            let rhs = self.operand(Self::implies)?;
            Ok(SExpr::bin(BinOp::Implies, lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> PResult<SExpr> {
        let mut lhs = self.and()?;
        while self.eat(&Token::KwOr) {
            let rhs = self.operand(Self::and)?;
            lhs = SExpr::bin(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<SExpr> {
        let mut lhs = self.not()?;
        while self.eat(&Token::KwAnd) {
            let rhs = self.operand(Self::not)?;
            lhs = SExpr::bin(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> PResult<SExpr> {
        let start = self.span();
        if self.eat(&Token::KwNot) {
            let arg = self.operand(Self::not)?;
            Ok(SExpr::new(SExprKind::Not(Box::new(arg)), start))
        } else {
            self.comparison()
        }
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek()? {
            Token::OpLe => CmpOp::Le,
            Token::OpLt => CmpOp::Lt,
            Token::OpGe => CmpOp::Ge,
            Token::OpGt => CmpOp::Gt,
            Token::OpEq => CmpOp::Eq,
            _ => return None,
        })
    }

    fn comparison(&mut self) -> PResult<SExpr> {
        let first = self.additive()?;
        let mut operands = vec![first];
        let mut ops = Vec::new();
        while let Some(op) = self.cmp_op() {
            self.bump();
            ops.push(op);
            operands.push(self.additive()?);
        }
        if ops.is_empty() {
            return Ok(operands.pop().unwrap());
        }
        let mut links = ops
            .iter()
            .enumerate()
            .map(|(i, op)| SExpr::bin(BinOp::Cmp(*op), operands[i].clone(), operands[i + 1].clone()));
        let first = links.next().unwrap();
        Ok(links.fold(first, |acc, link| SExpr::bin(BinOp::And, acc, link)))
    }

    fn additive(&mut self) -> PResult<SExpr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = SExpr::bin(op, lhs, rhs);
        }
    }

    fn multiplicative(&mut self) -> PResult<SExpr> {
        let mut lhs = self.negation()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.negation()?;
            lhs = SExpr::bin(op, lhs, rhs);
        }
    }

    fn negation(&mut self) -> PResult<SExpr> {
        let start = self.span();
        if self.eat(&Token::Minus) {
            let arg = self.negation()?;
            if let SExprKind::Num { value, decimal } = arg.kind {
                return Ok(SExpr::new(SExprKind::Num { value: -value, decimal }, start));
            }
            Ok(SExpr::new(SExprKind::Neg(Box::new(arg)), start))
        } else {
            self.index()
        }
    }

    fn index(&mut self) -> PResult<SExpr> {
        let mut lhs = self.application()?;
        while self.eat(&Token::Bang) {
            let idx = self.application()?;
            let span = lhs.span();
            lhs = SExpr::new(SExprKind::Index(Box::new(lhs), Box::new(idx)), span);
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Some(
                Token::Ident(_)
                    | Token::Nat(_)
                    | Token::Decimal(_)
                    | Token::KwTrue
                    | Token::KwFalse
                    | Token::LBracket
                    | Token::LParen
            )
        ) && !self.at_decl_boundary()
    }

    fn application(&mut self) -> PResult<SExpr> {
        let mut head = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            let span = head.span();
            head = SExpr::new(SExprKind::App(Box::new(head), Box::new(arg)), span);
        }
        Ok(head)
    }

    fn atom(&mut self) -> PResult<SExpr> {
        let span = self.span();
        let kind = match self.peek() {
            Some(Token::Ident(n)) => SExprKind::Var(n.clone()),
            Some(Token::Nat(n)) => SExprKind::Num { value: Rational::from_integer((*n).into()), decimal: false },
            Some(Token::Decimal(q)) => SExprKind::Num { value: q.clone(), decimal: true },
            Some(Token::KwTrue) => SExprKind::Bool(true),
            Some(Token::KwFalse) => SExprKind::Bool(false),
            Some(Token::LParen) => {
                self.bump();
                let mut e = self.expr()?;
                self.expect(&Token::RParen, "`)`")?;
                // keep the outer position for diagnostics
                e.loc = Loc(span);
                return Ok(e);
            }
            Some(Token::LBracket) => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&Token::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if self.eat(&Token::Comma) {
                            continue;
                        }
                        self.expect(&Token::RBracket, "`]`")?;
                        break;
                    }
                }
                return Ok(SExpr::new(SExprKind::Tensor(items), span));
            }
            _ => return Err(self.error(&["expression"])),
        };
        self.bump();
        Ok(SExpr::new(kind, span))
    }
}

pub fn parse(tokens: &[Spanned]) -> Result<Vec<SurfaceDecl>, ParseError> {
    let end = tokens
        .last()
        .map(|t| Span::new(t.span.line, t.span.col + 1))
        .unwrap_or(Span::new(1, 1));
    let mut p = Parser { tokens, pos: 0, end };
    p.program()
}

/// Parses a single expression (used by tests and the REPL-style helpers).
pub fn parse_expr(tokens: &[Spanned]) -> Result<SExpr, ParseError> {
    let end = tokens
        .last()
        .map(|t| Span::new(t.span.line, t.span.col + 1))
        .unwrap_or(Span::new(1, 1));
    let mut p = Parser { tokens, pos: 0, end };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.error(&["end of input"]));
    }
    Ok(e)
}
