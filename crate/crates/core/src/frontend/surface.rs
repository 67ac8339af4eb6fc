//! Surface syntax tree and its pretty printer.
//!
//! Source positions are carried in [`Loc`], which never takes part in
//! equality, so a re-parsed program compares equal to the original.

use std::fmt;

use num_traits::Signed;

use crate::diagnostics::Span;
use crate::expr::{CmpOp, Quantifier};
use crate::scalar::{to_decimal, Rational};

#[derive(Debug, Clone, Copy, Default)]
pub struct Loc(pub Span);

impl PartialEq for Loc {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Loc {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SType {
    Bool,
    Prop,
    Nat,
    Int,
    Rat,
    Real,
    Named(String, Loc),
    Tensor(Box<SType>, Vec<u64>),
    Fun(Box<SType>, Box<SType>),
}

impl SType {
    pub fn fun(domain: SType, codomain: SType) -> SType {
        SType::Fun(Box::new(domain), Box::new(codomain))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Cmp(CmpOp),
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Cmp(op) => op.symbol(),
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Implies => "=>",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SBinder {
    pub name: String,
    pub ty: Option<SType>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExprKind {
    Var(String),
    Bool(bool),
    /// Numeric literal. `decimal` records whether the source used a
    /// decimal point, which decides the literal's initial type.
    Num { value: Rational, decimal: bool },
    Tensor(Vec<SExpr>),
    App(Box<SExpr>, Box<SExpr>),
    Index(Box<SExpr>, Box<SExpr>),
    Neg(Box<SExpr>),
    Not(Box<SExpr>),
    Bin(BinOp, Box<SExpr>, Box<SExpr>),
    If(Box<SExpr>, Box<SExpr>, Box<SExpr>),
    Quant(Quantifier, Vec<SBinder>, Box<SExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SExpr {
    pub kind: SExprKind,
    pub loc: Loc,
}

impl SExpr {
    pub fn new(kind: SExprKind, span: Span) -> SExpr {
        SExpr { kind, loc: Loc(span) }
    }

    pub fn span(&self) -> Span {
        self.loc.0
    }

    pub fn bin(op: BinOp, lhs: SExpr, rhs: SExpr) -> SExpr {
        let span = lhs.span();
        SExpr::new(SExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span)
    }

    /// Head and arguments of an application spine.
    pub fn spine(&self) -> (&SExpr, Vec<&SExpr>) {
        let mut args = Vec::new();
        let mut head = self;
        while let SExprKind::App(f, a) = &head.kind {
            args.push(&**a);
            head = f;
        }
        args.reverse();
        (head, args)
    }

    pub fn any(&self, pred: &mut impl FnMut(&SExpr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match &self.kind {
            SExprKind::Var(_) | SExprKind::Bool(_) | SExprKind::Num { .. } => false,
            SExprKind::Tensor(items) => items.iter().any(|e| e.any(pred)),
            SExprKind::App(a, b) | SExprKind::Index(a, b) | SExprKind::Bin(_, a, b) => {
                a.any(pred) || b.any(pred)
            }
            SExprKind::Neg(a) | SExprKind::Not(a) | SExprKind::Quant(_, _, a) => a.any(pred),
            SExprKind::If(a, b, c) => a.any(pred) || b.any(pred) || c.any(pred),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurfaceDecl {
    TypeSynonym { name: String, ty: SType, loc: Loc },
    Network { name: String, ty: SType, loc: Loc },
    FunDef { name: String, sig: SType, params: Vec<(String, Loc)>, body: SExpr, loc: Loc },
}

impl SurfaceDecl {
    pub fn name(&self) -> &str {
        match self {
            SurfaceDecl::TypeSynonym { name, .. }
            | SurfaceDecl::Network { name, .. }
            | SurfaceDecl::FunDef { name, .. } => name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            SurfaceDecl::TypeSynonym { loc, .. }
            | SurfaceDecl::Network { loc, .. }
            | SurfaceDecl::FunDef { loc, .. } => loc.0,
        }
    }
}

impl fmt::Display for SType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SType::Bool => write!(f, "Bool"),
            SType::Prop => write!(f, "Prop"),
            SType::Nat => write!(f, "Nat"),
            SType::Int => write!(f, "Int"),
            SType::Rat => write!(f, "Rat"),
            SType::Real => write!(f, "Real"),
            SType::Named(n, _) => write!(f, "{n}"),
            SType::Tensor(elem, dims) => {
                let dims: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
                if matches!(**elem, SType::Tensor(..) | SType::Fun(..)) {
                    write!(f, "Tensor ({elem}) [{}]", dims.join(", "))
                } else {
                    write!(f, "Tensor {elem} [{}]", dims.join(", "))
                }
            }
            SType::Fun(dom, cod) => {
                if matches!(**dom, SType::Fun(..)) {
                    write!(f, "({dom}) -> {cod}")
                } else {
                    write!(f, "{dom} -> {cod}")
                }
            }
        }
    }
}

/// Binding strength, loosest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Prec {
    Top,
    Implies,
    Or,
    And,
    Not,
    Cmp,
    Add,
    Mul,
    Neg,
    Index,
    App,
    Atom,
}

pub(crate) fn bin_prec(op: BinOp) -> Prec {
    match op {
        BinOp::Add | BinOp::Sub => Prec::Add,
        BinOp::Mul | BinOp::Div => Prec::Mul,
        BinOp::Cmp(_) => Prec::Cmp,
        BinOp::And => Prec::And,
        BinOp::Or => Prec::Or,
        BinOp::Implies => Prec::Implies,
    }
}

fn render_num(value: &Rational, decimal: bool) -> String {
    if decimal {
        let text = to_decimal(value).expect("decimal literal has a terminating expansion");
        if text.contains('.') {
            text
        } else {
            format!("{text}.0")
        }
    } else {
        value.to_integer().to_string()
    }
}

fn expr_prec(e: &SExpr) -> Prec {
    match &e.kind {
        SExprKind::Var(_) | SExprKind::Bool(_) | SExprKind::Tensor(_) => Prec::Atom,
        SExprKind::Num { value, .. } => {
            if value.is_negative() {
                Prec::Neg
            } else {
                Prec::Atom
            }
        }
        SExprKind::App(..) => Prec::App,
        SExprKind::Index(..) => Prec::Index,
        SExprKind::Neg(_) => Prec::Neg,
        SExprKind::Not(_) => Prec::Not,
        SExprKind::Bin(op, ..) => bin_prec(*op),
        SExprKind::If(..) | SExprKind::Quant(..) => Prec::Top,
    }
}

fn print_at(e: &SExpr, ctx: Prec, out: &mut String) {
    if expr_prec(e) < ctx {
        out.push('(');
        print_expr(e, out);
        out.push(')');
    } else {
        print_expr(e, out);
    }
}

fn print_binder(b: &SBinder, out: &mut String) {
    match &b.ty {
        Some(ty) => out.push_str(&format!("({} : {ty})", b.name)),
        None => out.push_str(&b.name),
    }
}

pub(crate) fn print_expr(e: &SExpr, out: &mut String) {
    match &e.kind {
        SExprKind::Var(n) => out.push_str(n),
        SExprKind::Bool(b) => out.push_str(if *b { "True" } else { "False" }),
        SExprKind::Num { value, decimal } => out.push_str(&render_num(value, *decimal)),
        SExprKind::Tensor(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                print_expr(item, out);
            }
            out.push(']');
        }
        SExprKind::App(f, a) => {
            print_at(f, Prec::App, out);
            out.push(' ');
            print_at(a, Prec::Atom, out);
        }
        SExprKind::Index(t, i) => {
            print_at(t, Prec::Index, out);
            out.push_str(" ! ");
            print_at(i, Prec::App, out);
        }
        SExprKind::Neg(a) => {
            out.push('-');
            // `--` would start a comment
            let ctx = if matches!(a.kind, SExprKind::Neg(_)) { Prec::Atom } else { Prec::Neg };
            print_at(a, ctx, out);
        }
        SExprKind::Not(a) => {
            out.push_str("not ");
            print_at(a, Prec::Not, out);
        }
        SExprKind::Bin(op, l, r) => {
            let p = bin_prec(*op);
            // comparisons never chain in the tree (chains are desugared),
            // `=>` is right-associative, everything else left-associative
            let (lp, rp) = match op {
                BinOp::Cmp(_) => (next(p), next(p)),
                BinOp::Implies => (next(p), p),
                _ => (p, next(p)),
            };
            print_at(l, lp, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            print_at(r, rp, out);
        }
        SExprKind::If(c, t, f) => {
            out.push_str("if ");
            print_expr(c, out);
            out.push_str(" then ");
            print_expr(t, out);
            out.push_str(" else ");
            print_expr(f, out);
        }
        SExprKind::Quant(q, binders, body) => {
            out.push_str(q.keyword());
            for b in binders {
                out.push(' ');
                print_binder(b, out);
            }
            out.push_str(" . ");
            print_expr(body, out);
        }
    }
}

fn next(p: Prec) -> Prec {
    match p {
        Prec::Top => Prec::Implies,
        Prec::Implies => Prec::Or,
        Prec::Or => Prec::And,
        Prec::And => Prec::Not,
        Prec::Not => Prec::Cmp,
        Prec::Cmp => Prec::Add,
        Prec::Add => Prec::Mul,
        Prec::Mul => Prec::Neg,
        Prec::Neg => Prec::Index,
        Prec::Index => Prec::App,
        Prec::App | Prec::Atom => Prec::Atom,
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        print_expr(self, &mut out);
        f.write_str(&out)
    }
}

impl fmt::Display for SurfaceDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceDecl::TypeSynonym { name, ty, .. } => write!(f, "type {name} = {ty}"),
            SurfaceDecl::Network { name, ty, .. } => write!(f, "network {name} : {ty}"),
            SurfaceDecl::FunDef { name, sig, params, body, .. } => {
                writeln!(f, "{name} : {sig}")?;
                write!(f, "{name}")?;
                for (p, _) in params {
                    write!(f, " {p}")?;
                }
                write!(f, " = {body}")
            }
        }
    }
}

/// Renders a whole program, declarations separated by blank lines.
pub fn print_program(decls: &[SurfaceDecl]) -> String {
    let parts: Vec<String> = decls.iter().map(|d| d.to_string()).collect();
    let mut text = parts.join("\n\n");
    text.push('\n');
    text
}
