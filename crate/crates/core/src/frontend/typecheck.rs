//! Bidirectional type checking and elaboration into the core language.
//!
//! Logical builtins are resolved to their `Bool` or `Prop` instantiation.
//! A subterm is forced into `Prop` when it contains a quantifier, mentions
//! a network, or refers to a definition that does either. `Bool` values
//! are accepted where `Prop` is expected, and numeric types widen along
//! `Nat <= Int <= Rat`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use num_traits::Signed;
use thiserror::Error;

use super::surface::{BinOp, SBinder, SExpr, SExprKind, SType, SurfaceDecl};
use crate::diagnostics::Span;
use crate::expr::{ArithOp, Binder, Builtin, Expr, Lit, NumType, Truth, VType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("{span}: type mismatch: expected `{expected}`, found `{actual}`")]
    TypeMismatch { span: Span, expected: String, actual: String },
    #[error("{span}: the condition of `if` must have type `Bool`, but it can only be decided by a verifier")]
    IfConditionNotBool { span: Span },
    #[error("{span}: expression of type `Prop` used where `Bool` is required")]
    PropInBoolPosition { span: Span },
    #[error("{span}: unknown identifier `{name}`")]
    UnknownIdentifier { span: Span, name: String },
    #[error("{span}: network `{name}` can only be applied to arguments")]
    NetworkUsedAsValue { span: Span, name: String },
    #[error("{span}: unknown type `{name}`")]
    UnknownType { span: Span, name: String },
    #[error("{span}: invalid type: {message}")]
    InvalidType { span: Span, message: String },
    #[error("{span}: cannot infer the type of `{name}`; add an annotation")]
    CannotInfer { span: Span, name: String },
}

impl TypeError {
    pub fn span(&self) -> Span {
        match self {
            TypeError::TypeMismatch { span, .. }
            | TypeError::IfConditionNotBool { span }
            | TypeError::PropInBoolPosition { span }
            | TypeError::UnknownIdentifier { span, .. }
            | TypeError::NetworkUsedAsValue { span, .. }
            | TypeError::UnknownType { span, .. }
            | TypeError::InvalidType { span, .. }
            | TypeError::CannotInfer { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypedDecl {
    Synonym { name: String, surface: SType, expanded: VType },
    Network { name: String, surface: SType, ty: VType, span: Span },
    /// `body` is wrapped in one `Lam` per parameter.
    Def { name: String, surface: SType, ty: VType, params: Vec<String>, body: Expr, span: Span },
}

impl TypedDecl {
    pub fn name(&self) -> &str {
        match self {
            TypedDecl::Synonym { name, .. }
            | TypedDecl::Network { name, .. }
            | TypedDecl::Def { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypedProgram {
    pub decls: Vec<TypedDecl>,
}

impl TypedProgram {
    pub fn networks(&self) -> impl Iterator<Item = (&str, &VType)> {
        self.decls.iter().filter_map(|d| match d {
            TypedDecl::Network { name, ty, .. } => Some((name.as_str(), ty)),
            _ => None,
        })
    }

    pub fn defs(&self) -> impl Iterator<Item = (&str, &VType, &Expr)> {
        self.decls.iter().filter_map(|d| match d {
            TypedDecl::Def { name, ty, body, .. } => Some((name.as_str(), ty, body)),
            _ => None,
        })
    }
}

type Result<T> = std::result::Result<T, TypeError>;

#[derive(Debug, Clone)]
enum Global {
    Network(VType),
    Def { ty: VType, forcing: bool },
}

#[derive(Debug, Clone)]
struct Local {
    name: String,
    ty: Rc<RefCell<Option<VType>>>,
}

#[derive(Default)]
struct Checker {
    synonyms: HashMap<String, VType>,
    globals: HashMap<String, Global>,
    locals: Vec<Local>,
}

fn mismatch(span: Span, expected: &VType, actual: &VType) -> TypeError {
    TypeError::TypeMismatch { span, expected: expected.to_string(), actual: actual.to_string() }
}

/// Whether a value of type `actual` may be used where `expected` is required.
fn subsumes(actual: &VType, expected: &VType) -> bool {
    match (actual, expected) {
        (a, b) if a == b => true,
        (VType::Bool, VType::Prop) => true,
        (VType::Num(a), VType::Num(b)) => a <= b,
        (VType::Tensor(a, da), VType::Tensor(b, db)) => da == db && subsumes(a, b),
        _ => false,
    }
}

fn literal_type(value: &crate::scalar::Rational, decimal: bool) -> NumType {
    if decimal || !value.is_integer() {
        NumType::Rat
    } else if value.is_negative() {
        NumType::Int
    } else {
        NumType::Nat
    }
}

fn join_types(span: Span, a: &VType, b: &VType) -> Result<VType> {
    match (a, b) {
        (VType::Num(x), VType::Num(y)) => Ok(VType::Num(x.join(*y))),
        (VType::Tensor(ea, da), VType::Tensor(eb, db)) if da == db => {
            Ok(VType::Tensor(Box::new(join_types(span, ea, eb)?), da.clone()))
        }
        (VType::Bool | VType::Prop, VType::Bool | VType::Prop) => {
            Ok(if a == &VType::Prop || b == &VType::Prop { VType::Prop } else { VType::Bool })
        }
        _ if a == b => Ok(a.clone()),
        _ => Err(mismatch(span, a, b)),
    }
}

impl Checker {
    fn expand(&self, ty: &SType, span: Span) -> Result<VType> {
        Ok(match ty {
            SType::Bool => VType::Bool,
            SType::Prop => VType::Prop,
            SType::Nat => VType::NAT,
            SType::Int => VType::Num(NumType::Int),
            SType::Rat | SType::Real => VType::RAT,
            SType::Named(name, loc) => self
                .synonyms
                .get(name)
                .cloned()
                .ok_or_else(|| TypeError::UnknownType { span: loc.0, name: name.clone() })?,
            SType::Tensor(elem, dims) => {
                let elem = self.expand(elem, span)?;
                if matches!(elem, VType::Prop | VType::Fun(..)) {
                    return Err(TypeError::InvalidType {
                        span,
                        message: format!("`{elem}` cannot be a tensor element type"),
                    });
                }
                let dims = dims.iter().map(|d| *d as usize).collect();
                VType::tensor(elem, dims)
            }
            SType::Fun(a, b) => VType::fun(self.expand(a, span)?, self.expand(b, span)?),
        })
    }

    fn lookup_local(&self, name: &str) -> Option<(usize, &Local)> {
        self.locals
            .iter()
            .rev()
            .enumerate()
            .find(|(_, l)| l.name == name)
    }

    /// Whether the expression can only be typed at `Prop`.
    fn forced(&self, e: &SExpr) -> bool {
        e.any(&mut |sub| match &sub.kind {
            SExprKind::Quant(..) => true,
            SExprKind::Var(name) => {
                if let Some((_, local)) = self.lookup_local(name) {
                    matches!(&*local.ty.borrow(), Some(t) if t.final_codomain() == &VType::Prop)
                } else {
                    match self.globals.get(name) {
                        Some(Global::Network(_)) => true,
                        Some(Global::Def { forcing, .. }) => *forcing,
                        None => false,
                    }
                }
            }
            _ => false,
        })
    }

    fn truth_of(&self, e: &SExpr) -> Truth {
        if self.forced(e) {
            Truth::Prop
        } else {
            Truth::Bool
        }
    }

    fn with_local<T>(&mut self, local: Local, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        self.locals.push(local);
        let result = f(self);
        self.locals.pop();
        result
    }

    /// Elaborates `e` against `expected`.
    fn check(&mut self, e: &SExpr, expected: &VType) -> Result<Expr> {
        let span = e.span();
        match (&e.kind, expected) {
            (SExprKind::Num { value, decimal }, VType::Num(target)) => {
                let min = literal_type(value, *decimal);
                if min > *target {
                    return Err(mismatch(span, expected, &VType::Num(min)));
                }
                Ok(Expr::Lit(Lit::Num(*target, value.clone())))
            }
            (SExprKind::Tensor(items), VType::Tensor(elem, dims)) => {
                if dims[0] != items.len() {
                    return Err(mismatch(
                        span,
                        expected,
                        &VType::tensor(VType::Num(NumType::Rat), vec![items.len()]),
                    ));
                }
                let inner = if dims.len() == 1 {
                    (**elem).clone()
                } else {
                    VType::Tensor(elem.clone(), dims[1..].to_vec())
                };
                let items = items.iter().map(|i| self.check(i, &inner)).collect::<Result<_>>()?;
                Ok(Expr::Tensor(items))
            }
            (SExprKind::Bin(op @ (BinOp::And | BinOp::Or | BinOp::Implies), l, r), VType::Bool | VType::Prop) => {
                let truth = self.truth_at(e, expected)?;
                let ty = if truth == Truth::Prop { VType::Prop } else { VType::Bool };
                let l = self.check(l, &ty)?;
                let r = self.check(r, &ty)?;
                let b = match op {
                    BinOp::And => Builtin::And(truth),
                    BinOp::Or => Builtin::Or(truth),
                    _ => Builtin::Implies(truth),
                };
                Ok(Expr::Builtin(b, vec![l, r]))
            }
            (SExprKind::Not(a), VType::Bool | VType::Prop) => {
                let truth = self.truth_at(e, expected)?;
                let ty = if truth == Truth::Prop { VType::Prop } else { VType::Bool };
                Ok(Expr::not(truth, self.check(a, &ty)?))
            }
            (SExprKind::Bin(BinOp::Cmp(op), l, r), VType::Bool | VType::Prop) => {
                let truth = self.truth_at(e, expected)?;
                let (l, r) = self.check_comparands(span, *op, l, r)?;
                Ok(Expr::cmp(*op, truth, l, r))
            }
            (SExprKind::Bin(op @ (BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div), l, r), VType::Num(target)) => {
                let (aop, result) = arith_result(*op, *target);
                if result != *target {
                    return Err(mismatch(span, expected, &VType::Num(result)));
                }
                let l = self.check(l, expected)?;
                let r = self.check(r, expected)?;
                Ok(Expr::arith(aop, *target, l, r))
            }
            (SExprKind::Neg(a), VType::Num(target)) => {
                if *target == NumType::Nat {
                    return Err(mismatch(span, expected, &VType::Num(NumType::Int)));
                }
                Ok(Expr::Builtin(Builtin::Neg(*target), vec![self.check(a, expected)?]))
            }
            (SExprKind::If(c, t, f), _) => {
                let c = self.check_condition(c)?;
                let t = self.check(t, expected)?;
                let f = self.check(f, expected)?;
                Ok(Expr::Builtin(Builtin::If, vec![c, t, f]))
            }
            (SExprKind::Quant(..), VType::Bool) => Err(TypeError::PropInBoolPosition { span }),
            (SExprKind::Quant(q, binders, body), VType::Prop) => self.check_quant(*q, binders, body),
            (SExprKind::Var(name), _) => {
                if let Some((_, local)) = self.lookup_local(name) {
                    let cell = local.ty.clone();
                    if cell.borrow().is_none() {
                        *cell.borrow_mut() = Some(expected.clone());
                    }
                }
                self.check_by_inference(e, expected)
            }
            _ => self.check_by_inference(e, expected),
        }
    }

    fn check_by_inference(&mut self, e: &SExpr, expected: &VType) -> Result<Expr> {
        let (expr, actual) = self.infer(e)?;
        if subsumes(&actual, expected) {
            Ok(expr)
        } else if actual == VType::Prop && expected == &VType::Bool {
            Err(TypeError::PropInBoolPosition { span: e.span() })
        } else {
            Err(mismatch(e.span(), expected, &actual))
        }
    }

    fn truth_at(&self, e: &SExpr, expected: &VType) -> Result<Truth> {
        match expected {
            VType::Prop => Ok(Truth::Prop),
            _ => {
                if self.forced(e) {
                    Err(TypeError::PropInBoolPosition { span: e.span() })
                } else {
                    Ok(Truth::Bool)
                }
            }
        }
    }

    fn check_condition(&mut self, c: &SExpr) -> Result<Expr> {
        if self.forced(c) {
            return Err(TypeError::IfConditionNotBool { span: c.span() });
        }
        match self.check(c, &VType::Bool) {
            Err(TypeError::PropInBoolPosition { span }) => Err(TypeError::IfConditionNotBool { span }),
            other => other,
        }
    }

    fn check_comparands(
        &mut self,
        span: Span,
        op: crate::expr::CmpOp,
        l: &SExpr,
        r: &SExpr,
    ) -> Result<(Expr, Expr)> {
        let (le, lt) = self.infer(l)?;
        let (re, rt) = self.infer(r)?;
        let joined = join_types(span, &lt, &rt)?;
        let ok = match &joined {
            VType::Num(_) => true,
            VType::Tensor(elem, _) => op == crate::expr::CmpOp::Eq && elem.num().is_some(),
            _ => false,
        };
        if !ok {
            return Err(mismatch(span, &VType::RAT, &joined));
        }
        let le = if lt == joined { le } else { self.check(l, &joined)? };
        let re = if rt == joined { re } else { self.check(r, &joined)? };
        Ok((le, re))
    }

    fn check_quant(&mut self, q: crate::expr::Quantifier, binders: &[SBinder], body: &SExpr) -> Result<Expr> {
        let Some((first, rest)) = binders.split_first() else {
            return self.check(body, &VType::Prop);
        };
        let declared = match &first.ty {
            Some(t) => Some(self.expand(t, first.loc.0)?),
            None => None,
        };
        if matches!(declared, Some(VType::Prop | VType::Fun(..))) {
            return Err(TypeError::InvalidType {
                span: first.loc.0,
                message: format!("cannot quantify over `{}`", declared.unwrap()),
            });
        }
        let declared = declared.or_else(|| self.usage_hint(&first.name, body));
        let cell = Rc::new(RefCell::new(declared));
        let local = Local { name: first.name.clone(), ty: cell.clone() };
        let body = self.with_local(local, |c| c.check_quant(q, rest, body))?;
        let ty = cell.borrow().clone().unwrap_or(VType::RAT);
        Ok(Expr::quant(q, Binder::new(first.name.clone(), ty), body))
    }

    /// Type of an unannotated binder taken from its first occurrence as a
    /// direct argument of a global function or network.
    fn usage_hint(&self, name: &str, body: &SExpr) -> Option<VType> {
        let mut found = None;
        fn visit(c: &Checker, name: &str, e: &SExpr, found: &mut Option<VType>) {
            if found.is_some() {
                return;
            }
            match &e.kind {
                SExprKind::Quant(_, binders, _) if binders.iter().any(|b| b.name == name) => return,
                SExprKind::App(..) => {
                    let (head, args) = e.spine();
                    if let SExprKind::Var(h) = &head.kind {
                        let ty = match c.globals.get(h) {
                            _ if c.lookup_local(h).is_some() => None,
                            Some(Global::Network(t)) | Some(Global::Def { ty: t, .. }) => Some(t.clone()),
                            None => None,
                        };
                        let mut ty = ty;
                        for arg in &args {
                            let Some(VType::Fun(dom, cod)) = ty else { break };
                            if matches!(&arg.kind, SExprKind::Var(a) if a == name) {
                                *found = Some(*dom);
                                return;
                            }
                            ty = Some(*cod);
                        }
                    }
                }
                _ => {}
            }
            match &e.kind {
                SExprKind::Var(_) | SExprKind::Bool(_) | SExprKind::Num { .. } => {}
                SExprKind::Tensor(items) => items.iter().for_each(|i| visit(c, name, i, found)),
                SExprKind::App(a, b) | SExprKind::Index(a, b) | SExprKind::Bin(_, a, b) => {
                    visit(c, name, a, found);
                    visit(c, name, b, found);
                }
                SExprKind::Neg(a) | SExprKind::Not(a) | SExprKind::Quant(_, _, a) => visit(c, name, a, found),
                SExprKind::If(a, b, d) => {
                    visit(c, name, a, found);
                    visit(c, name, b, found);
                    visit(c, name, d, found);
                }
            }
        }
        visit(self, name, body, &mut found);
        found
    }

    /// Synthesises the type of `e`.
    fn infer(&mut self, e: &SExpr) -> Result<(Expr, VType)> {
        let span = e.span();
        match &e.kind {
            SExprKind::Var(name) => {
                if let Some((index, local)) = self.lookup_local(name) {
                    let mut slot = local.ty.borrow_mut();
                    let ty = slot.get_or_insert(VType::RAT).clone();
                    return Ok((Expr::Var(index), ty));
                }
                match self.globals.get(name) {
                    Some(Global::Def { ty, .. }) => Ok((Expr::Free(name.clone()), ty.clone())),
                    Some(Global::Network(_)) => {
                        Err(TypeError::NetworkUsedAsValue { span, name: name.clone() })
                    }
                    None => Err(TypeError::UnknownIdentifier { span, name: name.clone() }),
                }
            }
            SExprKind::Bool(b) => Ok((Expr::bool(*b), VType::Bool)),
            SExprKind::Num { value, decimal } => {
                let t = literal_type(value, *decimal);
                Ok((Expr::Lit(Lit::Num(t, value.clone())), VType::Num(t)))
            }
            SExprKind::Tensor(items) => {
                if items.is_empty() {
                    return Ok((Expr::Tensor(Vec::new()), VType::tensor(VType::RAT, vec![0])));
                }
                let mut joined: Option<VType> = None;
                for item in items {
                    let (_, t) = self.infer(item)?;
                    joined = Some(match joined {
                        None => t,
                        Some(j) => join_types(item.span(), &j, &t)?,
                    });
                }
                let elem = joined.unwrap();
                if matches!(elem, VType::Prop | VType::Fun(..)) {
                    return Err(TypeError::InvalidType {
                        span,
                        message: format!("`{elem}` cannot be a tensor element type"),
                    });
                }
                let ty = VType::tensor(elem, vec![items.len()]);
                Ok((self.check(e, &ty)?, ty))
            }
            SExprKind::App(..) => self.infer_app(e),
            SExprKind::Index(t, i) => {
                let (te, tt) = self.infer(t)?;
                let VType::Tensor(elem, dims) = tt else {
                    if let SExprKind::Var(name) = &t.kind {
                        if self.lookup_local(name).is_some() {
                            return Err(TypeError::CannotInfer { span: t.span(), name: name.clone() });
                        }
                    }
                    return Err(mismatch(t.span(), &VType::tensor(VType::RAT, vec![1]), &tt));
                };
                let ie = self.check(i, &VType::NAT)?;
                let ty = if dims.len() == 1 { *elem } else { VType::Tensor(elem, dims[1..].to_vec()) };
                Ok((Expr::Index(Box::new(te), Box::new(ie)), ty))
            }
            SExprKind::Neg(a) => {
                let (_, t) = self.infer(a)?;
                let Some(n) = t.num() else {
                    return Err(mismatch(a.span(), &VType::RAT, &t));
                };
                let target = VType::Num(n.join(NumType::Int));
                Ok((self.check(e, &target)?, target))
            }
            SExprKind::Bin(op @ (BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div), l, r) => {
                let (_, lt) = self.infer(l)?;
                let (_, rt) = self.infer(r)?;
                let (Some(a), Some(b)) = (lt.num(), rt.num()) else {
                    let bad = if lt.num().is_none() { (l, lt) } else { (r, rt) };
                    return Err(mismatch(bad.0.span(), &VType::RAT, &bad.1));
                };
                let (_, result) = arith_result(*op, a.join(b));
                let target = VType::Num(result);
                Ok((self.check(e, &target)?, target))
            }
            SExprKind::Bin(..) | SExprKind::Not(_) => {
                let ty = match self.truth_of(e) {
                    Truth::Prop => VType::Prop,
                    Truth::Bool => VType::Bool,
                };
                Ok((self.check(e, &ty)?, ty))
            }
            SExprKind::If(_, t, f) => {
                let (_, tt) = self.infer(t)?;
                let (_, ft) = self.infer(f)?;
                let ty = join_types(span, &tt, &ft)?;
                Ok((self.check(e, &ty)?, ty))
            }
            SExprKind::Quant(..) => Ok((self.check(e, &VType::Prop)?, VType::Prop)),
        }
    }

    fn infer_app(&mut self, e: &SExpr) -> Result<(Expr, VType)> {
        let (head, args) = e.spine();
        let (mut fun, mut ty) = match &head.kind {
            SExprKind::Var(name)
                if self.lookup_local(name).is_none()
                    && matches!(self.globals.get(name), Some(Global::Network(_))) =>
            {
                let Some(Global::Network(ty)) = self.globals.get(name) else { unreachable!() };
                (Expr::Network(name.clone()), ty.clone())
            }
            _ => self.infer(head)?,
        };
        for arg in args {
            let VType::Fun(dom, cod) = ty else {
                return Err(TypeError::TypeMismatch {
                    span: arg.span(),
                    expected: "a function".into(),
                    actual: ty.to_string(),
                });
            };
            let a = self.check(arg, &dom)?;
            fun = Expr::app(fun, a);
            ty = *cod;
        }
        Ok((fun, ty))
    }

    fn decl(&mut self, decl: &SurfaceDecl) -> Result<TypedDecl> {
        match decl {
            SurfaceDecl::TypeSynonym { name, ty, loc } => {
                let expanded = self.expand(ty, loc.0)?;
                self.synonyms.insert(name.clone(), expanded.clone());
                Ok(TypedDecl::Synonym { name: name.clone(), surface: ty.clone(), expanded })
            }
            SurfaceDecl::Network { name, ty, loc } => {
                let vty = self.expand(ty, loc.0)?;
                if !matches!(vty, VType::Fun(..)) {
                    return Err(TypeError::InvalidType {
                        span: loc.0,
                        message: format!("network `{name}` must have a function type"),
                    });
                }
                self.globals.insert(name.clone(), Global::Network(vty.clone()));
                Ok(TypedDecl::Network { name: name.clone(), surface: ty.clone(), ty: vty, span: loc.0 })
            }
            SurfaceDecl::FunDef { name, sig, params, body, loc } => {
                let ty = self.expand(sig, loc.0)?;
                let mut param_tys = Vec::new();
                let mut result = ty.clone();
                for (p, ploc) in params {
                    let VType::Fun(dom, cod) = result else {
                        return Err(TypeError::TypeMismatch {
                            span: ploc.0,
                            expected: "a function type with a parameter for `".to_string() + p + "`",
                            actual: ty.to_string(),
                        });
                    };
                    param_tys.push(*dom);
                    result = *cod;
                }
                let saved = std::mem::take(&mut self.locals);
                for ((p, _), t) in params.iter().zip(&param_tys) {
                    self.locals.push(Local { name: p.clone(), ty: Rc::new(RefCell::new(Some(t.clone()))) });
                }
                let checked = self.check(body, &result);
                self.locals = saved;
                let mut core = checked?;
                for ((p, _), t) in params.iter().zip(&param_tys).rev() {
                    core = Expr::Lam(Binder::new(p.clone(), t.clone()), Box::new(core));
                }
                let forcing = ty.final_codomain() == &VType::Prop || core.mentions_network() || {
                    let globals = &self.globals;
                    core.any(&mut |sub| match sub {
                        Expr::Free(n) => matches!(globals.get(n), Some(Global::Def { forcing: true, .. })),
                        _ => false,
                    })
                };
                self.globals.insert(name.clone(), Global::Def { ty: ty.clone(), forcing });
                Ok(TypedDecl::Def {
                    name: name.clone(),
                    surface: sig.clone(),
                    ty,
                    params: params.iter().map(|(p, _)| p.clone()).collect(),
                    body: core,
                    span: loc.0,
                })
            }
        }
    }
}

/// Builtin and result type of an arithmetic operator whose operands have
/// been joined to `operand`.
fn arith_result(op: BinOp, operand: NumType) -> (ArithOp, NumType) {
    match op {
        BinOp::Add => (ArithOp::Add, operand),
        BinOp::Sub => (ArithOp::Sub, operand.join(NumType::Int)),
        BinOp::Mul => (ArithOp::Mul, operand),
        BinOp::Div => (ArithOp::Div, NumType::Rat),
        _ => unreachable!("not an arithmetic operator"),
    }
}

pub fn typecheck(decls: &[SurfaceDecl]) -> Result<TypedProgram> {
    let mut checker = Checker::default();
    let decls = decls.iter().map(|d| checker.decl(d)).collect::<Result<_>>()?;
    Ok(TypedProgram { decls })
}

/// Type checks a standalone expression against `expected`, with the given
/// typed locals in scope (innermost last).
pub fn check_expr(program: &TypedProgram, locals: &[(String, VType)], e: &SExpr, expected: &VType) -> Result<Expr> {
    let mut checker = Checker::default();
    for decl in &program.decls {
        match decl {
            TypedDecl::Synonym { name, expanded, .. } => {
                checker.synonyms.insert(name.clone(), expanded.clone());
            }
            TypedDecl::Network { name, ty, .. } => {
                checker.globals.insert(name.clone(), Global::Network(ty.clone()));
            }
            TypedDecl::Def { name, ty, body, .. } => {
                let forcing = ty.final_codomain() == &VType::Prop || body.mentions_network();
                checker.globals.insert(name.clone(), Global::Def { ty: ty.clone(), forcing });
            }
        }
    }
    for (name, ty) in locals {
        checker.locals.push(Local { name: name.clone(), ty: Rc::new(RefCell::new(Some(ty.clone()))) });
    }
    checker.check(e, expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{CmpOp, Quantifier};
    use crate::frontend::{lexer::tokenize, parser::parse};
    use crate::scalar::rat;

    fn program(src: &str) -> Result<TypedProgram> {
        typecheck(&parse(&tokenize(src).unwrap()).unwrap())
    }

    fn body_of<'a>(p: &'a TypedProgram, name: &str) -> &'a Expr {
        p.defs().find(|(n, _, _)| *n == name).unwrap().2
    }

    #[test]
    fn decimal_elaborates_to_exact_rational() {
        let p = program("c : Rat\nc = 3.25").unwrap();
        assert_eq!(body_of(&p, "c"), &Expr::Lit(Lit::Num(NumType::Rat, rat(13, 4))));
    }

    #[test]
    fn quantifier_forces_prop_instantiation() {
        let src = "type V = Tensor Rat [2]\nnetwork f : V -> Rat\n\
                   good : V -> Prop\ngood x = x ! 0 <= 1\n\
                   safe : Prop\nsafe = forall x . good x => f x > 0";
        let p = program(src).unwrap();
        let Expr::Quant(Quantifier::Forall, binder, body) = body_of(&p, "safe") else { panic!() };
        assert_eq!(binder.ty, VType::tensor(VType::RAT, vec![2]));
        let Expr::Builtin(Builtin::Implies(Truth::Prop), args) = &**body else { panic!() };
        assert!(matches!(args[1], Expr::Builtin(Builtin::Cmp(CmpOp::Gt, Truth::Prop), _)));
        // declared Prop, so the comparison is the Prop instantiation too
        let Expr::Lam(_, good) = body_of(&p, "good") else { panic!() };
        assert!(matches!(**good, Expr::Builtin(Builtin::Cmp(CmpOp::Le, Truth::Prop), _)));
    }

    #[test]
    fn bool_definitions_stay_bool() {
        let p = program("b : Rat -> Bool\nb x = x <= 1 and not (x == 0)").unwrap();
        let Expr::Lam(_, body) = body_of(&p, "b") else { panic!() };
        assert!(matches!(**body, Expr::Builtin(Builtin::And(Truth::Bool), _)));
    }

    #[test]
    fn quantified_if_condition_is_rejected() {
        let err = program("p : Rat\np = if (forall x . x >= 0) then 1 else 2").unwrap_err();
        assert!(matches!(err, TypeError::IfConditionNotBool { .. }), "{err}");
    }

    #[test]
    fn network_if_condition_is_rejected() {
        let err = program("network f : Rat -> Rat\np : Prop\np = forall x . (if f x > 0 then x else 1) > 0")
            .unwrap_err();
        assert!(matches!(err, TypeError::IfConditionNotBool { .. }), "{err}");
    }

    #[test]
    fn prop_in_bool_definition_is_rejected() {
        let err = program("b : Bool\nb = exists x . x > 0").unwrap_err();
        assert!(matches!(err, TypeError::PropInBoolPosition { .. }), "{err}");
        let err = program("network f : Rat -> Rat\nb : Rat -> Bool\nb x = f x > 0").unwrap_err();
        assert!(matches!(err, TypeError::PropInBoolPosition { .. }), "{err}");
    }

    #[test]
    fn unknown_identifier_and_network_value() {
        let err = program("p : Prop\np = forall x . y > 0").unwrap_err();
        assert!(matches!(err, TypeError::UnknownIdentifier { ref name, .. } if name == "y"));
        let err = program("network f : Rat -> Rat\ng : (Rat -> Rat) -> Rat\ng h = h 1\nc : Rat\nc = g f")
            .unwrap_err();
        assert!(matches!(err, TypeError::NetworkUsedAsValue { .. }), "{err}");
    }

    #[test]
    fn literals_widen_to_context() {
        let p = program("c : Rat -> Rat\nc x = 2 * x").unwrap();
        let Expr::Lam(_, body) = body_of(&p, "c") else { panic!() };
        let Expr::Builtin(Builtin::Arith(ArithOp::Mul, NumType::Rat), args) = &**body else { panic!() };
        assert_eq!(args[0], Expr::Lit(Lit::Num(NumType::Rat, rat(2, 1))));
        let err = program("n : Nat\nn = 0.5").unwrap_err();
        assert!(matches!(err, TypeError::TypeMismatch { .. }));
    }

    #[test]
    fn type_mismatch_reports_both_types() {
        let err = program("c : Bool\nc = 1").unwrap_err();
        let TypeError::TypeMismatch { expected, actual, .. } = err else { panic!() };
        assert_eq!((expected.as_str(), actual.as_str()), ("Bool", "Nat"));
    }

    #[test]
    fn real_is_rat() {
        let p = program("c : Real\nc = 1.5").unwrap();
        assert_eq!(p.defs().next().unwrap().1, &VType::RAT);
    }

    #[test]
    fn checking_is_deterministic() {
        let src = "network f : Tensor Rat [2] -> Rat\np : Prop\np = forall x . x ! 0 <= 1 => f x >= 0";
        assert_eq!(program(src).unwrap(), program(src).unwrap());
    }

    #[test]
    fn later_declarations_are_not_visible() {
        let err = program("a : Rat\na = b\nb : Rat\nb = 1").unwrap_err();
        assert!(matches!(err, TypeError::UnknownIdentifier { .. }));
    }
}
