//! Agda interface module generation.
//!
//! Works on the type-checked program before network analysis so that
//! user-level definitions keep their names. Networks become postulates,
//! `Prop`-valued functions become `Set`-valued ones (capitalised), and each
//! property becomes an abstract proof delegated to the proof cache.

use std::collections::HashMap;

use num_traits::Signed;
use thiserror::Error;

use crate::expr::{ArithOp, Binder, Builtin, CmpOp, Expr, Lit, NumType, Quantifier, Truth, VType};
use crate::frontend::{SType, TypedDecl, TypedProgram};
use crate::network::{hash_bytes, Digest};
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ItpError {
    #[error("`{decl}`: no Agda rendering for {construct}")]
    UnrenderableConstruct { decl: String, construct: String },
}

type Result<T> = std::result::Result<T, ItpError>;

/// Imports emitted after the module header.
pub const PREAMBLE: &str = "\
open import Data.Unit using (⊤)
open import Data.Empty using (⊥)
open import Data.Product using (_×_; ∃)
open import Data.Sum using (_⊎_)
open import Data.Bool using (Bool; true; false; T; not; _∧_; _∨_; if_then_else_)
open import Data.Nat as ℕ using (ℕ)
open import Data.Integer as ℤ using (ℤ)
open import Data.Rational as ℚ using (ℚ)
open import Data.Fin using (#_)
open import Data.List using (_∷_; [])
open import Relation.Binary.PropositionalEquality using (_≡_)
open import Relation.Nullary using (¬_)
open import Vehicle using (checkVehicleProperty)
open import Vehicle.Data.Tensor using (Tensor)
";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItpModule {
    pub module_name: String,
    pub text: String,
    pub digest: Digest,
    pub proof_file: String,
    pub properties: Vec<String>,
}

/// `controller` -> `ControllerSpec`.
pub fn module_name_for(stem: &str) -> String {
    let mut out = String::new();
    let mut upper = true;
    for c in stem.chars() {
        if c.is_alphanumeric() {
            if upper {
                out.extend(c.to_uppercase());
            } else {
                out.push(c);
            }
            upper = false;
        } else {
            upper = true;
        }
    }
    if out.is_empty() {
        out.push_str("Main");
    }
    out.push_str("Spec");
    out
}

pub fn emit_itp_module(program: &TypedProgram, module_name: &str, proof_file: &str) -> Result<ItpModule> {
    let mut globals: HashMap<String, Global> = HashMap::new();
    let mut blocks = Vec::new();
    let mut properties = Vec::new();
    for decl in &program.decls {
        match decl {
            TypedDecl::Synonym { name, surface, .. } => {
                blocks.push(format!("{name} : Set\n{name} = {}\n", render_stype(surface)));
            }
            TypedDecl::Network { name, surface, ty, .. } => {
                globals.insert(name.clone(), Global { rendered: name.clone(), ty: ty.clone() });
                blocks.push(format!("postulate {name} : {}\n", render_stype(surface)));
            }
            TypedDecl::Def { name, surface, ty, params, body, .. } => {
                let printer = Printer { globals: &globals, decl: name };
                if *ty == VType::Prop {
                    let statement = printer.formula(body, &mut Vec::new(), Truth::Prop, Level::Top)?;
                    blocks.push(format!(
                        "abstract\n  {name} : {statement}\n  {name} = checkVehicleProperty record\n    {{ propertyFile = \"{}\"\n    ; propertyName = \"{name}\"\n    }}\n",
                        escape(proof_file)
                    ));
                    properties.push(name.clone());
                    continue;
                }
                let rendered = if *ty.final_codomain() == VType::Prop { capitalise(name) } else { name.clone() };
                let mut scope: Vec<(String, VType)> = Vec::new();
                let mut inner = body;
                let mut arg_tys = Vec::new();
                let mut t = ty;
                while let VType::Fun(d, c) = t {
                    arg_tys.push((**d).clone());
                    t = c;
                }
                for (p, pty) in params.iter().zip(arg_tys) {
                    let Expr::Lam(_, b) = inner else { break };
                    scope.push((p.clone(), pty));
                    inner = b;
                }
                let result_truth = t.truth();
                let rhs = match result_truth {
                    Some(truth) => printer.formula(inner, &mut scope, truth, Level::Top)?,
                    None => printer.term(inner, &mut scope, Level::Top)?,
                };
                let lhs = std::iter::once(rendered.clone()).chain(params.iter().cloned()).collect::<Vec<_>>().join(" ");
                blocks.push(format!("{rendered} : {}\n{lhs} = {rhs}\n", render_stype(surface)));
                globals.insert(name.clone(), Global { rendered, ty: ty.clone() });
            }
        }
    }
    let mut text = format!("module {module_name} where\n\n{PREAMBLE}");
    for b in &blocks {
        text.push('\n');
        text.push_str(b);
    }
    let digest = hash_bytes(text.as_bytes());
    Ok(ItpModule { module_name: module_name.to_string(), text, digest, proof_file: proof_file.to_string(), properties })
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn capitalise(name: &str) -> String {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

struct Global {
    rendered: String,
    ty: VType,
}

pub fn render_stype(t: &SType) -> String {
    match t {
        SType::Bool => "Bool".into(),
        SType::Prop => "Set".into(),
        SType::Nat => "ℕ".into(),
        SType::Int => "ℤ".into(),
        SType::Rat | SType::Real => "ℚ".into(),
        SType::Named(n, _) => n.clone(),
        SType::Tensor(elem, dims) => {
            let elem = match **elem {
                SType::Fun(..) | SType::Tensor(..) => format!("({})", render_stype(elem)),
                _ => render_stype(elem),
            };
            format!("Tensor {elem} {}", render_dims(dims.iter().map(|d| *d as usize)))
        }
        SType::Fun(d, c) => {
            let dom = match **d {
                SType::Fun(..) => format!("({})", render_stype(d)),
                _ => render_stype(d),
            };
            format!("{dom} → {}", render_stype(c))
        }
    }
}

fn render_dims(dims: impl Iterator<Item = usize>) -> String {
    let mut out = String::from("(");
    for d in dims {
        out.push_str(&format!("{d} ∷ "));
    }
    out.push_str("[])");
    out
}

pub fn render_vtype(t: &VType) -> String {
    match t {
        VType::Bool => "Bool".into(),
        VType::Prop => "Set".into(),
        VType::Num(NumType::Nat) => "ℕ".into(),
        VType::Num(NumType::Int) => "ℤ".into(),
        VType::Num(NumType::Rat) => "ℚ".into(),
        VType::Tensor(elem, dims) => format!("Tensor {} {}", render_vtype(elem), render_dims(dims.iter().copied())),
        VType::Fun(d, c) => {
            let dom = match **d {
                VType::Fun(..) => format!("({})", render_vtype(d)),
                _ => render_vtype(d),
            };
            format!("{dom} → {}", render_vtype(c))
        }
    }
}

/// Rational literal: `ℤ.+ 13 ℚ./ 4`, negatives `ℚ.- (ℤ.+ 5 ℚ./ 4)`.
pub fn render_rational(value: &Rational) -> String {
    let magnitude = format!("ℤ.+ {} ℚ./ {}", value.numer().abs(), value.denom());
    if value.is_negative() {
        format!("ℚ.- ({magnitude})")
    } else {
        magnitude
    }
}

/// Binding strength, loosest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Top,
    Arrow,
    Or,
    And,
    Not,
    Cmp,
    Add,
    Mul,
    App,
    Atom,
}

struct Printer<'a> {
    globals: &'a HashMap<String, Global>,
    decl: &'a str,
}

fn paren(s: String, needed: bool) -> String {
    if needed {
        format!("({s})")
    } else {
        s
    }
}

impl Printer<'_> {
    fn unrenderable(&self, construct: &str) -> ItpError {
        ItpError::UnrenderableConstruct { decl: self.decl.to_string(), construct: construct.to_string() }
    }

    fn bind(&self, b: &Binder, scope: &[(String, VType)]) -> String {
        let mut name = b.name.clone();
        while scope.iter().any(|(n, _)| *n == name) {
            name.push('\'');
        }
        name
    }

    /// Renders a logical term in a position expecting `truth`.
    fn formula(&self, e: &Expr, scope: &mut Vec<(String, VType)>, truth: Truth, ctx: Level) -> Result<String> {
        let prop = truth == Truth::Prop;
        match e {
            Expr::Lit(Lit::Bool(b)) => Ok(match (prop, b) {
                (true, true) => "⊤".into(),
                (true, false) => "⊥".into(),
                (false, true) => "true".into(),
                (false, false) => "false".into(),
            }),
            Expr::Quant(q, b, body) => {
                let name = self.bind(b, scope);
                let head = match q {
                    Quantifier::Forall => format!("∀ ({name} : {}) →", render_vtype(&b.ty)),
                    Quantifier::Exists => format!("∃ λ ({name} : {}) →", render_vtype(&b.ty)),
                };
                scope.push((name, b.ty.clone()));
                let body = self.formula(body, scope, Truth::Prop, Level::Top);
                scope.pop();
                Ok(paren(format!("{head} {}", body?), ctx > Level::Top))
            }
            Expr::Builtin(op, args) if op.truth().is_some() && !matches!(op, Builtin::Cmp(..)) => {
                let t = op.truth().unwrap();
                let rendered = match op {
                    Builtin::Not(_) => {
                        let arg = self.formula(&args[0], scope, t, Level::App)?;
                        let kw = if t == Truth::Prop { "¬" } else { "not" };
                        paren(format!("{kw} {arg}"), ctx > Level::Not)
                    }
                    Builtin::Implies(_) => {
                        let l = self.formula(&args[0], scope, t, Level::Or)?;
                        let r = self.formula(&args[1], scope, t, Level::Arrow)?;
                        let sym = if t == Truth::Prop { "→" } else { "⇒" };
                        paren(format!("{l} {sym} {r}"), ctx > Level::Arrow)
                    }
                    Builtin::And(_) | Builtin::Or(_) => {
                        let (sym, level) = match (op, t) {
                            (Builtin::And(_), Truth::Prop) => ("×", Level::And),
                            (Builtin::And(_), Truth::Bool) => ("∧", Level::And),
                            (_, Truth::Prop) => ("⊎", Level::Or),
                            _ => ("∨", Level::Or),
                        };
                        let operand = |a: &Expr, scope: &mut Vec<(String, VType)>| -> Result<String> {
                            if matches!(a, Expr::Builtin(o, _) if o == op) {
                                Ok(format!("({})", self.formula(a, scope, t, Level::Top)?))
                            } else {
                                self.formula(a, scope, t, level)
                            }
                        };
                        let l = operand(&args[0], scope)?;
                        let r = operand(&args[1], scope)?;
                        paren(format!("{l} {sym} {r}"), ctx >= level)
                    }
                    _ => unreachable!(),
                };
                Ok(self.coerce(rendered, t, truth))
            }
            Expr::Builtin(Builtin::Cmp(op, t), args) => {
                let num = self.num_type(&args[0], scope).max(self.num_type(&args[1], scope));
                let l = self.term(&args[0], scope, Level::Cmp)?;
                let r = self.term(&args[1], scope, Level::Cmp)?;
                let sym = cmp_symbol(*op, *t, num);
                let rendered = paren(format!("{l} {sym} {r}"), ctx >= Level::Cmp);
                Ok(self.coerce(rendered, *t, truth))
            }
            Expr::Builtin(Builtin::If, args) => {
                let c = self.formula(&args[0], scope, Truth::Bool, Level::Top)?;
                let a = self.formula(&args[1], scope, truth, Level::Top)?;
                let b = self.formula(&args[2], scope, truth, Level::Top)?;
                Ok(paren(format!("if {c} then {a} else {b}"), ctx > Level::Top))
            }
            other => {
                let rendered = self.term(other, scope, if prop { Level::App } else { ctx })?;
                let is_bool = self.value_type(other, scope) == Some(VType::Bool);
                if prop && is_bool {
                    Ok(paren(format!("T {rendered}"), ctx >= Level::App))
                } else if prop {
                    self.term(other, scope, ctx)
                } else {
                    Ok(rendered)
                }
            }
        }
    }

    fn coerce(&self, rendered: String, actual: Truth, expected: Truth) -> String {
        if actual == Truth::Bool && expected == Truth::Prop {
            let inner = if rendered.starts_with('(') { rendered } else { format!("({rendered})") };
            format!("T {inner}")
        } else {
            rendered
        }
    }

    /// Renders a numeric or tensor term.
    fn term(&self, e: &Expr, scope: &mut Vec<(String, VType)>, ctx: Level) -> Result<String> {
        match e {
            Expr::Var(i) => {
                let (name, _) = &scope[scope.len() - 1 - i];
                Ok(name.clone())
            }
            Expr::Free(n) | Expr::Network(n) => {
                Ok(self.globals.get(n).map(|g| g.rendered.clone()).unwrap_or_else(|| n.clone()))
            }
            Expr::Lit(Lit::Num(ty, value)) => Ok(match ty {
                NumType::Rat => {
                    let arith = ctx >= Level::Add;
                    paren(render_rational(value), arith)
                }
                NumType::Int => {
                    let s = if value.is_negative() {
                        format!("ℤ.- (ℤ.+ {})", value.numer().abs())
                    } else {
                        format!("ℤ.+ {}", value.numer())
                    };
                    paren(s, ctx >= Level::Add)
                }
                NumType::Nat => value.numer().to_string(),
            }),
            Expr::Lit(Lit::Bool(_)) => self.formula(e, scope, Truth::Bool, ctx),
            Expr::Builtin(Builtin::Arith(op, ty), args) => {
                let level = match op {
                    ArithOp::Add | ArithOp::Sub => Level::Add,
                    ArithOp::Mul | ArithOp::Div => Level::Mul,
                };
                let prefix = num_prefix(*ty);
                let l = self.arith_operand(&args[0], scope, level)?;
                let r = self.arith_operand(&args[1], scope, level)?;
                Ok(paren(format!("{l} {prefix}.{} {r}", op.symbol()), ctx > level))
            }
            Expr::Builtin(Builtin::Neg(ty), args) => {
                let arg = self.term(&args[0], scope, Level::App)?;
                Ok(paren(format!("{}.- {arg}", num_prefix(*ty)), ctx >= Level::Add))
            }
            Expr::Builtin(..) | Expr::Quant(..) => self.formula(e, scope, Truth::Bool, ctx),
            Expr::App(..) => {
                let mut spine = Vec::new();
                let mut head = e;
                while let Expr::App(f, a) = head {
                    spine.push(&**a);
                    head = f;
                }
                spine.reverse();
                let mut parts = vec![self.term(head, scope, Level::App)?];
                for a in spine {
                    parts.push(self.arg(a, scope)?);
                }
                Ok(paren(parts.join(" "), ctx >= Level::App))
            }
            Expr::Index(t, i) => {
                let t = self.term(t, scope, Level::App)?;
                let i = match &**i {
                    Expr::Lit(Lit::Num(_, k)) => format!("(# {})", k.numer()),
                    other => format!("({})", self.term(other, scope, Level::Top)?),
                };
                Ok(paren(format!("{t} {i}"), ctx >= Level::App))
            }
            Expr::Tensor(items) => {
                let mut out = String::from("(");
                for item in items {
                    out.push_str(&self.term(item, scope, Level::Cmp)?);
                    out.push_str(" ∷ ");
                }
                out.push_str("[])");
                Ok(out)
            }
            Expr::Lam(b, body) => {
                let name = self.bind(b, scope);
                scope.push((name.clone(), b.ty.clone()));
                let body = self.term(body, scope, Level::Top);
                scope.pop();
                Ok(paren(format!("λ {name} → {}", body?), ctx > Level::Top))
            }
            Expr::Solver(_) => Err(self.unrenderable("a solver variable")),
            Expr::Let(..) => Err(self.unrenderable("a let binding")),
            Expr::NetworkApp(..) => Err(self.unrenderable("an analysed network application")),
        }
    }

    fn arith_operand(&self, e: &Expr, scope: &mut Vec<(String, VType)>, level: Level) -> Result<String> {
        let inner_level = match e {
            Expr::Builtin(Builtin::Arith(ArithOp::Add | ArithOp::Sub, _), _) => Some(Level::Add),
            Expr::Builtin(Builtin::Arith(ArithOp::Mul | ArithOp::Div, _), _) => Some(Level::Mul),
            _ => None,
        };
        match inner_level {
            Some(l) if l <= level => Ok(format!("({})", self.term(e, scope, Level::Top)?)),
            Some(_) => self.term(e, scope, Level::Top),
            None => self.term(e, scope, level),
        }
    }

    fn arg(&self, e: &Expr, scope: &mut Vec<(String, VType)>) -> Result<String> {
        let s = self.term(e, scope, Level::Atom)?;
        let atomic = matches!(e, Expr::Var(_) | Expr::Free(_) | Expr::Network(_) | Expr::Tensor(_))
            || matches!(e, Expr::Lit(Lit::Num(NumType::Nat, _)))
            || s.starts_with('(');
        Ok(if atomic { s } else { format!("({s})") })
    }

    fn value_type(&self, e: &Expr, scope: &[(String, VType)]) -> Option<VType> {
        match e {
            Expr::Var(i) => scope.get(scope.len().checked_sub(1 + i)?).map(|(_, t)| t.clone()),
            Expr::Free(n) | Expr::Network(n) => self.globals.get(n).map(|g| g.ty.clone()),
            Expr::App(f, _) => match self.value_type(f, scope)? {
                VType::Fun(_, c) => Some(*c),
                _ => None,
            },
            Expr::Index(t, _) => match self.value_type(t, scope)? {
                VType::Tensor(elem, dims) if dims.len() <= 1 => Some(*elem),
                VType::Tensor(elem, dims) => Some(VType::Tensor(elem, dims[1..].to_vec())),
                _ => None,
            },
            Expr::Lit(Lit::Bool(_)) => Some(VType::Bool),
            Expr::Lit(Lit::Num(t, _)) => Some(VType::Num(*t)),
            Expr::Builtin(Builtin::Arith(_, t) | Builtin::Neg(t), _) => Some(VType::Num(*t)),
            Expr::Builtin(op, _) => match op.truth()? {
                Truth::Bool => Some(VType::Bool),
                Truth::Prop => Some(VType::Prop),
            },
            _ => None,
        }
    }

    fn num_type(&self, e: &Expr, scope: &[(String, VType)]) -> NumType {
        self.value_type(e, scope).and_then(|t| t.num()).unwrap_or(NumType::Nat)
    }
}

fn num_prefix(t: NumType) -> &'static str {
    match t {
        NumType::Nat => "ℕ",
        NumType::Int => "ℤ",
        NumType::Rat => "ℚ",
    }
}

fn cmp_symbol(op: CmpOp, t: Truth, num: NumType) -> String {
    let prefix = num_prefix(num);
    let base = match op {
        CmpOp::Le => "≤",
        CmpOp::Lt => "<",
        CmpOp::Ge => "≥",
        CmpOp::Gt => ">",
        CmpOp::Eq => "≡",
    };
    match (op, t) {
        (CmpOp::Eq, Truth::Prop) => "≡".into(),
        (_, Truth::Prop) => format!("{prefix}.{base}"),
        (_, Truth::Bool) => format!("{prefix}.{base}ᵇ"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_traits::Zero;

    #[test]
    fn rationals() {
        assert_eq!(render_rational(&rat(13, 4)), "ℤ.+ 13 ℚ./ 4");
        assert_eq!(render_rational(&rat(-5, 4)), "ℚ.- (ℤ.+ 5 ℚ./ 4)");
        assert_eq!(render_rational(&rat(2, 1)), "ℤ.+ 2 ℚ./ 1");
        assert!(render_rational(&Rational::zero()).starts_with("ℤ.+ 0"));
    }

    #[test]
    fn module_names() {
        assert_eq!(module_name_for("controller"), "ControllerSpec");
        assert_eq!(module_name_for("acas-xu"), "AcasXuSpec");
    }
}
