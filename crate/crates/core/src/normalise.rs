//! Normalisation by evaluation.
//!
//! Terms are evaluated into a semantic domain where top-level definitions
//! are inlined, beta-redexes are contracted and builtins applied to
//! literals are folded, then quoted back into syntax. Quoting a
//! quantifier over a tensor expands it into one scalar quantifier per
//! element, named `x_<i>_<j>...`; quantifiers over `Bool` become a
//! conjunction or disjunction of both instances.

use std::collections::HashMap;
use std::rc::Rc;

use num_traits::Zero;
use thiserror::Error;

use crate::diagnostics::{Diagnostic, Span};
use crate::expr::{
    ArithOp, Binder, Builtin, CmpOp, Expr, Lit, NumType, Quantifier, SolverVar, Truth, VType,
};
use crate::frontend::{TypedDecl, TypedProgram};
use crate::network::NetworkContext;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormError {
    #[error("index {index} is out of bounds for a tensor of size {size}")]
    IndexOutOfBounds { index: String, size: usize },
    #[error("tensor index must be a literal, found `{0}`")]
    NonLiteralIndex(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("unknown definition `{0}`")]
    UnknownDefinition(String),
}

type Result<T> = std::result::Result<T, NormError>;

/// Definitions available for inlining, and output widths of networks.
#[derive(Debug, Clone, Default)]
pub struct NormEnv {
    pub defs: HashMap<String, Expr>,
    pub network_outputs: HashMap<String, usize>,
}

impl NormEnv {
    pub fn new(program: &TypedProgram, ctx: &NetworkContext) -> NormEnv {
        let defs = program
            .defs()
            .map(|(name, _, body)| (name.to_string(), body.clone()))
            .collect();
        let network_outputs = ctx
            .entries
            .iter()
            .map(|(name, entry)| (name.clone(), entry.output_size()))
            .collect();
        NormEnv { defs, network_outputs }
    }
}

#[derive(Debug, Clone)]
struct Closure {
    env: Env,
    body: Rc<Expr>,
}

type Env = Rc<Vec<Value>>;

#[derive(Debug, Clone)]
enum Value {
    Lit(Lit),
    Tensor(Vec<Value>),
    Lam(Binder, Closure),
    Neutral(Neutral),
}

#[derive(Debug, Clone)]
enum Neutral {
    /// de Bruijn level
    Var(usize),
    Solver(SolverVar),
    Builtin(Builtin, Vec<Value>),
    App(Box<Neutral>, Box<Value>),
    NetworkApp(String, Box<Value>),
    Index(Box<Neutral>, usize),
    Quant(Quantifier, Binder, Closure),
}

fn extend(env: &Env, value: Value) -> Env {
    let mut items = (**env).clone();
    items.push(value);
    Rc::new(items)
}

fn num_lit(ty: NumType, value: crate::scalar::Rational) -> Value {
    Value::Lit(Lit::Num(ty, value))
}

struct Normaliser<'a> {
    env: &'a NormEnv,
}

impl Normaliser<'_> {
    fn eval(&self, e: &Expr, env: &Env) -> Result<Value> {
        Ok(match e {
            Expr::Var(i) => env[env.len() - 1 - i].clone(),
            Expr::Free(name) => {
                let body = self.env.defs.get(name).ok_or_else(|| NormError::UnknownDefinition(name.clone()))?;
                self.eval(body, &Rc::new(Vec::new()))?
            }
            Expr::Network(name) => return Err(NormError::UnknownDefinition(name.clone())),
            Expr::Solver(v) => Value::Neutral(Neutral::Solver(*v)),
            Expr::Lit(l) => Value::Lit(l.clone()),
            Expr::Tensor(items) => Value::Tensor(items.iter().map(|i| self.eval(i, env)).collect::<Result<_>>()?),
            Expr::Builtin(Builtin::If, args) => {
                let cond = self.eval(&args[0], env)?;
                match cond {
                    Value::Lit(Lit::Bool(true)) => self.eval(&args[1], env)?,
                    Value::Lit(Lit::Bool(false)) => self.eval(&args[2], env)?,
                    cond => Value::Neutral(Neutral::Builtin(
                        Builtin::If,
                        vec![cond, self.eval(&args[1], env)?, self.eval(&args[2], env)?],
                    )),
                }
            }
            Expr::Builtin(op, args) => {
                let args = args.iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>>>()?;
                self.apply_builtin(*op, args)?
            }
            Expr::App(f, a) => {
                let f = self.eval(f, env)?;
                let a = self.eval(a, env)?;
                self.apply(f, a)?
            }
            Expr::Lam(b, body) => Value::Lam(b.clone(), Closure { env: env.clone(), body: Rc::new((**body).clone()) }),
            Expr::Quant(q, b, body) => Value::Neutral(Neutral::Quant(
                *q,
                b.clone(),
                Closure { env: env.clone(), body: Rc::new((**body).clone()) },
            )),
            Expr::Let(_, bound, body) => {
                let v = self.eval(bound, env)?;
                self.eval(body, &extend(env, v))?
            }
            Expr::NetworkApp(name, arg) => {
                let arg = self.eval(arg, env)?;
                let app = Neutral::NetworkApp(name.clone(), Box::new(arg));
                match self.env.network_outputs.get(name) {
                    Some(&n) => Value::Tensor(
                        (0..n).map(|k| Value::Neutral(Neutral::Index(Box::new(app.clone()), k))).collect(),
                    ),
                    None => Value::Neutral(app),
                }
            }
            Expr::Index(t, i) => {
                let t = self.eval(t, env)?;
                let i = self.eval(i, env)?;
                self.index(t, i)?
            }
        })
    }

    fn apply(&self, f: Value, a: Value) -> Result<Value> {
        match f {
            Value::Lam(_, c) => self.eval(&c.body, &extend(&c.env, a)),
            Value::Neutral(n) => Ok(Value::Neutral(Neutral::App(Box::new(n), Box::new(a)))),
            other => unreachable!("applying a non-function {other:?}"),
        }
    }

    fn index(&self, t: Value, i: Value) -> Result<Value> {
        let k = match &i {
            Value::Lit(Lit::Num(_, q)) if q.is_integer() => q.to_integer(),
            other => return Err(NormError::NonLiteralIndex(quote_error_text(other))),
        };
        match t {
            Value::Tensor(items) => {
                let size = items.len();
                usize::try_from(&k)
                    .ok()
                    .and_then(|k| items.into_iter().nth(k))
                    .ok_or(NormError::IndexOutOfBounds { index: k.to_string(), size })
            }
            Value::Neutral(n) => {
                let k = usize::try_from(&k).map_err(|_| NormError::IndexOutOfBounds { index: k.to_string(), size: 0 })?;
                Ok(Value::Neutral(Neutral::Index(Box::new(n), k)))
            }
            other => unreachable!("indexing a non-tensor {other:?}"),
        }
    }

    fn apply_builtin(&self, op: Builtin, args: Vec<Value>) -> Result<Value> {
        use Value::Lit as L;
        let folded = match (op, args.as_slice()) {
            (Builtin::Not(_), [L(Lit::Bool(a))]) => Some(Value::Lit(Lit::Bool(!a))),
            (Builtin::And(_), [L(Lit::Bool(a)), L(Lit::Bool(b))]) => Some(Value::Lit(Lit::Bool(*a && *b))),
            (Builtin::Or(_), [L(Lit::Bool(a)), L(Lit::Bool(b))]) => Some(Value::Lit(Lit::Bool(*a || *b))),
            (Builtin::Implies(_), [L(Lit::Bool(a)), L(Lit::Bool(b))]) => Some(Value::Lit(Lit::Bool(!a || *b))),
            (Builtin::Cmp(c, _), [L(Lit::Num(_, a)), L(Lit::Num(_, b))]) => Some(Value::Lit(Lit::Bool(c.holds(a, b)))),
            (Builtin::Cmp(CmpOp::Eq, _), [L(Lit::Bool(a)), L(Lit::Bool(b))]) => Some(Value::Lit(Lit::Bool(a == b))),
            (Builtin::Arith(a, ty), [L(Lit::Num(_, x)), L(Lit::Num(_, y))]) => Some(num_lit(
                ty,
                match a {
                    ArithOp::Add => x + y,
                    ArithOp::Sub => x - y,
                    ArithOp::Mul => x * y,
                    ArithOp::Div => {
                        if y.is_zero() {
                            return Err(NormError::DivisionByZero);
                        }
                        x / y
                    }
                },
            )),
            (Builtin::Neg(ty), [L(Lit::Num(_, x))]) => Some(num_lit(ty, -x)),
            _ => None,
        };
        if let Some(v) = folded {
            return Ok(v);
        }
        if let (Builtin::Cmp(CmpOp::Eq, truth), [a, b]) = (op, args.as_slice()) {
            if let Some(v) = self.tensor_equality(truth, a, b)? {
                return Ok(v);
            }
        }
        Ok(Value::Neutral(Neutral::Builtin(op, args)))
    }

    /// Elementwise expansion of `==` between tensors.
    fn tensor_equality(&self, truth: Truth, a: &Value, b: &Value) -> Result<Option<Value>> {
        let len = match (a, b) {
            (Value::Tensor(x), _) => x.len(),
            (_, Value::Tensor(y)) => y.len(),
            _ => return Ok(None),
        };
        let element = |v: &Value, k: usize| -> Result<Value> {
            match v {
                Value::Tensor(items) => Ok(items[k].clone()),
                other => self.index(other.clone(), num_lit(NumType::Nat, crate::scalar::Rational::from_integer(k.into()))),
            }
        };
        let mut acc: Option<Value> = None;
        for k in 0..len {
            let eq = self.apply_builtin(Builtin::Cmp(CmpOp::Eq, truth), vec![element(a, k)?, element(b, k)?])?;
            acc = Some(match acc {
                None => eq,
                Some(prev) => self.apply_builtin(Builtin::And(truth), vec![prev, eq])?,
            });
        }
        Ok(Some(acc.unwrap_or(Value::Lit(Lit::Bool(true)))))
    }

    fn quote(&self, v: &Value, depth: usize) -> Result<Expr> {
        Ok(match v {
            Value::Lit(l) => Expr::Lit(l.clone()),
            Value::Tensor(items) => Expr::Tensor(items.iter().map(|i| self.quote(i, depth)).collect::<Result<_>>()?),
            Value::Lam(b, c) => {
                let body = self.eval(&c.body, &extend(&c.env, Value::Neutral(Neutral::Var(depth))))?;
                Expr::Lam(b.clone(), Box::new(self.quote(&body, depth + 1)?))
            }
            Value::Neutral(n) => self.quote_neutral(n, depth)?,
        })
    }

    fn quote_neutral(&self, n: &Neutral, depth: usize) -> Result<Expr> {
        Ok(match n {
            Neutral::Var(level) => Expr::Var(depth - 1 - level),
            Neutral::Solver(v) => Expr::Solver(*v),
            Neutral::Builtin(op, args) => {
                Expr::Builtin(*op, args.iter().map(|a| self.quote(a, depth)).collect::<Result<_>>()?)
            }
            Neutral::App(f, a) => Expr::app(self.quote_neutral(f, depth)?, self.quote(a, depth)?),
            Neutral::NetworkApp(name, arg) => Expr::NetworkApp(name.clone(), Box::new(self.quote(arg, depth)?)),
            Neutral::Index(t, k) => Expr::index(self.quote_neutral(t, depth)?, *k),
            Neutral::Quant(q, b, c) => self.quote_quantifier(*q, b, c, depth)?,
        })
    }

    fn quote_quantifier(&self, q: Quantifier, binder: &Binder, c: &Closure, depth: usize) -> Result<Expr> {
        match &binder.ty {
            VType::Tensor(elem, dims) => {
                let count: usize = dims.iter().product();
                let mut next = depth;
                let value = build_tensor(dims, &mut next);
                let body = self.eval(&c.body, &extend(&c.env, value))?;
                let body = self.quote(&body, depth + count)?;
                let binders: Vec<Binder> = (0..count)
                    .map(|flat| Binder::new(element_name(&binder.name, dims, flat), (**elem).clone()))
                    .collect();
                Ok(Expr::wrap_quantifiers(q, &binders, body))
            }
            VType::Bool => {
                let instance = |b: bool| -> Result<Expr> {
                    let body = self.eval(&c.body, &extend(&c.env, Value::Lit(Lit::Bool(b))))?;
                    self.quote(&body, depth)
                };
                let joined = match q {
                    Quantifier::Forall => Builtin::And(Truth::Prop),
                    Quantifier::Exists => Builtin::Or(Truth::Prop),
                };
                let (t, f) = (instance(true)?, instance(false)?);
                Ok(match (t.as_bool(), f.as_bool()) {
                    (Some(a), Some(b)) => Expr::bool(match q {
                        Quantifier::Forall => a && b,
                        Quantifier::Exists => a || b,
                    }),
                    _ => Expr::Builtin(joined, vec![t, f]),
                })
            }
            _ => {
                let body = self.eval(&c.body, &extend(&c.env, Value::Neutral(Neutral::Var(depth))))?;
                Ok(Expr::quant(q, binder.clone(), self.quote(&body, depth + 1)?))
            }
        }
    }
}

/// Nested tensor of fresh variables at consecutive levels.
fn build_tensor(dims: &[usize], next: &mut usize) -> Value {
    match dims.split_first() {
        None => {
            let v = Value::Neutral(Neutral::Var(*next));
            *next += 1;
            v
        }
        Some((d, rest)) => Value::Tensor((0..*d).map(|_| build_tensor(rest, next)).collect()),
    }
}

/// `x_<i1>_..._<ik>` for the element at row-major position `flat`.
pub fn element_name(base: &str, dims: &[usize], flat: usize) -> String {
    let mut indices = vec![0; dims.len()];
    let mut rest = flat;
    for (slot, d) in indices.iter_mut().zip(dims).rev() {
        *slot = rest % d;
        rest /= d;
    }
    let mut name = base.to_string();
    for i in indices {
        name.push('_');
        name.push_str(&i.to_string());
    }
    name
}

fn quote_error_text(v: &Value) -> String {
    let n = Normaliser { env: &NormEnv::default() };
    n.quote(v, 64).map(|e| e.to_string()).unwrap_or_else(|_| "<term>".into())
}

/// Normalises a closed term.
pub fn normalise(expr: &Expr, env: &NormEnv) -> Result<Expr> {
    normalise_open(expr, 0, env)
}

/// Normalises a term with `free` free variables, which are left in place.
pub fn normalise_open(expr: &Expr, free: usize, env: &NormEnv) -> Result<Expr> {
    let n = Normaliser { env };
    let scope: Env = Rc::new((0..free).map(|l| Value::Neutral(Neutral::Var(l))).collect());
    let value = n.eval(expr, &scope)?;
    n.quote(&value, free)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalisedProperty {
    pub name: String,
    pub expr: Expr,
    pub span: Span,
}

/// Normalises every `Prop` declaration, in source order. Other
/// declarations have been inlined and are dropped. Returns a warning when
/// there is nothing left.
pub fn prune_non_prop(
    program: &TypedProgram,
    env: &NormEnv,
) -> std::result::Result<(Vec<NormalisedProperty>, Vec<Diagnostic>), (String, NormError)> {
    let mut out = Vec::new();
    for decl in &program.decls {
        if let TypedDecl::Def { name, ty: VType::Prop, body, span, .. } = decl {
            let expr = normalise(body, env).map_err(|e| (name.clone(), e))?;
            out.push(NormalisedProperty { name: name.clone(), expr, span: *span });
        }
    }
    let mut warnings = Vec::new();
    if out.is_empty() {
        warnings.push(Diagnostic::warning(None, "specification declares no properties of type `Prop`"));
    }
    Ok((out, warnings))
}

/// Renders normalised properties in surface syntax.
pub fn print_normalised(props: &[NormalisedProperty]) -> String {
    let mut out = String::new();
    for (i, p) in props.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("{} : Prop\n{} = {}\n", p.name, p.name, p.expr));
    }
    out
}
