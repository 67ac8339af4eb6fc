#![allow(dead_code)]

//! Random specification fragments with an independent semantics, and a
//! reference evaluator for core terms.

use std::collections::BTreeMap;

use proptest::prelude::*;
use vspec_core::expr::{ArithOp, Builtin, CmpOp, Expr, Lit, SolverVar};
use vspec_core::network::NetworkContext;
use vspec_core::scalar::{rat, render_rational};
use vspec_core::Rational;

pub const VARS: usize = 4;

/// Helper definition included in every generated program.
pub const PRELUDE: &str = "double : Rat -> Rat\ndouble z = z + z\n\n";

/// Network used by generated terms that apply one.
pub const NET_DECL: &str = "network f : Tensor Rat [1] -> Tensor Rat [1]\n\n";

#[derive(Clone, Debug)]
pub enum Term {
    Var(usize),
    Const(Rational),
    Add(Box<Term>, Box<Term>),
    Sub(Box<Term>, Box<Term>),
    Scale(Rational, Box<Term>),
    Double(Box<Term>),
    If(Box<Formula>, Box<Term>, Box<Term>),
    /// `f [t] ! 0`.
    Net(Box<Term>),
}

#[derive(Clone, Debug)]
pub enum Formula {
    Cmp(CmpOp, Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    If(Box<Formula>, Box<Formula>, Box<Formula>),
}

fn literal(r: &Rational) -> String {
    let s = if r.is_integer() { r.numer().to_string() } else { render_rational(r) };
    format!("({s})")
}

impl Term {
    pub fn render(&self) -> String {
        match self {
            Term::Var(i) => format!("v{i}"),
            Term::Const(c) => literal(c),
            Term::Add(a, b) => format!("({} + {})", a.render(), b.render()),
            Term::Sub(a, b) => format!("({} - {})", a.render(), b.render()),
            Term::Scale(c, t) => format!("({} * {})", literal(c), t.render()),
            Term::Double(t) => format!("(double {})", t.render()),
            Term::If(c, a, b) => format!("(if {} then {} else {})", c.render(), a.render(), b.render()),
            Term::Net(t) => format!("(f [{}] ! 0)", t.render()),
        }
    }

    pub fn eval(&self, env: &[Rational], net: &dyn Fn(&Rational) -> Rational) -> Rational {
        match self {
            Term::Var(i) => env[*i].clone(),
            Term::Const(c) => c.clone(),
            Term::Add(a, b) => a.eval(env, net) + b.eval(env, net),
            Term::Sub(a, b) => a.eval(env, net) - b.eval(env, net),
            Term::Scale(c, t) => c * t.eval(env, net),
            Term::Double(t) => t.eval(env, net) * rat(2, 1),
            Term::If(c, a, b) => {
                if c.eval(env, net) {
                    a.eval(env, net)
                } else {
                    b.eval(env, net)
                }
            }
            Term::Net(t) => net(&t.eval(env, net)),
        }
    }
}

impl Formula {
    pub fn render(&self) -> String {
        match self {
            Formula::Cmp(op, a, b) => format!("({} {} {})", a.render(), op.symbol(), b.render()),
            Formula::And(a, b) => format!("({} and {})", a.render(), b.render()),
            Formula::Or(a, b) => format!("({} or {})", a.render(), b.render()),
            Formula::Implies(a, b) => format!("({} => {})", a.render(), b.render()),
            Formula::Not(a) => format!("(not {})", a.render()),
            Formula::If(c, a, b) => format!("(if {} then {} else {})", c.render(), a.render(), b.render()),
        }
    }

    pub fn eval(&self, env: &[Rational], net: &dyn Fn(&Rational) -> Rational) -> bool {
        match self {
            Formula::Cmp(op, a, b) => op.holds(&a.eval(env, net), &b.eval(env, net)),
            Formula::And(a, b) => a.eval(env, net) && b.eval(env, net),
            Formula::Or(a, b) => a.eval(env, net) || b.eval(env, net),
            Formula::Implies(a, b) => !a.eval(env, net) || b.eval(env, net),
            Formula::Not(a) => !a.eval(env, net),
            Formula::If(c, a, b) => {
                if c.eval(env, net) {
                    a.eval(env, net)
                } else {
                    b.eval(env, net)
                }
            }
        }
    }
}

/// Multiples of 1/2 in [-3, 3].
pub fn half() -> impl Strategy<Value = Rational> {
    (-6i64..=6).prop_map(|n| rat(n, 2))
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![Just(CmpOp::Le), Just(CmpOp::Lt), Just(CmpOp::Ge), Just(CmpOp::Gt), Just(CmpOp::Eq)]
}

fn leaf() -> BoxedStrategy<Term> {
    prop_oneof![3 => (0..VARS).prop_map(Term::Var), 1 => half().prop_map(Term::Const)].boxed()
}

/// Comparison of leaves; used for conditions, which may not mention a
/// network.
fn simple_atom() -> BoxedStrategy<Formula> {
    (cmp_op(), leaf(), leaf()).prop_map(|(op, a, b)| Formula::Cmp(op, a, b)).boxed()
}

pub fn term(with_net: bool) -> BoxedStrategy<Term> {
    leaf()
        .prop_recursive(2, 6, 2, move |inner| {
            let mut options: Vec<BoxedStrategy<Term>> = vec![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Add(Box::new(a), Box::new(b))).boxed(),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::Sub(Box::new(a), Box::new(b))).boxed(),
                (half(), inner.clone()).prop_map(|(c, t)| Term::Scale(c, Box::new(t))).boxed(),
                inner.clone().prop_map(|t| Term::Double(Box::new(t))).boxed(),
                (simple_atom(), inner.clone(), inner.clone())
                    .prop_map(|(c, a, b)| Term::If(Box::new(c), Box::new(a), Box::new(b)))
                    .boxed(),
            ];
            if with_net {
                // leaf arguments make repeated applications likely
                options.push(leaf().prop_map(|t| Term::Net(Box::new(t))).boxed());
                options.push(inner.prop_map(|t| Term::Net(Box::new(t))).boxed());
            }
            proptest::strategy::Union::new(options)
        })
        .boxed()
}

pub fn formula(with_net: bool) -> BoxedStrategy<Formula> {
    let atom = (cmp_op(), term(with_net), term(with_net)).prop_map(|(op, a, b)| Formula::Cmp(op, a, b));
    atom.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| Formula::Not(Box::new(a))),
            (simple_atom(), inner.clone(), inner)
                .prop_map(|(c, a, b)| Formula::If(Box::new(c), Box::new(a), Box::new(b))),
        ]
    })
    .boxed()
}

pub fn assignment() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(half(), VARS)
}

/// `p : Prop` quantifying all variables universally.
pub fn property_source(p: &Formula, with_net: bool) -> String {
    let net = if with_net { NET_DECL } else { "" };
    format!("{net}{PRELUDE}p : Prop\np = forall (v0 v1 v2 v3 : Rat) . {}\n", p.render())
}

/// A Bool-valued function of the variables.
pub fn function_source(p: &Formula) -> String {
    format!("{PRELUDE}g : Rat -> Rat -> Rat -> Rat -> Bool\ng v0 v1 v2 v3 = {}\n", p.render())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Val {
    Num(Rational),
    Bool(bool),
    Tensor(Vec<Val>),
    Closure(Vec<Val>, Expr),
}

impl Val {
    pub fn num(&self) -> &Rational {
        match self {
            Val::Num(q) => q,
            other => panic!("expected a number, got {other:?}"),
        }
    }

    pub fn bool(&self) -> bool {
        match self {
            Val::Bool(b) => *b,
            other => panic!("expected a boolean, got {other:?}"),
        }
    }
}

/// Reference evaluator for quantifier-free core terms. `env` holds de
/// Bruijn values with index 0 last.
pub struct Evaluator<'a> {
    pub defs: BTreeMap<String, Expr>,
    pub networks: &'a NetworkContext,
    pub solver: BTreeMap<SolverVar, Rational>,
}

impl<'a> Evaluator<'a> {
    pub fn new(networks: &'a NetworkContext) -> Self {
        Evaluator { defs: BTreeMap::new(), networks, solver: BTreeMap::new() }
    }

    pub fn apply(&self, f: Val, arg: Val) -> Val {
        match f {
            Val::Closure(mut env, body) => {
                env.push(arg);
                self.eval(&body, &mut env)
            }
            other => panic!("applying a non-function {other:?}"),
        }
    }

    pub fn eval(&self, e: &Expr, env: &mut Vec<Val>) -> Val {
        match e {
            Expr::Var(i) => env[env.len() - 1 - i].clone(),
            Expr::Free(name) => self.eval(&self.defs[name], &mut Vec::new()),
            Expr::Solver(v) => Val::Num(self.solver[v].clone()),
            Expr::Lit(Lit::Bool(b)) => Val::Bool(*b),
            Expr::Lit(Lit::Num(_, q)) => Val::Num(q.clone()),
            Expr::Tensor(items) => Val::Tensor(items.iter().map(|x| self.eval(x, env)).collect()),
            Expr::Lam(_, body) => Val::Closure(env.clone(), (**body).clone()),
            Expr::App(f, a) => {
                let f = self.eval(f, env);
                let a = self.eval(a, env);
                self.apply(f, a)
            }
            Expr::Let(_, a, body) => {
                let v = self.eval(a, env);
                env.push(v);
                let out = self.eval(body, env);
                env.pop();
                out
            }
            Expr::Index(t, i) => {
                let Val::Tensor(items) = self.eval(t, env) else { panic!("indexing a non-tensor") };
                let i = self.eval(i, env).num().to_integer();
                items[usize::try_from(i).unwrap()].clone()
            }
            Expr::NetworkApp(name, arg) => {
                let Val::Tensor(items) = self.eval(arg, env) else { panic!("network argument is not a tensor") };
                let input: Vec<Rational> = items.iter().map(|v| v.num().clone()).collect();
                let model = &self.networks.get(name).expect("known network").model;
                // straightforward layer-by-layer interpretation
                let mut values = input;
                for layer in &model.layers {
                    values = match layer {
                        vspec_core::network::Layer::Affine { weights, bias } => weights
                            .iter()
                            .zip(bias)
                            .map(|(row, b)| row.iter().zip(&values).fold(b.clone(), |acc, (w, x)| acc + w * x))
                            .collect(),
                        vspec_core::network::Layer::Relu => {
                            values.into_iter().map(|v| if v < rat(0, 1) { rat(0, 1) } else { v }).collect()
                        }
                    };
                }
                Val::Tensor(values.into_iter().map(Val::Num).collect())
            }
            Expr::Builtin(op, args) => self.builtin(*op, args, env),
            Expr::Network(n) => panic!("unapplied network {n}"),
            Expr::Quant(..) => panic!("quantifiers are not evaluated"),
        }
    }

    fn builtin(&self, op: Builtin, args: &[Expr], env: &mut Vec<Val>) -> Val {
        let mut arg = |i: usize| self.eval(&args[i], env);
        match op {
            Builtin::Not(_) => Val::Bool(!arg(0).bool()),
            Builtin::And(_) => Val::Bool(arg(0).bool() && arg(1).bool()),
            Builtin::Or(_) => Val::Bool(arg(0).bool() || arg(1).bool()),
            Builtin::Implies(_) => Val::Bool(!arg(0).bool() || arg(1).bool()),
            Builtin::Cmp(c, _) => {
                let (a, b) = (arg(0), arg(1));
                match (&a, &b) {
                    (Val::Num(x), Val::Num(y)) => Val::Bool(c.holds(x, y)),
                    _ if c == CmpOp::Eq => Val::Bool(a == b),
                    _ => panic!("ordering non-numbers"),
                }
            }
            Builtin::Arith(a, _) => {
                let (x, y) = (arg(0).num().clone(), arg(1).num().clone());
                Val::Num(match a {
                    ArithOp::Add => x + y,
                    ArithOp::Sub => x - y,
                    ArithOp::Mul => x * y,
                    ArithOp::Div => x / y,
                })
            }
            Builtin::Neg(_) => Val::Num(-arg(0).num().clone()),
            Builtin::If => {
                if arg(0).bool() {
                    arg(1)
                } else {
                    arg(2)
                }
            }
        }
    }
}
