//! The typed core language.
//!
//! Local variables are de Bruijn indices. Binder names are carried for
//! printing only and are ignored by equality and hashing, so structurally
//! equal terms are equal up to alpha conversion.

use std::fmt;
use std::hash::{Hash, Hasher};

use num_traits::{Signed, Zero};

use crate::scalar::{render_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NumType {
    Nat,
    Int,
    Rat,
}

impl NumType {
    pub fn join(self, other: NumType) -> NumType {
        self.max(other)
    }
}

/// Instantiation of an overloaded logical builtin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truth {
    Bool,
    Prop,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum VType {
    Bool,
    Prop,
    Num(NumType),
    /// Element type is never a tensor or `Prop`; nested tensors are
    /// flattened into `dims`.
    Tensor(Box<VType>, Vec<usize>),
    Fun(Box<VType>, Box<VType>),
}

impl VType {
    pub const RAT: VType = VType::Num(NumType::Rat);
    pub const NAT: VType = VType::Num(NumType::Nat);

    pub fn tensor(elem: VType, dims: Vec<usize>) -> VType {
        match elem {
            VType::Tensor(inner, inner_dims) => {
                let mut all = dims;
                all.extend(inner_dims);
                VType::Tensor(inner, all)
            }
            other => VType::Tensor(Box::new(other), dims),
        }
    }

    pub fn fun(domain: VType, codomain: VType) -> VType {
        VType::Fun(Box::new(domain), Box::new(codomain))
    }

    pub fn num(&self) -> Option<NumType> {
        match self {
            VType::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn truth(&self) -> Option<Truth> {
        match self {
            VType::Bool => Some(Truth::Bool),
            VType::Prop => Some(Truth::Prop),
            _ => None,
        }
    }

    /// Result type after stripping all function arrows.
    pub fn final_codomain(&self) -> &VType {
        match self {
            VType::Fun(_, cod) => cod.final_codomain(),
            other => other,
        }
    }
}

impl fmt::Display for VType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VType::Bool => write!(f, "Bool"),
            VType::Prop => write!(f, "Prop"),
            VType::Num(NumType::Nat) => write!(f, "Nat"),
            VType::Num(NumType::Int) => write!(f, "Int"),
            VType::Num(NumType::Rat) => write!(f, "Rat"),
            VType::Tensor(elem, dims) => {
                let dims: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
                write!(f, "Tensor {} [{}]", elem, dims.join(", "))
            }
            VType::Fun(dom, cod) => {
                if matches!(**dom, VType::Fun(..)) {
                    write!(f, "({dom}) -> {cod}")
                } else {
                    write!(f, "{dom} -> {cod}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Lit {
    Bool(bool),
    Num(NumType, Rational),
}

impl Lit {
    pub fn rat(value: Rational) -> Lit {
        Lit::Num(NumType::Rat, value)
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Lit::Num(_, q) => Some(q),
            Lit::Bool(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Le => "<=",
            CmpOp::Lt => "<",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Ge => lhs >= rhs,
            CmpOp::Gt => lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

/// Builtin operators, tagged with the instantiation chosen by the
/// type checker. Builtins are always fully applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Not(Truth),
    And(Truth),
    Or(Truth),
    Implies(Truth),
    Cmp(CmpOp, Truth),
    Arith(ArithOp, NumType),
    Neg(NumType),
    /// `[condition, then, else]`.
    If,
}

impl Builtin {
    pub fn arity(self) -> usize {
        match self {
            Builtin::Not(_) | Builtin::Neg(_) => 1,
            Builtin::If => 3,
            _ => 2,
        }
    }

    pub fn truth(self) -> Option<Truth> {
        match self {
            Builtin::Not(t)
            | Builtin::And(t)
            | Builtin::Or(t)
            | Builtin::Implies(t)
            | Builtin::Cmp(_, t) => Some(t),
            _ => None,
        }
    }

    pub fn with_truth(self, truth: Truth) -> Builtin {
        match self {
            Builtin::Not(_) => Builtin::Not(truth),
            Builtin::And(_) => Builtin::And(truth),
            Builtin::Or(_) => Builtin::Or(truth),
            Builtin::Implies(_) => Builtin::Implies(truth),
            Builtin::Cmp(op, _) => Builtin::Cmp(op, truth),
            other => other,
        }
    }
}

/// Variables of the verifier's relational model: inputs `x<i>` and
/// outputs `y<j>` of the metanetwork. Outputs order before inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverVar {
    Output(usize),
    Input(usize),
}

impl fmt::Display for SolverVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverVar::Input(i) => write!(f, "x{i}"),
            SolverVar::Output(j) => write!(f, "y{j}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Binder {
    pub name: String,
    pub ty: VType,
}

impl Binder {
    pub fn new(name: impl Into<String>, ty: VType) -> Binder {
        Binder { name: name.into(), ty }
    }
}

impl PartialEq for Binder {
    fn eq(&self, other: &Self) -> bool {
        self.ty == other.ty
    }
}

impl Eq for Binder {}

impl Hash for Binder {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ty.hash(state);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(usize),
    /// Reference to a top-level definition.
    Free(String),
    /// A declared network used as the head of an application. Removed by
    /// network type analysis.
    Network(String),
    Solver(SolverVar),
    Lit(Lit),
    Tensor(Vec<Expr>),
    Builtin(Builtin, Vec<Expr>),
    App(Box<Expr>, Box<Expr>),
    Lam(Binder, Box<Expr>),
    Quant(Quantifier, Binder, Box<Expr>),
    /// Let bindings are only introduced by the compiler; the name is for
    /// printing.
    Let(LetName, Box<Expr>, Box<Expr>),
    NetworkApp(String, Box<Expr>),
    Index(Box<Expr>, Box<Expr>),
}

/// Display name of a let binder; never compared.
#[derive(Debug, Clone)]
pub struct LetName(pub String);

impl PartialEq for LetName {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for LetName {}

impl Hash for LetName {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

impl Expr {
    pub fn rat(value: Rational) -> Expr {
        Expr::Lit(Lit::rat(value))
    }

    pub fn bool(value: bool) -> Expr {
        Expr::Lit(Lit::Bool(value))
    }

    pub fn nat(value: usize) -> Expr {
        Expr::Lit(Lit::Num(NumType::Nat, Rational::from_integer(value.into())))
    }

    pub fn builtin(op: Builtin, args: Vec<Expr>) -> Expr {
        debug_assert_eq!(op.arity(), args.len());
        Expr::Builtin(op, args)
    }

    pub fn and(truth: Truth, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Builtin(Builtin::And(truth), vec![lhs, rhs])
    }

    pub fn or(truth: Truth, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Builtin(Builtin::Or(truth), vec![lhs, rhs])
    }

    pub fn implies(truth: Truth, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Builtin(Builtin::Implies(truth), vec![lhs, rhs])
    }

    pub fn not(truth: Truth, arg: Expr) -> Expr {
        Expr::Builtin(Builtin::Not(truth), vec![arg])
    }

    pub fn cmp(op: CmpOp, truth: Truth, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Builtin(Builtin::Cmp(op, truth), vec![lhs, rhs])
    }

    pub fn arith(op: ArithOp, ty: NumType, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Builtin(Builtin::Arith(op, ty), vec![lhs, rhs])
    }

    pub fn index(tensor: Expr, index: usize) -> Expr {
        Expr::Index(Box::new(tensor), Box::new(Expr::nat(index)))
    }

    pub fn app(fun: Expr, arg: Expr) -> Expr {
        Expr::App(Box::new(fun), Box::new(arg))
    }

    pub fn quant(q: Quantifier, binder: Binder, body: Expr) -> Expr {
        Expr::Quant(q, binder, Box::new(body))
    }

    /// Left-nested conjunction; `true` when empty.
    pub fn conjunction(truth: Truth, items: impl IntoIterator<Item = Expr>) -> Expr {
        let mut iter = items.into_iter();
        match iter.next() {
            None => Expr::bool(true),
            Some(first) => iter.fold(first, |acc, e| Expr::and(truth, acc, e)),
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Expr::Lit(Lit::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn as_num(&self) -> Option<&Rational> {
        match self {
            Expr::Lit(lit) => lit.as_num(),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Var(_)
            | Expr::Free(_)
            | Expr::Network(_)
            | Expr::Solver(_)
            | Expr::Lit(_) => Vec::new(),
            Expr::Tensor(items) | Expr::Builtin(_, items) => items.iter().collect(),
            Expr::App(a, b) | Expr::Let(_, a, b) | Expr::Index(a, b) => vec![a, b],
            Expr::Lam(_, body) | Expr::Quant(_, _, body) | Expr::NetworkApp(_, body) => {
                vec![body]
            }
        }
    }

    /// Pre-order traversal.
    pub fn any(&self, pred: &mut impl FnMut(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        self.children().into_iter().any(|c| c.any(pred))
    }

    pub fn count(&self, pred: &mut impl FnMut(&Expr) -> bool) -> usize {
        let here = usize::from(pred(self));
        here + self.children().into_iter().map(|c| c.count(pred)).sum::<usize>()
    }

    pub fn mentions_network(&self) -> bool {
        self.any(&mut |e| matches!(e, Expr::NetworkApp(..) | Expr::Network(_)))
    }

    /// Whether de Bruijn variable `index` (relative to this term) occurs.
    pub fn has_var(&self, index: usize) -> bool {
        fn go(e: &Expr, target: usize) -> bool {
            match e {
                Expr::Var(i) => *i == target,
                Expr::Lam(_, body) | Expr::Quant(_, _, body) => go(body, target + 1),
                Expr::Let(_, bound, body) => go(bound, target) || go(body, target + 1),
                other => other.children().into_iter().any(|c| go(c, target)),
            }
        }
        go(self, index)
    }

    /// Rebuilds the term, replacing each variable `Var(i)` seen under
    /// `depth` local binders with `f(i, depth)`.
    pub fn map_vars(&self, f: &impl Fn(usize, usize) -> Expr) -> Expr {
        fn go(e: &Expr, depth: usize, f: &impl Fn(usize, usize) -> Expr) -> Expr {
            match e {
                Expr::Var(i) => f(*i, depth),
                Expr::Free(_)
                | Expr::Network(_)
                | Expr::Solver(_)
                | Expr::Lit(_) => e.clone(),
                Expr::Tensor(items) => Expr::Tensor(items.iter().map(|x| go(x, depth, f)).collect()),
                Expr::Builtin(op, args) => {
                    Expr::Builtin(*op, args.iter().map(|x| go(x, depth, f)).collect())
                }
                Expr::App(a, b) => Expr::App(Box::new(go(a, depth, f)), Box::new(go(b, depth, f))),
                Expr::Lam(b, body) => Expr::Lam(b.clone(), Box::new(go(body, depth + 1, f))),
                Expr::Quant(q, b, body) => {
                    Expr::Quant(*q, b.clone(), Box::new(go(body, depth + 1, f)))
                }
                Expr::Let(n, bound, body) => Expr::Let(
                    n.clone(),
                    Box::new(go(bound, depth, f)),
                    Box::new(go(body, depth + 1, f)),
                ),
                Expr::NetworkApp(n, arg) => Expr::NetworkApp(n.clone(), Box::new(go(arg, depth, f))),
                Expr::Index(a, b) => {
                    Expr::Index(Box::new(go(a, depth, f)), Box::new(go(b, depth, f)))
                }
            }
        }
        go(self, 0, f)
    }

    /// Shifts free variables (index >= `cutoff` at the root) by `amount`.
    pub fn shift(&self, amount: isize, cutoff: usize) -> Expr {
        self.map_vars(&|i, depth| {
            if i >= cutoff + depth {
                Expr::Var((i as isize + amount) as usize)
            } else {
                Expr::Var(i)
            }
        })
    }

    /// Substitutes `value` for variable 0 of `self` and lowers the other
    /// free variables by one, as when entering a binder's body.
    pub fn instantiate(&self, value: &Expr) -> Expr {
        self.map_vars(&|i, depth| {
            if i == depth {
                value.shift(depth as isize, 0)
            } else if i > depth {
                Expr::Var(i - 1)
            } else {
                Expr::Var(i)
            }
        })
    }

    /// Replaces every occurrence of `target` (compared structurally) with
    /// `replacement`. Only valid for binder-free targets.
    pub fn replace(&self, target: &Expr, replacement: &Expr) -> Expr {
        if self == target {
            return replacement.clone();
        }
        match self {
            Expr::Tensor(items) => {
                Expr::Tensor(items.iter().map(|x| x.replace(target, replacement)).collect())
            }
            Expr::Builtin(op, args) => {
                Expr::Builtin(*op, args.iter().map(|x| x.replace(target, replacement)).collect())
            }
            Expr::App(a, b) => Expr::app(a.replace(target, replacement), b.replace(target, replacement)),
            Expr::NetworkApp(n, arg) => {
                Expr::NetworkApp(n.clone(), Box::new(arg.replace(target, replacement)))
            }
            Expr::Index(a, b) => Expr::Index(
                Box::new(a.replace(target, replacement)),
                Box::new(b.replace(target, replacement)),
            ),
            Expr::Lam(..) | Expr::Quant(..) | Expr::Let(..) => {
                panic!("replace is only defined on binder-free terms")
            }
            leaf => leaf.clone(),
        }
    }

    /// Splits a prefix of quantifiers of kind `q` off the term.
    pub fn quantifier_prefix(&self, q: Quantifier) -> (Vec<Binder>, &Expr) {
        let mut binders = Vec::new();
        let mut current = self;
        while let Expr::Quant(kind, binder, body) = current {
            if *kind != q {
                break;
            }
            binders.push(binder.clone());
            current = body;
        }
        (binders, current)
    }

    /// Wraps `body` in quantifiers, the first binder outermost.
    pub fn wrap_quantifiers(q: Quantifier, binders: &[Binder], body: Expr) -> Expr {
        binders
            .iter()
            .rev()
            .fold(body, |acc, b| Expr::quant(q, b.clone(), acc))
    }

    /// Flattens nested conjunctions (of either instantiation).
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match e {
                Expr::Builtin(Builtin::And(_), args) => {
                    go(&args[0], out);
                    go(&args[1], out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }

    /// Renders the term in surface syntax. `names` holds the binder names
    /// of enclosing scopes, innermost last.
    pub fn pretty(&self, names: &[String]) -> String {
        let mut scope = names.to_vec();
        let mut out = String::new();
        print_expr(self, &mut scope, Prec::Lowest, &mut out);
        out
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty(&[]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Lowest,
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

fn fresh_name(base: &str, scope: &[String]) -> String {
    if !scope.iter().any(|n| n == base) {
        return base.to_string();
    }
    (1..)
        .map(|i| format!("{base}'{i}"))
        .find(|n| !scope.iter().any(|s| s == n))
        .unwrap()
}

fn print_expr(e: &Expr, scope: &mut Vec<String>, ctx: Prec, out: &mut String) {
    let (prec, text) = render(e, scope);
    if prec < ctx {
        out.push('(');
        out.push_str(&text);
        out.push(')');
    } else {
        out.push_str(&text);
    }
}

fn sub(e: &Expr, scope: &mut Vec<String>, ctx: Prec) -> String {
    let mut s = String::new();
    print_expr(e, scope, ctx, &mut s);
    s
}

fn render(e: &Expr, scope: &mut Vec<String>) -> (Prec, String) {
    match e {
        Expr::Var(i) => {
            let name = scope
                .len()
                .checked_sub(i + 1)
                .map(|k| scope[k].clone())
                .unwrap_or_else(|| format!("#{i}"));
            (Prec::Atom, name)
        }
        Expr::Free(n) | Expr::Network(n) => (Prec::Atom, n.clone()),
        Expr::Solver(v) => (Prec::Atom, v.to_string()),
        Expr::Lit(Lit::Bool(b)) => (Prec::Atom, if *b { "True" } else { "False" }.into()),
        Expr::Lit(Lit::Num(_, q)) => {
            let text = render_rational(q);
            if q.is_negative() {
                (Prec::Neg, text)
            } else if q.is_zero() || text.contains('/') {
                (if text.contains('/') { Prec::Mul } else { Prec::Atom }, text)
            } else {
                (Prec::Atom, text)
            }
        }
        Expr::Tensor(items) => {
            let parts: Vec<String> = items.iter().map(|x| sub(x, scope, Prec::Lowest)).collect();
            (Prec::Atom, format!("[{}]", parts.join(", ")))
        }
        Expr::Builtin(op, args) => render_builtin(*op, args, scope),
        Expr::App(f, a) => {
            let head = sub(f, scope, Prec::App);
            let arg = sub(a, scope, Prec::Atom);
            (Prec::App, format!("{head} {arg}"))
        }
        Expr::NetworkApp(n, a) => {
            let arg = sub(a, scope, Prec::Atom);
            (Prec::App, format!("{n} {arg}"))
        }
        Expr::Index(t, i) => {
            let t = sub(t, scope, Prec::Index);
            let i = sub(i, scope, Prec::Neg);
            (Prec::Index, format!("{t} ! {i}"))
        }
        Expr::Lam(b, body) => {
            let name = fresh_name(&b.name, scope);
            scope.push(name.clone());
            let body = sub(body, scope, Prec::Lowest);
            scope.pop();
            (Prec::Lowest, format!("\\({name} : {}) -> {body}", b.ty))
        }
        Expr::Quant(q, _, _) => {
            // Group consecutive quantifiers of the same kind.
            let mut binders = Vec::new();
            let mut current = e;
            while let Expr::Quant(kind, b, body) = current {
                if kind != q {
                    break;
                }
                let name = fresh_name(&b.name, scope);
                scope.push(name.clone());
                binders.push(format!("({name} : {})", b.ty));
                current = body;
            }
            let body = sub(current, scope, Prec::Lowest);
            scope.truncate(scope.len() - binders.len());
            (Prec::Lowest, format!("{} {} . {body}", q.keyword(), binders.join(" ")))
        }
        Expr::Let(n, bound, body) => {
            let bound = sub(bound, scope, Prec::Lowest);
            let name = fresh_name(&n.0, scope);
            scope.push(name.clone());
            let body = sub(body, scope, Prec::Lowest);
            scope.pop();
            (Prec::Lowest, format!("let {name} = {bound} in {body}"))
        }
    }
}

fn render_builtin(op: Builtin, args: &[Expr], scope: &mut Vec<String>) -> (Prec, String) {
    let binary = |scope: &mut Vec<String>, sym: &str, prec: Prec, lp: Prec, rp: Prec| {
        let l = sub(&args[0], scope, lp);
        let r = sub(&args[1], scope, rp);
        (prec, format!("{l} {sym} {r}"))
    };
    match op {
        Builtin::Not(_) => {
            let a = sub(&args[0], scope, Prec::Not);
            (Prec::Not, format!("not {a}"))
        }
        Builtin::And(_) => binary(scope, "and", Prec::And, Prec::And, Prec::Not),
        Builtin::Or(_) => binary(scope, "or", Prec::Or, Prec::Or, Prec::And),
        Builtin::Implies(_) => binary(scope, "=>", Prec::Implies, Prec::Or, Prec::Implies),
        Builtin::Cmp(c, _) => binary(scope, c.symbol(), Prec::Cmp, Prec::Add, Prec::Add),
        Builtin::Arith(a @ (ArithOp::Add | ArithOp::Sub), _) => {
            binary(scope, a.symbol(), Prec::Add, Prec::Add, Prec::Mul)
        }
        Builtin::Arith(a, _) => binary(scope, a.symbol(), Prec::Mul, Prec::Mul, Prec::Neg),
        Builtin::Neg(_) => {
            let a = sub(&args[0], scope, Prec::Index);
            let a = if a.starts_with('-') { format!("({a})") } else { a };
            (Prec::Neg, format!("-{a}"))
        }
        Builtin::If => {
            let c = sub(&args[0], scope, Prec::Lowest);
            let t = sub(&args[1], scope, Prec::Lowest);
            let f = sub(&args[2], scope, Prec::Lowest);
            (Prec::Lowest, format!("if {c} then {t} else {f}"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn x(i: usize) -> Expr {
        Expr::Var(i)
    }

    #[test]
    fn instantiate_lowers_outer_variables() {
        // body refers to the bound var (0) and an outer var (1)
        let body = Expr::arith(ArithOp::Add, NumType::Rat, x(0), x(1));
        let result = body.instantiate(&Expr::rat(rat(1, 2)));
        assert_eq!(result, Expr::arith(ArithOp::Add, NumType::Rat, Expr::rat(rat(1, 2)), x(0)));
    }

    #[test]
    fn instantiate_under_binder_shifts_value() {
        // \y . x + y  where x is index 1 inside the lambda
        let body = Expr::Lam(
            Binder::new("y", VType::RAT),
            Box::new(Expr::arith(ArithOp::Add, NumType::Rat, x(1), x(0))),
        );
        // substitute an outer variable (index 3 from outside) for x
        let result = body.instantiate(&x(3));
        let expected = Expr::Lam(
            Binder::new("y", VType::RAT),
            Box::new(Expr::arith(ArithOp::Add, NumType::Rat, x(4), x(0))),
        );
        assert_eq!(result, expected);
    }

    #[test]
    fn binder_names_do_not_affect_equality() {
        let a = Expr::quant(Quantifier::Exists, Binder::new("a", VType::RAT), x(0));
        let b = Expr::quant(Quantifier::Exists, Binder::new("b", VType::RAT), x(0));
        assert_eq!(a, b);
    }

    #[test]
    fn printing_respects_precedence() {
        let e = Expr::arith(
            ArithOp::Mul,
            NumType::Rat,
            Expr::arith(ArithOp::Add, NumType::Rat, Expr::rat(rat(1, 1)), Expr::rat(rat(2, 1))),
            Expr::rat(rat(-3, 1)),
        );
        assert_eq!(e.to_string(), "(1 + 2) * -3");
        let q = Expr::quant(
            Quantifier::Forall,
            Binder::new("x", VType::RAT),
            Expr::quant(
                Quantifier::Forall,
                Binder::new("y", VType::RAT),
                Expr::cmp(CmpOp::Le, Truth::Prop, x(1), x(0)),
            ),
        );
        assert_eq!(q.to_string(), "forall (x : Rat) (y : Rat) . x <= y");
    }

    #[test]
    fn tensor_of_tensor_type_is_flattened() {
        let t = VType::tensor(VType::tensor(VType::RAT, vec![3]), vec![2]);
        assert_eq!(t, VType::Tensor(Box::new(VType::RAT), vec![2, 3]));
        assert_eq!(t.to_string(), "Tensor Rat [2, 3]");
    }
}
