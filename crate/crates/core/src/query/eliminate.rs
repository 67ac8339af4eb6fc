//! Elimination of user variables and translation to linear constraints.

use super::linear::{LinearConstraint, LinearExpr, LinearQuery, Normalised, Relation};
use super::meta::MetaNetwork;
use super::QueryError;
use crate::expr::{ArithOp, Binder, Builtin, CmpOp, Expr, Lit, Quantifier, SolverVar, VType};
use crate::scalar::Rational;
use num_traits::{One, Zero};

/// Substitutes each user variable by the solver variable it is equated
/// with, then linearises the remaining atoms. Returns `None` when an atom
/// is constantly false.
pub fn eliminate_user_vars(
    query: &Expr,
    meta: &MetaNetwork,
    index: usize,
) -> Result<Option<LinearQuery>, QueryError> {
    let (prefix, matrix) = query.quantifier_prefix(Quantifier::Exists);
    let n = prefix.len();
    let mut atoms: Vec<Expr> = matrix.conjuncts().into_iter().cloned().collect();
    for (pos, binder) in prefix.iter().enumerate() {
        let var = Expr::Var(n - 1 - pos);
        let used = atoms.iter().any(|a| a.any(&mut |x| *x == var));
        if !used {
            continue;
        }
        check_binder(binder)?;
        let found = atoms.iter().enumerate().find_map(|(i, a)| defining_equation(a, &var).map(|s| (i, s)));
        let Some((i, solver)) = found else {
            return Err(QueryError::UnresolvableUserVariable(binder.name.clone()));
        };
        atoms.remove(i);
        let replacement = Expr::Solver(solver);
        atoms = atoms.iter().map(|a| a.replace(&var, &replacement)).collect();
    }
    let mut constraints = Vec::new();
    for atom in atoms {
        match linearise_atom(&atom)? {
            Normalised::Trivial(true) => {}
            Normalised::Trivial(false) => return Ok(None),
            Normalised::Constraint(c) => constraints.push(c),
        }
    }
    Ok(Some(LinearQuery { index, constraints, meta: meta.clone() }))
}

fn check_binder(binder: &Binder) -> Result<(), QueryError> {
    match &binder.ty {
        VType::Num(crate::expr::NumType::Rat) => Ok(()),
        other => Err(QueryError::UnsupportedVariableType { name: binder.name.clone(), ty: other.to_string() }),
    }
}

fn defining_equation(atom: &Expr, var: &Expr) -> Option<SolverVar> {
    match atom {
        Expr::Builtin(Builtin::Cmp(CmpOp::Eq, _), args) => match (&args[0], &args[1]) {
            (l, Expr::Solver(s)) if l == var => Some(*s),
            (Expr::Solver(s), r) if r == var => Some(*s),
            _ => None,
        },
        _ => None,
    }
}

/// Translates a comparison over solver variables into canonical form.
pub fn linearise_atom(atom: &Expr) -> Result<Normalised, QueryError> {
    match atom {
        Expr::Lit(Lit::Bool(b)) => Ok(Normalised::Trivial(*b)),
        Expr::Builtin(Builtin::Cmp(op, _), args) => {
            let lhs = linear_expr(&args[0], atom)?;
            let rhs = linear_expr(&args[1], atom)?;
            Ok(LinearConstraint::from_comparison(&lhs, Relation::from(*op), &rhs))
        }
        _ => Err(QueryError::UnsupportedAtom(atom.to_string())),
    }
}

fn linear_expr(e: &Expr, atom: &Expr) -> Result<LinearExpr, QueryError> {
    let nonlinear = || QueryError::NonLinearAtom(atom.to_string());
    match e {
        Expr::Solver(v) => Ok(LinearExpr::var(*v)),
        Expr::Lit(Lit::Num(_, value)) => Ok(LinearExpr::constant(value.clone())),
        Expr::Builtin(Builtin::Neg(_), args) => Ok(linear_expr(&args[0], atom)?.scale(&-Rational::one())),
        Expr::Builtin(Builtin::Arith(op, _), args) => {
            let l = linear_expr(&args[0], atom)?;
            let r = linear_expr(&args[1], atom)?;
            match op {
                ArithOp::Add => Ok(l.add(&r, &Rational::one())),
                ArithOp::Sub => Ok(l.add(&r, &-Rational::one())),
                ArithOp::Mul if l.is_constant() => Ok(r.scale(&l.constant)),
                ArithOp::Mul if r.is_constant() => Ok(l.scale(&r.constant)),
                ArithOp::Mul => Err(nonlinear()),
                ArithOp::Div if r.is_constant() && !r.constant.is_zero() => Ok(l.scale(&r.constant.recip())),
                ArithOp::Div => Err(nonlinear()),
            }
        }
        Expr::Var(_) | Expr::Index(..) | Expr::NetworkApp(..) | Expr::Builtin(Builtin::If, _) => Err(nonlinear()),
        _ => Err(QueryError::UnsupportedAtom(atom.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{NumType, Truth};
    use crate::scalar::{int, rat};

    #[test]
    fn nonlinear_products_are_rejected() {
        let x = Expr::Solver(SolverVar::Input(0));
        let atom = Expr::cmp(CmpOp::Le, Truth::Prop, Expr::arith(ArithOp::Mul, NumType::Rat, x.clone(), x), Expr::rat(int(1)));
        assert!(matches!(linearise_atom(&atom), Err(QueryError::NonLinearAtom(_))));
    }

    #[test]
    fn division_by_constant() {
        let x = Expr::Solver(SolverVar::Input(0));
        let atom = Expr::cmp(CmpOp::Le, Truth::Prop, Expr::arith(ArithOp::Div, NumType::Rat, x, Expr::rat(int(3))), Expr::rat(int(1)));
        let Normalised::Constraint(c) = linearise_atom(&atom).unwrap() else { panic!() };
        assert_eq!(c.terms[&SolverVar::Input(0)], rat(1, 3));
        assert_eq!(c.constant, int(1));
    }

    #[test]
    fn unresolvable_variable() {
        // exists v . v > 0 (no equation)
        let q = Expr::quant(
            Quantifier::Exists,
            Binder::new("v", VType::RAT),
            Expr::cmp(CmpOp::Gt, Truth::Prop, Expr::Var(0), Expr::rat(int(0))),
        );
        assert!(matches!(
            eliminate_user_vars(&q, &MetaNetwork::default(), 1),
            Err(QueryError::UnresolvableUserVariable(name)) if name == "v"
        ));
    }
}
