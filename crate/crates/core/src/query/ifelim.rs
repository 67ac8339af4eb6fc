//! If-elimination: numeric conditionals are lifted to the formula level
//! and then replaced by a pair of implications.

use super::nnf::{is_formula, nnf};
use super::QueryError;
use crate::expr::{Builtin, Expr, Truth};

/// Removes every `if` from a formula.
pub fn eliminate_if(e: &Expr) -> Result<Expr, QueryError> {
    match e {
        Expr::Builtin(Builtin::If, args) if is_formula(&args[1]) => {
            let cond = condition(&args[0])?;
            let then_branch = eliminate_if(&args[1])?;
            let else_branch = eliminate_if(&args[2])?;
            let positive = eliminate_if(&cond)?;
            let negative = eliminate_if(&nnf(&cond, true))?;
            Ok(Expr::and(
                Truth::Prop,
                Expr::implies(Truth::Prop, positive, then_branch),
                Expr::implies(Truth::Prop, negative, else_branch),
            ))
        }
        Expr::Builtin(op @ (Builtin::And(_) | Builtin::Or(_) | Builtin::Implies(_) | Builtin::Not(_)), args) => {
            let args = args.iter().map(eliminate_if).collect::<Result<Vec<_>, _>>()?;
            Ok(Expr::Builtin(*op, args))
        }
        Expr::Quant(q, b, body) => Ok(Expr::quant(*q, b.clone(), eliminate_if(body)?)),
        atom => match lift_first_if(atom) {
            None => Ok(atom.clone()),
            Some((cond, then_atom, else_atom)) => {
                let lifted = Expr::builtin(Builtin::If, vec![cond, then_atom, else_atom]);
                eliminate_if(&lifted)
            }
        },
    }
}

fn condition(cond: &Expr) -> Result<Expr, QueryError> {
    if cond.mentions_network() {
        return Err(QueryError::IfConditionContainsNetwork(cond.to_string()));
    }
    Ok(as_prop(cond))
}

/// Retags the connectives and comparisons of a boolean formula as `Prop`.
fn as_prop(e: &Expr) -> Expr {
    match e {
        Expr::Builtin(Builtin::If, args) if is_formula(&args[1]) => Expr::builtin(
            Builtin::If,
            vec![args[0].clone(), as_prop(&args[1]), as_prop(&args[2])],
        ),
        Expr::Builtin(op, args) if op.truth().is_some() => {
            let args = match op {
                Builtin::Cmp(..) => args.clone(),
                _ => args.iter().map(as_prop).collect(),
            };
            Expr::Builtin(op.with_truth(Truth::Prop), args)
        }
        other => other.clone(),
    }
}

/// Finds the leftmost outermost `if` inside an atom and returns its
/// condition together with the atom specialised to each branch.
fn lift_first_if(e: &Expr) -> Option<(Expr, Expr, Expr)> {
    if let Expr::Builtin(Builtin::If, args) = e {
        return Some((args[0].clone(), args[1].clone(), args[2].clone()));
    }
    let rebuild = |children: Vec<Expr>| -> Expr {
        match e {
            Expr::Tensor(_) => Expr::Tensor(children),
            Expr::Builtin(op, _) => Expr::Builtin(*op, children),
            Expr::App(..) => Expr::app(children[0].clone(), children[1].clone()),
            Expr::Index(..) => Expr::Index(Box::new(children[0].clone()), Box::new(children[1].clone())),
            Expr::NetworkApp(name, _) => Expr::NetworkApp(name.clone(), Box::new(children[0].clone())),
            _ => unreachable!("atoms contain no binders"),
        }
    };
    let children: Vec<Expr> = e.children().into_iter().cloned().collect();
    for (i, child) in children.iter().enumerate() {
        if let Some((cond, t, f)) = lift_first_if(child) {
            let mut then_children = children.clone();
            then_children[i] = t;
            let mut else_children = children.clone();
            else_children[i] = f;
            return Some((cond, rebuild(then_children), rebuild(else_children)));
        }
    }
    None
}

/// Whether the term contains any `if`.
pub fn has_if(e: &Expr) -> bool {
    e.any(&mut |x| matches!(x, Expr::Builtin(Builtin::If, _)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{ArithOp, CmpOp, NumType};
    use crate::scalar::int;

    #[test]
    fn numeric_if_is_lifted() {
        // (if x > 0 then x else 0) + 1 <= 5
        let cond = Expr::cmp(CmpOp::Gt, Truth::Bool, Expr::Var(0), Expr::rat(int(0)));
        let ite = Expr::builtin(Builtin::If, vec![cond.clone(), Expr::Var(0), Expr::rat(int(0))]);
        let atom = Expr::cmp(
            CmpOp::Le,
            Truth::Prop,
            Expr::arith(ArithOp::Add, NumType::Rat, ite, Expr::rat(int(1))),
            Expr::rat(int(5)),
        );
        let out = eliminate_if(&atom).unwrap();
        assert!(!has_if(&out));
        let branch = |v: Expr| {
            Expr::cmp(CmpOp::Le, Truth::Prop, Expr::arith(ArithOp::Add, NumType::Rat, v, Expr::rat(int(1))), Expr::rat(int(5)))
        };
        let expected = Expr::and(
            Truth::Prop,
            Expr::implies(Truth::Prop, Expr::cmp(CmpOp::Gt, Truth::Prop, Expr::Var(0), Expr::rat(int(0))), branch(Expr::Var(0))),
            Expr::implies(Truth::Prop, Expr::cmp(CmpOp::Le, Truth::Prop, Expr::Var(0), Expr::rat(int(0))), branch(Expr::rat(int(0)))),
        );
        assert_eq!(out, expected);
    }

    #[test]
    fn network_in_condition_is_rejected() {
        let app = Expr::index(Expr::NetworkApp("f".into(), Box::new(Expr::Tensor(vec![Expr::Var(0)]))), 0);
        let cond = Expr::cmp(CmpOp::Gt, Truth::Bool, app, Expr::rat(int(0)));
        let ite = Expr::builtin(Builtin::If, vec![cond, Expr::bool(true), Expr::bool(false)]);
        assert!(matches!(eliminate_if(&ite), Err(QueryError::IfConditionContainsNetwork(_))));
    }
}
