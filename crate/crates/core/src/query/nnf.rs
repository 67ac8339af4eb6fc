//! Negation normal form.

use crate::expr::{Builtin, CmpOp, Expr, Lit, Truth};

/// Pushes negations to the atoms, negating the whole term first when
/// `negate` is set. Comparisons absorb negation, so the result contains no
/// `not` on well-typed input.
pub fn nnf(e: &Expr, negate: bool) -> Expr {
    match e {
        Expr::Lit(Lit::Bool(b)) => Expr::bool(*b != negate),
        Expr::Builtin(Builtin::Not(_), args) => nnf(&args[0], !negate),
        Expr::Builtin(Builtin::And(t), args) => {
            let (l, r) = (nnf(&args[0], negate), nnf(&args[1], negate));
            if negate { Expr::or(*t, l, r) } else { Expr::and(*t, l, r) }
        }
        Expr::Builtin(Builtin::Or(t), args) => {
            let (l, r) = (nnf(&args[0], negate), nnf(&args[1], negate));
            if negate { Expr::and(*t, l, r) } else { Expr::or(*t, l, r) }
        }
        Expr::Builtin(Builtin::Implies(t), args) => {
            if negate {
                Expr::and(*t, nnf(&args[0], false), nnf(&args[1], true))
            } else {
                Expr::implies(*t, nnf(&args[0], false), nnf(&args[1], false))
            }
        }
        Expr::Builtin(Builtin::Cmp(op, t), args) if negate => negate_comparison(*op, *t, &args[0], &args[1]),
        Expr::Builtin(Builtin::If, args) if is_formula(&args[1]) => Expr::builtin(
            Builtin::If,
            vec![args[0].clone(), nnf(&args[1], negate), nnf(&args[2], negate)],
        ),
        Expr::Quant(q, b, body) => {
            let q = if negate { q.dual() } else { *q };
            Expr::quant(q, b.clone(), nnf(body, negate))
        }
        atom if negate => Expr::not(truth_of(atom), atom.clone()),
        atom => atom.clone(),
    }
}

fn negate_comparison(op: CmpOp, t: Truth, lhs: &Expr, rhs: &Expr) -> Expr {
    let (l, r) = (lhs.clone(), rhs.clone());
    match op {
        CmpOp::Le => Expr::cmp(CmpOp::Gt, t, l, r),
        CmpOp::Lt => Expr::cmp(CmpOp::Ge, t, l, r),
        CmpOp::Ge => Expr::cmp(CmpOp::Lt, t, l, r),
        CmpOp::Gt => Expr::cmp(CmpOp::Le, t, l, r),
        CmpOp::Eq => Expr::or(t, Expr::cmp(CmpOp::Lt, t, l.clone(), r.clone()), Expr::cmp(CmpOp::Gt, t, l, r)),
    }
}

/// Whether a term is built from logical connectives at its root.
pub fn is_formula(e: &Expr) -> bool {
    match e {
        Expr::Lit(Lit::Bool(_)) | Expr::Quant(..) => true,
        Expr::Builtin(Builtin::If, args) => is_formula(&args[1]),
        Expr::Builtin(op, _) => op.truth().is_some(),
        _ => false,
    }
}

fn truth_of(e: &Expr) -> Truth {
    match e {
        Expr::Builtin(op, _) => op.truth().unwrap_or(Truth::Prop),
        _ => Truth::Prop,
    }
}

/// Whether the term contains a `not` node.
pub fn has_negation(e: &Expr) -> bool {
    e.any(&mut |x| matches!(x, Expr::Builtin(Builtin::Not(_), _)))
}
