//! Conversion of an existential, negation-free formula into a disjunction
//! of existentially closed conjunctions.

use super::nnf::nnf;
use super::QueryError;
use crate::expr::{Binder, Builtin, Expr, Lit, Quantifier, Truth};

/// A disjunct under construction: atoms whose variables are global binder
/// ids rather than de Bruijn indices.
type Conj = Vec<Expr>;

/// Returns the disjuncts in source order. Each disjunct is
/// `exists prefix . a1 and ... and an`, where the prefix lists the
/// variables the disjunct uses, in their original order.
pub fn to_dnf(e: &Expr) -> Result<Vec<Expr>, QueryError> {
    let mut binders = Vec::new();
    let mut scope = Vec::new();
    let conjs = go(e, &mut scope, &mut binders)?;
    Ok(conjs.into_iter().map(|c| close(c, &binders)).collect())
}

fn go(e: &Expr, scope: &mut Vec<usize>, binders: &mut Vec<Binder>) -> Result<Vec<Conj>, QueryError> {
    match e {
        Expr::Lit(Lit::Bool(true)) => Ok(vec![Vec::new()]),
        Expr::Lit(Lit::Bool(false)) => Ok(Vec::new()),
        Expr::Quant(Quantifier::Exists, b, body) => {
            binders.push(b.clone());
            scope.push(binders.len() - 1);
            let out = go(body, scope, binders);
            scope.pop();
            out
        }
        Expr::Quant(Quantifier::Forall, b, _) => Err(QueryError::UnexpectedUniversal(b.name.clone())),
        Expr::Builtin(Builtin::Or(_), args) => {
            let mut out = go(&args[0], scope, binders)?;
            out.extend(go(&args[1], scope, binders)?);
            Ok(out)
        }
        Expr::Builtin(Builtin::And(_), args) => {
            let left = go(&args[0], scope, binders)?;
            let right = go(&args[1], scope, binders)?;
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left {
                for r in &right {
                    let mut c = l.clone();
                    c.extend(r.iter().cloned());
                    out.push(c);
                }
            }
            Ok(out)
        }
        Expr::Builtin(Builtin::Implies(_), args) => {
            let mut out = go(&nnf(&args[0], true), scope, binders)?;
            out.extend(go(&args[1], scope, binders)?);
            Ok(out)
        }
        atom => {
            let depth = scope.len();
            let global = atom.map_vars(&|i, d| {
                if i >= d {
                    Expr::Var(scope[depth - 1 - (i - d)])
                } else {
                    Expr::Var(i)
                }
            });
            Ok(vec![vec![global]])
        }
    }
}

fn close(conj: Conj, binders: &[Binder]) -> Expr {
    let mut used: Vec<usize> = Vec::new();
    for atom in &conj {
        atom.any(&mut |x| {
            if let Expr::Var(id) = x {
                if !used.contains(id) {
                    used.push(*id);
                }
            }
            false
        });
    }
    used.sort_unstable();
    let n = used.len();
    let body = Expr::conjunction(
        Truth::Prop,
        conj.iter().map(|atom| {
            atom.map_vars(&|id, d| {
                let pos = used.iter().position(|u| *u == id).expect("variable in prefix");
                Expr::Var(n - 1 - pos + d)
            })
        }),
    );
    let prefix: Vec<Binder> = used.iter().map(|id| binders[*id].clone()).collect();
    Expr::wrap_quantifiers(Quantifier::Exists, &prefix, body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{CmpOp, VType};
    use crate::scalar::int;

    fn ex(name: &str, body: Expr) -> Expr {
        Expr::quant(Quantifier::Exists, Binder::new(name, VType::RAT), body)
    }

    fn gt(i: usize, k: i64) -> Expr {
        Expr::cmp(CmpOp::Gt, Truth::Prop, Expr::Var(i), Expr::rat(int(k)))
    }

    #[test]
    fn distributes_and_over_or() {
        // exists a b . (a > 0 or b > 1) and a > 2
        let e = ex("a", ex("b", Expr::and(Truth::Prop, Expr::or(Truth::Prop, gt(1, 0), gt(0, 1)), gt(1, 2))));
        let ds = to_dnf(&e).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds[0], ex("a", Expr::and(Truth::Prop, gt(0, 0), gt(0, 2))));
        assert_eq!(ds[1], ex("a", ex("b", Expr::and(Truth::Prop, gt(0, 1), gt(1, 2)))));
    }

    #[test]
    fn implication_becomes_disjunction() {
        let e = ex("a", Expr::implies(Truth::Prop, gt(0, 0), gt(0, 5)));
        let ds = to_dnf(&e).unwrap();
        let le = Expr::cmp(CmpOp::Le, Truth::Prop, Expr::Var(0), Expr::rat(int(0)));
        assert_eq!(ds, vec![ex("a", le), ex("a", gt(0, 5))]);
    }

    #[test]
    fn constants() {
        assert_eq!(to_dnf(&Expr::bool(false)).unwrap(), Vec::<Expr>::new());
        assert_eq!(to_dnf(&Expr::bool(true)).unwrap(), vec![Expr::bool(true)]);
    }
}
