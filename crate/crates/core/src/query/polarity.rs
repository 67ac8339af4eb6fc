//! Effective quantifier polarity of a property.

use super::QueryError;
use crate::expr::{Builtin, Expr, Quantifier};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    AllForall,
    AllExists,
}

impl Polarity {
    pub fn keyword(self) -> &'static str {
        match self {
            Polarity::AllForall => "forall",
            Polarity::AllExists => "exists",
        }
    }
}

/// Classifies a property by the effective kind of its quantifiers, with
/// `not` and the left of `=>` flipping polarity. A quantifier-free
/// property classifies as existential.
pub fn analyse_quantifiers(expr: &Expr) -> Result<Polarity, QueryError> {
    let mut seen: Vec<(Quantifier, String)> = Vec::new();
    walk(expr, true, &mut seen);
    let first_forall = seen.iter().find(|(q, _)| *q == Quantifier::Forall);
    let first_exists = seen.iter().find(|(q, _)| *q == Quantifier::Exists);
    match (first_forall, first_exists) {
        (Some(f), Some(e)) => {
            let describe = |(q, name): &(Quantifier, String)| format!("{} {name}", q.keyword());
            let (a, b) = if seen.iter().position(|x| x == f) < seen.iter().position(|x| x == e) {
                (f, e)
            } else {
                (e, f)
            };
            Err(QueryError::MixedQuantifiers { first: describe(a), second: describe(b) })
        }
        (Some(_), None) => Ok(Polarity::AllForall),
        _ => Ok(Polarity::AllExists),
    }
}

fn walk(e: &Expr, positive: bool, seen: &mut Vec<(Quantifier, String)>) {
    match e {
        Expr::Quant(q, b, body) => {
            let effective = if positive { *q } else { q.dual() };
            seen.push((effective, b.name.clone()));
            walk(body, positive, seen);
        }
        Expr::Builtin(Builtin::Not(_), args) => walk(&args[0], !positive, seen),
        Expr::Builtin(Builtin::Implies(_), args) => {
            walk(&args[0], !positive, seen);
            walk(&args[1], positive, seen);
        }
        other => {
            for c in other.children() {
                walk(c, positive, seen);
            }
        }
    }
}
