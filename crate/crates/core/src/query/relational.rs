//! Replacement of let-bound network applications by fresh solver
//! variables and input equations.

use super::meta::MetaNetwork;
use super::QueryError;
use crate::expr::{CmpOp, Expr, Quantifier, SolverVar, Truth};
use crate::normalise::{normalise_open, NormEnv};

/// `let y = f e in body` becomes `e == [x..] and body[y := [y..]]`, using
/// the variable blocks of the metanetwork, and the result is normalised.
pub fn relationalise(query: &Expr, meta: &MetaNetwork, env: &NormEnv) -> Result<Expr, QueryError> {
    let (prefix, matrix) = query.quantifier_prefix(Quantifier::Exists);
    let body = unfold(matrix, meta, 0)?;
    let body = normalise_open(&body, prefix.len(), env)?;
    Ok(Expr::wrap_quantifiers(Quantifier::Exists, &prefix, body))
}

fn unfold(e: &Expr, meta: &MetaNetwork, k: usize) -> Result<Expr, QueryError> {
    let Expr::Let(_, bound, body) = e else {
        return Ok(e.clone());
    };
    let Expr::NetworkApp(_, arg) = &**bound else {
        return Err(QueryError::UnsupportedAtom(bound.to_string()));
    };
    let app = &meta.applications[k];
    let inputs = Expr::Tensor((0..app.inputs).map(|i| Expr::Solver(SolverVar::Input(app.input_offset + i))).collect());
    let outputs =
        Expr::Tensor((0..app.outputs).map(|j| Expr::Solver(SolverVar::Output(app.output_offset + j))).collect());
    let equation = Expr::cmp(CmpOp::Eq, Truth::Prop, (**arg).clone(), inputs);
    let rest = unfold(&body.instantiate(&outputs), meta, k + 1)?;
    Ok(Expr::and(Truth::Prop, equation, rest))
}
