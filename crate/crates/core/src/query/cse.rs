//! Common subexpression elimination of network applications.

use crate::expr::{Binder, Expr, LetName, Quantifier};

/// Let-binds each distinct network application of a disjunct, innermost
/// and leftmost first, as `y1`, `y2`, ... inside the quantifier prefix.
pub fn cse_network_applications(disjunct: &Expr) -> Expr {
    let (prefix, matrix) = disjunct.quantifier_prefix(Quantifier::Exists);
    let mut apps: Vec<Expr> = Vec::new();
    collect(matrix, &mut apps);
    let n = apps.len();
    let bind = |e: &Expr, depth: usize, upto: usize| -> Expr {
        let mut out = e.shift(depth as isize, 0);
        for i in (0..upto).rev() {
            out = out.replace(&apps[i].shift(depth as isize, 0), &Expr::Var(depth - 1 - i));
        }
        out
    };
    let mut body = bind(matrix, n, n);
    for j in (0..n).rev() {
        let bound = match &apps[j] {
            Expr::NetworkApp(name, arg) => Expr::NetworkApp(name.clone(), Box::new(bind(arg, j, j))),
            _ => unreachable!(),
        };
        body = Expr::Let(LetName(format!("y{}", j + 1)), Box::new(bound), Box::new(body));
    }
    Expr::wrap_quantifiers(Quantifier::Exists, &prefix.into_iter().collect::<Vec<Binder>>(), body)
}

fn collect(e: &Expr, out: &mut Vec<Expr>) {
    for c in e.children() {
        collect(c, out);
    }
    if matches!(e, Expr::NetworkApp(..)) && !out.contains(e) {
        out.push(e.clone());
    }
}

/// Number of let bindings directly under the quantifier prefix.
pub fn let_count(query: &Expr) -> usize {
    let (_, mut current) = query.quantifier_prefix(Quantifier::Exists);
    let mut n = 0;
    while let Expr::Let(_, _, body) = current {
        n += 1;
        current = body;
    }
    n
}
