#![allow(dead_code)]

use std::path::PathBuf;

use vspec_core::expr::{SolverVar, VType};
use vspec_core::network::{hash_bytes, vnet::parse_vnet, Layer, Network, NetworkContext, NetworkEntry, NetworkModel};
use vspec_core::query::{LinearConstraint, LinearExpr, LinearQuery, MetaNetwork, Normalised, Relation};
use vspec_core::scalar::int;
use vspec_core::Rational;

pub fn fixture_network(name: &str) -> Network {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    parse_vnet(&std::fs::read(path).unwrap()).unwrap()
}

pub fn context(nets: &[(&str, Network)]) -> NetworkContext {
    let mut ctx = NetworkContext::default();
    for (name, model) in nets {
        let declared = VType::fun(
            VType::tensor(VType::RAT, vec![model.input_size]),
            VType::tensor(VType::RAT, vec![model.output_size]),
        );
        ctx.entries.insert(
            name.to_string(),
            NetworkEntry { model: model.clone(), declared, path: PathBuf::from(name), digest: hash_bytes(name.as_bytes()) },
        );
    }
    ctx
}

pub fn x(i: usize) -> SolverVar {
    SolverVar::Input(i)
}

pub fn y(j: usize) -> SolverVar {
    SolverVar::Output(j)
}

pub fn constraint(terms: &[(SolverVar, Rational)], relation: Relation, k: Rational) -> LinearConstraint {
    let lhs = terms.iter().fold(LinearExpr::default(), |acc, (v, c)| acc.add(&LinearExpr::var(*v), c));
    match LinearConstraint::from_comparison(&lhs, relation, &LinearExpr::constant(k)) {
        Normalised::Constraint(c) => c,
        other => panic!("trivial constraint {other:?}"),
    }
}

pub fn single_app_query(net: &str, model: &Network, constraints: Vec<LinearConstraint>) -> LinearQuery {
    let mut meta = MetaNetwork::default();
    meta.push(net, model.input_size, model.output_size);
    LinearQuery { index: 1, constraints, meta }
}

/// Box constraints `lo <= x_i <= hi`.
pub fn input_box(bounds: &[(i64, i64)]) -> Vec<LinearConstraint> {
    let mut out = Vec::new();
    for (i, (lo, hi)) in bounds.iter().enumerate() {
        out.push(constraint(&[(x(i), int(1))], Relation::Ge, int(*lo)));
        out.push(constraint(&[(x(i), int(1))], Relation::Le, int(*hi)));
    }
    out
}

/// `inputs -> hidden (relu) -> 1` network with the given integer weights.
pub fn two_layer(inputs: usize, hidden: &[(Vec<i64>, i64)], out: &[i64], out_bias: i64) -> Network {
    let layers = vec![
        Layer::Affine {
            weights: hidden.iter().map(|(w, _)| w.iter().map(|v| int(*v)).collect()).collect(),
            bias: hidden.iter().map(|(_, b)| int(*b)).collect(),
        },
        Layer::Relu,
        Layer::Affine { weights: vec![out.iter().map(|v| int(*v)).collect()], bias: vec![int(out_bias)] },
    ];
    NetworkModel::new(inputs, layers).unwrap()
}
