//! Exact decision procedure for linear queries over ReLU networks.
//!
//! Each metanetwork application is unrolled into linear equations over
//! fresh hidden variables. ReLU nodes whose phase is not fixed by interval
//! bounds are case split, Inactive before Active, and each case is decided
//! by the exact simplex in [`lp`].

pub mod interval;
pub mod lp;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use vspec_core::expr::SolverVar;
use vspec_core::marabou::{Verdict, Witness};
use vspec_core::network::{Layer, Network, NetworkContext};
use vspec_core::query::{LinearQuery, Relation};
use vspec_core::Rational;

pub use interval::Interval;
pub use lp::{LpOutcome, LpProblem, Row};

pub const DEFAULT_PHASE_BUDGET: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("{unfixed} ReLU nodes need case splitting, more than the phase budget of {budget}; raise --phase-budget")]
    PhaseBudgetExceeded { unfixed: usize, budget: usize },
    #[error("input {0} has no finite bounds")]
    UnboundedInput(String),
    #[error("unknown network `{0}`")]
    UnknownNetwork(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Inactive,
    Active,
}

/// A ReLU node of the unrolled metanetwork.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReluNode {
    pub application: usize,
    pub pre: usize,
    pub post: usize,
}

/// The linear part of the metanetwork relation plus its ReLU nodes. LP
/// variables `0..m` are the inputs `x<i>`, `m..m+n` the outputs `y<j>`,
/// then hidden variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub lp: LpProblem<Rational>,
    pub relus: Vec<ReluNode>,
    pub total_inputs: usize,
    pub total_outputs: usize,
    /// Output variables of every layer, per application.
    pub layer_vars: Vec<Vec<Vec<usize>>>,
}

impl Skeleton {
    pub fn var_of(&self, v: SolverVar) -> usize {
        match v {
            SolverVar::Input(i) => i,
            SolverVar::Output(j) => self.total_inputs + j,
        }
    }

    pub fn hidden_count(&self) -> usize {
        self.lp.num_vars - self.total_inputs - self.total_outputs
    }
}

fn model<'a>(ctx: &'a NetworkContext, name: &str) -> Result<&'a Network, VerifyError> {
    ctx.get(name).map(|e| &e.model).ok_or_else(|| VerifyError::UnknownNetwork(name.to_string()))
}

pub fn unroll_meta_network(q: &LinearQuery, ctx: &NetworkContext) -> Result<Skeleton, VerifyError> {
    let meta = &q.meta;
    let mut lp = LpProblem::new(meta.total_inputs + meta.total_outputs);
    let mut relus = Vec::new();
    let mut layer_vars = Vec::new();
    for (a, app) in meta.applications.iter().enumerate() {
        let net = model(ctx, &app.network)?;
        let outputs: Vec<usize> = (0..app.outputs).map(|j| meta.total_inputs + app.output_offset + j).collect();
        let mut current: Vec<usize> = (0..app.inputs).map(|i| app.input_offset + i).collect();
        let mut per_layer = Vec::new();
        let last = net.layers.len().checked_sub(1);
        for (k, layer) in net.layers.iter().enumerate() {
            let is_last = Some(k) == last;
            match layer {
                Layer::Affine { weights, bias } => {
                    let vars: Vec<usize> =
                        if is_last { outputs.clone() } else { (0..weights.len()).map(|_| lp.fresh_var()).collect() };
                    for ((row, b), out) in weights.iter().zip(bias).zip(&vars) {
                        let mut coeffs: Vec<(usize, Rational)> =
                            row.iter().zip(&current).filter(|(w, _)| !w.is_zero()).map(|(w, v)| (*v, -w.clone())).collect();
                        coeffs.push((*out, Rational::one()));
                        lp.push(coeffs, Relation::Eq, b.clone());
                    }
                    per_layer.push(vars.clone());
                    current = vars;
                }
                Layer::Relu => {
                    let vars: Vec<usize> =
                        if is_last { outputs.clone() } else { (0..current.len()).map(|_| lp.fresh_var()).collect() };
                    for (pre, post) in current.iter().zip(&vars) {
                        relus.push(ReluNode { application: a, pre: *pre, post: *post });
                    }
                    per_layer.push(vars.clone());
                    current = vars;
                }
            }
        }
        if last.is_none() {
            for (x, y) in current.iter().zip(&outputs) {
                lp.push(vec![(*y, Rational::one()), (*x, -Rational::one())], Relation::Eq, Rational::zero());
            }
        }
        layer_vars.push(per_layer);
    }
    Ok(Skeleton { lp, relus, total_inputs: meta.total_inputs, total_outputs: meta.total_outputs, layer_vars })
}

/// Interval bounds for every LP variable of the skeleton, from the input
/// bounds stated in the query.
pub fn bound_propagation(q: &LinearQuery, ctx: &NetworkContext, skeleton: &Skeleton) -> Result<Vec<Interval<Rational>>, VerifyError> {
    let stated = q.variable_bounds();
    let mut bounds = vec![Interval::unbounded(); skeleton.lp.num_vars];
    for (i, b) in bounds.iter_mut().enumerate().take(skeleton.total_inputs) {
        if let Some((lo, hi)) = stated.get(&SolverVar::Input(i)) {
            *b = Interval::new(lo.clone(), hi.clone());
        }
    }
    for (a, app) in q.meta.applications.iter().enumerate() {
        let net = model(ctx, &app.network)?;
        let mut current: Vec<Interval<Rational>> =
            (0..app.inputs).map(|i| bounds[app.input_offset + i].clone()).collect();
        for (layer, vars) in net.layers.iter().zip(&skeleton.layer_vars[a]) {
            current = match layer {
                Layer::Affine { weights, bias } => weights
                    .iter()
                    .zip(bias)
                    .map(|(row, b)| {
                        row.iter().zip(&current).fold(Interval::point(b.clone()), |acc, (w, x)| acc.add(&x.scale(w)))
                    })
                    .collect(),
                Layer::Relu => current.iter().map(Interval::relu).collect(),
            };
            for (v, b) in vars.iter().zip(&current) {
                bounds[*v] = b.clone();
            }
        }
    }
    Ok(bounds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub phase_budget: usize,
    pub bound_propagation: bool,
    pub jobs: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { phase_budget: DEFAULT_PHASE_BUDGET, bound_propagation: true, jobs: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CheckStats {
    pub relu_nodes: usize,
    pub unfixed: usize,
    pub lp_count: usize,
}

/// Decides a query exactly. SAT witnesses are restricted to metanetwork
/// variables.
pub fn check_query(q: &LinearQuery, ctx: &NetworkContext, opts: &CheckOptions) -> Result<(Verdict, CheckStats), VerifyError> {
    let skeleton = unroll_meta_network(q, ctx)?;
    let mut fixed: Vec<Option<Phase>> = vec![None; skeleton.relus.len()];
    if opts.bound_propagation {
        let bounds = bound_propagation(q, ctx, &skeleton)?;
        for (slot, node) in fixed.iter_mut().zip(&skeleton.relus) {
            let b = &bounds[node.pre];
            if b.nonpositive() {
                *slot = Some(Phase::Inactive);
            } else if b.nonnegative() {
                *slot = Some(Phase::Active);
            }
        }
    }
    let unfixed: Vec<usize> = (0..fixed.len()).filter(|i| fixed[*i].is_none()).collect();
    if unfixed.len() > opts.phase_budget {
        return Err(VerifyError::PhaseBudgetExceeded { unfixed: unfixed.len(), budget: opts.phase_budget });
    }
    let mut base = skeleton.lp.clone();
    for c in &q.constraints {
        let coeffs = c.terms.iter().map(|(v, k)| (skeleton.var_of(*v), k.clone())).collect();
        base.push(coeffs, c.relation, c.constant.clone());
    }
    let counter = AtomicUsize::new(0);
    let attempt = |mask: u64| -> Option<Vec<Rational>> {
        counter.fetch_add(1, Ordering::Relaxed);
        let mut lp = base.clone();
        let k = unfixed.len();
        for (i, node) in skeleton.relus.iter().enumerate() {
            let phase = match fixed[i] {
                Some(p) => p,
                None => {
                    let pos = unfixed.iter().position(|u| *u == i).unwrap();
                    if mask >> (k - 1 - pos) & 1 == 1 { Phase::Active } else { Phase::Inactive }
                }
            };
            add_phase(&mut lp, node, phase);
        }
        match lp.solve() {
            LpOutcome::Feasible(values) => Some(values),
            LpOutcome::Infeasible => None,
        }
    };
    let cases = 1u64 << unfixed.len();
    let found = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs).build();
        match pool {
            Ok(pool) => pool.install(|| (0..cases).into_par_iter().map(attempt).find_first(|r| r.is_some()).flatten()),
            Err(_) => (0..cases).find_map(attempt),
        }
    } else {
        (0..cases).find_map(attempt)
    };
    let stats = CheckStats { relu_nodes: skeleton.relus.len(), unfixed: unfixed.len(), lp_count: counter.into_inner() };
    let verdict = match found {
        None => Verdict::Unsat,
        Some(values) => {
            let mut w = Witness::new();
            for i in 0..skeleton.total_inputs {
                w.insert(SolverVar::Input(i), values[i].clone());
            }
            for j in 0..skeleton.total_outputs {
                w.insert(SolverVar::Output(j), values[skeleton.total_inputs + j].clone());
            }
            Verdict::Sat(w)
        }
    };
    Ok((verdict, stats))
}

fn add_phase(lp: &mut LpProblem<Rational>, node: &ReluNode, phase: Phase) {
    let one = Rational::one();
    match phase {
        Phase::Active => {
            lp.push(vec![(node.pre, one.clone())], Relation::Ge, Rational::zero());
            lp.push(vec![(node.post, one.clone()), (node.pre, -one)], Relation::Eq, Rational::zero());
        }
        Phase::Inactive => {
            lp.push(vec![(node.pre, one.clone())], Relation::Le, Rational::zero());
            lp.push(vec![(node.post, one)], Relation::Eq, Rational::zero());
        }
    }
}

/// Evaluates every metanetwork application on the witness inputs and
/// checks the outputs and the query constraints exactly.
pub fn witness_is_valid(q: &LinearQuery, ctx: &NetworkContext, w: &Witness) -> bool {
    for app in &q.meta.applications {
        let Ok(net) = model(ctx, &app.network) else { return false };
        let input: Option<Vec<Rational>> =
            (0..app.inputs).map(|i| w.get(&SolverVar::Input(app.input_offset + i)).cloned()).collect();
        let Some(input) = input else { return false };
        let output = net.eval(&input);
        for (j, y) in output.iter().enumerate() {
            if w.get(&SolverVar::Output(app.output_offset + j)) != Some(y) {
                return false;
            }
        }
    }
    q.holds(w)
}

/// One-sided oracle: searches a regular grid over the stated input box,
/// `resolution` steps per axis, evaluating the networks exactly.
pub fn grid_oracle(q: &LinearQuery, ctx: &NetworkContext, resolution: usize) -> Result<Option<Witness>, VerifyError> {
    let bounds = q.variable_bounds();
    let mut axes: Vec<Vec<Rational>> = Vec::new();
    for i in 0..q.meta.total_inputs {
        let var = SolverVar::Input(i);
        let Some((Some(lo), Some(hi))) = bounds.get(&var) else {
            return Err(VerifyError::UnboundedInput(var.to_string()));
        };
        let steps = resolution.max(1);
        let width = hi - lo;
        let mut axis: Vec<Rational> = (0..=steps)
            .map(|k| lo + &width * Rational::new(k.into(), steps.into()))
            .collect();
        axis.dedup();
        axes.push(axis);
    }
    let nets: Vec<&Network> = q.meta.applications.iter().map(|a| model(ctx, &a.network)).collect::<Result<_, _>>()?;
    let mut index = vec![0usize; axes.len()];
    loop {
        let mut w: Witness = BTreeMap::new();
        for (i, axis) in axes.iter().enumerate() {
            w.insert(SolverVar::Input(i), axis[index[i]].clone());
        }
        for (app, net) in q.meta.applications.iter().zip(&nets) {
            let input: Vec<Rational> = (0..app.inputs).map(|i| w[&SolverVar::Input(app.input_offset + i)].clone()).collect();
            for (j, y) in net.eval(&input).into_iter().enumerate() {
                w.insert(SolverVar::Output(app.output_offset + j), y);
            }
        }
        if q.holds(&w) {
            return Ok(Some(w));
        }
        let mut d = 0;
        loop {
            if d == axes.len() {
                return Ok(None);
            }
            index[d] += 1;
            if index[d] < axes[d].len() {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}
