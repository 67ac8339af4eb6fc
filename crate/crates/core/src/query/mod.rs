//! Compilation of normalised properties into linear verifier queries.
//!
//! The pipeline, per property: quantifier polarity analysis, negation of
//! universal properties into negation normal form, if-elimination,
//! disjunctive normal form, sharing of network applications, metanetwork
//! construction, relationalisation and elimination of user variables.

pub mod cse;
pub mod dnf;
pub mod eliminate;
pub mod ifelim;
pub mod linear;
pub mod meta;
pub mod nnf;
pub mod polarity;
pub mod relational;

use thiserror::Error;

use crate::expr::Expr;
use crate::network::NetworkContext;
use crate::normalise::{NormEnv, NormError, NormalisedProperty};

pub use cse::cse_network_applications;
pub use dnf::to_dnf;
pub use eliminate::{eliminate_user_vars, linearise_atom};
pub use ifelim::eliminate_if;
pub use linear::{LinearConstraint, LinearExpr, LinearQuery, Normalised, Relation};
pub use meta::{build_meta_network, Application, MetaNetwork};
pub use nnf::nnf;
pub use polarity::{analyse_quantifiers, Polarity};
pub use relational::relationalise;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("property mixes quantifiers: `{first}` and `{second}` have different effective kinds")]
    MixedQuantifiers { first: String, second: String },
    #[error("condition of `if` depends on a network: {0}")]
    IfConditionContainsNetwork(String),
    #[error("quantified variable `{0}` is not determined by a network input")]
    UnresolvableUserVariable(String),
    #[error("atom is not linear: {0}")]
    NonLinearAtom(String),
    #[error("unsupported atom: {0}")]
    UnsupportedAtom(String),
    #[error("quantified variable `{name}` has type {ty}; only Rat variables can be verified")]
    UnsupportedVariableType { name: String, ty: String },
    #[error("universal quantifier over `{0}` remains after negation")]
    UnexpectedUniversal(String),
    #[error("unknown network `{0}`")]
    UnknownNetwork(String),
    #[error(transparent)]
    Normalise(#[from] NormError),
}

/// The compiled form of one property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyPlan {
    pub name: String,
    pub polarity: Polarity,
    /// Whether the queries encode the negation of the property.
    pub negated: bool,
    /// Number of DNF disjuncts, including those dropped as infeasible.
    pub disjuncts: usize,
    pub queries: Vec<LinearQuery>,
}

/// Every intermediate result of the pipeline, for inspection.
#[derive(Debug, Clone)]
pub struct Stages {
    pub polarity: Polarity,
    pub nnf: Expr,
    pub if_free: Expr,
    pub disjuncts: Vec<Expr>,
    pub shared: Vec<Expr>,
    pub metas: Vec<MetaNetwork>,
    pub relational: Vec<Expr>,
    pub plan: PropertyPlan,
}

pub fn compile_stages(prop: &NormalisedProperty, ctx: &NetworkContext, env: &NormEnv) -> Result<Stages, QueryError> {
    let polarity = analyse_quantifiers(&prop.expr)?;
    let negated = polarity == Polarity::AllForall;
    let nnf_form = nnf(&prop.expr, negated);
    let if_free = eliminate_if(&nnf_form)?;
    let disjuncts = to_dnf(&if_free)?;
    let mut shared = Vec::new();
    let mut metas = Vec::new();
    let mut relational = Vec::new();
    let mut queries = Vec::new();
    for (k, d) in disjuncts.iter().enumerate() {
        let s = cse_network_applications(d);
        let meta = build_meta_network(&s, ctx)?;
        let r = relationalise(&s, &meta, env)?;
        if let Some(q) = eliminate_user_vars(&r, &meta, k + 1)? {
            queries.push(q);
        }
        shared.push(s);
        metas.push(meta);
        relational.push(r);
    }
    let plan = PropertyPlan { name: prop.name.clone(), polarity, negated, disjuncts: disjuncts.len(), queries };
    Ok(Stages { polarity, nnf: nnf_form, if_free, disjuncts, shared, metas, relational, plan })
}

pub fn compile_property(prop: &NormalisedProperty, ctx: &NetworkContext, env: &NormEnv) -> Result<PropertyPlan, QueryError> {
    compile_stages(prop, ctx, env).map(|s| s.plan)
}

/// Renders plans for `--emit queries`.
pub fn print_plans(plans: &[PropertyPlan]) -> String {
    let mut out = String::new();
    for plan in plans {
        out.push_str(&format!(
            "property {} ({}, {}): {} queries\n",
            plan.name,
            plan.polarity.keyword(),
            if plan.negated { "negated" } else { "direct" },
            plan.queries.len()
        ));
        for q in &plan.queries {
            out.push_str(&q.to_string());
        }
    }
    out
}
