//! Linear constraints over metanetwork variables.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::meta::MetaNetwork;
use crate::expr::{CmpOp, SolverVar};
use crate::scalar::{render_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
        }
    }

    /// The relation obtained by multiplying both sides by -1.
    pub fn flipped(self) -> Relation {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Lt => Relation::Gt,
            Relation::Ge => Relation::Le,
            Relation::Gt => Relation::Lt,
            Relation::Eq => Relation::Eq,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Lt => lhs < rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Eq => lhs == rhs,
        }
    }
}

impl From<CmpOp> for Relation {
    fn from(op: CmpOp) -> Self {
        match op {
            CmpOp::Le => Relation::Le,
            CmpOp::Lt => Relation::Lt,
            CmpOp::Ge => Relation::Ge,
            CmpOp::Gt => Relation::Gt,
            CmpOp::Eq => Relation::Eq,
        }
    }
}

/// `Σ terms <relation> constant`, with no zero coefficients and a positive
/// leading coefficient (outputs order before inputs).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearConstraint {
    pub terms: BTreeMap<SolverVar, Rational>,
    pub relation: Relation,
    pub constant: Rational,
}

/// A linear expression `Σ terms + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearExpr {
    pub terms: BTreeMap<SolverVar, Rational>,
    pub constant: Rational,
}

impl LinearExpr {
    pub fn constant(value: Rational) -> LinearExpr {
        LinearExpr { terms: BTreeMap::new(), constant: value }
    }

    pub fn var(v: SolverVar) -> LinearExpr {
        let mut terms = BTreeMap::new();
        terms.insert(v, Rational::one());
        LinearExpr { terms, constant: Rational::zero() }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(mut self, other: &LinearExpr, sign: &Rational) -> LinearExpr {
        for (v, c) in &other.terms {
            let entry = self.terms.entry(*v).or_insert_with(Rational::zero);
            *entry += c * sign;
        }
        self.terms.retain(|_, c| !c.is_zero());
        self.constant += &other.constant * sign;
        self
    }

    pub fn scale(mut self, factor: &Rational) -> LinearExpr {
        if factor.is_zero() {
            return LinearExpr::default();
        }
        for c in self.terms.values_mut() {
            *c *= factor;
        }
        self.constant *= factor;
        self
    }
}

/// Outcome of normalising a comparison between two linear expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalised {
    Constraint(LinearConstraint),
    Trivial(bool),
}

impl LinearConstraint {
    /// Rearranges `lhs <op> rhs` into canonical form.
    pub fn from_comparison(lhs: &LinearExpr, relation: Relation, rhs: &LinearExpr) -> Normalised {
        let diff = lhs.clone().add(rhs, &-Rational::one());
        let constant = -diff.constant.clone();
        if diff.terms.is_empty() {
            return Normalised::Trivial(relation.holds(&Rational::zero(), &constant));
        }
        let leading_negative = diff.terms.values().next().is_some_and(|c| c.is_negative());
        if leading_negative {
            let terms = diff.terms.into_iter().map(|(v, c)| (v, -c)).collect();
            Normalised::Constraint(LinearConstraint { terms, relation: relation.flipped(), constant: -constant })
        } else {
            Normalised::Constraint(LinearConstraint { terms: diff.terms, relation, constant })
        }
    }

    pub fn lhs_value(&self, assignment: &BTreeMap<SolverVar, Rational>) -> Rational {
        self.terms.iter().fold(Rational::zero(), |acc, (v, c)| {
            acc + c * assignment.get(v).cloned().unwrap_or_else(Rational::zero)
        })
    }

    /// Whether the assignment satisfies the constraint exactly. Missing
    /// variables count as zero.
    pub fn holds(&self, assignment: &BTreeMap<SolverVar, Rational>) -> bool {
        self.relation.holds(&self.lhs_value(assignment), &self.constant)
    }

    pub fn vars(&self) -> impl Iterator<Item = SolverVar> + '_ {
        self.terms.keys().copied()
    }
}

impl fmt::Display for LinearConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, c)) in self.terms.iter().enumerate() {
            let magnitude = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if magnitude.is_one() {
                write!(f, "{v}")?;
            } else {
                write!(f, "{} * {v}", render_rational(&magnitude))?;
            }
        }
        write!(f, " {} {}", self.relation.symbol(), render_rational(&self.constant))
    }
}

/// One verifier query: an existentially closed conjunction of constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearQuery {
    /// One-based position of the disjunct this query came from.
    pub index: usize,
    pub constraints: Vec<LinearConstraint>,
    pub meta: MetaNetwork,
}

impl LinearQuery {
    pub fn holds(&self, assignment: &BTreeMap<SolverVar, Rational>) -> bool {
        self.constraints.iter().all(|c| c.holds(assignment))
    }

    /// Exact closed bounds on single variables, from constraints of the form
    /// `c * v <= k`, `c * v >= k` or `c * v = k`.
    pub fn variable_bounds(&self) -> BTreeMap<SolverVar, (Option<Rational>, Option<Rational>)> {
        let mut out: BTreeMap<SolverVar, (Option<Rational>, Option<Rational>)> = BTreeMap::new();
        for c in &self.constraints {
            if c.terms.len() != 1 {
                continue;
            }
            let (v, coeff) = c.terms.iter().next().unwrap();
            let value = &c.constant / coeff;
            let rel = if coeff.is_negative() { c.relation.flipped() } else { c.relation };
            let entry = out.entry(*v).or_default();
            let tighten_upper = |slot: &mut Option<Rational>| {
                if slot.as_ref().is_none_or(|u| &value < u) {
                    *slot = Some(value.clone());
                }
            };
            let tighten_lower = |slot: &mut Option<Rational>| {
                if slot.as_ref().is_none_or(|l| &value > l) {
                    *slot = Some(value.clone());
                }
            };
            match rel {
                Relation::Le | Relation::Lt => tighten_upper(&mut entry.1),
                Relation::Ge | Relation::Gt => tighten_lower(&mut entry.0),
                Relation::Eq => {
                    tighten_upper(&mut entry.1);
                    tighten_lower(&mut entry.0);
                }
            }
        }
        out
    }
}

impl fmt::Display for LinearQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "query {}", self.index)?;
        write!(f, "{}", self.meta)?;
        for c in &self.constraints {
            writeln!(f, "  {c}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn x(i: usize) -> LinearExpr {
        LinearExpr::var(SolverVar::Input(i))
    }

    #[test]
    fn constant_moves_right_and_sign_is_normalised() {
        // -5/4 >= y0 + 2 x0 - x1
        let rhs = LinearExpr::var(SolverVar::Output(0))
            .add(&x(0), &rat(2, 1))
            .add(&x(1), &rat(-1, 1));
        let lhs = LinearExpr::constant(rat(-5, 4));
        let Normalised::Constraint(c) = LinearConstraint::from_comparison(&lhs, Relation::Ge, &rhs) else {
            panic!()
        };
        assert_eq!(c.relation, Relation::Le);
        assert_eq!(c.constant, rat(-5, 4));
        assert_eq!(c.to_string(), "y0 + 2 * x0 - x1 <= -1.25");
    }

    #[test]
    fn constant_comparisons_are_trivial() {
        let one = LinearExpr::constant(rat(1, 1));
        let two = LinearExpr::constant(rat(2, 1));
        assert_eq!(LinearConstraint::from_comparison(&one, Relation::Lt, &two), Normalised::Trivial(true));
        let cancel = x(0).add(&x(0), &rat(-1, 1));
        assert_eq!(LinearConstraint::from_comparison(&cancel, Relation::Gt, &one), Normalised::Trivial(false));
    }

    #[test]
    fn bounds_from_single_variable_rows() {
        let mk = |v, rel, k| {
            let Normalised::Constraint(c) =
                LinearConstraint::from_comparison(&x(v).scale(&rat(2, 1)), rel, &LinearExpr::constant(k))
            else {
                panic!()
            };
            c
        };
        let q = LinearQuery {
            index: 1,
            constraints: vec![mk(0, Relation::Ge, rat(-1, 1)), mk(0, Relation::Le, rat(3, 1)), mk(0, Relation::Le, rat(1, 1))],
            meta: MetaNetwork::default(),
        };
        let b = q.variable_bounds();
        assert_eq!(b[&SolverVar::Input(0)], (Some(rat(-1, 2)), Some(rat(1, 2))));
    }
}
