//! Exact feasibility of linear constraint systems with strict relations.
//!
//! Variables are free. Strict rows `a·v < c` become `a·v + ε <= c` and
//! `ε` is maximised subject to `ε <= 1`; the system is feasible iff the
//! optimum is positive. Both phases use a dense tableau with Bland's rule.

use vspec_core::query::Relation;
use vspec_core::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Row<T> {
    pub coeffs: Vec<(usize, T)>,
    pub relation: Relation,
    pub rhs: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem<T> {
    pub num_vars: usize,
    pub rows: Vec<Row<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Feasible(Vec<T>),
    Infeasible,
}

impl<T: Scalar> LpProblem<T> {
    pub fn new(num_vars: usize) -> Self {
        LpProblem { num_vars, rows: Vec::new() }
    }

    pub fn fresh_var(&mut self) -> usize {
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn push(&mut self, coeffs: Vec<(usize, T)>, relation: Relation, rhs: T) {
        self.rows.push(Row { coeffs, relation, rhs });
    }

    /// Whether `values` satisfies every row, using the scalar's zero test.
    pub fn satisfied_by(&self, values: &[T]) -> bool {
        self.rows.iter().all(|row| {
            let lhs = row.coeffs.iter().fold(T::zero(), |acc, (v, c)| acc + c.clone() * values[*v].clone());
            let d = lhs - row.rhs.clone();
            match row.relation {
                Relation::Le => !d.is_pos(),
                Relation::Lt => d.is_neg(),
                Relation::Ge => !d.is_neg(),
                Relation::Gt => d.is_pos(),
                Relation::Eq => d.near_zero(),
            }
        })
    }

    pub fn solve(&self) -> LpOutcome<T> {
        Tableau::build(self).solve(self.num_vars)
    }
}

struct Tableau<T> {
    /// `rows[i]` has one entry per column plus the right-hand side last.
    rows: Vec<Vec<T>>,
    /// Reduced costs of the current objective, same layout as a row.
    objective: Vec<T>,
    basis: Vec<usize>,
    columns: usize,
    artificial_start: usize,
    epsilon: Option<usize>,
}

impl<T: Scalar> Tableau<T> {
    fn build(p: &LpProblem<T>) -> Self {
        let strict = p.rows.iter().any(|r| r.relation.is_strict());
        let structural = 2 * p.num_vars;
        let epsilon = strict.then_some(structural);
        let mut next = structural + usize::from(strict);
        let mut raw: Vec<(Vec<(usize, T)>, T, Option<usize>)> = Vec::new();
        for row in &p.rows {
            let mut entries: Vec<(usize, T)> = Vec::new();
            for (v, c) in &row.coeffs {
                entries.push((2 * v, c.clone()));
                entries.push((2 * v + 1, -c.clone()));
            }
            let slack = match row.relation {
                Relation::Eq => None,
                Relation::Le | Relation::Lt => {
                    entries.push((next, T::one()));
                    Some(next)
                }
                Relation::Ge | Relation::Gt => {
                    entries.push((next, -T::one()));
                    Some(next)
                }
            };
            match row.relation {
                Relation::Lt => entries.push((epsilon.unwrap(), T::one())),
                Relation::Gt => entries.push((epsilon.unwrap(), -T::one())),
                _ => {}
            }
            if slack.is_some() {
                next += 1;
            }
            raw.push((entries, row.rhs.clone(), slack));
        }
        if let Some(e) = epsilon {
            raw.push((vec![(e, T::one()), (next, T::one())], T::one(), Some(next)));
            next += 1;
        }
        let artificial_start = next;
        // Normalise signs so every right-hand side is non-negative; rows
        // whose slack then has coefficient +1 start with the slack basic.
        let mut needs_artificial = Vec::new();
        for (entries, rhs, slack) in raw.iter_mut() {
            if rhs.is_neg() {
                for (_, c) in entries.iter_mut() {
                    *c = -c.clone();
                }
                *rhs = -rhs.clone();
            }
            let slack_basic = slack.and_then(|s| entries.iter().find(|(j, _)| *j == s)).is_some_and(|(_, c)| c.is_pos());
            needs_artificial.push(!slack_basic);
        }
        let columns = artificial_start + needs_artificial.iter().filter(|b| **b).count();
        let mut rows = Vec::with_capacity(raw.len());
        let mut basis = Vec::with_capacity(raw.len());
        let mut artificial = artificial_start;
        for ((entries, rhs, slack), needs) in raw.into_iter().zip(needs_artificial) {
            let mut r = vec![T::zero(); columns + 1];
            for (j, c) in entries {
                r[j] = r[j].clone() + c;
            }
            r[columns] = rhs;
            if needs {
                r[artificial] = T::one();
                basis.push(artificial);
                artificial += 1;
            } else {
                basis.push(slack.unwrap());
            }
            rows.push(r);
        }
        Tableau { rows, objective: vec![T::zero(); columns + 1], basis, columns, artificial_start, epsilon }
    }

    fn rhs(&self, i: usize) -> &T {
        &self.rows[i][self.columns]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            if !x.near_zero() {
                *x = x.clone() / p.clone();
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nonzero: Vec<usize> = (0..pivot_row.len()).filter(|j| !pivot_row[*j].near_zero()).collect();
        let eliminate = |row: &mut Vec<T>| {
            if row[c].near_zero() {
                return;
            }
            let f = row[c].clone();
            for &j in &nonzero {
                row[j] = row[j].clone() - f.clone() * pivot_row[j].clone();
            }
            row[c] = T::zero();
        };
        for row in self.rows.iter_mut() {
            if !row.is_empty() {
                eliminate(row);
            }
        }
        eliminate(&mut self.objective);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Minimises `cost · x` from the current feasible basis. Columns at or
    /// beyond `limit` never enter.
    fn minimise(&mut self, cost: &[T], limit: usize) {
        let mut objective = cost.to_vec();
        objective.push(T::zero());
        for (row, b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[*b];
            if cb.near_zero() {
                continue;
            }
            for (o, a) in objective.iter_mut().zip(row) {
                if !a.near_zero() {
                    *o = o.clone() - cb.clone() * a.clone();
                }
            }
        }
        self.objective = objective;
        loop {
            let entering = (0..limit).find(|j| self.objective[*j].is_neg());
            let Some(c) = entering else { return };
            let mut leaving: Option<(usize, T)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_pos() {
                    continue;
                }
                let ratio = self.rhs(i).clone() / a.clone();
                let better = match &leaving {
                    None => true,
                    Some((li, best)) => {
                        let d = ratio.clone() - best.clone();
                        d.is_neg() || (d.near_zero() && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            match leaving {
                Some((r, _)) => self.pivot(r, c),
                // Unbounded; cannot happen for the objectives used here.
                None => return,
            }
        }
    }

    fn solve(mut self, num_vars: usize) -> LpOutcome<T> {
        if self.columns > self.artificial_start {
            let mut phase1 = vec![T::zero(); self.columns];
            for c in phase1.iter_mut().skip(self.artificial_start) {
                *c = T::one();
            }
            self.minimise(&phase1, self.artificial_start);
            let infeasible = self
                .basis
                .iter()
                .enumerate()
                .any(|(i, b)| *b >= self.artificial_start && self.rhs(i).is_pos());
            if infeasible {
                return LpOutcome::Infeasible;
            }
            self.drive_out_artificials();
        }
        if let Some(e) = self.epsilon {
            let mut cost = vec![T::zero(); self.columns];
            cost[e] = -T::one();
            self.minimise(&cost, self.artificial_start);
            if !self.value(e).is_pos() {
                return LpOutcome::Infeasible;
            }
        }
        let values = (0..num_vars).map(|v| self.value(2 * v) - self.value(2 * v + 1)).collect();
        LpOutcome::Feasible(values)
    }

    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.artificial_start {
                let col = (0..self.artificial_start).find(|j| !self.rows[i][*j].near_zero());
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    fn value(&self, col: usize) -> T {
        self.basis.iter().position(|b| *b == col).map_or(T::zero(), |i| self.rhs(i).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vspec_core::scalar::{int, rat};
    use vspec_core::Rational;

    fn single(rows: &[(Relation, i64)]) -> LpProblem<Rational> {
        let mut p = LpProblem::new(1);
        for (rel, k) in rows {
            p.push(vec![(0, int(1))], *rel, int(*k));
        }
        p
    }

    #[test]
    fn contradictory_bounds() {
        assert_eq!(single(&[(Relation::Ge, 1), (Relation::Le, 0)]).solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn half_open_interval() {
        let p = single(&[(Relation::Ge, 1), (Relation::Lt, 2)]);
        let LpOutcome::Feasible(v) = p.solve() else { panic!() };
        assert!(p.satisfied_by(&v));
        assert!(v[0] >= int(1) && v[0] < int(2));
    }

    #[test]
    fn empty_open_interval() {
        assert_eq!(single(&[(Relation::Lt, 1), (Relation::Gt, 1)]).solve(), LpOutcome::Infeasible);
    }

    #[test]
    fn equalities_and_negative_values() {
        // x + y = -3, x - y = 1  =>  x = -1, y = -2
        let mut p = LpProblem::new(2);
        p.push(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(-3));
        p.push(vec![(0, int(1)), (1, int(-1))], Relation::Eq, int(1));
        assert_eq!(p.solve(), LpOutcome::Feasible(vec![int(-1), int(-2)]));
    }

    #[test]
    fn redundant_equalities() {
        let mut p = LpProblem::new(1);
        p.push(vec![(0, int(2))], Relation::Eq, int(1));
        p.push(vec![(0, int(4))], Relation::Eq, int(2));
        p.push(vec![(0, int(1))], Relation::Gt, int(0));
        assert_eq!(p.solve(), LpOutcome::Feasible(vec![rat(1, 2)]));
    }

    #[test]
    fn float_instantiation() {
        let mut p: LpProblem<f64> = LpProblem::new(1);
        p.push(vec![(0, 1.0)], Relation::Ge, 0.5);
        p.push(vec![(0, 1.0)], Relation::Lt, 0.75);
        let LpOutcome::Feasible(v) = p.solve() else { panic!() };
        assert!(p.satisfied_by(&v));
    }
}
