//! Small exact linear programs: dense two-phase simplex over rationals with
//! Bland's rule. All variables are nonnegative.

use num_traits::{One, Signed, Zero};

use crate::model::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vec<Rational> },
    Infeasible,
    Unbounded,
}

/// Maximize `objective . x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    vars: usize,
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(vars: usize) -> Self {
        LinearProgram { vars, objective: vec![Rational::zero(); vars], constraints: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn set_objective(&mut self, var: usize, coeff: Rational) {
        self.objective[var] = coeff;
    }

    pub fn add(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        debug_assert!(coeffs.iter().all(|(j, _)| *j < self.vars));
        self.constraints.push(Constraint { coeffs, relation, rhs });
    }

    pub fn maximize(&self) -> LpOutcome {
        self.solve(true)
    }

    /// Any feasible point (a basic one), or `None`.
    pub fn feasible_point(&self) -> Option<Vec<Rational>> {
        match self.solve(false) {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }

    fn solve(&self, optimize: bool) -> LpOutcome {
        let n = self.vars;
        let m = self.constraints.len();

        let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::with_capacity(m);
        for c in &self.constraints {
            let mut dense = vec![Rational::zero(); n];
            for (j, a) in &c.coeffs {
                dense[*j] += *a;
            }
            let (mut rel, mut rhs) = (c.relation, c.rhs);
            if rhs.is_negative() {
                dense.iter_mut().for_each(|a| *a = -*a);
                rhs = -rhs;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            rows.push((dense, rel, rhs));
        }

        let slacks = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let arts = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let total = n + slacks + arts;
        let first_art = n + slacks;

        let mut tab = Tableau { rows: Vec::with_capacity(m), basis: Vec::with_capacity(m), cols: total };
        let (mut next_slack, mut next_art) = (n, first_art);
        for (dense, rel, rhs) in rows {
            let mut row = vec![Rational::zero(); total + 1];
            row[..n].clone_from_slice(&dense);
            row[total] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    tab.basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -Rational::one();
                    next_slack += 1;
                    row[next_art] = Rational::one();
                    tab.basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = Rational::one();
                    tab.basis.push(next_art);
                    next_art += 1;
                }
            }
            tab.rows.push(row);
        }

        if arts > 0 {
            let mut cost = vec![Rational::zero(); total];
            for c in cost.iter_mut().skip(first_art) {
                *c = -Rational::one();
            }
            let allowed = vec![true; total];
            if !tab.run(&cost, &allowed) {
                unreachable!("phase one is bounded");
            }
            if tab.objective(&cost).is_negative() {
                return LpOutcome::Infeasible;
            }
            // Pivot remaining (zero-valued) artificials out where possible.
            for i in 0..m {
                if tab.basis[i] >= first_art {
                    if let Some(j) = (0..first_art).find(|&j| !tab.rows[i][j].is_zero()) {
                        tab.pivot(i, j);
                    }
                }
            }
        }

        let mut allowed = vec![true; total];
        for a in allowed.iter_mut().skip(first_art) {
            *a = false;
        }
        let mut cost = vec![Rational::zero(); total];
        if optimize {
            cost[..n].clone_from_slice(&self.objective);
            if !tab.run(&cost, &allowed) {
                return LpOutcome::Unbounded;
            }
        }
        let mut point = vec![Rational::zero(); n];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n {
                point[b] = tab.rows[i][total];
            }
        }
        let value = point.iter().zip(&self.objective).map(|(x, c)| *x * *c).sum();
        LpOutcome::Optimal { value, point }
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn objective(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .zip(&self.rows)
            .filter(|(b, _)| !cost[**b].is_zero())
            .map(|(b, row)| cost[*b] * row[self.cols])
            .sum()
    }

    /// Returns false when unbounded.
    fn run(&mut self, cost: &[Rational], allowed: &[bool]) -> bool {
        loop {
            let entering = (0..self.cols).find(|&j| {
                if !allowed[j] || self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j];
                for (i, row) in self.rows.iter().enumerate() {
                    let cb = &cost[self.basis[i]];
                    if !cb.is_zero() && !row[j].is_zero() {
                        reduced -= *cb * row[j];
                    }
                }
                reduced.is_positive()
            });
            let Some(j) = entering else { return true };

            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j].is_positive() {
                    let ratio = row[self.cols] / row[j];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((i, _)) = leave else { return false };
            self.pivot(i, j);
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        let nonzero: Vec<usize> = (0..=self.cols).filter(|&k| !self.rows[r][k].is_zero()).collect();
        for &k in &nonzero {
            self.rows[r][k] *= inv;
        }
        let pivot_row: Vec<(usize, Rational)> = nonzero.iter().map(|&k| (k, self.rows[r][k])).collect();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][c];
            if factor.is_zero() {
                continue;
            }
            let row = &mut self.rows[i];
            for (k, a) in &pivot_row {
                row[*k] -= factor * *a;
            }
        }
        self.basis[r] = c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, q(3));
        lp.set_objective(1, q(5));
        lp.add(vec![(0, q(1))], Relation::Le, q(4));
        lp.add(vec![(1, q(2))], Relation::Le, q(12));
        lp.add(vec![(0, q(3)), (1, q(2))], Relation::Le, q(18));
        assert_eq!(lp.maximize(), LpOutcome::Optimal { value: q(36), point: vec![q(2), q(6)] });
    }

    #[test]
    fn equalities_and_lower_bounds() {
        // max -x - y, x + y = 3, x >= 1, y >= 1/2  ->  -3
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, q(-1));
        lp.set_objective(1, q(-1));
        lp.add(vec![(0, q(1)), (1, q(1))], Relation::Eq, q(3));
        lp.add(vec![(0, q(1))], Relation::Ge, q(1));
        lp.add(vec![(1, q(1))], Relation::Ge, Rational::new(1, 2));
        match lp.maximize() {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, q(-3));
                assert_eq!(point[0] + point[1], q(3));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add(vec![(0, q(1))], Relation::Le, q(1));
        lp.add(vec![(0, q(1))], Relation::Ge, q(2));
        assert_eq!(lp.maximize(), LpOutcome::Infeasible);
        assert!(lp.feasible_point().is_none());

        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, q(1));
        lp.add(vec![(0, q(1))], Relation::Ge, q(2));
        assert_eq!(lp.maximize(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_right_hand_sides_are_normalized() {
        // -x <= -2  (x >= 2), max -x  ->  -2
        let mut lp = LinearProgram::new(1);
        lp.set_objective(0, q(-1));
        lp.add(vec![(0, q(-1))], Relation::Le, q(-2));
        assert_eq!(lp.maximize(), LpOutcome::Optimal { value: q(-2), point: vec![q(2)] });
    }

    #[test]
    fn fractional_triangle_matching() {
        // max x1 + x2 + x3, each vertex in two edges with capacity 1  ->  3/2
        let mut lp = LinearProgram::new(3);
        for j in 0..3 {
            lp.set_objective(j, q(1));
        }
        lp.add(vec![(0, q(1)), (1, q(1))], Relation::Le, q(1));
        lp.add(vec![(1, q(1)), (2, q(1))], Relation::Le, q(1));
        lp.add(vec![(0, q(1)), (2, q(1))], Relation::Le, q(1));
        match lp.maximize() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, Rational::new(3, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(0, q(1));
        lp.add(vec![(0, q(1)), (1, q(1))], Relation::Eq, q(2));
        lp.add(vec![(0, q(2)), (1, q(2))], Relation::Eq, q(4));
        assert!(matches!(lp.maximize(), LpOutcome::Optimal { value, .. } if value == q(2)));
    }
}
