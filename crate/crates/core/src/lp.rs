//! Exact linear programming by two-phase tableau simplex with Bland's rule.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VarKind {
    NonNeg,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpConstraint {
    pub coefficients: Vec<Rational>,
    pub sense: Sense,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub direction: Direction,
    pub objective: Vec<Rational>,
    pub kinds: Vec<VarKind>,
    pub constraints: Vec<LpConstraint>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: Rational,
        point: Vec<Rational>,
    },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(direction: Direction, objective: Vec<Rational>, kinds: Vec<VarKind>) -> Self {
        LinearProgram {
            direction,
            objective,
            kinds,
            constraints: Vec::new(),
        }
    }

    /// A feasibility problem over `n` variables of the given kind.
    pub fn feasibility(n: usize, kind: VarKind) -> Self {
        Self::new(
            Direction::Minimize,
            vec![Rational::zero(); n],
            vec![kind; n],
        )
    }

    pub fn constrain(&mut self, coefficients: Vec<Rational>, sense: Sense, rhs: Rational) {
        self.constraints.push(LpConstraint {
            coefficients,
            sense,
            rhs,
        });
    }

    pub fn variables(&self) -> usize {
        self.kinds.len()
    }

    /// Exact check that `x` satisfies every constraint and sign condition.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.variables() {
            return false;
        }
        let signs = x
            .iter()
            .zip(&self.kinds)
            .all(|(v, k)| *k == VarKind::Free || !v.is_negative());
        signs
            && self.constraints.iter().all(|c| {
                let lhs: Rational = c.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
                match c.sense {
                    Sense::Le => lhs <= c.rhs,
                    Sense::Ge => lhs >= c.rhs,
                    Sense::Eq => lhs == c.rhs,
                }
            })
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    cols: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Rational], obj_rhs: &mut Rational) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        self.rhs[r] *= &inv;
        let (prow, prhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, p) in self.rows[i].iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for (v, p) in obj.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
            *obj_rhs -= &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Reduced costs and negated objective value for cost vector `c`.
    fn reduced(&self, cost: &[Rational]) -> (Vec<Rational>, Rational) {
        let mut obj = cost.to_vec();
        let mut val = Rational::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (v, a) in obj.iter_mut().zip(&self.rows[i]) {
                *v -= &cost[b] * a;
            }
            val -= &cost[b] * &self.rhs[i];
        }
        (obj, val)
    }

    /// Minimizes `cost` over the columns marked in `allowed`.
    fn run(&mut self, cost: &[Rational], allowed: &[bool]) -> Phase {
        let (mut obj, mut val) = self.reduced(cost);
        loop {
            let Some(enter) = (0..self.cols).find(|&j| allowed[j] && obj[j].is_negative()) else {
                return Phase::Optimal;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return Phase::Unbounded,
                Some((r, _)) => self.pivot(r, enter, &mut obj, &mut val),
            }
        }
    }
}

/// Solves `lp` exactly.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.variables();
    if lp.objective.len() != n {
        return domain("objective length differs from the number of variables");
    }
    if let Some(i) = lp
        .constraints
        .iter()
        .position(|c| c.coefficients.len() != n)
    {
        return domain(format!(
            "constraint {i} has the wrong number of coefficients"
        ));
    }
    // column layout: structural columns (free variables split), slacks, artificials
    let mut col_of = Vec::with_capacity(n);
    let mut structural = 0usize;
    for k in &lp.kinds {
        col_of.push(structural);
        structural += if *k == VarKind::Free { 2 } else { 1 };
    }
    let m = lp.constraints.len();
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut senses = Vec::with_capacity(m);
    for c in &lp.constraints {
        let mut row = vec![Rational::zero(); structural];
        for (j, a) in c.coefficients.iter().enumerate() {
            row[col_of[j]] = a.clone();
            if lp.kinds[j] == VarKind::Free {
                row[col_of[j] + 1] = -a;
            }
        }
        let (mut r, mut s) = (c.rhs.clone(), c.sense);
        if r.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            r = -r;
            s = match s {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        rows.push(row);
        rhs.push(r);
        senses.push(s);
    }
    let slacks = senses.iter().filter(|s| **s != Sense::Eq).count();
    let artificials = senses.iter().filter(|s| **s != Sense::Le).count();
    let cols = structural + slacks + artificials;
    let mut basis = vec![0usize; m];
    let (mut next_slack, mut next_art) = (structural, structural + slacks);
    for (i, row) in rows.iter_mut().enumerate() {
        row.resize(cols, Rational::zero());
        match senses[i] {
            Sense::Le => {
                row[next_slack] = Rational::one();
                basis[i] = next_slack;
                next_slack += 1;
            }
            Sense::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_art] = Rational::one();
                basis[i] = next_art;
                next_art += 1;
            }
            Sense::Eq => {
                row[next_art] = Rational::one();
                basis[i] = next_art;
                next_art += 1;
            }
        }
    }
    let first_art = structural + slacks;
    let mut t = Tableau {
        rows,
        rhs,
        basis,
        cols,
    };

    if artificials > 0 {
        let cost: Vec<Rational> = (0..cols)
            .map(|j| {
                if j >= first_art {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        let all = vec![true; cols];
        t.run(&cost, &all);
        let infeas: Rational = t
            .basis
            .iter()
            .zip(&t.rhs)
            .filter(|(b, _)| **b >= first_art)
            .map(|(_, r)| r.clone())
            .sum();
        if infeas.is_positive() {
            return Ok(LpOutcome::Infeasible);
        }
        // drive remaining (zero-level) artificials out, dropping redundant rows
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= first_art {
                match (0..first_art).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => {
                        let mut dummy = vec![Rational::zero(); cols];
                        let mut dv = Rational::zero();
                        t.pivot(i, j, &mut dummy, &mut dv);
                    }
                    None => {
                        t.rows.remove(i);
                        t.rhs.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let sign = match lp.direction {
        Direction::Minimize => Rational::one(),
        Direction::Maximize => -Rational::one(),
    };
    let mut cost = vec![Rational::zero(); cols];
    for (j, c) in lp.objective.iter().enumerate() {
        cost[col_of[j]] = &sign * c;
        if lp.kinds[j] == VarKind::Free {
            cost[col_of[j] + 1] = -(&sign * c);
        }
    }
    let allowed: Vec<bool> = (0..cols).map(|j| j < first_art).collect();
    if let Phase::Unbounded = t.run(&cost, &allowed) {
        return Ok(LpOutcome::Unbounded);
    }
    let mut values = vec![Rational::zero(); cols];
    for (i, &b) in t.basis.iter().enumerate() {
        values[b] = t.rhs[i].clone();
    }
    let point: Vec<Rational> = (0..n)
        .map(|j| {
            let c = col_of[j];
            if lp.kinds[j] == VarKind::Free {
                &values[c] - &values[c + 1]
            } else {
                values[c].clone()
            }
        })
        .collect();
    let value = lp.objective_value(&point);
    Ok(LpOutcome::Optimal { value, point })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18
        let mut lp = LinearProgram::new(Direction::Maximize, v(&[3, 5]), vec![VarKind::NonNeg; 2]);
        lp.constrain(v(&[1, 0]), Sense::Le, int(4));
        lp.constrain(v(&[0, 2]), Sense::Le, int(12));
        lp.constrain(v(&[3, 2]), Sense::Le, int(18));
        match solve(&lp).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, int(36));
                assert_eq!(point, v(&[2, 6]));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn free_variables_and_equalities() {
        // min x subject to x + y = 1, y ≤ 3, x free
        let mut lp = LinearProgram::new(
            Direction::Minimize,
            v(&[1, 0]),
            vec![VarKind::Free, VarKind::NonNeg],
        );
        lp.constrain(v(&[1, 1]), Sense::Eq, int(1));
        lp.constrain(v(&[0, 2]), Sense::Le, int(3));
        match solve(&lp).unwrap() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, ratio(-1, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::feasibility(1, VarKind::NonNeg);
        lp.constrain(v(&[1]), Sense::Ge, int(2));
        lp.constrain(v(&[1]), Sense::Le, int(1));
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new(Direction::Maximize, v(&[1]), vec![VarKind::Free]);
        lp.constrain(v(&[-1]), Sense::Le, int(0));
        assert_eq!(solve(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(Direction::Minimize, v(&[1, 1]), vec![VarKind::NonNeg; 2]);
        lp.constrain(v(&[1, 1]), Sense::Eq, int(2));
        lp.constrain(v(&[2, 2]), Sense::Eq, int(4));
        lp.constrain(v(&[1, -1]), Sense::Ge, int(0));
        match solve(&lp).unwrap() {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, int(2));
                assert!(lp.is_feasible(&point));
            }
            other => panic!("{other:?}"),
        }
    }
}
