//! Two-phase primal simplex over exact rationals.
//!
//! Minimizes `c.x` subject to rows `a.x (>=|<=|=) b` and `x >= 0`. Dense
//! tableau; Bland's rule (lowest eligible index enters, ratio ties leave by
//! lowest basis index) guarantees termination. Phase 1 drives artificial
//! variables out or drops redundant rows; phase 2 never reuses them.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum LpRel {
    Ge,
    Le,
    Eq,
}

pub(super) struct LpProblem {
    pub objective: Vec<Rational>,
    pub rows: Vec<(Vec<Rational>, LpRel, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(super) enum LpOutcome {
    Optimal(Vec<Rational>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// Rows of coefficients, one extra trailing column for the constants.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs per column, trailing entry = negated objective value.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    columns: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v /= &inv;
        }
        for r in 0..self.rows.len() {
            if r == row || self.rows[r][col].is_zero() {
                continue;
            }
            let factor = self.rows[r][col].clone();
            for c in 0..=self.columns {
                let delta = &factor * &self.rows[row][c];
                self.rows[r][c] -= delta;
            }
        }
        if !self.cost[col].is_zero() {
            let factor = self.cost[col].clone();
            for c in 0..=self.columns {
                let delta = &factor * &self.rows[row][c];
                self.cost[c] -= delta;
            }
        }
        self.basis[row] = col;
    }

    /// Reduced costs for `objective`, with basic columns eliminated.
    fn reset_cost(&mut self, objective: &[Rational]) {
        self.cost = vec![Rational::zero(); self.columns + 1];
        self.cost[..objective.len()].clone_from_slice(objective);
        for row in 0..self.rows.len() {
            let b = self.basis[row];
            if self.cost[b].is_zero() {
                continue;
            }
            let factor = self.cost[b].clone();
            for c in 0..=self.columns {
                let delta = &factor * &self.rows[row][c];
                self.cost[c] -= delta;
            }
        }
    }

    /// Bland-rule iteration over the allowed column range. Returns false on
    /// an unbounded ray.
    fn optimize(&mut self, allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&c| self.cost[c].is_negative());
            let Some(col) = entering else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                if !self.rows[r][col].is_positive() {
                    continue;
                }
                let ratio = &self.rows[r][self.columns] / &self.rows[r][col];
                let better = match &leave {
                    None => true,
                    Some((lr, lratio)) => {
                        ratio < *lratio || (ratio == *lratio && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return false;
            };
            self.pivot(row, col);
        }
    }
}

pub(super) fn solve_lp(problem: &LpProblem) -> LpOutcome {
    let n = problem.objective.len();
    let m = problem.rows.len();

    // Normalize constants to be nonnegative, flipping relations.
    let rows: Vec<(Vec<Rational>, LpRel, Rational)> = problem
        .rows
        .iter()
        .map(|(a, rel, b)| {
            debug_assert_eq!(a.len(), n);
            if b.is_negative() {
                let flipped = match rel {
                    LpRel::Ge => LpRel::Le,
                    LpRel::Le => LpRel::Ge,
                    LpRel::Eq => LpRel::Eq,
                };
                (a.iter().map(|v| -v).collect(), flipped, -b)
            } else {
                (a.clone(), *rel, b.clone())
            }
        })
        .collect();

    let slack_count = rows
        .iter()
        .filter(|(_, rel, _)| *rel != LpRel::Eq)
        .count();
    let artificial_count = rows
        .iter()
        .filter(|(_, rel, _)| *rel != LpRel::Le)
        .count();
    let columns = n + slack_count + artificial_count;

    let mut tableau = Tableau {
        rows: Vec::with_capacity(m),
        cost: Vec::new(),
        basis: Vec::with_capacity(m),
        columns,
    };
    let mut next_slack = n;
    let mut next_artificial = n + slack_count;
    for (a, rel, b) in &rows {
        let mut row = vec![Rational::zero(); columns + 1];
        row[..n].clone_from_slice(a);
        row[columns] = b.clone();
        match rel {
            LpRel::Le => {
                row[next_slack] = Rational::one();
                tableau.basis.push(next_slack);
                next_slack += 1;
            }
            LpRel::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_artificial] = Rational::one();
                tableau.basis.push(next_artificial);
                next_artificial += 1;
            }
            LpRel::Eq => {
                row[next_artificial] = Rational::one();
                tableau.basis.push(next_artificial);
                next_artificial += 1;
            }
        }
        tableau.rows.push(row);
    }

    let artificial_start = n + slack_count;
    if artificial_count > 0 {
        let mut phase1 = vec![Rational::zero(); columns];
        for c in artificial_start..columns {
            phase1[c] = Rational::one();
        }
        tableau.reset_cost(&phase1);
        if !tableau.optimize(columns) {
            unreachable!("phase-1 objective is bounded below by zero");
        }
        // cost[columns] holds the negated objective value.
        if !tableau.cost[columns].is_zero() {
            return LpOutcome::Infeasible;
        }
        // Remove artificials from the basis; rows admitting no real pivot
        // are redundant and dropped.
        let mut r = 0;
        while r < tableau.rows.len() {
            if tableau.basis[r] >= artificial_start {
                match (0..artificial_start).find(|&c| !tableau.rows[r][c].is_zero()) {
                    Some(c) => tableau.pivot(r, c),
                    None => {
                        tableau.rows.remove(r);
                        tableau.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    let mut phase2 = vec![Rational::zero(); columns];
    phase2[..n].clone_from_slice(&problem.objective);
    tableau.reset_cost(&phase2);
    if !tableau.optimize(artificial_start) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![Rational::zero(); n];
    for (r, &b) in tableau.basis.iter().enumerate() {
        if b < n {
            x[b] = tableau.rows[r][columns].clone();
        }
    }
    LpOutcome::Optimal(x)
}
