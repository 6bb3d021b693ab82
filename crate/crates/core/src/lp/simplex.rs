//! Dense-tableau phase-1 simplex over exact rationals.
//!
//! Solves feasibility of `A x (>= | <=) b, x >= 0` with `b >= 0` by minimizing
//! the sum of artificial variables. Pivoting uses Bland's smallest-index rule,
//! so the pivot sequence is a pure function of the input and the method
//! terminates.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    AtLeast,
    AtMost,
}

#[derive(Debug, Clone)]
pub struct Phase1 {
    pub rows: Vec<(Sense, Rational)>,
    /// Sparse structural columns: (row, coefficient).
    pub columns: Vec<Vec<(usize, Rational)>>,
}

#[derive(Debug, Clone)]
pub struct Phase1Outcome {
    /// Optimal sum of artificials; zero iff the system is feasible.
    pub infeasibility: Rational,
    /// Structural solution at the final basis.
    pub x: Vec<Rational>,
    /// Optimal phase-1 dual prices, one per row.
    pub duals: Vec<Rational>,
    pub pivots: usize,
}

impl Phase1Outcome {
    pub fn feasible(&self) -> bool {
        self.infeasibility.is_zero()
    }
}

struct Tableau {
    body: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    reduced: Vec<Rational>,
    objective: Rational,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = Rational::one() / &self.body[row][col];
        for v in self.body[row].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        self.rhs[row] *= &inv;
        let pivot_row = self.body[row].clone();
        let pivot_rhs = self.rhs[row].clone();
        for i in 0..self.body.len() {
            if i == row || self.body[i][col].is_zero() {
                continue;
            }
            let factor = self.body[i][col].clone();
            for (v, p) in self.body[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        let factor = self.reduced[col].clone();
        if !factor.is_zero() {
            for (v, p) in self.reduced.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
            self.objective += &factor * &pivot_rhs;
        }
        self.basis[row] = col;
    }
}

impl Phase1 {
    pub fn solve(&self) -> Phase1Outcome {
        let m = self.rows.len();
        let n = self.columns.len();
        // column layout: structurals, then per row either (surplus, artificial) or slack
        let mut extra = Vec::with_capacity(m);
        let mut width = n;
        for (sense, _) in &self.rows {
            match sense {
                Sense::AtLeast => {
                    extra.push((width, Some(width + 1)));
                    width += 2;
                }
                Sense::AtMost => {
                    extra.push((width, None));
                    width += 1;
                }
            }
        }
        let mut cost = vec![Rational::zero(); width];
        let mut body = vec![vec![Rational::zero(); width]; m];
        for (j, col) in self.columns.iter().enumerate() {
            for (i, a) in col {
                body[*i][j] += a;
            }
        }
        let mut basis = Vec::with_capacity(m);
        for (i, (sense, _)) in self.rows.iter().enumerate() {
            let (first, artificial) = extra[i];
            match sense {
                Sense::AtLeast => {
                    let art = artificial.expect("artificial present");
                    body[i][first] = -Rational::one();
                    body[i][art] = Rational::one();
                    cost[art] = Rational::one();
                    basis.push(art);
                }
                Sense::AtMost => {
                    body[i][first] = Rational::one();
                    basis.push(first);
                }
            }
        }
        let rhs: Vec<Rational> = self.rows.iter().map(|(_, b)| b.clone()).collect();
        // reduced costs d = c - c_B B^{-1} A with B = I initially
        let mut reduced = cost.clone();
        let mut objective = Rational::zero();
        for i in 0..m {
            let cb = &cost[basis[i]];
            if cb.is_zero() {
                continue;
            }
            for j in 0..width {
                if !body[i][j].is_zero() {
                    reduced[j] -= cb * &body[i][j];
                }
            }
            objective += cb * &rhs[i];
        }
        let mut t = Tableau {
            body,
            rhs,
            reduced,
            objective,
            basis,
        };
        let mut pivots = 0;
        while let Some(col) = t.reduced.iter().position(|d| d.is_negative()) {
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..m {
                let a = &t.body[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &t.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && t.basis[i] < t.basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            // phase 1 is bounded below by zero, so a ratio row always exists
            let (row, _) = leave.expect("phase-1 objective is bounded");
            t.pivot(row, col);
            pivots += 1;
        }
        let mut x = vec![Rational::zero(); n];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < n {
                x[b] = t.rhs[i].clone();
            }
        }
        // each row owns an identity column e_i with cost c; its dual price is c - d
        let duals = extra
            .iter()
            .map(|&(first, artificial)| match artificial {
                Some(art) => &cost[art] - &t.reduced[art],
                None => &cost[first] - &t.reduced[first],
            })
            .collect();
        Phase1Outcome {
            infeasibility: t.objective,
            x,
            duals,
            pivots,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn trivial_feasible_system() {
        // x >= 1, x <= 1
        let lp = Phase1 {
            rows: vec![(Sense::AtLeast, int(1)), (Sense::AtMost, int(1))],
            columns: vec![vec![(0, int(1)), (1, int(1))]],
        };
        let out = lp.solve();
        assert!(out.feasible());
        assert_eq!(out.x, vec![int(1)]);
    }

    #[test]
    fn infeasible_system_has_positive_dual_objective() {
        // x1 >= 1, x2 >= 1, x1 + x2 <= 1
        let lp = Phase1 {
            rows: vec![
                (Sense::AtLeast, int(1)),
                (Sense::AtLeast, int(1)),
                (Sense::AtMost, int(1)),
            ],
            columns: vec![vec![(0, int(1)), (2, int(1))], vec![(1, int(1)), (2, int(1))]],
        };
        let out = lp.solve();
        assert!(!out.feasible());
        assert_eq!(out.infeasibility, int(1));
        let dual_value: Rational = out
            .duals
            .iter()
            .zip(&lp.rows)
            .map(|(p, (_, b))| p * b)
            .fold(Rational::zero(), |a, b| a + b);
        assert_eq!(dual_value, out.infeasibility);
        // dual feasibility: pi^T A_j <= 0 for structurals
        for col in &lp.columns {
            let s = col.iter().fold(Rational::zero(), |a, (i, c)| a + &out.duals[*i] * c);
            assert!(s <= Rational::zero());
        }
    }

    #[test]
    fn fractional_solution() {
        // three columns each covering two of three rows, each row needs 1, each col <= ...
        // x_a + x_b >= 1, x_b + x_c >= 1, x_a + x_c >= 1, x_a + x_b + x_c <= 3/2
        let lp = Phase1 {
            rows: vec![
                (Sense::AtLeast, int(1)),
                (Sense::AtLeast, int(1)),
                (Sense::AtLeast, int(1)),
                (Sense::AtMost, ratio(3, 2)),
            ],
            columns: vec![
                vec![(0, int(1)), (2, int(1)), (3, int(1))],
                vec![(0, int(1)), (1, int(1)), (3, int(1))],
                vec![(1, int(1)), (2, int(1)), (3, int(1))],
            ],
        };
        let out = lp.solve();
        assert!(out.feasible());
        assert_eq!(out.x, vec![ratio(1, 2); 3]);
    }
}
