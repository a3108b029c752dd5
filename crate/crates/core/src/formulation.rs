//! Sparse builder for the LPs assembled over event trees.

use crate::lp::{solve_lp, LinearProgram, LpError, LpSolution, Relation};
use crate::market::SolvencySet;

/// `Σ coef·var + constant`.
#[derive(Debug, Clone, Default)]
pub(crate) struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: usize) -> Self {
        Self {
            terms: vec![(v, 1.0)],
            constant: 0.0,
        }
    }

    pub fn plus(mut self, v: usize, coef: f64) -> Self {
        self.terms.push((v, coef));
        self
    }
}

#[derive(Debug, Default)]
pub(crate) struct Builder {
    lower: Vec<f64>,
    upper: Vec<f64>,
    objective: Vec<f64>,
    rows: Vec<(Vec<(usize, f64)>, Relation, f64)>,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(&mut self, lower: f64, upper: f64) -> usize {
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(0.0);
        self.lower.len() - 1
    }

    pub fn free(&mut self) -> usize {
        self.var(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn free_block(&mut self, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.free()).collect()
    }

    pub fn nonneg_block(&mut self, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.var(0.0, f64::INFINITY)).collect()
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn add_objective(&mut self, v: usize, c: f64) {
        self.objective[v] += c;
    }

    pub fn row(&mut self, terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        self.rows.push((terms, relation, rhs));
    }

    /// Requires the point with coordinates `coords` to lie in `set`; lifted
    /// coordinates get fresh free variables, which are returned.
    pub fn membership(&mut self, set: &SolvencySet, coords: &[LinExpr]) -> Vec<usize> {
        let d = set.assets();
        debug_assert_eq!(coords.len(), d);
        let aux = self.free_block(set.aux());
        let poly = set.poly();
        for (row, &bi) in poly.a.iter().zip(&poly.b) {
            let mut terms = Vec::new();
            let mut rhs = bi;
            for (i, coord) in coords.iter().enumerate() {
                let a = row[i];
                if a == 0.0 {
                    continue;
                }
                terms.extend(coord.terms.iter().map(|&(v, c)| (v, a * c)));
                rhs -= a * coord.constant;
            }
            for (k, &u) in aux.iter().enumerate() {
                let a = row[d + k];
                if a != 0.0 {
                    terms.push((u, a));
                }
            }
            if terms.is_empty() {
                // Constant row; keep it so infeasibility is still detected.
                let v = self.var(0.0, 0.0);
                terms.push((v, 1.0));
            }
            self.rows.push((terms, crate::lp::Relation::Le, rhs));
        }
        aux
    }

    /// Adds multipliers `λ ≥ 0` with `A_xᵀλ = y` and `A_uᵀλ = 0`, so that `y`
    /// lies in the barrier cone of `set` and `b·λ ≥ σ_set(y)` (with equality
    /// at the minimum). Returns the multiplier variables.
    pub fn polar_multipliers(&mut self, set: &SolvencySet, y: &[LinExpr]) -> Vec<usize> {
        let d = set.assets();
        let poly = set.poly();
        let lambda = self.nonneg_block(poly.num_rows());
        for col in 0..poly.dim {
            let mut terms: Vec<(usize, f64)> = lambda
                .iter()
                .zip(&poly.a)
                .filter(|(_, row)| row[col] != 0.0)
                .map(|(&l, row)| (l, row[col]))
                .collect();
            let mut rhs = 0.0;
            if col < d {
                terms.extend(y[col].terms.iter().map(|&(v, c)| (v, -c)));
                rhs = y[col].constant;
            }
            if terms.is_empty() {
                if rhs != 0.0 {
                    let v = self.var(0.0, 0.0);
                    terms.push((v, 1.0));
                } else {
                    continue;
                }
            }
            self.rows.push((terms, Relation::Eq, rhs));
        }
        lambda
    }

    pub fn build(&self) -> LinearProgram {
        let n = self.num_vars();
        let mut lp = LinearProgram::maximize(self.objective.clone());
        lp.lower.clone_from(&self.lower);
        lp.upper.clone_from(&self.upper);
        for (terms, rel, rhs) in &self.rows {
            let mut coeffs = vec![0.0; n];
            for &(v, c) in terms {
                coeffs[v] += c;
            }
            lp.constrain(coeffs, *rel, *rhs);
        }
        lp
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        if self.num_vars() == 0 {
            let mut b = Builder {
                lower: vec![0.0],
                upper: vec![0.0],
                objective: vec![0.0],
                rows: self.rows.clone(),
            };
            b.rows.retain(|r| !r.0.is_empty());
            return solve_lp(&b.build());
        }
        solve_lp(&self.build())
    }
}
