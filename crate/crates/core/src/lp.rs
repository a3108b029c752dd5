//! Dense two-phase primal simplex.
//!
//! Problems are stated as `maximize c·x` subject to rows `a·x {≤,=,≥} b` and
//! per-variable bounds in the extended reals. Variables are shifted,
//! reflected or split so that the working problem has nonnegative columns;
//! finite upper bounds on shifted variables become extra rows. Pivoting uses
//! Dantzig's rule and switches to Bland's rule for the rest of a phase after
//! `5·(n+m)` consecutive degenerate pivots.
//!
//! Row duals are read off the objective row at the columns that formed the
//! initial identity basis. For a `≤` row the dual is nonnegative, for `≥`
//! nonpositive and free for `=`, so that `c - Aᵀy` are the reduced costs.

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use crate::tol;

const OPT_TOL: f64 = 1e-9;
const ZERO_CLEAN: f64 = 1e-13;

static LP_COUNT: AtomicU64 = AtomicU64::new(0);
static PIVOT_COUNT: AtomicU64 = AtomicU64::new(0);

/// Process-wide solver counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub lp_count: u64,
    pub pivot_count: u64,
}

pub fn solver_stats() -> SolverStats {
    SolverStats {
        lp_count: LP_COUNT.load(Ordering::Relaxed),
        pivot_count: PIVOT_COUNT.load(Ordering::Relaxed),
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("numerical failure in simplex after {iterations} iterations: {reason}")]
    NumericalFailure { iterations: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// New maximization problem; every variable starts with bounds `[0, ∞)`.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn bound(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.lower[var] = lower;
        self.upper[var] = upper;
        self
    }

    pub fn free(&mut self, var: usize) -> &mut Self {
        self.bound(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if n == 0 {
            return Err(LpError::Malformed("no variables".into()));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Malformed("bound vectors do not match variable count".into()));
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective coefficient".into()));
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::Malformed(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coeffs.len()
                )));
            }
            if row.coeffs.iter().any(|a| !a.is_finite()) || !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {i} has non-finite entries")));
            }
        }
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] == f64::INFINITY
                || self.upper[j] == f64::NEG_INFINITY
            {
                return Err(LpError::Malformed(format!("variable {j} has invalid bounds")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; empty unless optimal.
    pub x: Vec<f64>,
    /// One dual per constraint row; empty unless optimal.
    pub duals: Vec<f64>,
    pub objective: f64,
    /// Largest constraint or bound violation of `x`.
    pub primal_residual: f64,
    /// `|primal objective − Lagrangian dual objective|`.
    pub duality_gap: f64,
    pub pivots: usize,
}

impl LpSolution {
    fn without_point(status: LpStatus, pivots: usize) -> Self {
        let objective = match status {
            LpStatus::Unbounded => f64::INFINITY,
            _ => f64::NAN,
        };
        Self {
            status,
            x: Vec::new(),
            duals: Vec::new(),
            objective,
            primal_residual: f64::NAN,
            duality_gap: f64::NAN,
            pivots,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shift { col: usize, offset: f64 },
    Reflect { col: usize, offset: f64 },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    m: usize,
    ncols: usize,
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
    scratch: Vec<f64>,
    nz: Vec<usize>,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let piv = self.data[r * w + c];
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[c] = 1.0;
        }
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.data[r * w..(r + 1) * w]);
        self.nz.clear();
        self.nz
            .extend((0..w).filter(|&k| self.scratch[k] != 0.0));
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for &k in &self.nz {
                let v = row[k] - f * self.scratch[k];
                row[k] = if v.abs() < ZERO_CLEAN { 0.0 } else { v };
            }
            row[c] = 0.0;
        }
        let f = self.obj[c];
        if f != 0.0 {
            for &k in &self.nz {
                let v = self.obj[k] - f * self.scratch[k];
                self.obj[k] = if v.abs() < ZERO_CLEAN { 0.0 } else { v };
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Objective row for `maximize cost·s` given the current basis.
    fn load_objective(&mut self, cost: &[f64]) {
        self.obj.clear();
        self.obj.extend(cost.iter().map(|c| -c));
        self.obj.push(0.0);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.data[i * self.width..(i + 1) * self.width];
                for (o, v) in self.obj.iter_mut().zip(row) {
                    *o += cb * v;
                }
            }
        }
    }

    fn optimize(&mut self, allowed: &[bool], max_iter: usize) -> Result<PhaseEnd, LpError> {
        let degenerate_limit = 5 * (self.m + self.ncols);
        let mut degenerate_run = 0usize;
        let mut bland = false;
        let mut iterations = 0usize;
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(LpError::NumericalFailure {
                    iterations,
                    reason: "iteration limit reached".into(),
                });
            }
            let mut enter = None;
            let mut best = -OPT_TOL;
            for j in 0..self.ncols {
                if !allowed[j] {
                    continue;
                }
                let d = self.obj[j];
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(e) = enter else {
                return Ok(PhaseEnd::Optimal);
            };

            let mut theta = f64::INFINITY;
            for i in 0..self.m {
                let a = self.at(i, e);
                if a > tol::LP_PIVOT {
                    let r = self.rhs(i).max(0.0) / a;
                    if r < theta {
                        theta = r;
                    }
                }
            }
            if theta == f64::INFINITY {
                return Ok(PhaseEnd::Unbounded);
            }
            let cutoff = theta * (1.0 + 1e-9) + 1e-12;
            let mut leave: Option<usize> = None;
            for i in 0..self.m {
                let a = self.at(i, e);
                if a <= tol::LP_PIVOT || self.rhs(i).max(0.0) / a > cutoff {
                    continue;
                }
                leave = match leave {
                    None => Some(i),
                    Some(l) if bland => {
                        if self.basis[i] < self.basis[l] {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                    Some(l) => {
                        if a > self.at(l, e) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
            let r = leave.expect("ratio test found a row");
            if self.at(r, e).abs() < 1e-11 {
                return Err(LpError::NumericalFailure {
                    iterations,
                    reason: format!("pivot element {:e} too small", self.at(r, e)),
                });
            }
            if theta <= 1e-12 {
                degenerate_run += 1;
                if degenerate_run > degenerate_limit {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e);
            for i in 0..self.m {
                let idx = i * self.width + self.ncols;
                if self.data[idx] < 0.0 && self.data[idx] > -tol::LP_PIVOT {
                    self.data[idx] = 0.0;
                }
            }
        }
    }
}

/// Solves `lp` and returns its status, primal point and row duals.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    LP_COUNT.fetch_add(1, Ordering::Relaxed);
    let n = lp.num_vars();

    // Column maps.
    let mut maps = Vec::with_capacity(n);
    let mut ns = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for j in 0..n {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo > hi {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, 0));
        }
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ns, offset: lo });
            if hi.is_finite() {
                bound_rows.push((ns, hi - lo));
            }
            ns += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Reflect { col: ns, offset: hi });
            ns += 1;
        } else {
            maps.push(VarMap::Split { pos: ns, neg: ns + 1 });
            ns += 2;
        }
    }

    // Internal rows over structural columns: (coeffs, relation, rhs, sign).
    let user_rows = lp.constraints.len();
    let m = user_rows + bound_rows.len();
    let mut rows: Vec<(Vec<f64>, Relation, f64, f64)> = Vec::with_capacity(m);
    for con in &lp.constraints {
        let mut coeffs = vec![0.0; ns];
        let mut rhs = con.rhs;
        for (j, &a) in con.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, offset } => {
                    coeffs[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Reflect { col, offset } => {
                    coeffs[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    coeffs[pos] += a;
                    coeffs[neg] -= a;
                }
            }
        }
        rows.push((coeffs, con.relation, rhs, 1.0));
    }
    for &(col, ub) in &bound_rows {
        let mut coeffs = vec![0.0; ns];
        coeffs[col] = 1.0;
        rows.push((coeffs, Relation::Le, ub, 1.0));
    }
    for row in rows.iter_mut() {
        let flip = row.2 < 0.0 || (row.2 == 0.0 && row.1 == Relation::Ge);
        if flip {
            row.0.iter_mut().for_each(|a| *a = -*a);
            row.2 = -row.2;
            row.1 = match row.1 {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            row.3 = -1.0;
        }
    }

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let ncols = ns + n_slack + n_art;
    let width = ncols + 1;
    let mut data = vec![0.0; m * width];
    let mut basis = vec![0usize; m];
    let mut identity_col = vec![0usize; m];
    let mut next_slack = ns;
    let mut next_art = ns + n_slack;
    for (i, (coeffs, rel, rhs, _)) in rows.iter().enumerate() {
        let base = i * width;
        data[base..base + ns].copy_from_slice(coeffs);
        data[base + ncols] = *rhs;
        match rel {
            Relation::Le => {
                data[base + next_slack] = 1.0;
                basis[i] = next_slack;
                identity_col[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                data[base + next_slack] = -1.0;
                next_slack += 1;
                data[base + next_art] = 1.0;
                basis[i] = next_art;
                identity_col[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                data[base + next_art] = 1.0;
                basis[i] = next_art;
                identity_col[i] = next_art;
                next_art += 1;
            }
        }
    }
    let art_start = ns + n_slack;
    let mut t = Tableau {
        m,
        ncols,
        width,
        data,
        obj: Vec::with_capacity(width),
        basis,
        pivots: 0,
        scratch: Vec::with_capacity(width),
        nz: Vec::with_capacity(width),
    };
    let max_iter = 50 * (m + ncols) + 1000;
    let rhs_scale = rows.iter().fold(1.0_f64, |s, r| s.max(r.2.abs()));

    let finish = |t: &Tableau, status| {
        PIVOT_COUNT.fetch_add(t.pivots as u64, Ordering::Relaxed);
        Ok(LpSolution::without_point(status, t.pivots))
    };

    // Phase one.
    if n_art > 0 {
        let mut cost = vec![0.0; ncols];
        cost[art_start..].iter_mut().for_each(|c| *c = -1.0);
        t.load_objective(&cost);
        let allowed = vec![true; ncols];
        t.optimize(&allowed, max_iter).inspect_err(|_| {
            PIVOT_COUNT.fetch_add(t.pivots as u64, Ordering::Relaxed);
        })?;
        if t.obj[ncols] < -tol::LP_PIVOT * rhs_scale {
            return finish(&t, LpStatus::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if t.basis[i] >= art_start {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..art_start {
                    let a = t.at(i, j).abs();
                    if a > tol::LP_PIVOT && best.is_none_or(|(_, b)| a > b) {
                        best = Some((j, a));
                    }
                }
                if let Some((j, _)) = best {
                    t.pivot(i, j);
                }
            }
        }
    }

    // Phase two.
    let mut cost = vec![0.0; ncols];
    let mut offset = 0.0;
    for (j, map) in maps.iter().enumerate() {
        let c = lp.objective[j];
        match *map {
            VarMap::Shift { col, offset: o } => {
                cost[col] = c;
                offset += c * o;
            }
            VarMap::Reflect { col, offset: o } => {
                cost[col] = -c;
                offset += c * o;
            }
            VarMap::Split { pos, neg } => {
                cost[pos] = c;
                cost[neg] = -c;
            }
        }
    }
    let _ = offset;
    t.load_objective(&cost);
    let allowed: Vec<bool> = (0..ncols).map(|j| j < art_start).collect();
    let end = t.optimize(&allowed, max_iter).inspect_err(|_| {
        PIVOT_COUNT.fetch_add(t.pivots as u64, Ordering::Relaxed);
    })?;
    if let PhaseEnd::Unbounded = end {
        return finish(&t, LpStatus::Unbounded);
    }

    let mut s = vec![0.0; ncols];
    for i in 0..m {
        s[t.basis[i]] = t.rhs(i).max(0.0);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|map| match *map {
            VarMap::Shift { col, offset } => offset + s[col],
            VarMap::Reflect { col, offset } => offset - s[col],
            VarMap::Split { pos, neg } => s[pos] - s[neg],
        })
        .collect();
    let duals: Vec<f64> = (0..user_rows)
        .map(|i| rows[i].3 * t.obj[identity_col[i]])
        .collect();
    let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    let mut residual = 0.0_f64;
    for con in &lp.constraints {
        let ax: f64 = con.coeffs.iter().zip(&x).map(|(a, v)| a * v).sum();
        let viol = match con.relation {
            Relation::Le => ax - con.rhs,
            Relation::Ge => con.rhs - ax,
            Relation::Eq => (ax - con.rhs).abs(),
        };
        residual = residual.max(viol);
    }
    for j in 0..n {
        residual = residual.max(lp.lower[j] - x[j]).max(x[j] - lp.upper[j]);
    }

    let mut dual_obj: f64 = lp.constraints.iter().zip(&duals).map(|(c, y)| c.rhs * y).sum();
    for j in 0..n {
        let r = lp.objective[j]
            - lp.constraints.iter().zip(&duals).map(|(c, y)| c.coeffs[j] * y).sum::<f64>();
        let bound = if r > OPT_TOL {
            lp.upper[j]
        } else if r < -OPT_TOL {
            lp.lower[j]
        } else {
            x[j]
        };
        dual_obj += if bound.is_finite() { r * bound } else { f64::INFINITY };
    }
    let duality_gap = (objective - dual_obj).abs();
    if duality_gap > 1e-7 * (1.0 + objective.abs()) {
        log::debug!("simplex duality gap {duality_gap:e} at objective {objective}");
    }

    PIVOT_COUNT.fetch_add(t.pivots as u64, Ordering::Relaxed);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        duals,
        objective,
        primal_residual: residual.max(0.0),
        duality_gap,
        pivots: t.pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_constraint_optimum() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, 3.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 3.0).abs() < 1e-12);
        assert!((sol.duals[0] - 1.0).abs() < 1e-12);
        assert!(sol.duality_gap < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![1.0], Relation::Le, -1.0);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn ray_is_unbounded() {
        let lp = LinearProgram::maximize(vec![1.0]);
        assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_bounded_variables() {
        // max x + y, x free, y in [-2, 5], x + y <= 1, x - y >= -4
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.free(0).bound(1, -2.0, 5.0);
        lp.constrain(vec![1.0, 1.0], Relation::Le, 1.0);
        lp.constrain(vec![1.0, -1.0], Relation::Ge, -4.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-10);
        assert!(sol.primal_residual < 1e-10);
        assert!(sol.duality_gap < 1e-9);
    }

    #[test]
    fn equality_rows_and_negative_rhs() {
        // min x0 + x1 (as max of the negation) s.t. x0 + 2 x1 = 4, x0 - x1 <= -1
        let mut lp = LinearProgram::maximize(vec![-1.0, -1.0]);
        lp.constrain(vec![1.0, 2.0], Relation::Eq, 4.0);
        lp.constrain(vec![1.0, -1.0], Relation::Le, -1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        // Optimum at x1 = 2, x0 = 0.
        assert!((sol.objective + 2.0).abs() < 1e-10, "{sol:?}");
        assert!(sol.duality_gap < 1e-9);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook rule.
        let mut lp = LinearProgram::maximize(vec![0.75, -20.0, 0.5, -6.0]);
        lp.constrain(vec![0.25, -8.0, -1.0, 9.0], Relation::Le, 0.0);
        lp.constrain(vec![0.5, -12.0, -0.5, 3.0], Relation::Le, 0.0);
        lp.constrain(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.25).abs() < 1e-9);
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.constrain(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(solve_lp(&lp), Err(LpError::Malformed(_))));
    }
}
