//! Polyhedra and polyhedral cones.
//!
//! [`HPolyhedron`] is the halfspace form `{z : A z ≤ b}`; a polyhedron with
//! no rows is the whole space. [`VCone`] is the generator form
//! `cone(generators) + span(lineality)`. Conversions between the two use the
//! double description method and are meant for small dimensions.

pub mod dd;
pub mod linalg;

use thiserror::Error;

use crate::lp::{solve_lp, LinearProgram, LpError, LpStatus, Relation};
use crate::tol;
use linalg::dot;

/// Dimension cap for representation conversion.
pub const CONVERSION_DIM_CAP: usize = 6;
/// Dimension cap (after projection) for [`project_polyhedron`].
pub const PROJECTION_DIM_CAP: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite entry in polyhedron data")]
    NonFinite,
    #[error("polyhedron is empty")]
    Empty,
    #[error("dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("expected a cone (all right-hand sides zero)")]
    NotACone,
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HPolyhedron {
    pub dim: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

impl HPolyhedron {
    pub fn new(dim: usize, a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self, GeometryError> {
        if a.len() != b.len() {
            return Err(GeometryError::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        for row in &a {
            if row.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite);
            }
        }
        if b.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self { dim, a, b })
    }

    /// `{z : A z ≤ 0}`.
    pub fn cone(dim: usize, a: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        let m = a.len();
        Self::new(dim, a, vec![0.0; m])
    }

    pub fn full_space(dim: usize) -> Self {
        Self {
            dim,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn negative_orthant(dim: usize) -> Self {
        let a = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                e
            })
            .collect();
        Self {
            dim,
            a,
            b: vec![0.0; dim],
        }
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    pub fn is_cone(&self) -> bool {
        self.b.iter().all(|&x| x == 0.0)
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        self.a
            .iter()
            .zip(&self.b)
            .all(|(row, &bi)| dot(row, z) <= bi + tol)
    }

    /// Largest violation `max(a_i·z − b_i, 0)`.
    pub fn violation(&self, z: &[f64]) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .fold(0.0_f64, |m, (row, &bi)| m.max(dot(row, z) - bi))
    }

    fn check_point(&self, y: &[f64]) -> Result<(), GeometryError> {
        if y.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        Ok(())
    }

    fn require_cone(&self) -> Result<(), GeometryError> {
        if self.is_cone() {
            Ok(())
        } else {
            Err(GeometryError::NotACone)
        }
    }

    fn free_lp(&self, objective: Vec<f64>) -> LinearProgram {
        let mut lp = LinearProgram::maximize(objective);
        for j in 0..self.dim {
            lp.free(j);
        }
        for (row, &bi) in self.a.iter().zip(&self.b) {
            lp.constrain(row.clone(), Relation::Le, bi);
        }
        lp
    }

    /// LP feasibility test.
    pub fn is_empty(&self) -> Result<bool, GeometryError> {
        if self.dim == 0 {
            return Ok(self.b.iter().any(|&x| x < 0.0));
        }
        let sol = solve_lp(&self.free_lp(vec![0.0; self.dim]))?;
        Ok(sol.status == LpStatus::Infeasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VCone {
    pub dim: usize,
    pub generators: Vec<Vec<f64>>,
    pub lineality: Vec<Vec<f64>>,
}

impl VCone {
    pub fn new(
        dim: usize,
        generators: Vec<Vec<f64>>,
        lineality: Vec<Vec<f64>>,
    ) -> Result<Self, GeometryError> {
        for v in generators.iter().chain(&lineality) {
            if v.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(GeometryError::NonFinite);
            }
        }
        Ok(Self {
            dim,
            generators,
            lineality,
        })
    }

    /// LP test for `x ∈ cone(generators) + span(lineality)`.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool, GeometryError> {
        let (ng, nl) = (self.generators.len(), self.lineality.len());
        if ng + nl == 0 {
            return Ok(linalg::max_abs(x) <= tol);
        }
        // Minimize the L1 residual of x − Σλg − Σμl.
        let n = ng + nl + 2 * self.dim;
        let mut objective = vec![0.0; n];
        objective[ng + nl..].iter_mut().for_each(|c| *c = -1.0);
        let mut lp = LinearProgram::maximize(objective);
        for j in ng..ng + nl {
            lp.free(j);
        }
        for i in 0..self.dim {
            let mut row = vec![0.0; n];
            for (j, g) in self.generators.iter().chain(&self.lineality).enumerate() {
                row[j] = g[i];
            }
            row[ng + nl + 2 * i] = 1.0;
            row[ng + nl + 2 * i + 1] = -1.0;
            lp.constrain(row, Relation::Eq, x[i]);
        }
        let sol = solve_lp(&lp)?;
        Ok(sol.is_optimal() && -sol.objective <= tol * (1.0 + linalg::max_abs(x)))
    }
}

/// `{y : g·y ≤ 0 for generators g, l·y = 0 for lineality vectors l}`.
pub fn polar_cone(k: &VCone) -> HPolyhedron {
    let mut a: Vec<Vec<f64>> = k.generators.clone();
    for l in &k.lineality {
        a.push(l.clone());
        a.push(l.iter().map(|x| -x).collect());
    }
    let m = a.len();
    HPolyhedron {
        dim: k.dim,
        a,
        b: vec![0.0; m],
    }
}

/// `{z : A z ≤ 0}` for a nonempty `P = {z : A z ≤ b}`.
pub fn recession_cone(p: &HPolyhedron) -> Result<HPolyhedron, GeometryError> {
    if !p.is_cone() && p.is_empty()? {
        return Err(GeometryError::Empty);
    }
    Ok(HPolyhedron {
        dim: p.dim,
        a: p.a.clone(),
        b: vec![0.0; p.b.len()],
    })
}

/// Basis of the lineality space (kernel of `A`) of a cone.
pub fn lineality_space(k: &HPolyhedron) -> Result<VCone, GeometryError> {
    k.require_cone()?;
    let basis = linalg::kernel_basis(&k.a, k.dim, tol::DD_ZERO);
    Ok(VCone {
        dim: k.dim,
        generators: Vec::new(),
        lineality: basis,
    })
}

/// `sup{x·y : A x ≤ b}`; `f64::INFINITY` when unbounded.
pub fn support_function_value(p: &HPolyhedron, y: &[f64]) -> Result<f64, GeometryError> {
    p.check_point(y)?;
    if p.dim == 0 {
        return Ok(0.0);
    }
    let sol = solve_lp(&p.free_lp(y.to_vec()))?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        LpStatus::Unbounded => Ok(f64::INFINITY),
        LpStatus::Infeasible => Err(GeometryError::Empty),
    }
}

/// Flags the rows of a cone `{y : G y ≤ 0}` that hold with equality on the
/// whole cone.
///
/// One LP: maximize `Σ t_i` with `g_i·y + t_i ≤ 0`, `0 ≤ t_i ≤ 1`. Since the
/// cone is closed under addition and scaling, every row that is strict
/// somewhere reaches `t_i = 1` at the optimum while implicit rows stay at 0.
pub fn implicit_rows(k: &HPolyhedron) -> Result<Vec<bool>, GeometryError> {
    k.require_cone()?;
    let (m, d) = (k.num_rows(), k.dim);
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut objective = vec![0.0; d + m];
    objective[d..].iter_mut().for_each(|c| *c = 1.0);
    let mut lp = LinearProgram::maximize(objective);
    for j in 0..d {
        lp.free(j);
    }
    for i in 0..m {
        lp.bound(d + i, 0.0, 1.0);
        let mut row = vec![0.0; d + m];
        row[..d].copy_from_slice(&k.a[i]);
        row[d + i] = 1.0;
        lp.constrain(row, Relation::Le, 0.0);
    }
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(LpError::NumericalFailure {
            iterations: sol.pivots,
            reason: format!("implicit-row LP returned {:?}", sol.status),
        }
        .into());
    }
    Ok(sol.x[d..].iter().map(|&t| t < 0.5).collect())
}

/// `y ∈ ri K` for a cone `K = {y : g_i·y ≤ 0}`: implicit rows hold with
/// equality (within `slack`) and the remaining rows hold with margin `slack`.
pub fn relative_interior_membership(
    k: &HPolyhedron,
    y: &[f64],
    slack: f64,
) -> Result<bool, GeometryError> {
    k.check_point(y)?;
    let implicit = implicit_rows(k)?;
    Ok(ri_with_implicit(k, &implicit, y, slack))
}

/// Same as [`relative_interior_membership`] with the implicit rows given.
pub fn ri_with_implicit(k: &HPolyhedron, implicit: &[bool], y: &[f64], slack: f64) -> bool {
    k.a.iter().zip(implicit).all(|(g, &imp)| {
        let v = dot(g, y);
        if imp {
            v.abs() <= slack
        } else {
            v <= -slack
        }
    })
}

fn check_cap(dim: usize, cap: usize) -> Result<(), GeometryError> {
    if dim > cap {
        Err(GeometryError::DimensionCap { dim, cap })
    } else {
        Ok(())
    }
}

/// Halfspace form of a generated cone, via generators of its polar.
pub fn generators_to_halfspaces(k: &VCone) -> Result<HPolyhedron, GeometryError> {
    check_cap(k.dim, CONVERSION_DIM_CAP)?;
    Ok(generators_to_halfspaces_uncapped(k))
}

pub(crate) fn generators_to_halfspaces_uncapped(k: &VCone) -> HPolyhedron {
    let polar = polar_cone(k);
    let g = dd::cone_generators(&polar.a, k.dim);
    let mut a = g.rays;
    for l in g.lineality {
        a.push(l.iter().map(|x| -x).collect());
        a.push(l);
    }
    let m = a.len();
    HPolyhedron {
        dim: k.dim,
        a,
        b: vec![0.0; m],
    }
}

/// Generator form of a cone `{z : A z ≤ 0}`.
pub fn halfspaces_to_generators(k: &HPolyhedron) -> Result<VCone, GeometryError> {
    check_cap(k.dim, CONVERSION_DIM_CAP)?;
    k.require_cone()?;
    Ok(halfspaces_to_generators_uncapped(k))
}

pub(crate) fn halfspaces_to_generators_uncapped(k: &HPolyhedron) -> VCone {
    let g = dd::cone_generators(&k.a, k.dim);
    VCone {
        dim: k.dim,
        generators: g.rays,
        lineality: g.lineality,
    }
}

/// `P ⊆ Q` by comparing support functions on the rows of `Q`.
pub fn is_subset(p: &HPolyhedron, q: &HPolyhedron, tol: f64) -> Result<bool, GeometryError> {
    if p.dim != q.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: p.dim,
            got: q.dim,
        });
    }
    for (row, &bi) in q.a.iter().zip(&q.b) {
        let s = support_function_value(p, row)?;
        if s > bi + tol * (1.0 + bi.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Mutual inclusion.
pub fn same_set(p: &HPolyhedron, q: &HPolyhedron, tol: f64) -> Result<bool, GeometryError> {
    Ok(is_subset(p, q, tol)? && is_subset(q, p, tol)?)
}

/// Projection of `lifted` onto its first `keep` coordinates.
///
/// The polyhedron is homogenized to `{(x, t) : A x − b t ≤ 0, t ≥ 0}`, its
/// generators are projected and converted back to halfspaces, and `t = 1`
/// is substituted.
pub fn project_polyhedron(lifted: &HPolyhedron, keep: usize) -> Result<HPolyhedron, GeometryError> {
    check_cap(keep, PROJECTION_DIM_CAP)?;
    if keep > lifted.dim {
        return Err(GeometryError::DimensionMismatch {
            expected: lifted.dim,
            got: keep,
        });
    }
    if lifted.is_empty()? {
        return Err(GeometryError::Empty);
    }
    let n = lifted.dim;
    let mut rows: Vec<Vec<f64>> = lifted
        .a
        .iter()
        .zip(&lifted.b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(-bi);
            r
        })
        .collect();
    let mut t_row = vec![0.0; n + 1];
    t_row[n] = -1.0;
    rows.push(t_row);
    let g = dd::cone_generators(&rows, n + 1);
    let project = |v: &Vec<f64>| {
        let mut p: Vec<f64> = v[..keep].to_vec();
        p.push(v[n]);
        p
    };
    let cone = VCone {
        dim: keep + 1,
        generators: g.rays.iter().map(project).collect(),
        lineality: g.lineality.iter().map(project).collect(),
    };
    let h = generators_to_halfspaces_uncapped(&cone);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for row in h.a {
        let x_part = &row[..keep];
        let beta = row[keep];
        if linalg::max_abs(x_part) <= tol::DD_ZERO {
            // t ≥ 0 or a redundant multiple of it; negative multiples would
            // mean the projection is empty, which was excluded above.
            continue;
        }
        a.push(x_part.to_vec());
        b.push(-beta);
    }
    Ok(HPolyhedron { dim: keep, a, b })
}
