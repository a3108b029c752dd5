//! Market models: one polyhedral solvency set per tree node.
//!
//! A [`SolvencySet`] is stored as a polyhedron over `d + k` coordinates
//! whose first `d` are portfolio positions and the remaining `k` auxiliary
//! variables (zero for directly given halfspaces). The set itself is the
//! projection on the first `d` coordinates. Every LP built downstream
//! consumes the lifted rows directly.
//!
//! Sets must contain the negative orthant: `0 ∈ C` and each `−e_i` is a
//! recession direction. Constructors check both.

use thiserror::Error;

use crate::formulation::{Builder, LinExpr};
use crate::geometry::{
    self, generators_to_halfspaces, halfspaces_to_generators_uncapped, polar_cone,
    project_polyhedron, GeometryError, HPolyhedron, VCone,
};
use crate::lp::{LpError, LpStatus};
use crate::tree::{EventTree, TreeError};

/// Tolerance for the validation of user-supplied model data.
const SPEC_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("node {node}: expected {expected} entries, got {got}")]
    DimensionMismatch {
        node: u64,
        expected: usize,
        got: usize,
    },
    #[error("model has {got} node sets for a tree with {expected} nodes")]
    NodeCount { expected: usize, got: usize },
    #[error("node {node}: bid-ask entry pi[{i}][{j}] = {value} must be positive and finite")]
    NonPositivePrice {
        node: u64,
        i: usize,
        j: usize,
        value: f64,
    },
    #[error("node {node}: S(0) ≠ 0 (S(0) = {value})")]
    CostNotZeroAtOrigin { node: u64, value: f64 },
    #[error("node {node}: cost S[{i}][{j}] has decreasing piece with slope {slope}")]
    DecreasingPiece {
        node: u64,
        i: usize,
        j: usize,
        slope: f64,
    },
    #[error("node {node}: non-finite model data")]
    NonFinite { node: u64 },
    #[error("node {node}: solvency set does not contain the origin")]
    OriginNotSolvent { node: u64 },
    #[error("node {node}: -e_{asset} is not a recession direction of the solvency set")]
    MissingDisposal { node: u64, asset: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvencySet {
    assets: usize,
    poly: HPolyhedron,
    generators: Option<VCone>,
}

impl SolvencySet {
    /// Set given directly by halfspaces in portfolio space.
    pub fn from_halfspaces(poly: HPolyhedron) -> Self {
        Self {
            assets: poly.dim,
            poly,
            generators: None,
        }
    }

    /// Projection of `lifted` on its first `assets` coordinates.
    pub fn lifted(assets: usize, lifted: HPolyhedron) -> Result<Self, GeometryError> {
        if lifted.dim < assets {
            return Err(GeometryError::DimensionMismatch {
                expected: assets,
                got: lifted.dim,
            });
        }
        Ok(Self {
            assets,
            poly: lifted,
            generators: None,
        })
    }

    /// Cone with known generators; the halfspace form is derived.
    pub fn from_generators(cone: VCone) -> Result<Self, GeometryError> {
        let poly = generators_to_halfspaces(&cone)?;
        Ok(Self {
            assets: cone.dim,
            poly,
            generators: Some(cone),
        })
    }

    /// `R^2_− + r·P` where `P` is the regular polygon with `sides` sides
    /// circumscribed about the unit disc, with facet normals at angles
    /// `2πj/sides`. Only normals in the closed positive quadrant survive the
    /// Minkowski sum with the orthant. `sides` must be a multiple of 4.
    pub fn orthant_plus_polygon(sides: usize, radius: f64) -> Self {
        assert!(sides >= 4 && sides.is_multiple_of(4), "sides must be a positive multiple of 4");
        let quarter = sides / 4;
        let mut a = Vec::new();
        for j in 0..=quarter {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / sides as f64;
            let (s, c) = angle.sin_cos();
            let clean = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
            a.push(vec![clean(c), clean(s)]);
        }
        let m = a.len();
        Self::from_halfspaces(HPolyhedron {
            dim: 2,
            a,
            b: vec![radius; m],
        })
    }

    pub fn assets(&self) -> usize {
        self.assets
    }

    /// Number of auxiliary coordinates.
    pub fn aux(&self) -> usize {
        self.poly.dim - self.assets
    }

    pub fn is_lifted(&self) -> bool {
        self.aux() > 0
    }

    /// The stored (possibly lifted) polyhedron.
    pub fn poly(&self) -> &HPolyhedron {
        &self.poly
    }

    pub fn is_cone(&self) -> bool {
        self.poly.is_cone()
    }

    pub fn cached_generators(&self) -> Option<&VCone> {
        self.generators.as_ref()
    }

    /// Membership of a portfolio; an LP over the auxiliary variables when
    /// the set is lifted.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool, LpError> {
        if !self.is_lifted() {
            return Ok(self.poly.contains(x, tol));
        }
        let mut b = Builder::new();
        let coords: Vec<LinExpr> = x
            .iter()
            .map(|&v| LinExpr::constant(v))
            .collect();
        // Relax each row by `tol` to match the direct test.
        let relaxed = SolvencySet {
            assets: self.assets,
            poly: HPolyhedron {
                dim: self.poly.dim,
                a: self.poly.a.clone(),
                b: self.poly.b.iter().map(|v| v + tol).collect(),
            },
            generators: None,
        };
        b.membership(&relaxed, &coords);
        b.var(0.0, 0.0);
        Ok(b.solve()?.status != LpStatus::Infeasible)
    }

    /// Halfspace form in portfolio space; projects lifted sets (`d ≤ 3`).
    pub fn projected(&self) -> Result<HPolyhedron, GeometryError> {
        if self.is_lifted() {
            project_polyhedron(&self.poly, self.assets)
        } else {
            Ok(self.poly.clone())
        }
    }

    /// Generator form of a conical set.
    pub fn cone_generators(&self) -> Result<VCone, GeometryError> {
        if let Some(g) = &self.generators {
            return Ok(g.clone());
        }
        if !self.is_cone() {
            return Err(GeometryError::NotACone);
        }
        let h = self.projected()?;
        if h.dim > geometry::CONVERSION_DIM_CAP {
            return Err(GeometryError::DimensionCap {
                dim: h.dim,
                cap: geometry::CONVERSION_DIM_CAP,
            });
        }
        Ok(halfspaces_to_generators_uncapped(&h))
    }

    /// Halfspace form of the polar cone of a conical set.
    pub fn polar(&self) -> Result<HPolyhedron, GeometryError> {
        Ok(polar_cone(&self.cone_generators()?))
    }

    /// Recession cone: right-hand sides set to zero.
    pub fn recession(&self) -> SolvencySet {
        if self.is_cone() {
            return self.clone();
        }
        SolvencySet {
            assets: self.assets,
            poly: HPolyhedron {
                dim: self.poly.dim,
                a: self.poly.a.clone(),
                b: vec![0.0; self.poly.b.len()],
            },
            generators: None,
        }
    }

    /// `σ_C(y) = sup{x·y : x ∈ C}`; `f64::INFINITY` when unbounded.
    pub fn support(&self, y: &[f64]) -> Result<f64, GeometryError> {
        if !self.is_lifted() {
            return geometry::support_function_value(&self.poly, y);
        }
        let mut objective = y.to_vec();
        objective.resize(self.poly.dim, 0.0);
        let mut b = Builder::new();
        let x = b.free_block(self.assets);
        for (v, &c) in x.iter().zip(&objective) {
            b.add_objective(*v, c);
        }
        let coords: Vec<LinExpr> = x.iter().map(|&v| LinExpr::var(v)).collect();
        b.membership(self, &coords);
        let sol = b.solve()?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.objective),
            LpStatus::Unbounded => Ok(f64::INFINITY),
            LpStatus::Infeasible => Err(GeometryError::Empty),
        }
    }

    /// Checks `0 ∈ C` and `−e_i ∈ C^∞` for all `i`.
    fn validate(&self, node: u64) -> Result<(), MarketError> {
        if self.poly.a.iter().flatten().chain(&self.poly.b).any(|v| !v.is_finite()) {
            return Err(MarketError::NonFinite { node });
        }
        let zero = vec![0.0; self.assets];
        if !self.contains(&zero, SPEC_TOL)? {
            return Err(MarketError::OriginNotSolvent { node });
        }
        let rec = self.recession();
        for i in 0..self.assets {
            let mut e = vec![0.0; self.assets];
            e[i] = -1.0;
            if !rec.contains(&e, SPEC_TOL)? {
                return Err(MarketError::MissingDisposal { node, asset: i });
            }
        }
        Ok(())
    }
}

/// Per-node bid-ask matrices, in tree node order. `pi[i][j]` units of asset
/// `i` buy one unit of asset `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BidAskSpec {
    pub matrices: Vec<Vec<Vec<f64>>>,
}

impl BidAskSpec {
    pub fn constant(tree: &EventTree, pi: Vec<Vec<f64>>) -> Self {
        Self {
            matrices: vec![pi; tree.len()],
        }
    }
}

/// Affine piece `x ↦ a·x − b` of a convex cost function.
#[derive(Debug, Clone, PartialEq)]
pub struct CostPiece {
    pub a: Vec<f64>,
    pub b: f64,
}

/// Per-node convex cost `S(x) = max_k (a_k·x − b_k)`, in tree node order.
#[derive(Debug, Clone, PartialEq)]
pub struct CostProcessSpec {
    pub pieces: Vec<Vec<CostPiece>>,
}

/// Affine piece `v ↦ slope·v + intercept` of a scalar cost on `R_+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarPiece {
    pub slope: f64,
    pub intercept: f64,
}

/// Per-node matrices of scalar costs: `costs[node][i][j]` lists the pieces
/// of `S^{ij}`, the amount of asset `i` paid for a quantity of asset `j`.
/// The diagonal is ignored; an empty off-diagonal list disallows the
/// exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrencyIlliquiditySpec {
    pub costs: Vec<Vec<Vec<Vec<ScalarPiece>>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketModel {
    tree: EventTree,
    sets: Vec<SolvencySet>,
    conical: bool,
}

impl MarketModel {
    /// Model from explicit solvency sets in tree node order.
    pub fn from_sets(tree: EventTree, sets: Vec<SolvencySet>) -> Result<Self, MarketError> {
        if sets.len() != tree.len() {
            return Err(MarketError::NodeCount {
                expected: tree.len(),
                got: sets.len(),
            });
        }
        for (node, set) in tree.nodes().iter().zip(&sets) {
            if set.assets() != tree.assets() {
                return Err(MarketError::DimensionMismatch {
                    node: node.id,
                    expected: tree.assets(),
                    got: set.assets(),
                });
            }
            set.validate(node.id)?;
        }
        let conical = sets.iter().all(SolvencySet::is_cone);
        Ok(Self {
            tree,
            sets,
            conical,
        })
    }

    /// Same set at every node.
    pub fn constant(tree: EventTree, set: SolvencySet) -> Result<Self, MarketError> {
        let sets = vec![set; tree.len()];
        Self::from_sets(tree, sets)
    }

    /// `C = −K̂`, generated by `−e_i` and `e_j − π^{ij} e_i`.
    pub fn from_bid_ask(tree: EventTree, spec: &BidAskSpec) -> Result<Self, MarketError> {
        let d = tree.assets();
        if spec.matrices.len() != tree.len() {
            return Err(MarketError::NodeCount {
                expected: tree.len(),
                got: spec.matrices.len(),
            });
        }
        let mut sets = Vec::with_capacity(tree.len());
        for (node, pi) in tree.nodes().iter().zip(&spec.matrices) {
            let cone = bid_ask_cone(node.id, d, pi)?;
            sets.push(SolvencySet::from_generators(cone)?);
        }
        Self::from_sets(tree, sets)
    }

    /// `C = {x : a_k·x ≤ b_k for all pieces}`.
    pub fn from_cost_process(tree: EventTree, spec: &CostProcessSpec) -> Result<Self, MarketError> {
        let d = tree.assets();
        if spec.pieces.len() != tree.len() {
            return Err(MarketError::NodeCount {
                expected: tree.len(),
                got: spec.pieces.len(),
            });
        }
        let mut sets = Vec::with_capacity(tree.len());
        for (node, pieces) in tree.nodes().iter().zip(&spec.pieces) {
            let mut at_zero = f64::NEG_INFINITY;
            let mut a = Vec::with_capacity(pieces.len());
            let mut b = Vec::with_capacity(pieces.len());
            for p in pieces {
                if p.a.len() != d {
                    return Err(MarketError::DimensionMismatch {
                        node: node.id,
                        expected: d,
                        got: p.a.len(),
                    });
                }
                if !p.b.is_finite() || p.a.iter().any(|v| !v.is_finite()) {
                    return Err(MarketError::NonFinite { node: node.id });
                }
                at_zero = at_zero.max(-p.b);
                a.push(p.a.clone());
                b.push(p.b);
            }
            if at_zero.abs() > SPEC_TOL {
                return Err(MarketError::CostNotZeroAtOrigin {
                    node: node.id,
                    value: at_zero,
                });
            }
            sets.push(SolvencySet::from_halfspaces(HPolyhedron::new(d, a, b)?));
        }
        Self::from_sets(tree, sets)
    }

    /// Lifted form over `(x, a^{ij}, u^{ij})` with
    /// `x^i − Σ_j a^{ji} + Σ_j u^{ij} ≤ 0`, `u^{ij} ≥ S^{ij}(a^{ij})` piecewise
    /// and `a ≥ 0`.
    pub fn from_currency_costs(
        tree: EventTree,
        spec: &CurrencyIlliquiditySpec,
    ) -> Result<Self, MarketError> {
        let d = tree.assets();
        if spec.costs.len() != tree.len() {
            return Err(MarketError::NodeCount {
                expected: tree.len(),
                got: spec.costs.len(),
            });
        }
        let mut sets = Vec::with_capacity(tree.len());
        for (node, costs) in tree.nodes().iter().zip(&spec.costs) {
            sets.push(currency_set(node.id, d, costs)?);
        }
        Self::from_sets(tree, sets)
    }

    /// Node-wise recession cones.
    pub fn recession_model(&self) -> MarketModel {
        MarketModel {
            tree: self.tree.clone(),
            sets: self.sets.iter().map(SolvencySet::recession).collect(),
            conical: true,
        }
    }

    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    pub fn assets(&self) -> usize {
        self.tree.assets()
    }

    pub fn sets(&self) -> &[SolvencySet] {
        &self.sets
    }

    pub fn set(&self, node_index: usize) -> &SolvencySet {
        &self.sets[node_index]
    }

    pub fn is_conical(&self) -> bool {
        self.conical
    }

    /// Polar cones (halfspace form) of every node; conical models only.
    pub fn polars(&self) -> Result<Vec<HPolyhedron>, GeometryError> {
        self.sets.iter().map(SolvencySet::polar).collect()
    }
}

fn bid_ask_cone(node: u64, d: usize, pi: &[Vec<f64>]) -> Result<VCone, MarketError> {
    if pi.len() != d {
        return Err(MarketError::DimensionMismatch {
            node,
            expected: d,
            got: pi.len(),
        });
    }
    let mut gens = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = -1.0;
        gens.push(e);
    }
    for (i, row) in pi.iter().enumerate() {
        if row.len() != d {
            return Err(MarketError::DimensionMismatch {
                node,
                expected: d,
                got: row.len(),
            });
        }
        for (j, &p) in row.iter().enumerate() {
            if i == j {
                continue;
            }
            if !(p.is_finite() && p > 0.0) {
                return Err(MarketError::NonPositivePrice {
                    node,
                    i,
                    j,
                    value: p,
                });
            }
            let mut g = vec![0.0; d];
            g[j] = 1.0;
            g[i] = -p;
            gens.push(g);
        }
    }
    Ok(VCone::new(d, gens, Vec::new())?)
}

fn currency_set(node: u64, d: usize, costs: &[Vec<Vec<ScalarPiece>>]) -> Result<SolvencySet, MarketError> {
    if costs.len() != d {
        return Err(MarketError::DimensionMismatch {
            node,
            expected: d,
            got: costs.len(),
        });
    }
    let mut pairs = Vec::new();
    for (i, row) in costs.iter().enumerate() {
        if row.len() != d {
            return Err(MarketError::DimensionMismatch {
                node,
                expected: d,
                got: row.len(),
            });
        }
        for (j, pieces) in row.iter().enumerate() {
            if i == j || pieces.is_empty() {
                continue;
            }
            let mut at_zero = f64::NEG_INFINITY;
            for p in pieces {
                if !(p.slope.is_finite() && p.intercept.is_finite()) {
                    return Err(MarketError::NonFinite { node });
                }
                if p.slope < 0.0 {
                    return Err(MarketError::DecreasingPiece {
                        node,
                        i,
                        j,
                        slope: p.slope,
                    });
                }
                at_zero = at_zero.max(p.intercept);
            }
            if at_zero.abs() > SPEC_TOL {
                return Err(MarketError::CostNotZeroAtOrigin {
                    node,
                    value: at_zero,
                });
            }
            pairs.push((i, j, pieces));
        }
    }
    // Column layout: x (d), then (a^{ij}, u^{ij}) per exchangeable pair.
    let n = d + 2 * pairs.len();
    let a_col = |k: usize| d + 2 * k;
    let u_col = |k: usize| d + 2 * k + 1;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for i in 0..d {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        for (k, &(from, to, _)) in pairs.iter().enumerate() {
            if to == i {
                row[a_col(k)] -= 1.0;
            }
            if from == i {
                row[u_col(k)] += 1.0;
            }
        }
        a.push(row);
        b.push(0.0);
    }
    for (k, &(_, _, pieces)) in pairs.iter().enumerate() {
        for p in pieces {
            let mut row = vec![0.0; n];
            row[a_col(k)] = p.slope;
            row[u_col(k)] = -1.0;
            a.push(row);
            b.push(-p.intercept);
        }
        let mut row = vec![0.0; n];
        row[a_col(k)] = -1.0;
        a.push(row);
        b.push(0.0);
    }
    // Normalize -0.0 right-hand sides so that linear costs give a cone.
    for v in b.iter_mut() {
        if *v == 0.0 {
            *v = 0.0;
        }
    }
    Ok(SolvencySet::lifted(d, HPolyhedron::new(n, a, b)?)?)
}

/// `P ⊆ Q` for solvency sets (lifted or not) via support functions of `P`
/// on the rows of `Q`'s projection.
pub fn set_subset(p: &SolvencySet, q: &SolvencySet, tol: f64) -> Result<bool, GeometryError> {
    let qh = q.projected()?;
    for (row, &bi) in qh.a.iter().zip(&qh.b) {
        if p.support(row)? > bi + tol * (1.0 + bi.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Mutual inclusion of solvency sets.
pub fn same_set(p: &SolvencySet, q: &SolvencySet, tol: f64) -> Result<bool, GeometryError> {
    Ok(set_subset(p, q, tol)? && set_subset(q, p, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(d: usize) -> EventTree {
        EventTree::deterministic(d, 1).unwrap()
    }

    fn linear_currency(d: usize, pi: &[Vec<f64>]) -> Vec<Vec<Vec<ScalarPiece>>> {
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        vec![ScalarPiece {
                            slope: pi[i][j],
                            intercept: 0.0,
                        }]
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn frictionless_bid_ask_is_a_halfspace() {
        let t = tree(2);
        let m = MarketModel::from_bid_ask(t.clone(), &BidAskSpec::constant(&t, vec![vec![1.0, 1.0], vec![1.0, 1.0]]))
            .unwrap();
        assert!(m.is_conical());
        let expected = SolvencySet::from_halfspaces(HPolyhedron::cone(2, vec![vec![1.0, 1.0]]).unwrap());
        assert!(same_set(m.set(0), &expected, 1e-9).unwrap());
    }

    #[test]
    fn bid_ask_generators() {
        let t = tree(2);
        let m = MarketModel::from_bid_ask(t.clone(), &BidAskSpec::constant(&t, vec![vec![1.0, 2.0], vec![2.0, 1.0]]))
            .unwrap();
        let g = m.set(0).cached_generators().unwrap();
        assert_eq!(
            g.generators,
            vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![-2.0, 1.0], vec![1.0, -2.0]]
        );
    }

    #[test]
    fn zero_price_is_rejected() {
        let t = tree(2);
        let err = MarketModel::from_bid_ask(t.clone(), &BidAskSpec::constant(&t, vec![vec![1.0, 0.0], vec![1.0, 1.0]]))
            .unwrap_err();
        assert!(matches!(err, MarketError::NonPositivePrice { i: 0, j: 1, .. }));
    }

    #[test]
    fn frictionless_cost_process() {
        let t = tree(2);
        let spec = CostProcessSpec {
            pieces: vec![vec![CostPiece { a: vec![1.0, 2.0], b: 0.0 }]; t.len()],
        };
        let m = MarketModel::from_cost_process(t, &spec).unwrap();
        assert!(m.is_conical());
        assert!(m.set(0).contains(&[-2.0, 1.0], 1e-12).unwrap());
        assert!(!m.set(0).contains(&[-2.0, 1.1], 1e-12).unwrap());
    }

    #[test]
    fn two_piece_cost_matches_direct_evaluation() {
        let t = tree(2);
        let (s, s2) = (1.0, 1.5);
        let spec = CostProcessSpec {
            pieces: vec![
                vec![
                    CostPiece { a: vec![1.0, s], b: 0.0 },
                    CostPiece { a: vec![1.0, s2], b: 0.0 },
                ];
                t.len()
            ],
        };
        let m = MarketModel::from_cost_process(t, &spec).unwrap();
        for &(y, x) in &[(-1.0, 0.5), (-1.0, 0.7), (-1.0, -0.9), (0.5, -0.4), (0.0, 0.0), (1.0, -0.6)] {
            let cost = y + (s * x).max(s2 * x);
            assert_eq!(m.set(0).contains(&[y, x], 1e-12).unwrap(), cost <= 1e-12, "{y} {x}");
        }
    }

    #[test]
    fn cost_not_vanishing_at_origin() {
        let t = tree(2);
        let spec = CostProcessSpec {
            pieces: vec![vec![CostPiece { a: vec![1.0, 1.0], b: 0.5 }]; t.len()],
        };
        let err = MarketModel::from_cost_process(t, &spec).unwrap_err();
        assert!(err.to_string().contains("S(0) ≠ 0"));
    }

    #[test]
    fn linear_currency_costs_reproduce_bid_ask() {
        let t = tree(2);
        let pi = vec![vec![1.0, 1.3], vec![0.9, 1.0]];
        let bid_ask = MarketModel::from_bid_ask(t.clone(), &BidAskSpec::constant(&t, pi.clone())).unwrap();
        let cur = MarketModel::from_currency_costs(
            t.clone(),
            &CurrencyIlliquiditySpec {
                costs: vec![linear_currency(2, &pi); t.len()],
            },
        )
        .unwrap();
        assert!(cur.is_conical());
        assert!(same_set(bid_ask.set(0), cur.set(0), 1e-9).unwrap());
    }

    #[test]
    fn steep_costs_leave_only_disposal() {
        let t = tree(2);
        let pi = vec![vec![1.0, 1e6], vec![1e6, 1.0]];
        let cur = MarketModel::from_currency_costs(
            t.clone(),
            &CurrencyIlliquiditySpec {
                costs: vec![linear_currency(2, &pi); t.len()],
            },
        )
        .unwrap();
        assert!(cur.set(0).contains(&[-1.0, 1e-7], 1e-12).unwrap());
        assert!(!cur.set(0).contains(&[-1.0, 1e-5], 1e-12).unwrap());
    }

    #[test]
    fn decreasing_currency_piece_is_rejected() {
        let t = tree(2);
        let mut costs = linear_currency(2, &[vec![1.0, 1.0], vec![1.0, 1.0]]);
        costs[0][1] = vec![ScalarPiece { slope: -1.0, intercept: 0.0 }];
        let err = MarketModel::from_currency_costs(t.clone(), &CurrencyIlliquiditySpec { costs: vec![costs; t.len()] })
            .unwrap_err();
        assert!(matches!(err, MarketError::DecreasingPiece { .. }));
    }

    /// Two assets; buying v units of asset 2 costs max(v, 2v − 1) of asset 1
    /// and selling asset 2 is linear at rate 1.
    #[test]
    fn rising_marginal_cost_membership_matches_grid() {
        let t = tree(2);
        let mut costs = linear_currency(2, &[vec![1.0, 1.0], vec![1.0, 1.0]]);
        costs[0][1] = vec![
            ScalarPiece { slope: 1.0, intercept: 0.0 },
            ScalarPiece { slope: 2.0, intercept: -1.0 },
        ];
        let m = MarketModel::from_currency_costs(t.clone(), &CurrencyIlliquiditySpec { costs: vec![costs; t.len()] })
            .unwrap();
        assert!(!m.is_conical());
        // Grid oracle: x is solvent iff some a12 in [0, 3] covers asset 2.
        let grid = |x: [f64; 2]| {
            (0..=3000).any(|k| {
                let a12 = k as f64 * 1e-3;
                let cost = a12.max(2.0 * a12 - 1.0);
                // Leftover of asset 2 can be sold back at rate 1.
                let left2 = a12 - x[1];
                left2 >= -1e-9 && x[0] + cost - left2 <= 1e-9
            })
        };
        for x in [[-1.5, 1.2], [-1.2, 1.2], [-1.39, 1.2], [-1.41, 1.2], [-3.0, 2.0], [-2.9, 2.0]] {
            assert_eq!(m.set(0).contains(&x, 1e-9).unwrap(), grid(x), "{x:?}");
        }
    }

    #[test]
    fn recession_model_examples() {
        let t = tree(2);
        let ball = MarketModel::constant(t.clone(), SolvencySet::orthant_plus_polygon(16, 1.0)).unwrap();
        assert!(!ball.is_conical());
        let rec = ball.recession_model();
        assert!(rec.is_conical());
        let orthant = SolvencySet::from_halfspaces(HPolyhedron::negative_orthant(2));
        assert!(same_set(rec.set(0), &orthant, 1e-9).unwrap());
        assert_eq!(rec.recession_model(), rec);

        let cone = MarketModel::from_bid_ask(t.clone(), &BidAskSpec::constant(&t, vec![vec![1.0, 2.0], vec![2.0, 1.0]]))
            .unwrap();
        assert_eq!(cone.recession_model(), cone);
    }

    #[test]
    fn polygon_has_five_rows_for_sixteen_sides() {
        let s = SolvencySet::orthant_plus_polygon(16, 1.0);
        assert_eq!(s.poly().num_rows(), 5);
        assert!(s.contains(&[1.0, 0.0], 1e-12).unwrap());
        assert!(!s.contains(&[1.001, 0.0], 1e-12).unwrap());
    }

    #[test]
    fn set_missing_disposal_is_rejected() {
        let t = tree(2);
        let bad = SolvencySet::from_halfspaces(HPolyhedron::cone(2, vec![vec![-1.0, 0.0]]).unwrap());
        let err = MarketModel::constant(t, bad).unwrap_err();
        assert!(matches!(err, MarketError::MissingDisposal { asset: 0, .. }));
    }

    #[test]
    fn lifted_projection_for_small_dimension() {
        let t = tree(2);
        let pi = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let cur = MarketModel::from_currency_costs(
            t.clone(),
            &CurrencyIlliquiditySpec {
                costs: vec![linear_currency(2, &pi); t.len()],
            },
        )
        .unwrap();
        let h = cur.set(0).projected().unwrap();
        let direct = SolvencySet::from_halfspaces(h);
        let bid_ask = MarketModel::from_bid_ask(t.clone(), &BidAskSpec::constant(&t, pi)).unwrap();
        assert!(same_set(&direct, bid_ask.set(0), 1e-9).unwrap());
    }

    #[test]
    fn support_of_lifted_set() {
        let t = tree(2);
        let pi = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let cur = MarketModel::from_currency_costs(
            t.clone(),
            &CurrencyIlliquiditySpec {
                costs: vec![linear_currency(2, &pi); t.len()],
            },
        )
        .unwrap();
        assert_eq!(cur.set(0).support(&[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(cur.set(0).support(&[1.0, 3.0]).unwrap(), f64::INFINITY);
    }
}
