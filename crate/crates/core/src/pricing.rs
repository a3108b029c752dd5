//! Superhedging, dual bounds and consistent price systems.
//!
//! A claim `c` and a premium `p` are adapted processes of portfolios. `p`
//! superhedges `c` when some portfolio process `x` with `x = 0` at the
//! leaves satisfies `x_n − x_{parent(n)} + c_n − p_n ∈ C_n` at every node
//! (with `x_{parent(root)} = 0`). The dual side maximizes
//! `E Σ (c_t − p_t)·y_t − E Σ σ_{C_t}(y_t)` over nonnegative martingales `y`.

use thiserror::Error;

use crate::arbitrage::check_robust_no_scalable_arbitrage;
use crate::formulation::{Builder, LinExpr};
use crate::geometry::{self, linalg, GeometryError, HPolyhedron};
use crate::lp::{LpError, LpSolution, LpStatus, Relation};
use crate::market::MarketModel;
use crate::tol;
use crate::tree::{is_martingale, AdaptedVectorProcess, EventTree, TreeError};

/// A dual value above this is treated as positive during bisection.
const CROSSING_THRESHOLD: f64 = 1e-9;
const BISECTION_STEPS: usize = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PricingError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("process has dimension {got}, model has {expected} assets")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("process has {got} nodes, tree has {expected}")]
    NodeCount { expected: usize, got: usize },
    #[error("numeraire index {index} out of range for {assets} assets")]
    BadNumeraire { index: usize, assets: usize },
    #[error("model is not conical")]
    NonConical,
    #[error("no premium superhedges the claim")]
    NoHedge,
    #[error("unexpected LP status {0:?}")]
    UnexpectedStatus(LpStatus),
}

fn check_process(model: &MarketModel, p: &AdaptedVectorProcess) -> Result<(), PricingError> {
    if p.dim() != model.assets() {
        return Err(PricingError::DimensionMismatch {
            expected: model.assets(),
            got: p.dim(),
        });
    }
    if p.len() != model.tree().len() {
        return Err(PricingError::NodeCount {
            expected: model.tree().len(),
            got: p.len(),
        });
    }
    Ok(())
}

/// Portfolio variables `x_n` for every non-leaf node; `None` at leaves.
fn portfolio_vars(b: &mut Builder, tree: &EventTree) -> Vec<Option<Vec<usize>>> {
    (0..tree.len())
        .map(|n| (!tree.is_leaf(n)).then(|| b.free_block(tree.assets())))
        .collect()
}

/// Adds `x_n − x_parent + c_n − p_n ∈ C_n` for every node; `premium_var`
/// contributes `−α` in coordinate `numeraire` at the root.
fn hedge_constraints(
    b: &mut Builder,
    model: &MarketModel,
    x: &[Option<Vec<usize>>],
    net: &AdaptedVectorProcess,
    premium_var: Option<(usize, usize)>,
) {
    let tree = model.tree();
    for n in 0..tree.len() {
        let parent = tree.node(n).parent;
        let coords: Vec<LinExpr> = (0..tree.assets())
            .map(|i| {
                let mut e = LinExpr::constant(net.at(n)[i]);
                if let Some(xs) = &x[n] {
                    e = e.plus(xs[i], 1.0);
                }
                if let Some(pn) = parent {
                    if let Some(xs) = &x[pn] {
                        e = e.plus(xs[i], -1.0);
                    }
                }
                if let Some((alpha, k)) = premium_var {
                    if n == 0 && i == k {
                        e = e.plus(alpha, -1.0);
                    }
                }
                e
            })
            .collect();
        b.membership(model.set(n), &coords);
    }
}

fn read_hedge(tree: &EventTree, x: &[Option<Vec<usize>>], sol: &LpSolution) -> AdaptedVectorProcess {
    let values = (0..tree.len())
        .map(|n| match &x[n] {
            Some(xs) => xs.iter().map(|&v| sol.x[v]).collect(),
            None => vec![0.0; tree.assets()],
        })
        .collect();
    AdaptedVectorProcess::new(tree, values).expect("shape matches tree")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// Portfolio process `x` (zero at the leaves) when `member`.
    pub hedge: Option<AdaptedVectorProcess>,
}

/// Is `c ∈ A(C)`? Returns a hedging portfolio process when it is.
pub fn claim_in_a(model: &MarketModel, c: &AdaptedVectorProcess) -> Result<Membership, PricingError> {
    check_process(model, c)?;
    let tree = model.tree();
    let mut b = Builder::new();
    let x = portfolio_vars(&mut b, tree);
    hedge_constraints(&mut b, model, &x, c, None);
    let sol = b.solve()?;
    match sol.status {
        LpStatus::Optimal => Ok(Membership {
            member: true,
            hedge: Some(read_hedge(tree, &x, &sol)),
        }),
        LpStatus::Infeasible => Ok(Membership {
            member: false,
            hedge: None,
        }),
        s => Err(PricingError::UnexpectedStatus(s)),
    }
}

/// Is the terminal claim in `A_T(C)`? Only the leaf values of `c_t` are
/// used.
pub fn claim_in_at(model: &MarketModel, c_t: &AdaptedVectorProcess) -> Result<bool, PricingError> {
    check_process(model, c_t)?;
    let tree = model.tree();
    let leaf_only = AdaptedVectorProcess::from_fn(tree, |n| {
        if tree.is_leaf(n) {
            c_t.at(n).to_vec()
        } else {
            vec![0.0; tree.assets()]
        }
    })?;
    Ok(claim_in_a(model, &leaf_only)?.member)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PremiumStatus {
    Optimal,
    /// Every premium level superhedges: the model admits scalable
    /// arbitrage.
    UnboundedBelow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Superhedge {
    pub status: PremiumStatus,
    /// Minimal premium in units of the numeraire (`−∞` when unbounded).
    pub alpha: f64,
    pub hedge: Option<AdaptedVectorProcess>,
    /// `α·e_numeraire` at the root, zero elsewhere.
    pub premium: Option<AdaptedVectorProcess>,
    /// Outcome of the robust-no-scalable-arbitrage precondition, when it
    /// could be evaluated.
    pub precondition: Option<bool>,
}

fn check_numeraire(model: &MarketModel, numeraire: usize) -> Result<(), PricingError> {
    if numeraire >= model.assets() {
        return Err(PricingError::BadNumeraire {
            index: numeraire,
            assets: model.assets(),
        });
    }
    Ok(())
}

/// Minimal root premium `α·e_numeraire` superhedging `c`.
///
/// The robust-no-scalable-arbitrage precondition is evaluated first; a
/// failure is logged as a warning and the LP is solved regardless.
pub fn superhedge_premium(
    model: &MarketModel,
    c: &AdaptedVectorProcess,
    numeraire: usize,
) -> Result<Superhedge, PricingError> {
    check_process(model, c)?;
    check_numeraire(model, numeraire)?;
    let precondition = match check_robust_no_scalable_arbitrage(model) {
        Ok(r) => Some(r.holds),
        Err(e) => {
            log::debug!("precondition check skipped: {e}");
            None
        }
    };
    if precondition == Some(false) {
        log::warn!("model fails robust no scalable arbitrage; premium may be unbounded below");
    }
    let mut out = minimal_premium(model, c, numeraire)?;
    out.precondition = precondition;
    Ok(out)
}

/// [`superhedge_premium`] without the precondition check.
pub fn minimal_premium(
    model: &MarketModel,
    c: &AdaptedVectorProcess,
    numeraire: usize,
) -> Result<Superhedge, PricingError> {
    check_process(model, c)?;
    check_numeraire(model, numeraire)?;
    let tree = model.tree();
    let mut b = Builder::new();
    let alpha = b.free();
    b.add_objective(alpha, -1.0);
    let x = portfolio_vars(&mut b, tree);
    hedge_constraints(&mut b, model, &x, c, Some((alpha, numeraire)));
    let sol = b.solve()?;
    match sol.status {
        LpStatus::Optimal => {
            let a = sol.x[alpha];
            let premium = AdaptedVectorProcess::initial(tree, {
                let mut v = vec![0.0; tree.assets()];
                v[numeraire] = a;
                v
            })?;
            Ok(Superhedge {
                status: PremiumStatus::Optimal,
                alpha: a,
                hedge: Some(read_hedge(tree, &x, &sol)),
                premium: Some(premium),
                precondition: None,
            })
        }
        LpStatus::Unbounded => Ok(Superhedge {
            status: PremiumStatus::UnboundedBelow,
            alpha: f64::NEG_INFINITY,
            hedge: None,
            premium: None,
            precondition: None,
        }),
        LpStatus::Infeasible => Err(PricingError::NoHedge),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualEncoding {
    /// Support functions through polar multipliers `σ_C(y) = min b·λ`.
    Epigraph,
    /// Conical models only: `y_n` constrained to the polar cone, no
    /// support-function term.
    Polar,
    /// `Polar` for conical models with available generators, otherwise
    /// `Epigraph`.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// `Σ_i y_0^i ≤ 1`.
    RootSimplex,
    /// `0 ≤ y_n^i ≤ M` at every node.
    Box(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualBound {
    /// Optimal value; `0` certifies that `p` superhedges `c`.
    pub value: f64,
    /// Maximizing martingale.
    pub y: AdaptedVectorProcess,
    pub normalization: Normalization,
    pub encoding: DualEncoding,
}

/// `sup_y E Σ (c − p)·y − E Σ σ_C(y)` over normalized nonnegative
/// martingales.
pub fn dual_bound(
    model: &MarketModel,
    c: &AdaptedVectorProcess,
    p: &AdaptedVectorProcess,
) -> Result<DualBound, PricingError> {
    dual_bound_with(model, c, p, DualEncoding::Auto)
}

pub fn dual_bound_with(
    model: &MarketModel,
    c: &AdaptedVectorProcess,
    p: &AdaptedVectorProcess,
    encoding: DualEncoding,
) -> Result<DualBound, PricingError> {
    check_process(model, c)?;
    check_process(model, p)?;
    let tree = model.tree();
    let d = tree.assets();
    let polars = match encoding {
        DualEncoding::Epigraph => None,
        DualEncoding::Polar => {
            if !model.is_conical() {
                return Err(PricingError::NonConical);
            }
            Some(model.polars()?)
        }
        DualEncoding::Auto => {
            if model.is_conical() {
                model.polars().ok()
            } else {
                None
            }
        }
    };
    let used = if polars.is_some() {
        DualEncoding::Polar
    } else {
        DualEncoding::Epigraph
    };
    let normalization = if model.is_conical() {
        Normalization::RootSimplex
    } else {
        Normalization::Box(tol::DUAL_BOX)
    };

    let mut b = Builder::new();
    let upper = match normalization {
        Normalization::RootSimplex => f64::INFINITY,
        Normalization::Box(m) => m,
    };
    let y: Vec<Vec<usize>> = (0..tree.len())
        .map(|_| (0..d).map(|_| b.var(0.0, upper)).collect())
        .collect();
    let net = c.sub(p);
    for n in 0..tree.len() {
        let prob = tree.node(n).prob;
        for i in 0..d {
            b.add_objective(y[n][i], prob * net.at(n)[i]);
        }
        let coords: Vec<LinExpr> = y[n].iter().map(|&v| LinExpr::var(v)).collect();
        match &polars {
            Some(polars) => polar_rows(&mut b, &polars[n], &y[n]),
            None => {
                let lambda = b.polar_multipliers(model.set(n), &coords);
                for (&l, &bi) in lambda.iter().zip(&model.set(n).poly().b) {
                    if bi != 0.0 {
                        b.add_objective(l, -prob * bi);
                    }
                }
            }
        }
    }
    martingale_rows(&mut b, tree, &y);
    if normalization == Normalization::RootSimplex {
        b.row(y[0].iter().map(|&v| (v, 1.0)).collect(), Relation::Le, 1.0);
    }
    let sol = b.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(PricingError::UnexpectedStatus(sol.status));
    }
    let yv = AdaptedVectorProcess::new(
        tree,
        y.iter()
            .map(|vs| vs.iter().map(|&v| sol.x[v]).collect())
            .collect(),
    )?;
    Ok(DualBound {
        value: sol.objective,
        y: yv,
        normalization,
        encoding: used,
    })
}

fn polar_rows(b: &mut Builder, polar: &HPolyhedron, y: &[usize]) {
    for g in &polar.a {
        let terms: Vec<(usize, f64)> = g
            .iter()
            .zip(y)
            .filter(|(a, _)| **a != 0.0)
            .map(|(&a, &v)| (v, a))
            .collect();
        if !terms.is_empty() {
            b.row(terms, Relation::Le, 0.0);
        }
    }
}

fn martingale_rows(b: &mut Builder, tree: &EventTree, y: &[Vec<usize>]) {
    for n in 0..tree.len() {
        let node = tree.node(n);
        if node.children.is_empty() {
            continue;
        }
        for i in 0..tree.assets() {
            let mut terms = vec![(y[n][i], -1.0)];
            for &ch in &node.children {
                terms.push((y[ch][i], tree.node(ch).cond_prob));
            }
            b.row(terms, Relation::Eq, 0.0);
        }
    }
}

/// Smallest `α` such that the dual bound for the root premium
/// `α·e_numeraire` is not positive, by bracketing and 40 bisection steps.
/// Returns `−∞` when no finite lower bracket exists.
pub fn dual_crossing_premium(
    model: &MarketModel,
    c: &AdaptedVectorProcess,
    numeraire: usize,
) -> Result<f64, PricingError> {
    check_numeraire(model, numeraire)?;
    let tree = model.tree();
    let positive = |alpha: f64| -> Result<bool, PricingError> {
        let mut v = vec![0.0; tree.assets()];
        v[numeraire] = alpha;
        let p = AdaptedVectorProcess::initial(tree, v)?;
        Ok(dual_bound(model, c, &p)?.value > CROSSING_THRESHOLD)
    };
    let mut hi = 1.0_f64.max(c.max_abs());
    while positive(hi)? {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(PricingError::NoHedge);
        }
    }
    let mut lo = -1.0_f64.max(c.max_abs());
    while !positive(lo)? {
        lo *= 2.0;
        if lo < -1e12 {
            return Ok(f64::NEG_INFINITY);
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperhedgeCheck {
    /// `c − p ∈ A(C)`.
    pub hedgeable: bool,
    pub hedge: Option<AdaptedVectorProcess>,
    pub dual_value: f64,
    /// Robust no scalable arbitrage of the model, when it could be decided.
    pub precondition: Option<bool>,
    /// Whether the primal verdict and `dual_value ≤ 1e-6` agree. Only
    /// meaningful when the precondition holds.
    pub agrees: bool,
}

/// Does `p` superhedge `c`? Decided on the primal side and cross-checked
/// against the dual bound.
pub fn superhedge_check(
    model: &MarketModel,
    c: &AdaptedVectorProcess,
    p: &AdaptedVectorProcess,
) -> Result<SuperhedgeCheck, PricingError> {
    check_process(model, p)?;
    let m = claim_in_a(model, &c.sub(p))?;
    let dual = dual_bound(model, c, p)?;
    let precondition = check_robust_no_scalable_arbitrage(model)
        .ok()
        .map(|r| r.holds);
    let agrees = m.member == (dual.value <= tol::DUAL_ZERO);
    if precondition == Some(true) && !agrees {
        log::warn!(
            "primal verdict {} disagrees with dual bound {:e}",
            m.member,
            dual.value
        );
    }
    Ok(SuperhedgeCheck {
        hedgeable: m.member,
        hedge: m.hedge,
        dual_value: dual.value,
        precondition,
        agrees,
    })
}

/// A (strictly) consistent price system.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSystem {
    pub y: AdaptedVectorProcess,
    pub strict: bool,
    /// Optimal slack of the strict search; zero for non-strict systems.
    pub margin: f64,
}

impl PriceSystem {
    /// Slack used when re-verifying a strict system.
    pub fn verification_slack(&self) -> f64 {
        0.5 * self.margin.min(tol::STRICT_DELTA)
    }

    /// Re-checks the defining properties from the generators of each cone,
    /// without solving any LP. Returns the list of violations.
    pub fn verify(&self, model: &MarketModel) -> Result<Vec<String>, PricingError> {
        check_process(model, &self.y)?;
        let tree = model.tree();
        let mut issues = Vec::new();
        let scale = 1.0 + self.y.max_abs();
        if !is_martingale(tree, &self.y, tol::MARTINGALE * scale) {
            issues.push("not a martingale".to_string());
        }
        if self.y.at(0).iter().sum::<f64>() <= 0.0 {
            issues.push("zero at the root".to_string());
        }
        let slack = self.verification_slack();
        for n in 0..tree.len() {
            let id = tree.node(n).id;
            let yn = self.y.at(n);
            if yn.iter().any(|&v| v < -tol::GEOMETRY_SLACK * scale) {
                issues.push(format!("node {id}: negative component"));
            }
            if self.strict && yn.iter().any(|&v| v < slack) {
                issues.push(format!("node {id}: component below {slack:e}"));
            }
            let cone = model.set(n).cone_generators()?;
            let lineality = linalg::orthonormal_basis(
                &geometry::lineality_space(&model.set(n).projected()?)?.lineality,
                tol::DD_ZERO,
            );
            for l in &cone.lineality {
                if linalg::dot(l, yn).abs() > tol::GEOMETRY_SLACK * scale {
                    issues.push(format!("node {id}: not orthogonal to a lineality vector"));
                }
            }
            for g in &cone.generators {
                let v = linalg::dot(g, yn);
                let mut r = g.clone();
                linalg::project_out(&mut r, &lineality);
                let in_lineality = linalg::max_abs(&r) <= tol::GEOMETRY_SLACK * (1.0 + linalg::max_abs(g));
                if in_lineality {
                    if v.abs() > tol::GEOMETRY_SLACK * scale {
                        issues.push(format!("node {id}: off the polar's affine hull"));
                    }
                } else if v > tol::GEOMETRY_SLACK * scale {
                    issues.push(format!("node {id}: outside the polar cone"));
                } else if self.strict && v > -slack {
                    issues.push(format!("node {id}: on the relative boundary of the polar"));
                }
            }
        }
        Ok(issues)
    }

    pub fn is_valid(&self, model: &MarketModel) -> Result<bool, PricingError> {
        Ok(self.verify(model)?.is_empty())
    }
}

/// Searches for a consistent (`strict = false`) or strictly consistent
/// price system of a conical model.
///
/// The strict search maximizes `δ ≤ 1` subject to `g·y_n ≤ −δ` on
/// non-implicit polar rows, `y_n^i ≥ δ`, the martingale property and
/// `Σ_i y_0^i = 1`; it succeeds when `δ* ≥ 1e-7`.
pub fn find_consistent_price_system(
    model: &MarketModel,
    strict: bool,
) -> Result<Option<PriceSystem>, PricingError> {
    let found = price_system_search(model, strict)?;
    Ok(found.filter(|ps| !ps.strict || ps.margin >= tol::STRICT_DELTA))
}

/// Like [`find_consistent_price_system`] but returns the strict search's
/// maximizer whatever its margin, so that callers can inspect how close the
/// model is to admitting a strictly consistent price system.
pub fn price_system_search(
    model: &MarketModel,
    strict: bool,
) -> Result<Option<PriceSystem>, PricingError> {
    if !model.is_conical() {
        return Err(PricingError::NonConical);
    }
    let tree = model.tree();
    let d = tree.assets();
    let mut b = Builder::new();
    let y: Vec<Vec<usize>> = (0..tree.len()).map(|_| b.nonneg_block(d)).collect();
    martingale_rows(&mut b, tree, &y);
    b.row(y[0].iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);

    if !strict {
        for n in 0..tree.len() {
            let coords: Vec<LinExpr> = y[n].iter().map(|&v| LinExpr::var(v)).collect();
            b.polar_multipliers(model.set(n), &coords);
        }
        let sol = b.solve()?;
        return match sol.status {
            LpStatus::Optimal => Ok(Some(PriceSystem {
                y: read_y(tree, &y, &sol)?,
                strict: false,
                margin: 0.0,
            })),
            LpStatus::Infeasible => Ok(None),
            s => Err(PricingError::UnexpectedStatus(s)),
        };
    }

    let delta = b.var(0.0, 1.0);
    b.add_objective(delta, 1.0);
    for n in 0..tree.len() {
        let polar = model.set(n).polar()?;
        let implicit = geometry::implicit_rows(&polar)?;
        for (g, imp) in polar.a.iter().zip(implicit) {
            let mut terms: Vec<(usize, f64)> = g
                .iter()
                .zip(&y[n])
                .filter(|(a, _)| **a != 0.0)
                .map(|(&a, &v)| (v, a))
                .collect();
            if terms.is_empty() {
                continue;
            }
            if !imp {
                terms.push((delta, 1.0));
            }
            b.row(terms, Relation::Le, 0.0);
        }
        for &v in &y[n] {
            b.row(vec![(v, 1.0), (delta, -1.0)], Relation::Ge, 0.0);
        }
    }
    let sol = b.solve()?;
    match sol.status {
        LpStatus::Optimal => Ok(Some(PriceSystem {
            y: read_y(tree, &y, &sol)?,
            strict: true,
            margin: sol.x[delta],
        })),
        LpStatus::Infeasible => Ok(None),
        s => Err(PricingError::UnexpectedStatus(s)),
    }
}

fn read_y(tree: &EventTree, y: &[Vec<usize>], sol: &LpSolution) -> Result<AdaptedVectorProcess, TreeError> {
    AdaptedVectorProcess::new(
        tree,
        y.iter()
            .map(|vs| vs.iter().map(|&v| sol.x[v].max(0.0)).collect())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{BidAskSpec, SolvencySet};
    use crate::tree::{validate_tree, RawNode};

    fn one_period() -> EventTree {
        EventTree::uniform(2, 1, &[0.5, 0.5]).unwrap()
    }

    fn frictionless(tree: &EventTree, prices: &[f64]) -> MarketModel {
        let sets = prices
            .iter()
            .map(|&s| SolvencySet::from_halfspaces(HPolyhedron::cone(2, vec![vec![1.0, s]]).unwrap()))
            .collect();
        MarketModel::from_sets(tree.clone(), sets).unwrap()
    }

    /// Bid-ask model whose consistent ratio `y2/y1` at each node lies in
    /// `[lo, hi]`.
    fn interval_model(tree: &EventTree, intervals: &[(f64, f64)]) -> MarketModel {
        let spec = BidAskSpec {
            matrices: intervals
                .iter()
                .map(|&(lo, hi)| vec![vec![1.0, hi], vec![1.0 / lo, 1.0]])
                .collect(),
        };
        MarketModel::from_bid_ask(tree.clone(), &spec).unwrap()
    }

    fn call(tree: &EventTree) -> AdaptedVectorProcess {
        AdaptedVectorProcess::terminal(tree, |n| if n == 1 { vec![1.0, 0.0] } else { vec![0.0, 0.0] }).unwrap()
    }

    #[test]
    fn zero_claim_is_attainable() {
        let t = one_period();
        let m = frictionless(&t, &[1.0, 2.0, 0.5]);
        let r = claim_in_a(&m, &AdaptedVectorProcess::zeros(&t)).unwrap();
        assert!(r.member);
        assert!(r.hedge.unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn polygon_model_terminal_claims() {
        let t = EventTree::deterministic(2, 1).unwrap();
        let m = MarketModel::constant(t.clone(), SolvencySet::orthant_plus_polygon(16, 1.0)).unwrap();
        let at = |v: Vec<f64>| AdaptedVectorProcess::terminal(&t, |_| v.clone()).unwrap();
        assert!(claim_in_at(&m, &at(vec![2.0, 0.0])).unwrap());
        assert!(!claim_in_at(&m, &at(vec![2.001, 0.0])).unwrap());
        assert!(claim_in_at(&m, &at(vec![0.0, 2.0])).unwrap());
        assert!(!claim_in_at(&m, &at(vec![0.0, 2.001])).unwrap());
        assert!(claim_in_at(&m, &at(vec![-3.0, -0.5])).unwrap());
        let c = AdaptedVectorProcess::from_fn(&t, |n| if n == 1 { vec![2.0, 0.0] } else { vec![0.0, 0.0] }).unwrap();
        assert!(claim_in_a(&m, &c).unwrap().member);
    }

    #[test]
    fn binomial_call_premium_is_one_third() {
        let t = one_period();
        let m = frictionless(&t, &[1.0, 2.0, 0.5]);
        let r = superhedge_premium(&m, &call(&t), 0).unwrap();
        assert_eq!(r.status, PremiumStatus::Optimal);
        assert!((r.alpha - 1.0 / 3.0).abs() < 1e-9, "{}", r.alpha);
        assert_eq!(r.precondition, Some(true));
        let zero = superhedge_premium(&m, &AdaptedVectorProcess::zeros(&t), 0).unwrap();
        assert!(zero.alpha.abs() < 1e-12);
        // Paying the premium in cash at the root and then holding the hedge
        // is attainable.
        let c = call(&t).sub(r.premium.as_ref().unwrap());
        assert!(claim_in_a(&m, &c).unwrap().member);
    }

    #[test]
    fn bid_ask_spread_raises_the_premium() {
        let t = one_period();
        let spec = BidAskSpec {
            matrices: vec![
                vec![vec![1.0, 1.25], vec![1.0 / 1.25, 1.0]],
                vec![vec![1.0, 2.0 * 1.25], vec![1.0 / (2.0 * 1.25), 1.0]],
                vec![vec![1.0, 0.5 * 1.25], vec![1.0 / (0.5 * 1.25), 1.0]],
            ],
        };
        let m = MarketModel::from_bid_ask(t.clone(), &spec).unwrap();
        let r = superhedge_premium(&m, &call(&t), 0).unwrap();
        assert!(r.alpha >= 1.0 / 3.0 - 1e-9);
        // Buy-and-hold cover: 2/3 of a share at the ask.
        assert!(r.alpha <= 2.0 / 3.0 * 1.25 + 1e-9);
    }

    #[test]
    fn dual_bound_vanishes_at_the_minimal_premium() {
        let t = one_period();
        let m = frictionless(&t, &[1.0, 2.0, 0.5]);
        let c = call(&t);
        let r = superhedge_premium(&m, &c, 0).unwrap();
        let p = r.premium.unwrap();
        let db = dual_bound(&m, &c, &p).unwrap();
        assert!(db.value.abs() < 1e-6, "{}", db.value);
        let ok = superhedge_check(&m, &c, &p).unwrap();
        assert!(ok.hedgeable && ok.agrees);
        let below = p.sub(&AdaptedVectorProcess::initial(&t, vec![1e-3, 0.0]).unwrap());
        let bad = superhedge_check(&m, &c, &below).unwrap();
        assert!(!bad.hedgeable && bad.dual_value > 0.0 && bad.agrees);
        assert!(superhedge_check(&m, &c, &c).unwrap().hedgeable);
    }

    #[test]
    fn dual_bound_without_premium_finds_the_pricing_measure() {
        let t = one_period();
        let m = frictionless(&t, &[1.0, 2.0, 0.5]);
        let db = dual_bound(&m, &call(&t), &AdaptedVectorProcess::zeros(&t)).unwrap();
        // y0 = (1, 1)/2, so the value is the price 1/3 times y0^1 = 1/2.
        assert!((db.value - 1.0 / 6.0).abs() < 1e-9, "{}", db.value);
        assert!(is_martingale(&t, &db.y, 1e-9));
    }

    #[test]
    fn dual_encodings_agree_on_conical_models() {
        let t = one_period();
        let m = interval_model(&t, &[(0.9, 1.1), (1.2, 1.4), (0.5, 0.7)]);
        let c = AdaptedVectorProcess::terminal(&t, |n| vec![0.3, if n == 1 { 1.0 } else { -0.5 }]).unwrap();
        let p = AdaptedVectorProcess::initial(&t, vec![0.2, 0.1]).unwrap();
        let a = dual_bound_with(&m, &c, &p, DualEncoding::Epigraph).unwrap();
        let b = dual_bound_with(&m, &c, &p, DualEncoding::Polar).unwrap();
        assert_eq!(a.encoding, DualEncoding::Epigraph);
        assert_eq!(b.encoding, DualEncoding::Polar);
        assert!((a.value - b.value).abs() < 1e-9);
    }

    #[test]
    fn crossing_matches_primal_premium() {
        let t = one_period();
        let m = interval_model(&t, &[(0.9, 1.1), (1.2, 1.4), (0.5, 0.7)]);
        let c = AdaptedVectorProcess::terminal(&t, |n| if n == 1 { vec![0.0, 1.0] } else { vec![1.0, 0.0] }).unwrap();
        let primal = minimal_premium(&m, &c, 0).unwrap().alpha;
        let dual = dual_crossing_premium(&m, &c, 0).unwrap();
        assert!((primal - dual).abs() < 1e-6, "{primal} vs {dual}");
    }

    #[test]
    fn strict_price_system_with_overlapping_intervals() {
        let t = one_period();
        let m = interval_model(&t, &[(0.9, 1.1), (1.2, 1.4), (0.5, 0.7)]);
        let ps = find_consistent_price_system(&m, true).unwrap().unwrap();
        assert!(ps.strict && ps.margin >= tol::STRICT_DELTA);
        assert!(ps.verify(&m).unwrap().is_empty());
        let ratio = ps.y.at(0)[1] / ps.y.at(0)[0];
        assert!(ratio > 0.9 && ratio < 1.05);
    }

    #[test]
    fn no_price_system_when_intervals_are_disjoint() {
        let t = one_period();
        let m = interval_model(&t, &[(0.9, 1.0), (1.2, 1.4), (1.1, 1.3)]);
        assert!(find_consistent_price_system(&m, true).unwrap().is_none());
        assert!(find_consistent_price_system(&m, false).unwrap().is_none());
    }

    #[test]
    fn touching_intervals_give_a_non_strict_system_only() {
        let raw = vec![
            RawNode::new(0, None, 0, 1.0),
            RawNode::new(1, Some(0), 1, 0.5),
            RawNode::new(2, Some(0), 1, 0.5),
        ];
        let t = validate_tree(&raw, 2).unwrap();
        let m = interval_model(&t, &[(1.0, 1.2), (1.2, 1.5), (1.2, 1.4)]);
        let weak = find_consistent_price_system(&m, false).unwrap().unwrap();
        assert!(weak.verify(&m).unwrap().is_empty());
        assert!(find_consistent_price_system(&m, true).unwrap().is_none());
    }

    #[test]
    fn price_search_rejects_non_conical_models() {
        let t = EventTree::deterministic(2, 1).unwrap();
        let m = MarketModel::constant(t, SolvencySet::orthant_plus_polygon(8, 1.0)).unwrap();
        assert_eq!(find_consistent_price_system(&m, true), Err(PricingError::NonConical));
    }

    #[test]
    fn tampered_certificate_fails_verification() {
        let t = one_period();
        let m = frictionless(&t, &[1.0, 2.0, 0.5]);
        let mut ps = find_consistent_price_system(&m, true).unwrap().unwrap();
        ps.y.at_mut(1)[1] *= 1.1;
        assert!(!ps.verify(&m).unwrap().is_empty());
    }
}
