//! No-arbitrage, robust no-arbitrage, robust no scalable arbitrage and
//! dominance of conical models.

use thiserror::Error;

use crate::formulation::{Builder, LinExpr};
use crate::geometry::{self, linalg, GeometryError};
use crate::lp::{LpError, LpStatus, Relation};
use crate::market::MarketModel;
use crate::pricing::{price_system_search, PriceSystem, PricingError};
use crate::tol;
use crate::tree::AdaptedVectorProcess;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArbitrageError {
    #[error("robust no-arbitrage is only defined for conical models")]
    NonConical,
    #[error("models live on different trees or asset counts")]
    ModelMismatch,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Pricing(#[from] Box<PricingError>),
}

impl From<PricingError> for ArbitrageError {
    fn from(e: PricingError) -> Self {
        ArbitrageError::Pricing(Box::new(e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaReport {
    /// No nonzero nonnegative terminal value is attainable.
    pub holds: bool,
    /// Optimal value of the capped LP; positive means arbitrage.
    pub optimum: f64,
    /// Self-financing increments `z_n ∈ C_n` of an arbitrage.
    pub witness: Option<AdaptedVectorProcess>,
    /// Terminal values of the witness, at the leaves.
    pub terminal: Option<AdaptedVectorProcess>,
}

impl NaReport {
    /// Verdict at another decision tolerance.
    pub fn holds_at(&self, tol: f64) -> bool {
        self.optimum <= tol
    }
}

/// Maximizes the total terminal value `Σ_leaves Σ_i w^i` of a self-financing
/// strategy with nonnegative terminal values, capped at 1. The model has no
/// arbitrage iff the optimum is zero.
pub fn check_na(model: &MarketModel) -> Result<NaReport, ArbitrageError> {
    let tree = model.tree();
    let d = tree.assets();
    let mut b = Builder::new();
    let z: Vec<Vec<usize>> = (0..tree.len()).map(|_| b.free_block(d)).collect();
    let counts = tree.leaf_counts();
    let mut cap = Vec::new();
    for n in 0..tree.len() {
        let coords: Vec<LinExpr> = z[n].iter().map(|&v| LinExpr::var(v)).collect();
        b.membership(model.set(n), &coords);
        for &v in &z[n] {
            b.add_objective(v, counts[n] as f64);
            cap.push((v, counts[n] as f64));
        }
    }
    for leaf in tree.leaves() {
        let path = tree.path(leaf);
        for i in 0..d {
            b.row(path.iter().map(|&n| (z[n][i], 1.0)).collect(), Relation::Ge, 0.0);
        }
    }
    b.row(cap, Relation::Le, 1.0);
    let sol = b.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(PricingError::UnexpectedStatus(sol.status).into());
    }
    let holds = sol.objective <= tol::LP_REPORT;
    let (witness, terminal) = if holds {
        (None, None)
    } else {
        let w = AdaptedVectorProcess::new(
            tree,
            z.iter()
                .map(|vs| vs.iter().map(|&v| sol.x[v]).collect())
                .collect(),
        )
        .map_err(PricingError::from)?;
        let t = w.path_aggregate(tree);
        (Some(w), Some(t))
    };
    Ok(NaReport {
        holds,
        optimum: sol.objective.max(0.0),
        witness,
        terminal,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustReport {
    pub holds: bool,
    /// Optimal slack `δ*` of the strict price-system search; `None` when
    /// no consistent price system exists at all.
    pub margin: Option<f64>,
    /// Strictly consistent price system when `holds`.
    pub certificate: Option<PriceSystem>,
}

/// Robust no-arbitrage of a conical model, decided by searching for a
/// strictly consistent price system.
pub fn check_robust_na(model: &MarketModel) -> Result<RobustReport, ArbitrageError> {
    if !model.is_conical() {
        return Err(ArbitrageError::NonConical);
    }
    let found = price_system_search(model, true)?;
    let margin = found.as_ref().map(|p| p.margin);
    let holds = margin.is_some_and(|m| m >= tol::STRICT_DELTA);
    Ok(RobustReport {
        holds,
        margin,
        certificate: found.filter(|_| holds),
    })
}

/// Robust no-arbitrage of the recession model.
pub fn check_robust_no_scalable_arbitrage(model: &MarketModel) -> Result<RobustReport, ArbitrageError> {
    if model.is_conical() {
        return check_robust_na(model);
    }
    check_robust_na(&model.recession_model())
}

/// Does `candidate` dominate `model` (`C ⊆ C̃` and `C \ C^0 ⊆ ri C̃` node by
/// node)? Both models must be conical.
///
/// Inclusion is checked on the generators of `C`. For the interior part,
/// every generator of `C` lying on a non-implicit facet of `C̃` must belong
/// to the lineality space of `C`.
pub fn check_dominance(model: &MarketModel, candidate: &MarketModel) -> Result<bool, ArbitrageError> {
    if !model.is_conical() || !candidate.is_conical() {
        return Err(ArbitrageError::NonConical);
    }
    if model.tree().len() != candidate.tree().len() || model.assets() != candidate.assets() {
        return Err(ArbitrageError::ModelMismatch);
    }
    for n in 0..model.tree().len() {
        let cone = model.set(n).cone_generators()?;
        let own_h = model.set(n).projected()?;
        let lineality = linalg::orthonormal_basis(
            &geometry::lineality_space(&own_h)?.lineality,
            tol::DD_ZERO,
        );
        let outer = candidate.set(n).projected()?;
        let slack = |g: &[f64]| tol::GEOMETRY_SLACK * (1.0 + linalg::max_abs(g));
        let mut vectors: Vec<Vec<f64>> = cone.generators.clone();
        for l in &cone.lineality {
            vectors.push(l.clone());
            vectors.push(l.iter().map(|x| -x).collect());
        }
        for v in &vectors {
            if outer.a.iter().any(|h| linalg::dot(h, v) > slack(v)) {
                return Ok(false);
            }
        }
        let implicit = geometry::implicit_rows(&outer)?;
        for (h, imp) in outer.a.iter().zip(implicit) {
            if imp {
                continue;
            }
            for g in &cone.generators {
                let mut h_unit = h.clone();
                linalg::normalize_max_abs(&mut h_unit, 0.0);
                if linalg::dot(&h_unit, g).abs() > slack(g) {
                    continue;
                }
                let mut r = g.clone();
                linalg::project_out(&mut r, &lineality);
                if linalg::max_abs(&r) > slack(g) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::HPolyhedron;
    use crate::market::{BidAskSpec, SolvencySet};
    use crate::tree::{EventTree, RawNode};

    fn one_period(d: usize) -> EventTree {
        EventTree::uniform(d, 1, &[0.5, 0.5]).unwrap()
    }

    /// Frictionless cash/stock market with prices `s` per node, as a cone
    /// `{x : x_1 + s x_2 ≤ 0}`.
    fn frictionless(tree: &EventTree, prices: &[f64]) -> MarketModel {
        let sets = prices
            .iter()
            .map(|&s| SolvencySet::from_halfspaces(HPolyhedron::cone(2, vec![vec![1.0, s]]).unwrap()))
            .collect();
        MarketModel::from_sets(tree.clone(), sets).unwrap()
    }

    #[test]
    fn dominant_asset_is_an_arbitrage() {
        let t = one_period(2);
        let m = frictionless(&t, &[1.0, 2.0, 1.5]);
        let r = check_na(&m).unwrap();
        assert!(!r.holds);
        let w = r.witness.unwrap();
        // The witness buys the stock at the root.
        assert!(w.at(0)[1] > 0.0);
        let term = r.terminal.unwrap();
        for leaf in t.leaves() {
            assert!(term.at(leaf).iter().all(|&v| v >= -1e-9));
        }
        assert!(!check_robust_na(&m).unwrap().holds);
    }

    #[test]
    fn binomial_market_is_arbitrage_free() {
        let t = one_period(2);
        let m = frictionless(&t, &[1.0, 2.0, 0.5]);
        assert!(check_na(&m).unwrap().holds);
        let r = check_robust_na(&m).unwrap();
        assert!(r.holds);
        let y = r.certificate.unwrap();
        assert!(y.is_valid(&m).unwrap());
        // y is proportional to (1, s) times the density of q = 1/3.
        let (y0, yu, yd) = (y.y.at(0), y.y.at(1), y.y.at(2));
        assert!((y0[1] / y0[0] - 1.0).abs() < 1e-9);
        assert!((yu[1] / yu[0] - 2.0).abs() < 1e-9);
        assert!((yd[1] / yd[0] - 0.5).abs() < 1e-9);
        assert!((0.5 * yu[0] / y0[0] - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn polygon_model_has_arbitrage_but_no_scalable_one() {
        let t = EventTree::deterministic(2, 1).unwrap();
        let m = MarketModel::constant(t, SolvencySet::orthant_plus_polygon(16, 1.0)).unwrap();
        assert!(!check_na(&m).unwrap().holds);
        assert!(matches!(check_robust_na(&m), Err(ArbitrageError::NonConical)));
        let r = check_robust_no_scalable_arbitrage(&m).unwrap();
        assert!(r.holds);
        assert!(r.certificate.unwrap().y.values().iter().flatten().all(|&v| v > 0.0));
    }

    #[test]
    fn conical_rnsa_equals_robust_na() {
        let t = one_period(2);
        let m = frictionless(&t, &[1.0, 2.0, 0.5]);
        assert_eq!(
            check_robust_no_scalable_arbitrage(&m).unwrap(),
            check_robust_na(&m).unwrap()
        );
    }

    #[test]
    fn bid_ask_with_overlapping_ratios_is_robust() {
        let raw = vec![
            RawNode::new(0, None, 0, 1.0),
            RawNode::new(1, Some(0), 1, 0.5),
            RawNode::new(2, Some(0), 1, 0.5),
        ];
        let t = crate::tree::validate_tree(&raw, 2).unwrap();
        let spec = BidAskSpec::constant(&t, vec![vec![1.0, 1.2], vec![1.2, 1.0]]);
        let m = MarketModel::from_bid_ask(t, &spec).unwrap();
        let r = check_robust_na(&m).unwrap();
        assert!(r.holds);
        assert!(r.certificate.unwrap().is_valid(&m).unwrap());
    }

    fn constant_model(rows: Vec<Vec<f64>>) -> MarketModel {
        let t = EventTree::deterministic(2, 0).unwrap();
        MarketModel::constant(t, SolvencySet::from_halfspaces(HPolyhedron::cone(2, rows).unwrap())).unwrap()
    }

    #[test]
    fn dominance_examples() {
        let orthant = constant_model(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let half = constant_model(vec![vec![1.0, 1.0]]);
        assert!(check_dominance(&orthant, &half).unwrap());
        assert!(check_dominance(&half, &half).unwrap());
        assert!(!check_dominance(&orthant, &orthant).unwrap());
        assert!(!check_dominance(&half, &orthant).unwrap());
    }
}
