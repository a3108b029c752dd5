//! Brute-force verifiers for small instances.
//!
//! Nothing here calls the LP kernel: the checks use random sampling, grid
//! enumeration and exact rational interval arithmetic, so they can be used
//! to cross-check the solver-based operations.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{linalg::dot, HPolyhedron, VCone};
use crate::market::MarketModel;
use crate::tree::{AdaptedVectorProcess, EventTree};

/// Feasibility tolerance for exact-evaluation checks on grid points.
const POINT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("dimension {dim} exceeds the oracle limit {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },
    #[error("grid step {step} is too coarse for radius {radius}")]
    GridTooCoarse { step: f64, radius: f64 },
    #[error("empty interval at node {node}")]
    EmptyInterval { node: u64 },
    #[error("unsupported instance: {0}")]
    Unsupported(String),
    #[error("no premium in [-{0}, {0}] superhedges the claim")]
    NoHedgeInRange(f64),
}

/// Samples directions `y` and compares `max_g g·y ≤ 0` (with `l·y = 0` on
/// lineality vectors) against membership in `p`.
pub fn brute_polar_check(k: &VCone, p: &HPolyhedron, samples: usize, seed: u64) -> Result<bool, OracleError> {
    Ok(polar_counterexample(k, p, samples, seed)?.is_none())
}

/// First sampled direction on which `p` and the polar of `k` disagree.
///
/// Random directions in `[-1, 1]^d` are complemented by small integer
/// directions, which land on boundaries and rays of rational cones.
pub fn polar_counterexample(
    k: &VCone,
    p: &HPolyhedron,
    samples: usize,
    seed: u64,
) -> Result<Option<Vec<f64>>, OracleError> {
    let d = k.dim;
    if d > 4 {
        return Err(OracleError::DimensionTooLarge { dim: d, cap: 4 });
    }
    if p.dim != d {
        return Err(OracleError::Unsupported("dimension mismatch".into()));
    }
    if samples == 0 {
        return Ok(None);
    }
    let in_polar = |y: &[f64]| {
        k.generators.iter().all(|g| dot(g, y) <= POINT_TOL)
            && k.lineality.iter().all(|l| dot(l, y).abs() <= POINT_TOL)
    };
    let mut lattice = Vec::new();
    let span = 2i32;
    let width = (2 * span + 1) as usize;
    for code in 0..width.pow(d as u32) {
        let mut c = code;
        let y: Vec<f64> = (0..d)
            .map(|_| {
                let v = (c % width) as i32 - span;
                c /= width;
                v as f64
            })
            .collect();
        lattice.push(y);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for s in 0..samples {
        let y: Vec<f64> = if s < lattice.len() {
            lattice[s].clone()
        } else {
            (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect()
        };
        if in_polar(&y) != p.contains(&y, POINT_TOL) {
            return Ok(Some(y));
        }
    }
    Ok(None)
}

fn one_period_halfspaces(model: &MarketModel) -> Result<Vec<&HPolyhedron>, OracleError> {
    let tree = model.tree();
    if tree.horizon() != 1 {
        return Err(OracleError::Unsupported("horizon must be 1".into()));
    }
    if tree.assets() != 2 {
        return Err(OracleError::DimensionTooLarge {
            dim: tree.assets(),
            cap: 2,
        });
    }
    model
        .sets()
        .iter()
        .map(|s| {
            if s.is_lifted() {
                Err(OracleError::Unsupported("lifted solvency sets".into()))
            } else {
                Ok(s.poly())
            }
        })
        .collect()
}

/// Largest `z2` with `(z1, z2) ∈ C`, capped at `cap`; `None` if no `z2`
/// works. Rows of a solvency set containing `R^2_−` have nonnegative
/// coefficients, so the set is down-closed and the fibre is `(-∞, max]`.
fn max_second_coordinate(c: &HPolyhedron, z1: f64, cap: f64) -> Option<f64> {
    let mut best = cap;
    for (row, &b) in c.a.iter().zip(&c.b) {
        if row[1] > 0.0 {
            best = best.min((b - row[0] * z1) / row[1]);
        } else if row[0] * z1 > b + POINT_TOL {
            return None;
        }
    }
    Some(best)
}

/// Grid test of `c_T ∈ A_T(C)` for a one-period, two-asset model.
///
/// The first coordinate of the root increment `z0` runs over the grid
/// `[−R, R]` with step `h`; the second is taken as large as `C_0` allows
/// (capped at `R`), which loses nothing because the leaf sets are
/// down-closed. The claim is accepted when `c_T(leaf) − z0 ∈ C_1(leaf)` at
/// every leaf for some grid point.
pub fn brute_membership_at(
    model: &MarketModel,
    c_t: &AdaptedVectorProcess,
    grid_step: f64,
    grid_radius: f64,
) -> Result<bool, OracleError> {
    let sets = one_period_halfspaces(model)?;
    if !(grid_step > 0.0) || grid_step > grid_radius {
        return Err(OracleError::GridTooCoarse {
            step: grid_step,
            radius: grid_radius,
        });
    }
    let tree = model.tree();
    let leaves: Vec<usize> = tree.leaves().collect();
    let steps = (2.0 * grid_radius / grid_step).round() as i64;
    for k in 0..=steps {
        let z1 = -grid_radius + k as f64 * grid_step;
        let Some(z2) = max_second_coordinate(sets[0], z1, grid_radius) else {
            continue;
        };
        let ok = leaves.iter().all(|&leaf| {
            let c = c_t.at(leaf);
            sets[leaf].contains(&[c[0] - z1, c[1] - z2], POINT_TOL)
        });
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Minimal root premium `α·e_numeraire` for a terminal claim, by bisection
/// over `α ∈ [−R, R]` with [`brute_membership_at`] as the test. The result
/// is the upper end of the final bracket (width below `grid_step / 2`).
/// When even `α = −R` superhedges, `−R` is returned unclamped.
pub fn brute_superhedge_one_period(
    model: &MarketModel,
    c_t: &AdaptedVectorProcess,
    numeraire: usize,
    grid_step: f64,
    grid_radius: f64,
) -> Result<f64, OracleError> {
    if numeraire >= 2 {
        return Err(OracleError::Unsupported(format!("numeraire {numeraire}")));
    }
    let tree = model.tree();
    let member = |alpha: f64| {
        let shifted = AdaptedVectorProcess::from_fn(tree, |n| {
            let mut v = c_t.at(n).to_vec();
            if tree.is_leaf(n) {
                v[numeraire] -= alpha;
            }
            v
        })
        .expect("shape matches tree");
        brute_membership_at(model, &shifted, grid_step, grid_radius)
    };
    let (mut lo, mut hi) = (-grid_radius, grid_radius);
    if member(lo)? {
        return Ok(lo);
    }
    if !member(hi)? {
        return Err(OracleError::NoHedgeInRange(grid_radius));
    }
    while hi - lo > 0.5 * grid_step {
        let mid = 0.5 * (lo + hi);
        if member(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Closed interval `[lo, hi]` of admissible price ratios at a node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        Self { lo, hi }
    }

    /// Exact conversion of float endpoints.
    pub fn from_f64(lo: f64, hi: f64) -> Self {
        Self {
            lo: BigRational::from_float(lo).expect("finite endpoint"),
            hi: BigRational::from_float(hi).expect("finite endpoint"),
        }
    }

    pub fn from_ratio(lo: (i64, i64), hi: (i64, i64)) -> Self {
        let r = |(n, d): (i64, i64)| BigRational::new(BigInt::from(n), BigInt::from(d));
        Self { lo: r(lo), hi: r(hi) }
    }

    /// Ratio interval `[1/π^{21}, π^{12}]` of a two-asset bid-ask matrix.
    pub fn from_bid_ask(pi12: &BigRational, pi21: &BigRational) -> Self {
        Self {
            lo: BigRational::one() / pi21,
            hi: pi12.clone(),
        }
    }
}

/// Interval with open or closed ends.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Range {
    lo: BigRational,
    lo_closed: bool,
    hi: BigRational,
    hi_closed: bool,
}

impl Range {
    fn closed(i: &Interval) -> Self {
        Range {
            lo: i.lo.clone(),
            lo_closed: true,
            hi: i.hi.clone(),
            hi_closed: true,
        }
    }

    /// Relative interior: open unless the interval is a single point.
    fn relative_interior(i: &Interval) -> Self {
        let point = i.lo == i.hi;
        Range {
            lo: i.lo.clone(),
            lo_closed: point,
            hi: i.hi.clone(),
            hi_closed: point,
        }
    }

    fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    fn intersect(&self, other: &Range) -> Range {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_closed),
            std::cmp::Ordering::Less => (other.lo.clone(), other.lo_closed),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_closed),
            std::cmp::Ordering::Greater => (other.hi.clone(), other.hi_closed),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
        };
        Range {
            lo,
            lo_closed,
            hi,
            hi_closed,
        }
    }

    /// Values `Σ q_c r_c` with `r_c ∈ ranges[c]`, weights `q ≥ 0` summing to
    /// one and, when `all_positive`, every `q_c > 0`.
    fn combinations(ranges: &[&Range], all_positive: bool) -> Range {
        let lo = ranges.iter().map(|r| &r.lo).min().expect("nonempty").clone();
        let hi = ranges.iter().map(|r| &r.hi).max().expect("nonempty").clone();
        let (lo_closed, hi_closed) = if all_positive {
            (
                ranges.iter().all(|r| r.lo == lo && r.lo_closed),
                ranges.iter().all(|r| r.hi == hi && r.hi_closed),
            )
        } else {
            (
                ranges.iter().any(|r| r.lo == lo && r.lo_closed),
                ranges.iter().any(|r| r.hi == hi && r.hi_closed),
            )
        };
        Range {
            lo,
            lo_closed,
            hi,
            hi_closed,
        }
    }
}

/// Exact test for a (strictly) consistent price system of a two-asset
/// conical bid-ask model, given each node's admissible ratio interval for
/// `y^2 / y^1`.
///
/// A positive martingale `y^1` acts as a change of measure under which the
/// ratio `r = y^2 / y^1` is itself a martingale, and any strictly positive
/// conditional weights can be realized this way. The recursion therefore
/// asks whether `r_n` can be a weighted average of admissible child values:
///
/// - non-strict: `F_n = I_n ∩ hull(F_c : F_c ≠ ∅)`, where children with
///   empty sets receive weight zero (the price system vanishes there);
/// - strict: `F_n = ri I_n ∩ {Σ q_c r_c : q_c > 0, r_c ∈ F_c}`, which needs
///   every child set to be nonempty.
///
/// The model admits the price system iff `F_root ≠ ∅`. Branch
/// probabilities do not enter, only the tree's shape.
pub fn interval_martingale_feasibility(
    tree: &EventTree,
    intervals: &[Interval],
    strict: bool,
) -> Result<bool, OracleError> {
    if intervals.len() != tree.len() {
        return Err(OracleError::Unsupported(format!(
            "{} intervals for {} nodes",
            intervals.len(),
            tree.len()
        )));
    }
    for (n, i) in intervals.iter().enumerate() {
        if i.lo > i.hi || i.lo <= BigRational::zero() {
            return Err(OracleError::EmptyInterval { node: tree.node(n).id });
        }
    }
    let mut feasible: Vec<Option<Range>> = vec![None; tree.len()];
    // Nodes are stored parents-first, so a reverse sweep sees children first.
    for n in (0..tree.len()).rev() {
        let own = if strict {
            Range::relative_interior(&intervals[n])
        } else {
            Range::closed(&intervals[n])
        };
        let children = &tree.node(n).children;
        let set = if children.is_empty() {
            Some(own)
        } else {
            let child_sets: Vec<&Range> = children.iter().filter_map(|&c| feasible[c].as_ref()).collect();
            if child_sets.is_empty() || (strict && child_sets.len() < children.len()) {
                None
            } else {
                Some(own.intersect(&Range::combinations(&child_sets, strict)))
            }
        };
        feasible[n] = set.filter(|r| !r.is_empty());
    }
    Ok(feasible[0].is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::SolvencySet;

    fn iv(lo: f64, hi: f64) -> Interval {
        Interval::from_f64(lo, hi)
    }

    fn one_period() -> EventTree {
        EventTree::uniform(2, 1, &[0.5, 0.5]).unwrap()
    }

    #[test]
    fn orthant_polar_check() {
        let k = VCone::new(2, vec![vec![-1.0, 0.0], vec![0.0, -1.0]], vec![]).unwrap();
        let p = HPolyhedron::cone(2, vec![vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(brute_polar_check(&k, &p, 10_000, 1).unwrap());
        assert!(brute_polar_check(&k, &HPolyhedron::full_space(2), 0, 1).unwrap());
    }

    #[test]
    fn flipped_inequality_is_caught() {
        let k = VCone::new(
            2,
            vec![vec![-1.0, 0.0], vec![0.0, -1.0], vec![-2.0, 1.0], vec![1.0, -2.0]],
            vec![],
        )
        .unwrap();
        let good = HPolyhedron::cone(2, vec![vec![-2.0, 1.0], vec![1.0, -2.0]]).unwrap();
        assert!(brute_polar_check(&k, &good, 10_000, 7).unwrap());
        let bad = HPolyhedron::cone(2, vec![vec![2.0, -1.0], vec![1.0, -2.0]]).unwrap();
        assert!(polar_counterexample(&k, &bad, 10_000, 7).unwrap().is_some());
    }

    #[test]
    fn polygon_membership_grid() {
        let t = EventTree::deterministic(2, 1).unwrap();
        let m = MarketModel::constant(t.clone(), SolvencySet::orthant_plus_polygon(16, 1.0)).unwrap();
        let at = |v: [f64; 2]| AdaptedVectorProcess::terminal(&t, |_| v.to_vec()).unwrap();
        assert!(brute_membership_at(&m, &at([2.0, 0.0]), 1e-2, 10.0).unwrap());
        assert!(!brute_membership_at(&m, &at([2.1, 0.0]), 1e-2, 10.0).unwrap());
        assert!(brute_membership_at(&m, &at([-5.0, -5.0]), 1e-2, 10.0).unwrap());
        assert!(matches!(
            brute_membership_at(&m, &at([0.0, 0.0]), 20.0, 10.0),
            Err(OracleError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn binomial_call_by_grid() {
        let t = one_period();
        let sets = [1.0, 2.0, 0.5]
            .iter()
            .map(|&s| SolvencySet::from_halfspaces(HPolyhedron::cone(2, vec![vec![1.0, s]]).unwrap()))
            .collect();
        let m = MarketModel::from_sets(t.clone(), sets).unwrap();
        let call = AdaptedVectorProcess::terminal(&t, |n| if n == 1 { vec![1.0, 0.0] } else { vec![0.0, 0.0] }).unwrap();
        let a = brute_superhedge_one_period(&m, &call, 0, 1e-3, 10.0).unwrap();
        assert!((a - 1.0 / 3.0).abs() <= 1e-3, "{a}");
        let zero = brute_superhedge_one_period(&m, &AdaptedVectorProcess::zeros(&t), 0, 1e-3, 10.0).unwrap();
        assert!(zero.abs() <= 1e-3, "{zero}");
        let neg = AdaptedVectorProcess::terminal(&t, |_| vec![-1.0, 0.0]).unwrap();
        assert!(brute_superhedge_one_period(&m, &neg, 0, 1e-3, 10.0).unwrap() <= 0.0);
    }

    #[test]
    fn interval_examples() {
        let t = one_period();
        let ok = [iv(0.9, 1.1), iv(1.2, 1.4), iv(0.5, 0.7)];
        assert!(interval_martingale_feasibility(&t, &ok, false).unwrap());
        assert!(interval_martingale_feasibility(&t, &ok, true).unwrap());
        let bad = [iv(0.9, 1.0), iv(1.2, 1.4), iv(1.1, 1.3)];
        assert!(!interval_martingale_feasibility(&t, &bad, false).unwrap());
        assert!(!interval_martingale_feasibility(&t, &bad, true).unwrap());
        let same = [iv(0.8, 1.3), iv(0.8, 1.3), iv(0.8, 1.3)];
        assert!(interval_martingale_feasibility(&t, &same, true).unwrap());
    }

    #[test]
    fn touching_chain_separates_strict_from_weak() {
        let t = one_period();
        let chain = [
            Interval::from_ratio((1, 1), (6, 5)),
            Interval::from_ratio((6, 5), (3, 2)),
            Interval::from_ratio((6, 5), (7, 5)),
        ];
        assert!(interval_martingale_feasibility(&t, &chain, false).unwrap());
        assert!(!interval_martingale_feasibility(&t, &chain, true).unwrap());
    }

    #[test]
    fn frictionless_points_use_their_relative_interior() {
        let t = one_period();
        let points = [iv(1.0, 1.0), iv(2.0, 2.0), iv(0.5, 0.5)];
        assert!(interval_martingale_feasibility(&t, &points, true).unwrap());
        let dominant = [iv(1.0, 1.0), iv(2.0, 2.0), iv(1.5, 1.5)];
        assert!(!interval_martingale_feasibility(&t, &dominant, false).unwrap());
    }

    #[test]
    fn reversed_interval_is_an_error() {
        let t = EventTree::deterministic(2, 0).unwrap();
        assert!(matches!(
            interval_martingale_feasibility(&t, &[iv(1.2, 1.0)], false),
            Err(OracleError::EmptyInterval { .. })
        ));
    }
}
