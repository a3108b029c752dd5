//! Random instance generators shared by the integration tests.

#![allow(dead_code)]

use illiq_core::{
    AdaptedVectorProcess, BidAskSpec, CostPiece, CostProcessSpec, EventTree, MarketModel, RawNode,
};
use illiq_core::tree::validate_tree;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tree with all leaves at `horizon`, at most `max_nodes` nodes and up to
/// three children per node.
pub fn random_tree(rng: &mut ChaCha8Rng, assets: usize, horizon: usize, max_nodes: usize) -> EventTree {
    assert!(max_nodes > horizon);
    let mut raw = vec![RawNode::new(0, None, 0, 1.0)];
    let mut level = vec![0u64];
    let mut next_id = 1u64;
    for t in 1..=horizon {
        // Every node of this level gets one child; extra branches are added
        // while a single chain below each new node still fits the budget.
        let mut counts = vec![1usize; level.len()];
        let per_node = horizon - t + 1;
        let mut committed = raw.len() + level.len() * per_node;
        for c in counts.iter_mut() {
            for _ in 0..rng.gen_range(0..=2usize) {
                if committed + per_node <= max_nodes {
                    *c += 1;
                    committed += per_node;
                }
            }
        }
        let mut next_level = Vec::new();
        for (&parent, &k) in level.iter().zip(&counts) {
            for p in child_probs(rng, k) {
                raw.push(RawNode::new(next_id, Some(parent), t, p));
                next_level.push(next_id);
                next_id += 1;
            }
        }
        level = next_level;
    }
    validate_tree(&raw, assets).expect("generated tree is valid")
}

fn child_probs(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = w.iter().sum();
    let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
    let head: f64 = p[..k - 1].iter().sum();
    p[k - 1] = 1.0 - head;
    p
}

/// Positive price process per asset (asset 0 is cash, constant 1) that is
/// a martingale under the tree's probabilities.
pub fn martingale_prices(rng: &mut ChaCha8Rng, tree: &EventTree) -> Vec<Vec<f64>> {
    let d = tree.assets();
    let mut s = vec![vec![1.0; d]; tree.len()];
    for i in 1..d {
        s[0][i] = rng.gen_range(0.5..2.0);
    }
    for n in 0..tree.len() {
        let children = tree.node(n).children.clone();
        if children.is_empty() {
            continue;
        }
        for i in 1..d {
            let u: Vec<f64> = children.iter().map(|_| rng.gen_range(0.5..1.5)).collect();
            let mean: f64 = children.iter().zip(&u).map(|(&c, x)| tree.node(c).cond_prob * x).sum();
            for (&c, x) in children.iter().zip(&u) {
                s[c][i] = s[n][i] * x / mean;
            }
        }
    }
    s
}

/// Conical bid-ask model around martingale prices with spreads in
/// `[1%, 20%]`; it admits a strictly consistent price system.
pub fn random_bid_ask(rng: &mut ChaCha8Rng, tree: &EventTree) -> MarketModel {
    let d = tree.assets();
    let s = martingale_prices(rng, tree);
    let matrices = s
        .iter()
        .map(|sn| {
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            if i == j {
                                1.0
                            } else {
                                sn[j] / sn[i] * (1.0 + rng.gen_range(0.01..0.2))
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    MarketModel::from_bid_ask(tree.clone(), &BidAskSpec { matrices }).expect("valid bid-ask model")
}

/// Two-piece convex cost `S(x) = max(a_1·x, a_2·x − b)` with
/// `a_1 + a_2 = 2·(1, s)`; the recession model admits a strictly consistent
/// price system.
pub fn random_two_piece(rng: &mut ChaCha8Rng, tree: &EventTree) -> MarketModel {
    let d = tree.assets();
    let s = martingale_prices(rng, tree);
    let pieces = s
        .iter()
        .map(|sn| {
            let e: Vec<f64> = (0..d)
                .map(|i| if i == 0 { 0.0 } else { sn[i] * rng.gen_range(0.02..0.3) })
                .collect();
            let a1: Vec<f64> = sn.iter().zip(&e).map(|(x, y)| x + y).collect();
            let a2: Vec<f64> = sn.iter().zip(&e).map(|(x, y)| x - y).collect();
            vec![
                CostPiece { a: a1, b: 0.0 },
                CostPiece {
                    a: a2,
                    b: rng.gen_range(0.1..1.0),
                },
            ]
        })
        .collect();
    MarketModel::from_cost_process(tree.clone(), &CostProcessSpec { pieces }).expect("valid cost model")
}

pub fn random_claim(rng: &mut ChaCha8Rng, tree: &EventTree, scale: f64) -> AdaptedVectorProcess {
    AdaptedVectorProcess::from_fn(tree, |_| {
        (0..tree.assets()).map(|_| rng.gen_range(-scale..=scale)).collect()
    })
    .expect("shape matches tree")
}

pub fn random_terminal_claim(rng: &mut ChaCha8Rng, tree: &EventTree, scale: f64) -> AdaptedVectorProcess {
    AdaptedVectorProcess::terminal(tree, |_| {
        (0..tree.assets()).map(|_| rng.gen_range(-scale..=scale)).collect()
    })
    .expect("shape matches tree")
}

/// Two-asset bid-ask matrices on a dyadic grid: `π^{21} = k/8` and
/// `π^{12} = m/8` with `m·k ≥ 64`, so every ratio interval
/// `[1/π^{21}, π^{12}]` is nonempty and exactly representable in rationals.
/// Some intervals are single points and some endpoints touch.
pub fn random_dyadic_bid_ask(rng: &mut ChaCha8Rng, tree: &EventTree) -> BidAskSpec {
    let matrices = (0..tree.len())
        .map(|_| {
            let k: u32 = rng.gen_range(4..=16);
            let m = 64u32.div_ceil(k) + rng.gen_range(0..=3u32);
            vec![vec![1.0, m as f64 / 8.0], vec![k as f64 / 8.0, 1.0]]
        })
        .collect();
    BidAskSpec { matrices }
}

/// Frictionless cash/stock cone `{x : x_1 + s x_2 ≤ 0}` per node.
pub fn frictionless(tree: &EventTree, prices: &[f64]) -> MarketModel {
    use illiq_core::{HPolyhedron, SolvencySet};
    let sets = prices
        .iter()
        .map(|&s| SolvencySet::from_halfspaces(HPolyhedron::cone(2, vec![vec![1.0, s]]).unwrap()))
        .collect();
    MarketModel::from_sets(tree.clone(), sets).unwrap()
}
