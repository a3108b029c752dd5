//! Finite event trees and node-indexed vector processes.
//!
//! Nodes are the atoms of the filtration: a node at time `t` is an atom of
//! `F_t`, its children are the atoms of `F_{t+1}` it splits into. After
//! validation the nodes are stored in breadth-first order, so parents always
//! precede their children and index `0` is the root. External node ids from
//! the input are kept for reporting.

use std::collections::{HashMap, HashSet, VecDeque};

use thiserror::Error;

use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("tree has no root node")]
    NoRoot,
    #[error("tree has more than one root: {0:?}")]
    MultipleRoots(Vec<u64>),
    #[error("duplicate node id {0}")]
    DuplicateId(u64),
    #[error("orphan node {id}: parent {parent} does not exist")]
    OrphanNode { id: u64, parent: u64 },
    #[error("cycle: node {0} is not reachable from the root")]
    Cycle(u64),
    #[error("root must be at time 0 with cond_prob 1 (got time {time}, cond_prob {cond_prob})")]
    BadRoot { time: usize, cond_prob: f64 },
    #[error("node {id} at time {time} has a parent at time {parent_time}")]
    TimeMismatch { id: u64, time: usize, parent_time: usize },
    #[error("nonpositive probability {prob} at node {id}")]
    NonPositiveProbability { id: u64, prob: f64 },
    #[error("child-probability sum {sum} != 1 below node {id}")]
    ChildProbabilitySum { id: u64, sum: f64 },
    #[error("leaf {id} at time {time} is not at the horizon {horizon}")]
    LeafNotAtHorizon { id: u64, time: usize, horizon: usize },
    #[error("asset count must be positive")]
    NoAssets,
    #[error("node index {0} out of range")]
    UnknownNode(usize),
    #[error("conditional expectation requested at leaf node {0}")]
    LeafNode(u64),
    #[error("process shape mismatch: {0}")]
    ProcessShape(String),
}

/// Unvalidated node record as read from input.
#[derive(Debug, Clone, PartialEq)]
pub struct RawNode {
    pub id: u64,
    pub parent: Option<u64>,
    pub time: usize,
    pub cond_prob: f64,
}

impl RawNode {
    pub fn new(id: u64, parent: Option<u64>, time: usize, cond_prob: f64) -> Self {
        Self {
            id,
            parent,
            time,
            cond_prob,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: u64,
    pub parent: Option<usize>,
    pub time: usize,
    pub cond_prob: f64,
    /// Absolute probability: product of conditional probabilities along the
    /// root path.
    pub prob: f64,
    pub children: Vec<usize>,
}

/// A validated, immutable event tree carrying the asset count `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTree {
    assets: usize,
    horizon: usize,
    nodes: Vec<Node>,
    index: HashMap<u64, usize>,
}

/// Validates raw node records into an [`EventTree`].
pub fn validate_tree(raw: &[RawNode], assets: usize) -> Result<EventTree, TreeError> {
    if assets == 0 {
        return Err(TreeError::NoAssets);
    }
    let mut by_id: HashMap<u64, usize> = HashMap::with_capacity(raw.len());
    for (pos, node) in raw.iter().enumerate() {
        if by_id.insert(node.id, pos).is_some() {
            return Err(TreeError::DuplicateId(node.id));
        }
    }
    let roots: Vec<u64> = raw.iter().filter(|n| n.parent.is_none()).map(|n| n.id).collect();
    let root_pos = match roots.len() {
        0 => return Err(TreeError::NoRoot),
        1 => by_id[&roots[0]],
        _ => return Err(TreeError::MultipleRoots(roots)),
    };
    let mut children_of: Vec<Vec<usize>> = vec![Vec::new(); raw.len()];
    for (pos, node) in raw.iter().enumerate() {
        if let Some(parent) = node.parent {
            match by_id.get(&parent) {
                Some(&ppos) => children_of[ppos].push(pos),
                None => {
                    return Err(TreeError::OrphanNode {
                        id: node.id,
                        parent,
                    })
                }
            }
        }
    }
    let root = &raw[root_pos];
    if root.time != 0 || (root.cond_prob - 1.0).abs() > tol::PROB_SUM {
        return Err(TreeError::BadRoot {
            time: root.time,
            cond_prob: root.cond_prob,
        });
    }

    // Breadth-first layout; anything unreachable sits on a parent cycle.
    let mut order = Vec::with_capacity(raw.len());
    let mut seen = HashSet::with_capacity(raw.len());
    let mut queue = VecDeque::from([root_pos]);
    seen.insert(root_pos);
    while let Some(pos) = queue.pop_front() {
        order.push(pos);
        for &c in &children_of[pos] {
            if seen.insert(c) {
                queue.push_back(c);
            }
        }
    }
    if order.len() != raw.len() {
        let missing = raw
            .iter()
            .enumerate()
            .find(|(pos, _)| !seen.contains(pos))
            .map(|(_, n)| n.id)
            .unwrap_or_default();
        return Err(TreeError::Cycle(missing));
    }

    let mut new_index = vec![0usize; raw.len()];
    for (i, &pos) in order.iter().enumerate() {
        new_index[pos] = i;
    }
    let mut nodes: Vec<Node> = Vec::with_capacity(raw.len());
    for &pos in &order {
        let r = &raw[pos];
        if !(r.cond_prob > 0.0) || !r.cond_prob.is_finite() || r.cond_prob > 1.0 + tol::PROB_SUM {
            return Err(TreeError::NonPositiveProbability {
                id: r.id,
                prob: r.cond_prob,
            });
        }
        let parent = r.parent.map(|p| new_index[by_id[&p]]);
        let prob = match parent {
            Some(p) => {
                let pn = &nodes[p];
                if r.time != pn.time + 1 {
                    return Err(TreeError::TimeMismatch {
                        id: r.id,
                        time: r.time,
                        parent_time: pn.time,
                    });
                }
                pn.prob * r.cond_prob
            }
            None => 1.0,
        };
        if !(prob > 0.0) {
            return Err(TreeError::NonPositiveProbability { id: r.id, prob });
        }
        nodes.push(Node {
            id: r.id,
            parent,
            time: r.time,
            cond_prob: r.cond_prob,
            prob,
            children: children_of[pos].iter().map(|&c| new_index[c]).collect(),
        });
    }

    let horizon = nodes.iter().map(|n| n.time).max().unwrap_or(0);
    for node in &nodes {
        if node.children.is_empty() {
            if node.time != horizon {
                return Err(TreeError::LeafNotAtHorizon {
                    id: node.id,
                    time: node.time,
                    horizon,
                });
            }
        } else {
            let sum: f64 = node.children.iter().map(|&c| nodes[c].cond_prob).sum();
            if (sum - 1.0).abs() > tol::PROB_SUM {
                return Err(TreeError::ChildProbabilitySum { id: node.id, sum });
            }
        }
    }
    let index = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
    Ok(EventTree {
        assets,
        horizon,
        nodes,
        index,
    })
}

impl EventTree {
    /// Deterministic tree: a single path of `horizon + 1` nodes with ids
    /// `0..=horizon`.
    pub fn deterministic(assets: usize, horizon: usize) -> Result<Self, TreeError> {
        let raw: Vec<RawNode> = (0..=horizon)
            .map(|t| RawNode::new(t as u64, t.checked_sub(1).map(|p| p as u64), t, 1.0))
            .collect();
        validate_tree(&raw, assets)
    }

    /// Full tree in which every non-leaf node branches with the same
    /// conditional probabilities. Ids are assigned breadth-first.
    pub fn uniform(assets: usize, horizon: usize, branch_probs: &[f64]) -> Result<Self, TreeError> {
        let mut raw = vec![RawNode::new(0, None, 0, 1.0)];
        let mut frontier = vec![0u64];
        let mut next = 1u64;
        for t in 1..=horizon {
            let mut layer = Vec::new();
            for &parent in &frontier {
                for &q in branch_probs {
                    raw.push(RawNode::new(next, Some(parent), t, q));
                    layer.push(next);
                    next += 1;
                }
            }
            frontier = layer;
        }
        validate_tree(&raw, assets)
    }

    pub fn assets(&self) -> usize {
        self.assets
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &Node {
        &self.nodes[index]
    }

    /// Internal index of an external node id.
    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn is_leaf(&self, index: usize) -> bool {
        self.nodes[index].children.is_empty()
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| self.is_leaf(i))
    }

    /// Root-to-node path, root first.
    pub fn path(&self, index: usize) -> Vec<usize> {
        let mut path = vec![index];
        let mut cur = index;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// Number of leaves in the subtree rooted at each node.
    pub fn leaf_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.nodes.len()];
        for i in (0..self.nodes.len()).rev() {
            if self.is_leaf(i) {
                counts[i] = 1;
            }
            if let Some(p) = self.nodes[i].parent {
                counts[p] += counts[i];
            }
        }
        counts
    }

    /// Raw node records reproducing this tree.
    pub fn to_raw(&self) -> Vec<RawNode> {
        self.nodes
            .iter()
            .map(|n| RawNode::new(n.id, n.parent.map(|p| self.nodes[p].id), n.time, n.cond_prob))
            .collect()
    }
}

/// `Σ_children cond_prob(child) · proc(child)` at a non-leaf node.
pub fn conditional_expectation(
    tree: &EventTree,
    process: &AdaptedVectorProcess,
    node: usize,
) -> Result<Vec<f64>, TreeError> {
    let n = tree.nodes.get(node).ok_or(TreeError::UnknownNode(node))?;
    if n.children.is_empty() {
        return Err(TreeError::LeafNode(n.id));
    }
    let mut out = vec![0.0; process.dim()];
    for &c in &n.children {
        let q = tree.nodes[c].cond_prob;
        for (o, v) in out.iter_mut().zip(process.at(c)) {
            *o += q * v;
        }
    }
    Ok(out)
}

/// Whether `y` is a martingale: at every non-leaf node the conditional
/// expectation matches the node value within `tol` in the max norm.
pub fn is_martingale(tree: &EventTree, y: &AdaptedVectorProcess, tol: f64) -> bool {
    if y.len() != tree.len() {
        return false;
    }
    (0..tree.len()).filter(|&i| !tree.is_leaf(i)).all(|i| {
        conditional_expectation(tree, y, i)
            .map(|e| e.iter().zip(y.at(i)).all(|(a, b)| (a - b).abs() <= tol))
            .unwrap_or(false)
    })
}

/// Node-indexed `R^d`-valued process, stored in tree (breadth-first) order.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedVectorProcess {
    dim: usize,
    values: Vec<Vec<f64>>,
}

impl AdaptedVectorProcess {
    pub fn new(tree: &EventTree, values: Vec<Vec<f64>>) -> Result<Self, TreeError> {
        if values.len() != tree.len() {
            return Err(TreeError::ProcessShape(format!(
                "{} values for {} nodes",
                values.len(),
                tree.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| v.len() != tree.assets()) {
            return Err(TreeError::ProcessShape(format!(
                "node {} has dimension {}, expected {}",
                tree.node(i).id,
                v.len(),
                tree.assets()
            )));
        }
        Ok(Self {
            dim: tree.assets(),
            values,
        })
    }

    pub fn zeros(tree: &EventTree) -> Self {
        Self {
            dim: tree.assets(),
            values: vec![vec![0.0; tree.assets()]; tree.len()],
        }
    }

    pub fn from_fn(tree: &EventTree, mut f: impl FnMut(usize) -> Vec<f64>) -> Result<Self, TreeError> {
        Self::new(tree, (0..tree.len()).map(&mut f).collect())
    }

    /// Process supported at the leaves only.
    pub fn terminal(tree: &EventTree, mut f: impl FnMut(usize) -> Vec<f64>) -> Result<Self, TreeError> {
        Self::from_fn(tree, |i| {
            if tree.is_leaf(i) {
                f(i)
            } else {
                vec![0.0; tree.assets()]
            }
        })
    }

    /// Process supported at the root only.
    pub fn initial(tree: &EventTree, value: Vec<f64>) -> Result<Self, TreeError> {
        let mut p = Self::zeros(tree);
        if value.len() != tree.assets() {
            return Err(TreeError::ProcessShape(format!(
                "root value has dimension {}, expected {}",
                value.len(),
                tree.assets()
            )));
        }
        p.values[0] = value;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, node: usize) -> &[f64] {
        &self.values[node]
    }

    pub fn at_mut(&mut self, node: usize) -> &mut [f64] {
        &mut self.values[node]
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.values.len(), other.values.len(), "process length mismatch");
        Self {
            dim: self.dim,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            values: self
                .values
                .iter()
                .map(|v| v.iter().map(|x| x * factor).collect())
                .collect(),
        }
    }

    /// Sums of the process along each root-to-leaf path, placed at the
    /// leaves (zero elsewhere).
    pub fn path_aggregate(&self, tree: &EventTree) -> Self {
        let mut acc = self.values.clone();
        for i in 1..tree.len() {
            let p = tree.node(i).parent.expect("non-root has a parent");
            for k in 0..self.dim {
                acc[i][k] += acc[p][k];
            }
        }
        for (i, v) in acc.iter_mut().enumerate() {
            if !tree.is_leaf(i) {
                v.iter_mut().for_each(|x| *x = 0.0);
            }
        }
        Self {
            dim: self.dim,
            values: acc,
        }
    }

    /// `E Σ_t a_t · b_t` over the tree.
    pub fn expected_inner(&self, other: &Self, tree: &EventTree) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| tree.node(i).prob * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}
