//! The edit distance between weighted trees and between merge trees.

mod oracle;
mod solver;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edit::Mapping;
use crate::error::{DistanceError, TreeError};
use crate::tree::{MergeTree, VertexId, WeightedTree};
use crate::TOL;

pub use oracle::{edit_distance_oracle, OracleResult};

/// Limits for the exact solver and the brute-force oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Maximal number of search nodes before giving up with [`DistanceError::BudgetExhausted`].
    pub node_budget: u64,
    /// Maximal number of edges per tree accepted by the oracle.
    pub oracle_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { node_budget: 50_000_000, oracle_cap: 6 }
    }
}

/// Distance value with an optimal mapping (maximal ghostings, minimal deletions).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult {
    pub value: f64,
    pub mapping: Mapping,
    /// Search nodes used.
    pub nodes: u64,
}

/// Exact edit distance between weighted trees with an optimal mapping as witness.
///
/// The pair is put in a canonical order before solving, so swapping the arguments
/// gives the bitwise same value (and the reversed mapping).
pub fn edit_distance(t: &WeightedTree, g: &WeightedTree, cfg: &SolverConfig) -> Result<DistanceResult, DistanceError> {
    let key = |x: &WeightedTree| (x.len(), x.canonical_encoding());
    if key(t) > key(g) {
        let r = solver::solve(g, t, cfg)?;
        Ok(DistanceResult { mapping: r.mapping.reversed(), ..r })
    } else {
        solver::solve(t, g, cfg)
    }
}

/// Weighted tree with edge weights given by height differences, truncated at level `k`.
///
/// The edge above the top vertex has weight `k − max height` and is left out when
/// that is within tolerance of zero; otherwise a new root gets id `len`. Other vertex
/// ids follow the dense numbering of `t`.
pub fn truncate(t: &MergeTree, k: f64) -> Result<WeightedTree, TreeError> {
    let max = t.max_height();
    if k < max - TOL {
        return Err(TreeError::TruncationTooLow { level: k, max_height: max });
    }
    let c = dense(t);
    let n = c.len();
    let mut parents = c.parent_array();
    let mut weights: Vec<f64> =
        (0..n).map(|v| c.parent(v).map_or(0.0, |p| c.height(p) - c.height(v))).collect();
    if k - max > TOL {
        parents[c.top()] = Some(n);
        weights[c.top()] = k - max;
        parents.push(None);
        weights.push(0.0);
    }
    WeightedTree::new(&parents, &weights)
}

fn dense(t: &MergeTree) -> MergeTree {
    if t.next_id() == t.len() {
        t.clone()
    } else {
        t.compact().0
    }
}

/// Inverse of [`truncate`]: the root sits at height `k`, heights decrease along edges,
/// and a root with a single child is dropped (it is of order two once the edge to
/// infinity is added back). The one-vertex tree becomes a point at `k`. Ids above a
/// dropped root shift down by one.
pub fn untruncate(t: &WeightedTree, k: f64) -> MergeTree {
    let c = if t.next_id() == t.len() { t.clone() } else { t.compact().0 };
    let n = c.len();
    let r = c.root();
    let mut heights = vec![0.0; n];
    let mut order = c.post_order();
    order.reverse();
    for &v in &order {
        heights[v] = match c.parent(v) {
            None => k,
            Some(p) => heights[p] - c.weight(v),
        };
    }
    let mut parents = c.parent_array();
    if c.children(r).len() == 1 {
        let child = c.children(r)[0];
        parents[child] = None;
        parents.remove(r);
        heights.remove(r);
        let shift = |v: VertexId| if v > r { v - 1 } else { v };
        for p in parents.iter_mut().flatten() {
            *p = shift(*p);
        }
    }
    MergeTree::new(&parents, &heights).expect("heights decrease along positive edges")
}

/// Truncation level used for merge-tree distances: one above the highest vertex.
pub fn truncation_level(trees: &[&MergeTree]) -> f64 {
    trees.iter().map(|t| t.max_height()).fold(f64::NEG_INFINITY, f64::max) + 1.0
}

/// Edit distance between merge trees, via truncation one unit above both.
pub fn merge_tree_distance(t: &MergeTree, g: &MergeTree, cfg: &SolverConfig) -> Result<DistanceResult, DistanceError> {
    let k = truncation_level(&[t, g]);
    edit_distance(&truncate(t, k)?, &truncate(g, k)?, cfg)
}

/// Symmetric matrix of pairwise values computed in parallel; a failing pair is
/// reported in its own cell.
pub fn pairwise<T: Sync>(
    items: &[T],
    f: impl Fn(&T, &T) -> Result<f64, DistanceError> + Sync,
) -> Vec<Vec<Result<f64, DistanceError>>> {
    let n = items.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let values: Vec<Result<f64, DistanceError>> = pairs.par_iter().map(|&(i, j)| f(&items[i], &items[j])).collect();
    let mut out: Vec<Vec<Result<f64, DistanceError>>> = (0..n).map(|_| (0..n).map(|_| Ok(0.0)).collect()).collect();
    for ((i, j), v) in pairs.into_iter().zip(values) {
        out[i][j] = v.clone();
        out[j][i] = v;
    }
    out
}

/// Pairwise merge-tree distances.
pub fn distance_matrix(trees: &[MergeTree], cfg: &SolverConfig) -> Vec<Vec<Result<f64, DistanceError>>> {
    pairwise(trees, |a, b| merge_tree_distance(a, b, cfg).map(|r| r.value))
}
