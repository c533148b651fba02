//! Distances the edit distance is compared against: bottleneck and 1-Wasserstein
//! distances between persistence diagrams, coupling costs (upper bounds for the
//! interleaving distance) and the naive "top height + rest" distance.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{bipartite_matching, hungarian};
use crate::distance::{edit_distance, truncate, SolverConfig};
use crate::edit::Side;
use crate::error::DistanceError;
use crate::filtration::PersistenceDiagram;
use crate::tree::{MergeTree, VertexId};

// ---------------------------------------------------------------------------------
// persistence diagrams (∞-norm ground metric)

/// Sorted pairing of essential births; `None` when the counts differ.
fn essential_gaps(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    if a.len() != b.len() {
        return None;
    }
    let (mut a, mut b) = (a.to_vec(), b.to_vec());
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Some(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect())
}

/// Square cost matrix of size `n + m`: rows are the points of `a` followed by diagonal
/// copies of the points of `b`, columns the points of `b` followed by diagonal copies
/// of the points of `a`. Forbidden cells hold `+∞`.
fn augmented(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let (n, m) = (a.len(), b.len());
    let half = |p: &(f64, f64)| (p.1 - p.0) / 2.0;
    let mut c = vec![vec![f64::INFINITY; n + m]; n + m];
    for i in 0..n {
        for j in 0..m {
            c[i][j] = (a[i].0 - b[j].0).abs().max((a[i].1 - b[j].1).abs());
        }
        c[i][m + i] = half(&a[i]);
    }
    for j in 0..m {
        c[n + j][j] = half(&b[j]);
        for i in 0..n {
            c[n + j][m + i] = 0.0;
        }
    }
    c
}

/// Bottleneck distance: the smallest radius admitting a perfect matching of the
/// augmented problem, found by binary search over the candidate radii.
pub fn bottleneck(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    let Some(ess) = essential_gaps(&d1.essential, &d2.essential) else {
        return f64::INFINITY;
    };
    let e = ess.into_iter().fold(0.0, f64::max);
    let c = augmented(&d1.points, &d2.points);
    let size = c.len();
    if size == 0 {
        return e;
    }
    let mut radii: Vec<f64> = c.iter().flatten().copied().filter(|x| x.is_finite()).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let feasible = |r: f64| {
        let adj: Vec<Vec<usize>> = c.iter().map(|row| (0..size).filter(|&j| row[j] <= r).collect()).collect();
        bipartite_matching(&adj, size).iter().all(|x| x.is_some())
    };
    let (mut lo, mut hi) = (0, radii.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(radii[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    e.max(radii[lo])
}

/// 1-Wasserstein distance: optimal assignment on the augmented problem plus the sum
/// of essential gaps.
pub fn wasserstein1(d1: &PersistenceDiagram, d2: &PersistenceDiagram) -> f64 {
    let Some(ess) = essential_gaps(&d1.essential, &d2.essential) else {
        return f64::INFINITY;
    };
    let e: f64 = ess.iter().sum();
    let mut c = augmented(&d1.points, &d2.points);
    if c.is_empty() {
        return e;
    }
    // every feasible assignment avoids the forbidden cells, so any larger value works
    let big = 1.0 + 2.0 * c.iter().flatten().filter(|x| x.is_finite()).sum::<f64>();
    for x in c.iter_mut().flatten() {
        if x.is_infinite() {
            *x = big;
        }
    }
    let (_, cols) = hungarian(&c);
    // re-sum in row order so that exact inputs give exact outputs
    e + cols.iter().enumerate().map(|(i, &j)| c[i][j]).sum::<f64>()
}

// ---------------------------------------------------------------------------------
// couplings

/// A set of couples between the stored vertices of two merge trees (the edge to
/// infinity plays no role).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Coupling {
    pub pairs: Vec<(VertexId, VertexId)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CouplingError {
    #[error("a coupling needs at least one couple")]
    Empty,
    #[error("unknown vertex {vertex} on the {side:?} side")]
    UnknownVertex { side: Side, vertex: VertexId },
    #[error("vertex {vertex} on the {side:?} side is coupled twice")]
    NotInjective { side: Side, vertex: VertexId },
    #[error("couples {first:?} and {second:?} do not preserve the order")]
    OrderBroken { first: (VertexId, VertexId), second: (VertexId, VertexId) },
    #[error("coupled vertices have {0} maximal elements, expected one")]
    NotUniqueMaximal(usize),
    #[error("coupled vertex {vertex} on the {side:?} side has exactly one maximal coupled vertex below it")]
    SingleBelow { side: Side, vertex: VertexId },
    #[error("brute force limited to {cap} vertices per tree, got {vertices}")]
    TooLarge { cap: usize, vertices: usize },
}

/// `a` strictly below `b`.
fn below(t: &MergeTree, a: VertexId, b: VertexId) -> bool {
    a != b && t.is_below(a, b)
}

/// Maximal coupled vertices strictly below `v`.
fn lambda(t: &MergeTree, coupled: &HashSet<VertexId>, v: VertexId) -> Vec<VertexId> {
    coupled
        .iter()
        .copied()
        .filter(|&c| below(t, c, v))
        .filter(|&c| !coupled.iter().any(|&d| below(t, c, d) && below(t, d, v)))
        .collect()
}

/// Checks injectivity, order preservation, a unique maximal couple and that no coupled
/// vertex sees exactly one maximal coupled vertex below it.
pub fn validate_coupling(t: &MergeTree, g: &MergeTree, c: &Coupling) -> Result<(), CouplingError> {
    if c.pairs.is_empty() {
        return Err(CouplingError::Empty);
    }
    let mut seen = (HashSet::new(), HashSet::new());
    for &(x, y) in &c.pairs {
        if !t.contains(x) {
            return Err(CouplingError::UnknownVertex { side: Side::Left, vertex: x });
        }
        if !g.contains(y) {
            return Err(CouplingError::UnknownVertex { side: Side::Right, vertex: y });
        }
        if !seen.0.insert(x) {
            return Err(CouplingError::NotInjective { side: Side::Left, vertex: x });
        }
        if !seen.1.insert(y) {
            return Err(CouplingError::NotInjective { side: Side::Right, vertex: y });
        }
    }
    for (i, p) in c.pairs.iter().enumerate() {
        for q in &c.pairs[i + 1..] {
            if below(t, p.0, q.0) != below(g, p.1, q.1) || below(t, q.0, p.0) != below(g, q.1, p.1) {
                return Err(CouplingError::OrderBroken { first: *p, second: *q });
            }
        }
    }
    let maximal = seen.0.iter().filter(|&&x| !seen.0.iter().any(|&y| below(t, x, y))).count();
    if maximal != 1 {
        return Err(CouplingError::NotUniqueMaximal(maximal));
    }
    for (side, tree, set) in [(Side::Left, t, &seen.0), (Side::Right, g, &seen.1)] {
        for &x in set {
            if lambda(tree, set, x).len() == 1 {
                return Err(CouplingError::SingleBelow { side, vertex: x });
            }
        }
    }
    Ok(())
}

/// Per-vertex costs on both sides and their maximum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingCost {
    pub left: Vec<(VertexId, f64)>,
    pub right: Vec<(VertexId, f64)>,
    pub sup: f64,
}

/// Cost of every vertex of `t` under the couples `pairs` (left entries in `t`):
///
/// * coupled with `y`: `|h(x) − h(y)|`;
/// * nothing coupled below: with `φ` the lowest strict ancestor having a coupled
///   vertex below it and `η` the lowest partner of a couple below `φ`,
///   `max((h(φ) − h(x))/2, h(η) − h(x))` — `+∞` when no such ancestor exists, as the
///   ancestor is then the root at infinity;
/// * two or more maximal coupled vertices below: `|h(x) − h(partner of δ)|` with `δ`
///   the lowest coupled ancestor;
/// * exactly one: zero.
fn side_costs(t: &MergeTree, g: &MergeTree, pairs: &[(VertexId, VertexId)]) -> Vec<(VertexId, f64)> {
    let partner: HashMap<VertexId, VertexId> = pairs.iter().copied().collect();
    let coupled: HashSet<VertexId> = partner.keys().copied().collect();
    let mut out = Vec::new();
    for x in t.vertices() {
        let hx = t.height(x);
        let cost = if let Some(&y) = partner.get(&x) {
            (hx - g.height(y)).abs()
        } else {
            match lambda(t, &coupled, x).len() {
                0 => match t.ancestors(x).into_iter().find(|&v| !lambda(t, &coupled, v).is_empty()) {
                    None => f64::INFINITY,
                    Some(phi) => {
                        let eta = pairs
                            .iter()
                            .filter(|p| below(t, p.0, phi))
                            .map(|p| g.height(p.1))
                            .fold(f64::INFINITY, f64::min);
                        ((t.height(phi) - hx) / 2.0).max(eta - hx)
                    }
                },
                1 => 0.0,
                _ => match t.ancestors(x).into_iter().find(|v| coupled.contains(v)) {
                    None => f64::INFINITY,
                    Some(delta) => (hx - g.height(partner[&delta])).abs(),
                },
            }
        };
        out.push((x, cost));
    }
    out
}

pub fn coupling_cost(t: &MergeTree, g: &MergeTree, c: &Coupling) -> Result<CouplingCost, CouplingError> {
    validate_coupling(t, g, c)?;
    Ok(coupling_cost_unchecked(t, g, &c.pairs))
}

fn coupling_cost_unchecked(t: &MergeTree, g: &MergeTree, pairs: &[(VertexId, VertexId)]) -> CouplingCost {
    let left = side_costs(t, g, pairs);
    let reversed: Vec<(VertexId, VertexId)> = pairs.iter().map(|&(a, b)| (b, a)).collect();
    let right = side_costs(g, t, &reversed);
    let sup = left.iter().chain(&right).map(|p| p.1).fold(0.0, f64::max);
    CouplingCost { left, right, sup }
}

/// Smallest coupling cost and a coupling attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterleavingBound {
    pub value: f64,
    pub coupling: Coupling,
}

/// Brute-force minimum of the coupling cost over all valid couplings. An upper bound
/// for the interleaving distance; trees are limited to `cap` vertices each.
pub fn interleaving_upper(t: &MergeTree, g: &MergeTree, cap: usize) -> Result<InterleavingBound, CouplingError> {
    for x in [t, g] {
        if x.len() > cap {
            return Err(CouplingError::TooLarge { cap, vertices: x.len() });
        }
    }
    let left: Vec<VertexId> = t.vertices().collect();
    let right: Vec<VertexId> = g.vertices().collect();
    let mut best = InterleavingBound { value: f64::INFINITY, coupling: Coupling::default() };
    let mut pairs = Vec::new();
    let mut used = vec![false; right.len()];
    enumerate(t, g, &left, &right, 0, &mut pairs, &mut used, &mut best);
    Ok(best)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    t: &MergeTree,
    g: &MergeTree,
    left: &[VertexId],
    right: &[VertexId],
    i: usize,
    pairs: &mut Vec<(VertexId, VertexId)>,
    used: &mut [bool],
    best: &mut InterleavingBound,
) {
    if i == left.len() {
        let c = Coupling { pairs: pairs.clone() };
        if validate_coupling(t, g, &c).is_ok() {
            let sup = coupling_cost_unchecked(t, g, pairs).sup;
            if sup < best.value {
                *best = InterleavingBound { value: sup, coupling: c };
            }
        }
        return;
    }
    enumerate(t, g, left, right, i + 1, pairs, used, best);
    let x = left[i];
    for (j, &y) in right.iter().enumerate() {
        if used[j] {
            continue;
        }
        let ok = pairs
            .iter()
            .all(|&(a, b)| below(t, x, a) == below(g, y, b) && below(t, a, x) == below(g, b, y));
        if !ok {
            continue;
        }
        used[j] = true;
        pairs.push((x, y));
        enumerate(t, g, left, right, i + 1, pairs, used, best);
        pairs.pop();
        used[j] = false;
    }
}

// ---------------------------------------------------------------------------------
// naive distance

/// Difference of the top heights plus the edit distance between the trees with the
/// edge above the top removed. Not stable: a small change can reorganise which
/// vertex is on top. Kept as a contrast to the merge-tree distance.
pub fn naive_triplet_distance(t: &MergeTree, g: &MergeTree, cfg: &SolverConfig) -> Result<f64, DistanceError> {
    let a = truncate(t, t.max_height())?;
    let b = truncate(g, g.max_height())?;
    Ok((t.max_height() - g.max_height()).abs() + edit_distance(&a, &b, cfg)?.value)
}
