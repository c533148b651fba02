//! Seeded random generators for trees and functions (tests, benchmarks, experiments).

use rand::Rng;

use crate::filtration::PlFunction;
use crate::tree::{MergeTree, WeightedTree};

/// Random recursive tree with `edges` edges: vertex `i` picks a uniform parent among
/// `0..i`. Weights are uniform in `[lo, hi)`.
pub fn weighted_tree<R: Rng>(rng: &mut R, edges: usize, lo: f64, hi: f64) -> WeightedTree {
    let mut parents = vec![None];
    let mut weights = vec![0.0];
    for i in 1..=edges {
        parents.push(Some(rng.gen_range(0..i)));
        weights.push(rng.gen_range(lo..hi));
    }
    WeightedTree::new(&parents, &weights).expect("generated tree is valid")
}

/// Random tree without order-two vertices and at most `max_edges` edges.
pub fn canonical_tree<R: Rng>(rng: &mut R, max_edges: usize, lo: f64, hi: f64) -> WeightedTree {
    let edges = rng.gen_range(0..=max_edges);
    let t = weighted_tree(rng, edges, lo, hi).canonical_form();
    t.compact().0
}

/// Random piecewise-linear function on `[0, n-1]` with `n` breakpoints, values in `[0, 1)`.
pub fn pl_function<R: Rng>(rng: &mut R, n: usize) -> PlFunction {
    let xs = (0..n).map(|i| i as f64).collect();
    let ys = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    PlFunction::new(xs, ys).expect("generated function is valid")
}

/// Merge tree of a random weighted tree hung below height `top`.
pub fn merge_tree<R: Rng>(rng: &mut R, edges: usize, top: f64) -> MergeTree {
    let t = weighted_tree(rng, edges, 0.1, 2.0);
    crate::distance::untruncate(&t, top)
}
