//! Brute-force reference: enumerate every order-preserving partial injection between
//! the non-root vertices, complete it to a mapping and keep the cheapest.

use std::collections::HashSet;

use crate::edit::{complete_unchecked, mapping_cost_unchecked, Mapping};
use crate::error::DistanceError;
use crate::tree::{VertexId, WeightedTree};
use crate::TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// One minimising mapping from the class with maximal ghostings and minimal deletions.
    pub mapping: Mapping,
    /// Every minimising mapping of that class (costs within tolerance of the minimum).
    pub minimizers: Vec<Mapping>,
}

/// Exhaustive edit distance for trees with at most `cap` edges each.
pub fn edit_distance_oracle(t: &WeightedTree, g: &WeightedTree, cap: usize) -> Result<OracleResult, DistanceError> {
    for x in [t, g] {
        if x.dim() > cap {
            return Err(DistanceError::OracleTooLarge { cap, edges: x.dim() });
        }
    }
    let left: Vec<VertexId> = t.structure().subtree(t.root()).into_iter().skip(1).collect();
    let right: Vec<VertexId> = g.edges().collect();
    let mut st = State { t, g, left, right, couples: vec![], used: HashSet::new(), best: f64::INFINITY, found: vec![] };
    st.rec(0);
    let value = st.best;
    let minimizers: Vec<Mapping> = st
        .found
        .into_iter()
        .filter(|(c, m)| *c <= value + TOL && m2_couples(t, g, m))
        .map(|(_, m)| m)
        .collect();
    let mapping = minimizers.first().cloned().expect("the empty coupling is always a candidate");
    Ok(OracleResult { value, mapping, minimizers })
}

/// No coupled vertex sees exactly one maximal coupled vertex below it.
fn m2_couples(t: &WeightedTree, g: &WeightedTree, m: &Mapping) -> bool {
    let _ = g;
    let coupled: HashSet<VertexId> = m.couples.iter().map(|c| c.0).collect();
    m.couples.iter().all(|&(a, _)| {
        let maximal = coupled
            .iter()
            .filter(|&&x| x != a && t.is_below(x, a))
            .filter(|&&x| !coupled.iter().any(|&y| y != x && y != a && t.is_below(x, y) && t.is_below(y, a)))
            .count();
        maximal != 1
    })
}

struct State<'a> {
    t: &'a WeightedTree,
    g: &'a WeightedTree,
    left: Vec<VertexId>,
    right: Vec<VertexId>,
    couples: Vec<(VertexId, VertexId)>,
    used: HashSet<VertexId>,
    best: f64,
    found: Vec<(f64, Mapping)>,
}

impl State<'_> {
    fn rec(&mut self, i: usize) {
        if i == self.left.len() {
            let m = complete_unchecked(self.t, self.g, &self.couples);
            let c = mapping_cost_unchecked(self.t, self.g, &m);
            if c < self.best - TOL {
                self.found.retain(|(x, _)| *x <= c + TOL);
            }
            self.best = self.best.min(c);
            if c <= self.best + TOL {
                self.found.push((c, m));
            }
            return;
        }
        self.rec(i + 1);
        let a = self.left[i];
        for j in 0..self.right.len() {
            let b = self.right[j];
            if self.used.contains(&b) {
                continue;
            }
            let consistent = self.couples.iter().all(|&(c, d)| {
                self.t.is_below(a, c) == self.g.is_below(b, d) && self.t.is_below(c, a) == self.g.is_below(d, b)
            });
            if !consistent {
                continue;
            }
            self.couples.push((a, b));
            self.used.insert(b);
            self.rec(i + 1);
            self.used.remove(&b);
            self.couples.pop();
        }
    }
}
