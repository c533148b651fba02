//! Sublevel-set merge trees and persistence diagrams of piecewise-linear functions.

use serde::{Deserialize, Serialize};

use crate::tree::{MergeTree, VertexId};
use crate::TOL;

/// Piecewise-linear function on an interval, given by its breakpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlError {
    #[error("a piecewise-linear function needs at least one breakpoint")]
    Empty,
    #[error("{0} abscissae but {1} values")]
    LengthMismatch(usize, usize),
    #[error("breakpoint {0} is not finite")]
    NonFinite(usize),
    #[error("abscissae not strictly increasing at breakpoint {0}")]
    Unsorted(usize),
}

impl PlFunction {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self, PlError> {
        if xs.is_empty() {
            return Err(PlError::Empty);
        }
        if xs.len() != ys.len() {
            return Err(PlError::LengthMismatch(xs.len(), ys.len()));
        }
        for i in 0..xs.len() {
            if !xs[i].is_finite() || !ys[i].is_finite() {
                return Err(PlError::NonFinite(i));
            }
            if i > 0 && xs[i] <= xs[i - 1] {
                return Err(PlError::Unsorted(i));
            }
        }
        Ok(PlFunction { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Linear interpolation; constant extension outside the domain.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&t| t <= x);
        let (x0, x1, y0, y1) = (self.xs[i - 1], self.xs[i], self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Adds `c` to every value.
    pub fn shifted(&self, c: f64) -> Self {
        PlFunction { xs: self.xs.clone(), ys: self.ys.iter().map(|y| y + c).collect() }
    }
}

/// Sorted breakpoint indices grouped into levels: values within `TOL` of their
/// neighbour in sorted order share a level. Each level is reported with its lowest value.
fn levels(ys: &[f64]) -> Vec<(f64, Vec<usize>)> {
    let mut idx: Vec<usize> = (0..ys.len()).collect();
    idx.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]).then(a.cmp(&b)));
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for i in idx {
        match out.last_mut() {
            Some((_, group)) if ys[i] - last <= TOL => group.push(i),
            _ => out.push((ys[i], vec![i])),
        }
        last = ys[i];
    }
    out
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Merge tree of the sublevel-set filtration of `f`.
///
/// Breakpoints are swept level by level. Every component touched by a level either
/// starts a new leaf (no earlier component joins it), continues an earlier component
/// unchanged, or becomes a single merge vertex whose children are all the earlier
/// components it absorbed — so plateaus give one leaf and simultaneous merges one vertex.
pub fn merge_tree_from_pl(f: &PlFunction) -> MergeTree {
    let n = f.len();
    let ys = &f.ys;
    let mut uf = UnionFind((0..n).collect());
    let mut active = vec![false; n];
    // tree node represented by each union-find root
    let mut node_of: Vec<Option<VertexId>> = vec![None; n];
    let mut parents: Vec<Option<VertexId>> = Vec::new();
    let mut heights: Vec<f64> = Vec::new();

    for (level, group) in levels(ys) {
        // nodes of the earlier components adjacent to this level, before any union
        let mut touched: Vec<(usize, VertexId)> = Vec::new();
        for &i in &group {
            for j in [i.wrapping_sub(1), i + 1] {
                if j < n && active[j] {
                    let r = uf.find(j);
                    touched.push((i, node_of[r].expect("active component without node")));
                }
            }
        }
        for &i in &group {
            active[i] = true;
        }
        for &i in &group {
            for j in [i.wrapping_sub(1), i + 1] {
                if j < n && active[j] {
                    uf.union(i, j);
                }
            }
        }
        let mut comps: Vec<(usize, Vec<VertexId>)> = Vec::new();
        for &i in &group {
            let r = uf.find(i);
            if !comps.iter().any(|(c, _)| *c == r) {
                comps.push((r, vec![]));
            }
        }
        for (i, node) in touched {
            let r = uf.find(i);
            let entry = comps.iter_mut().find(|(c, _)| *c == r).unwrap();
            if !entry.1.contains(&node) {
                entry.1.push(node);
            }
        }
        for (r, mut prev) in comps {
            prev.sort_unstable();
            let node = match prev.len() {
                1 => prev[0],
                _ => {
                    let id = heights.len();
                    heights.push(level);
                    parents.push(None);
                    for c in prev {
                        parents[c] = Some(id);
                    }
                    id
                }
            };
            node_of[r] = Some(node);
        }
    }
    MergeTree::new(&parents, &heights).expect("sweep produced an invalid merge tree")
}

/// Persistence diagram: finite `(birth, death)` pairs and essential births.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub points: Vec<(f64, f64)>,
    pub essential: Vec<f64>,
}

impl PersistenceDiagram {
    /// Points sorted lexicographically, for comparisons.
    pub fn sorted(&self) -> Self {
        let mut points = self.points.clone();
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut essential = self.essential.clone();
        essential.sort_by(f64::total_cmp);
        PersistenceDiagram { points, essential }
    }

    /// Equal as multisets, up to `TOL`.
    pub fn approx_eq(&self, other: &Self) -> bool {
        let (a, b) = (self.sorted(), other.sorted());
        a.points.len() == b.points.len()
            && a.essential.len() == b.essential.len()
            && a.points.iter().zip(&b.points).all(|(p, q)| (p.0 - q.0).abs() <= TOL && (p.1 - q.1).abs() <= TOL)
            && a.essential.iter().zip(&b.essential).all(|(p, q)| (p - q).abs() <= TOL)
    }

    /// Number of points, essential ones included (the number of leaves of the tree).
    pub fn rank(&self) -> usize {
        self.points.len() + self.essential.len()
    }
}

/// Elder-rule diagram of a merge tree: at each merge the branch holding the oldest
/// leaf survives (ties go to the smaller leaf id); every other branch dies there.
pub fn persistence_diagram(t: &MergeTree) -> PersistenceDiagram {
    let mut oldest: Vec<(f64, VertexId)> = vec![(f64::NAN, 0); t.next_id()];
    let mut points = Vec::new();
    for v in t.post_order() {
        let ch = t.children(v);
        if ch.is_empty() {
            oldest[v] = (t.height(v), v);
            continue;
        }
        let best = ch
            .iter()
            .map(|&c| oldest[c])
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .unwrap();
        for &c in ch {
            if oldest[c] != best {
                points.push((oldest[c].0, t.height(v)));
            }
        }
        oldest[v] = best;
    }
    PersistenceDiagram { points, essential: vec![oldest[t.top()].0] }
}
