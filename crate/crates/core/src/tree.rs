//! Rooted trees with stable vertex ids.
//!
//! Vertices live in an arena: removing a vertex leaves a hole so that every other id
//! stays valid, which edit paths and mappings rely on. [`WeightedTree::compact`] and
//! [`MergeTree::compact`] renumber densely when a fresh numbering is needed.
//!
//! In a weighted tree every non-root vertex `v` stands for the edge `(v, parent(v))`
//! and carries its weight. A merge tree stores heights instead; its topmost stored
//! vertex implicitly connects to a root at infinity.

use std::collections::HashMap;
use std::ops::Deref;

use crate::error::{TreeError, ValidationReport, Violation};
use crate::TOL;

pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq)]
struct Links {
    parent: Option<VertexId>,
    children: Vec<VertexId>,
}

/// Shape of a rooted tree; children lists are kept sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct Structure {
    slots: Vec<Option<Links>>,
    root: VertexId,
    len: usize,
}

impl Structure {
    pub fn single() -> Self {
        Structure { slots: vec![Some(Links { parent: None, children: vec![] })], root: 0, len: 1 }
    }

    /// Structural problems of a parent array (one `None` entry marks the root).
    pub fn check(parents: &[Option<VertexId>]) -> Vec<Violation> {
        let n = parents.len();
        let mut out = Vec::new();
        if n == 0 {
            out.push(Violation::Empty);
            return out;
        }
        let roots: Vec<VertexId> = (0..n).filter(|&v| parents[v].is_none()).collect();
        match roots.len() {
            0 => out.push(Violation::NoRoot),
            1 => {}
            _ => out.push(Violation::MultipleRoots(roots)),
        }
        let mut bad_parent = false;
        for (v, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    out.push(Violation::ParentOutOfRange { vertex: v, parent: p });
                    bad_parent = true;
                }
            }
        }
        if !bad_parent {
            for v in 0..n {
                let mut cur = v;
                let mut steps = 0;
                while let Some(p) = parents[cur] {
                    cur = p;
                    steps += 1;
                    if cur == v || steps > n {
                        out.push(Violation::Cycle { vertex: v });
                        break;
                    }
                }
            }
        }
        out
    }

    fn from_parents_unchecked(parents: &[Option<VertexId>]) -> Self {
        let mut slots: Vec<Option<Links>> =
            parents.iter().map(|&p| Some(Links { parent: p, children: vec![] })).collect();
        let mut root = 0;
        for (v, p) in parents.iter().enumerate() {
            match p {
                Some(p) => slots[*p].as_mut().unwrap().children.push(v),
                None => root = v,
            }
        }
        Structure { slots, root, len: parents.len() }
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    /// Number of vertices.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of edges (non-root vertices).
    pub fn dim(&self) -> usize {
        self.len - 1
    }

    /// Id the next inserted vertex receives.
    pub fn next_id(&self) -> VertexId {
        self.slots.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.slots.get(v).is_some_and(|s| s.is_some())
    }

    fn links(&self, v: VertexId) -> &Links {
        self.slots[v].as_ref().unwrap_or_else(|| panic!("vertex {v} not in tree"))
    }

    fn links_mut(&mut self, v: VertexId) -> &mut Links {
        self.slots[v].as_mut().unwrap_or_else(|| panic!("vertex {v} not in tree"))
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.links(v).parent
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.links(v).children
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.children(v).is_empty()
    }

    /// Number of incident edges.
    pub fn order(&self, v: VertexId) -> usize {
        self.children(v).len() + usize::from(self.parent(v).is_some())
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, s)| s.as_ref().map(|_| i))
    }

    /// Non-root vertices, i.e. edges.
    pub fn edges(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| v != self.root)
    }

    pub fn leaves(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.is_leaf(v)).collect()
    }

    /// `a ≤ b`: `a` lies in the subtree rooted at `b`.
    pub fn is_below(&self, a: VertexId, b: VertexId) -> bool {
        let mut cur = Some(a);
        while let Some(c) = cur {
            if c == b {
                return true;
            }
            cur = self.parent(c);
        }
        false
    }

    /// Strict ancestors of `v`, nearest first.
    pub fn ancestors(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut cur = self.parent(v);
        while let Some(c) = cur {
            out.push(c);
            cur = self.parent(c);
        }
        out
    }

    /// Vertices of the subtree rooted at `v` in pre-order.
    pub fn subtree(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            stack.extend(self.children(u).iter().rev());
        }
        out
    }

    /// All vertices, children before parents.
    pub fn post_order(&self) -> Vec<VertexId> {
        let mut out = self.subtree(self.root);
        out.reverse();
        out
    }

    /// Removes non-root `v`; its children are re-attached to its parent.
    pub(crate) fn contract(&mut self, v: VertexId) {
        let links = self.slots[v].take().expect("contract of missing vertex");
        let p = links.parent.expect("contract of root");
        for &c in &links.children {
            self.links_mut(c).parent = Some(p);
        }
        let pl = self.links_mut(p);
        pl.children.retain(|&c| c != v);
        pl.children.extend(links.children);
        pl.children.sort_unstable();
        self.len -= 1;
    }

    /// Inserts a new vertex under `parent` that adopts the listed children of `parent`.
    pub(crate) fn insert(&mut self, parent: VertexId, adopt: &[VertexId]) -> VertexId {
        let id = self.slots.len();
        for &c in adopt {
            debug_assert_eq!(self.parent(c), Some(parent));
            self.links_mut(c).parent = Some(id);
        }
        let pl = self.links_mut(parent);
        pl.children.retain(|c| !adopt.contains(c));
        pl.children.push(id);
        pl.children.sort_unstable();
        let mut children = adopt.to_vec();
        children.sort_unstable();
        self.slots.push(Some(Links { parent: Some(parent), children }));
        self.len += 1;
        id
    }

    /// Dense renumbering in pre-order; returns the new structure and `new -> old` ids.
    fn compact_from(&self, top: VertexId) -> (Structure, Vec<VertexId>) {
        let order = self.subtree(top);
        let mut new_of = HashMap::with_capacity(order.len());
        for (i, &v) in order.iter().enumerate() {
            new_of.insert(v, i);
        }
        let parents: Vec<Option<VertexId>> = order
            .iter()
            .map(|&v| if v == top { None } else { self.parent(v).map(|p| new_of[&p]) })
            .collect();
        (Structure::from_parents_unchecked(&parents), order)
    }

    /// Slot-indexed parent array (`None` for the root and for holes).
    pub fn parent_array(&self) -> Vec<Option<VertexId>> {
        self.slots.iter().map(|s| s.as_ref().and_then(|l| l.parent)).collect()
    }
}

/// Rooted tree with a positive weight on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedTree {
    structure: Structure,
    weights: Vec<f64>,
}

impl Deref for WeightedTree {
    type Target = Structure;
    fn deref(&self) -> &Structure {
        &self.structure
    }
}

impl WeightedTree {
    /// `weights[root]` is ignored.
    pub fn new(parents: &[Option<VertexId>], weights: &[f64]) -> Result<Self, TreeError> {
        Self::validate(parents, weights).map_err(TreeError::Invalid)?;
        let mut weights = weights.to_vec();
        let structure = Structure::from_parents_unchecked(parents);
        weights[structure.root] = 0.0;
        Ok(WeightedTree { structure, weights })
    }

    /// Reports every violation instead of stopping at the first one.
    pub fn validate(parents: &[Option<VertexId>], weights: &[f64]) -> Result<(), ValidationReport> {
        let mut out = Structure::check(parents);
        if parents.len() != weights.len() {
            out.push(Violation::LengthMismatch { parents: parents.len(), values: weights.len() });
        } else {
            for (v, (&p, &w)) in parents.iter().zip(weights).enumerate() {
                if p.is_none() {
                    continue;
                }
                if !w.is_finite() {
                    out.push(Violation::NonFinite { vertex: v });
                } else if w <= TOL {
                    out.push(Violation::NonPositiveWeight { vertex: v, weight: w });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport(out))
        }
    }

    /// The one-vertex tree.
    pub fn single() -> Self {
        WeightedTree { structure: Structure::single(), weights: vec![0.0] }
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// Weight of edge `v`; `0` for the root.
    pub fn weight(&self, v: VertexId) -> f64 {
        assert!(self.contains(v), "vertex {v} not in tree");
        self.weights[v]
    }

    /// Sum of all edge weights.
    pub fn norm(&self) -> f64 {
        self.edges().map(|e| self.weights[e]).sum()
    }

    /// Total weight strictly below `v`.
    pub fn weight_below(&self, v: VertexId) -> f64 {
        self.subtree(v).into_iter().filter(|&u| u != v).map(|u| self.weights[u]).sum()
    }

    pub(crate) fn set_weight(&mut self, v: VertexId, w: f64) {
        self.weights[v] = w;
    }

    pub(crate) fn remove_edge(&mut self, v: VertexId) {
        self.structure.contract(v);
    }

    pub(crate) fn insert_edge(&mut self, parent: VertexId, adopt: &[VertexId], w: f64) -> VertexId {
        let id = self.structure.insert(parent, adopt);
        self.weights.push(w);
        id
    }

    /// Removes the order-two vertex `v`, merging its edge with the one below it.
    pub fn ghost(&self, v: VertexId) -> Result<Self, TreeError> {
        if !self.contains(v) {
            return Err(TreeError::UnknownVertex(v));
        }
        if v == self.root() {
            return Err(TreeError::Root);
        }
        let children = self.children(v);
        if children.len() != 1 {
            return Err(TreeError::NotOrderTwo { vertex: v, children: children.len() });
        }
        let c = children[0];
        let mut out = self.clone();
        out.weights[c] += self.weights[v];
        out.structure.contract(v);
        Ok(out)
    }

    /// Splits edge `e` with a new order-two vertex; the lower part keeps id `e` and weight
    /// `lower`. Returns the new tree and the id of the inserted vertex.
    pub fn split(&self, e: VertexId, lower: f64) -> Result<(Self, VertexId), TreeError> {
        if !self.contains(e) {
            return Err(TreeError::UnknownVertex(e));
        }
        let parent = self.parent(e).ok_or(TreeError::Root)?;
        let w = self.weights[e];
        if !(lower > TOL && w - lower > TOL) {
            return Err(TreeError::BadSplit { vertex: e, weight: w, lower });
        }
        let mut out = self.clone();
        let id = out.insert_edge(parent, &[e], w - lower);
        out.weights[e] = lower;
        Ok((out, id))
    }

    /// Ghosts every non-root vertex with exactly one child. Surviving ids are unchanged.
    pub fn canonical_form(&self) -> Self {
        let mut out = self.clone();
        for v in self.structure.post_order() {
            if v != out.root() && out.children(v).len() == 1 {
                let c = out.children(v)[0];
                out.weights[c] += out.weights[v];
                out.structure.contract(v);
            }
        }
        out
    }

    pub fn is_canonical(&self) -> bool {
        self.edges().all(|v| self.children(v).len() != 1)
    }

    /// Densely renumbered copy and the `new -> old` id map.
    pub fn compact(&self) -> (Self, Vec<VertexId>) {
        self.subtree_with_map(self.root())
    }

    /// The subtree rooted at `v` (the edge of `v` itself is not included).
    pub fn subtree_tree(&self, v: VertexId) -> Self {
        self.subtree_with_map(v).0
    }

    pub fn subtree_with_map(&self, v: VertexId) -> (Self, Vec<VertexId>) {
        let (structure, old) = self.structure.compact_from(v);
        let mut weights: Vec<f64> = old.iter().map(|&o| self.weights[o]).collect();
        weights[0] = 0.0;
        (WeightedTree { structure, weights }, old)
    }

    /// Slot-indexed weights (root and holes hold `0`).
    pub fn weight_array(&self) -> Vec<f64> {
        (0..self.next_id()).map(|v| if self.contains(v) { self.weights[v] } else { 0.0 }).collect()
    }

    /// Same shape, weights replaced by `f(v, w)`.
    pub fn map_weights(&self, mut f: impl FnMut(VertexId, f64) -> f64) -> Result<Self, TreeError> {
        let (c, old) = self.compact();
        let parents = c.parent_array();
        let weights: Vec<f64> = (0..c.len()).map(|i| if i == 0 { 0.0 } else { f(old[i], c.weights[i]) }).collect();
        let t = WeightedTree::new(&parents, &weights)?;
        // restore original ids
        Ok(t.relabel(&old))
    }

    /// Re-labels a dense tree so vertex `i` gets id `ids[i]`.
    fn relabel(&self, ids: &[VertexId]) -> Self {
        let cap = ids.iter().copied().max().unwrap_or(0) + 1;
        let mut slots: Vec<Option<Links>> = vec![None; cap];
        let mut weights = vec![0.0; cap];
        for v in self.vertices() {
            let l = self.structure.links(v);
            let mut children: Vec<VertexId> = l.children.iter().map(|&c| ids[c]).collect();
            children.sort_unstable();
            slots[ids[v]] = Some(Links { parent: l.parent.map(|p| ids[p]), children });
            weights[ids[v]] = self.weights[v];
        }
        WeightedTree {
            structure: Structure { slots, root: ids[self.root()], len: self.len() },
            weights,
        }
    }

    /// Deterministic string encoding of the tree up to child order, with exact weights.
    pub fn canonical_encoding(&self) -> String {
        encode(&self.structure, self.root(), &|v| if v == self.root() { 0.0 } else { self.weights[v] })
    }
}

/// Merge tree: every stored vertex has a height, strictly increasing towards the top.
#[derive(Debug, Clone, PartialEq)]
pub struct MergeTree {
    structure: Structure,
    heights: Vec<f64>,
}

impl Deref for MergeTree {
    type Target = Structure;
    fn deref(&self) -> &Structure {
        &self.structure
    }
}

impl MergeTree {
    pub fn new(parents: &[Option<VertexId>], heights: &[f64]) -> Result<Self, TreeError> {
        Self::validate(parents, heights).map_err(TreeError::Invalid)?;
        Ok(MergeTree { structure: Structure::from_parents_unchecked(parents), heights: heights.to_vec() })
    }

    pub fn validate(parents: &[Option<VertexId>], heights: &[f64]) -> Result<(), ValidationReport> {
        let mut out = Structure::check(parents);
        if parents.len() != heights.len() {
            out.push(Violation::LengthMismatch { parents: parents.len(), values: heights.len() });
        } else {
            for (v, &h) in heights.iter().enumerate() {
                if !h.is_finite() {
                    out.push(Violation::NonFinite { vertex: v });
                }
            }
            for (v, &p) in parents.iter().enumerate() {
                let Some(p) = p else { continue };
                if p >= heights.len() || !heights[v].is_finite() || !heights[p].is_finite() {
                    continue;
                }
                if heights[p] - heights[v] <= TOL {
                    out.push(Violation::NonMonotoneHeight {
                        child: v,
                        parent: p,
                        child_height: heights[v],
                        parent_height: heights[p],
                    });
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport(out))
        }
    }

    /// A single vertex at height `h`.
    pub fn point(h: f64) -> Self {
        MergeTree { structure: Structure::single(), heights: vec![h] }
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// The topmost stored vertex.
    pub fn top(&self) -> VertexId {
        self.root()
    }

    pub fn height(&self, v: VertexId) -> f64 {
        assert!(self.contains(v), "vertex {v} not in tree");
        self.heights[v]
    }

    pub fn max_height(&self) -> f64 {
        self.heights[self.root()]
    }

    pub fn min_height(&self) -> f64 {
        self.vertices().map(|v| self.heights[v]).fold(f64::INFINITY, f64::min)
    }

    /// Ghosts every vertex with exactly one child, including the top one: its implicit
    /// edge to the root at infinity makes it order two as well.
    pub fn canonical_form(&self) -> Self {
        let mut out = self.clone();
        for v in self.structure.post_order() {
            if out.children(v).len() != 1 {
                continue;
            }
            if v == out.root() {
                let c = out.children(v)[0];
                out.structure.slots[v] = None;
                out.structure.links_mut(c).parent = None;
                out.structure.root = c;
                out.structure.len -= 1;
            } else {
                out.structure.contract(v);
            }
        }
        out
    }

    pub fn is_canonical(&self) -> bool {
        self.vertices().all(|v| self.children(v).len() != 1)
    }

    pub fn compact(&self) -> (Self, Vec<VertexId>) {
        let (structure, old) = self.structure.compact_from(self.root());
        let heights = old.iter().map(|&o| self.heights[o]).collect();
        (MergeTree { structure, heights }, old)
    }

    /// Slot-indexed heights (holes hold `NaN`).
    pub fn height_array(&self) -> Vec<f64> {
        (0..self.next_id()).map(|v| if self.contains(v) { self.heights[v] } else { f64::NAN }).collect()
    }

    /// All heights transformed by an increasing map `f`.
    pub fn map_heights(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for v in self.vertices() {
            out.heights[v] = f(self.heights[v]);
        }
        out
    }

    pub fn canonical_encoding(&self) -> String {
        encode(&self.structure, self.root(), &|v| self.heights[v])
    }
}

fn encode(s: &Structure, v: VertexId, label: &dyn Fn(VertexId) -> f64) -> String {
    let mut parts: Vec<String> = s.children(v).iter().map(|&c| encode(s, c, label)).collect();
    parts.sort_unstable();
    format!("({:016x}{})", label(v).to_bits(), parts.concat())
}

/// Label-preserving isomorphism between two trees (labels compared with [`TOL`]).
/// Returns the vertex correspondence when one exists.
pub fn isomorphism(
    a: &Structure,
    la: &dyn Fn(VertexId) -> f64,
    b: &Structure,
    lb: &dyn Fn(VertexId) -> f64,
) -> Option<Vec<(VertexId, VertexId)>> {
    if a.len() != b.len() {
        return None;
    }
    let mut iso = Iso { a, b, la, lb, memo: HashMap::new(), size_a: sizes(a), size_b: sizes(b) };
    if !iso.check(a.root(), b.root()) {
        return None;
    }
    let mut out = Vec::with_capacity(a.len());
    iso.witness(a.root(), b.root(), &mut out);
    out.sort_unstable();
    Some(out)
}

fn sizes(s: &Structure) -> HashMap<VertexId, usize> {
    let mut out = HashMap::new();
    for v in s.post_order() {
        let n = 1 + s.children(v).iter().map(|c| out[c]).sum::<usize>();
        out.insert(v, n);
    }
    out
}

struct Iso<'a> {
    a: &'a Structure,
    b: &'a Structure,
    la: &'a dyn Fn(VertexId) -> f64,
    lb: &'a dyn Fn(VertexId) -> f64,
    memo: HashMap<(VertexId, VertexId), bool>,
    size_a: HashMap<VertexId, usize>,
    size_b: HashMap<VertexId, usize>,
}

impl Iso<'_> {
    fn check(&mut self, u: VertexId, v: VertexId) -> bool {
        if let Some(&r) = self.memo.get(&(u, v)) {
            return r;
        }
        let ok = ((self.la)(u) - (self.lb)(v)).abs() <= TOL
            && self.size_a[&u] == self.size_b[&v]
            && self.a.children(u).len() == self.b.children(v).len()
            && self.match_children(u, v).is_some();
        self.memo.insert((u, v), ok);
        ok
    }

    /// Perfect matching of the children of `u` and `v` under `check`.
    fn match_children(&mut self, u: VertexId, v: VertexId) -> Option<Vec<(VertexId, VertexId)>> {
        let cu = self.a.children(u).to_vec();
        let cv = self.b.children(v).to_vec();
        let adj: Vec<Vec<usize>> =
            cu.iter().map(|&x| (0..cv.len()).filter(|&j| self.check(x, cv[j])).collect()).collect();
        let m = crate::assignment::bipartite_matching(&adj, cv.len());
        if m.iter().filter(|x| x.is_some()).count() != cu.len() {
            return None;
        }
        Some(m.iter().enumerate().map(|(i, j)| (cu[i], cv[j.unwrap()])).collect())
    }

    fn witness(&mut self, u: VertexId, v: VertexId, out: &mut Vec<(VertexId, VertexId)>) {
        out.push((u, v));
        let pairs = self.match_children(u, v).expect("witness on non-isomorphic pair");
        for (x, y) in pairs {
            self.witness(x, y, out);
        }
    }
}

/// `T ~₂ T'` for weighted trees: isomorphic canonical forms. Returns the correspondence
/// between the surviving vertices.
pub fn weighted_equivalent(a: &WeightedTree, b: &WeightedTree) -> Option<Vec<(VertexId, VertexId)>> {
    let ca = a.canonical_form();
    let cb = b.canonical_form();
    weighted_isomorphism(&ca, &cb)
}

pub fn weighted_isomorphism(a: &WeightedTree, b: &WeightedTree) -> Option<Vec<(VertexId, VertexId)>> {
    let (ra, rb) = (a.root(), b.root());
    isomorphism(
        a.structure(),
        &|v| if v == ra { 0.0 } else { a.weight(v) },
        b.structure(),
        &|v| if v == rb { 0.0 } else { b.weight(v) },
    )
}

/// `T ~₂ T'` for merge trees.
pub fn merge_equivalent(a: &MergeTree, b: &MergeTree) -> Option<Vec<(VertexId, VertexId)>> {
    let ca = a.canonical_form();
    let cb = b.canonical_form();
    isomorphism(ca.structure(), &|v| ca.height(v), cb.structure(), &|v| cb.height(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(weights: &[f64]) -> WeightedTree {
        // root 0, then a chain 0 <- 1 <- 2 ...
        let parents: Vec<Option<usize>> = (0..=weights.len()).map(|i| i.checked_sub(1)).collect();
        let mut w = vec![0.0];
        w.extend_from_slice(weights);
        WeightedTree::new(&parents, &w).unwrap()
    }

    #[test]
    fn ghost_then_split_restores_path() {
        // chain root <- m (3) <- l (2)
        let t = path(&[3.0, 2.0]);
        let g = t.ghost(1).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.weight(2), 5.0);
        let (s, id) = g.split(2, 2.0).unwrap();
        assert_eq!(s.weight(2), 2.0);
        assert_eq!(s.weight(id), 3.0);
        assert!(weighted_isomorphism(&s, &t).is_some());
    }

    #[test]
    fn ghosting_leaf_or_root_fails() {
        let t = path(&[3.0, 2.0]);
        assert!(matches!(t.ghost(2), Err(TreeError::NotOrderTwo { .. })));
        assert_eq!(t.ghost(0), Err(TreeError::Root));
        assert!(matches!(t.split(2, 2.0), Err(TreeError::BadSplit { .. })));
    }

    #[test]
    fn canonical_form_of_path_is_single_edge() {
        let t = path(&[1.0, 2.0, 3.0, 4.0]);
        let c = t.canonical_form();
        assert_eq!(c.len(), 2);
        assert!((c.norm() - 10.0).abs() < 1e-12);
        assert!(c.is_canonical());
    }

    #[test]
    fn validation_reports_all_violations() {
        let err = WeightedTree::validate(&[None, Some(0), None, Some(7)], &[0.0, -1.0, 1.0, 1.0]).unwrap_err();
        assert!(err.0.iter().any(|v| matches!(v, Violation::MultipleRoots(_))));
        assert!(err.0.iter().any(|v| matches!(v, Violation::ParentOutOfRange { .. })));
        assert!(err.0.iter().any(|v| matches!(v, Violation::NonPositiveWeight { .. })));

        let err = WeightedTree::validate(&[Some(1), Some(0)], &[1.0, 1.0]).unwrap_err();
        assert!(err.0.contains(&Violation::NoRoot));
        assert!(err.0.iter().any(|v| matches!(v, Violation::Cycle { .. })));
    }

    #[test]
    fn merge_heights_must_increase() {
        // a < b < c with h(a)=1, h(b)=0
        let err = MergeTree::validate(&[Some(1), Some(2), None], &[1.0, 0.0, 2.0]).unwrap_err();
        assert_eq!(err.0.len(), 1);
        assert!(matches!(err.0[0], Violation::NonMonotoneHeight { child: 0, parent: 1, .. }));
    }

    #[test]
    fn merge_top_with_one_child_is_ghosted() {
        // cherry at height 1 under a lone top vertex at height 2
        let t = MergeTree::new(&[Some(2), Some(2), Some(3), None], &[0.0, 0.5, 1.0, 2.0]).unwrap();
        let c = t.canonical_form();
        assert_eq!(c.len(), 3);
        assert_eq!(c.top(), 2);
        let plain = MergeTree::new(&[Some(2), Some(2), None], &[0.0, 0.5, 1.0]).unwrap();
        assert!(merge_equivalent(&t, &plain).is_some());
    }

    #[test]
    fn isomorphism_ignores_child_order_and_tiny_noise() {
        let a = WeightedTree::new(&[None, Some(0), Some(0), Some(1)], &[0.0, 1.0, 2.0, 3.0]).unwrap();
        let b = WeightedTree::new(&[None, Some(0), Some(0), Some(2)], &[0.0, 2.0, 1.0 + 1e-12, 3.0]).unwrap();
        let w = weighted_isomorphism(&a, &b).unwrap();
        assert!(w.contains(&(1, 2)) && w.contains(&(3, 3)));
        let c = WeightedTree::new(&[None, Some(0), Some(0), Some(2)], &[0.0, 2.0, 1.1, 3.0]).unwrap();
        assert!(weighted_isomorphism(&a, &c).is_none());
        assert_ne!(a.canonical_encoding(), c.canonical_encoding());
    }

    #[test]
    fn ids_are_stable_and_compact_renumbers() {
        let t = path(&[1.0, 1.0, 1.0]);
        let g = t.ghost(2).unwrap();
        assert!(!g.contains(2));
        assert_eq!(g.parent(3), Some(1));
        let (c, old) = g.compact();
        assert_eq!(c.len(), 3);
        assert_eq!(old, vec![0, 1, 3]);
        assert_eq!(c.weight(2), 2.0);
    }

    #[test]
    fn map_weights_keeps_ids() {
        let t = path(&[1.0, 1.0, 1.0]).ghost(2).unwrap();
        let m = t.map_weights(|_, w| 2.0 * w).unwrap();
        assert_eq!(m.weight(3), 4.0);
        assert_eq!(m.parent(3), Some(1));
    }
}
