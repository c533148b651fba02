//! Edits, edit paths and mappings between weighted trees.
//!
//! A [`Mapping`] between `T` and `T'` couples non-root vertices, deletes or ghosts the
//! rest. Its cost is the deleted weight on both sides plus, for each couple `(a, b)`,
//! the difference of their *chain weights*: the weight of `a` plus the ghosted vertices
//! between `a` and the next surviving ancestor.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::EditError;
use crate::tree::{VertexId, WeightedTree};
use crate::TOL;

/// One elementary edit. Inserted and split-off vertices receive id `tree.next_id()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Edit {
    /// Set the weight of an edge (must stay positive).
    Shrink { vertex: VertexId, weight: f64 },
    /// Remove an edge; its children attach to its parent.
    Delete { vertex: VertexId },
    /// New edge under `parent`, adopting some of `parent`'s children.
    Insert { parent: VertexId, adopt: Vec<VertexId>, weight: f64 },
    /// Remove an order-two vertex (zero cost).
    Ghost { vertex: VertexId },
    /// Split an edge; the lower part keeps the id and gets weight `lower` (zero cost).
    Split { vertex: VertexId, lower: f64 },
}

impl Edit {
    /// Cost of applying the edit to `t`.
    pub fn cost(&self, t: &WeightedTree) -> f64 {
        match self {
            Edit::Shrink { vertex, weight } => (t.weight(*vertex) - weight).abs(),
            Edit::Delete { vertex } => t.weight(*vertex),
            Edit::Insert { weight, .. } => *weight,
            Edit::Ghost { .. } | Edit::Split { .. } => 0.0,
        }
    }

    /// Applies the edit; returns the new tree and the id of a newly created vertex.
    pub fn apply(&self, t: &WeightedTree) -> Result<(WeightedTree, Option<VertexId>), EditError> {
        let edge = |v: VertexId| -> Result<(), EditError> {
            if !t.contains(v) {
                Err(crate::error::TreeError::UnknownVertex(v).into())
            } else if v == t.root() {
                Err(crate::error::TreeError::Root.into())
            } else {
                Ok(())
            }
        };
        match self {
            Edit::Shrink { vertex, weight } => {
                edge(*vertex)?;
                if !(weight.is_finite() && *weight > TOL) {
                    return Err(EditError::NonPositiveShrink { vertex: *vertex, weight: *weight });
                }
                let mut out = t.clone();
                out.set_weight(*vertex, *weight);
                Ok((out, None))
            }
            Edit::Delete { vertex } => {
                edge(*vertex)?;
                let mut out = t.clone();
                out.remove_edge(*vertex);
                Ok((out, None))
            }
            Edit::Insert { parent, adopt, weight } => {
                if !t.contains(*parent) {
                    return Err(crate::error::TreeError::UnknownVertex(*parent).into());
                }
                if !(weight.is_finite() && *weight > TOL) {
                    return Err(EditError::NonPositiveInsert(*weight));
                }
                let mut seen = HashSet::new();
                for &c in adopt {
                    if !t.contains(c) || t.parent(c) != Some(*parent) || !seen.insert(c) {
                        return Err(EditError::NotAChild { parent: *parent, child: c });
                    }
                }
                let mut out = t.clone();
                let id = out.insert_edge(*parent, adopt, *weight);
                Ok((out, Some(id)))
            }
            Edit::Ghost { vertex } => Ok((t.ghost(*vertex)?, None)),
            Edit::Split { vertex, lower } => {
                let (out, id) = t.split(*vertex, *lower)?;
                Ok((out, Some(id)))
            }
        }
    }
}

/// Applies a single edit.
pub fn apply_edit(t: &WeightedTree, e: &Edit) -> Result<WeightedTree, EditError> {
    Ok(e.apply(t)?.0)
}

/// A finite sequence of edits.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EditPath {
    pub edits: Vec<Edit>,
}

impl EditPath {
    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    /// Applies every edit in turn; returns the final tree and per-edit costs.
    pub fn apply(&self, start: &WeightedTree) -> Result<(WeightedTree, Vec<f64>), EditError> {
        let mut cur = start.clone();
        let mut costs = Vec::with_capacity(self.edits.len());
        for e in &self.edits {
            costs.push(e.cost(&cur));
            cur = e.apply(&cur)?.0;
        }
        Ok((cur, costs))
    }

    /// `(Σ cᵢᵖ)^(1/p)` over the edit costs.
    pub fn cost(&self, start: &WeightedTree, p: f64) -> Result<f64, EditError> {
        if p.is_nan() || p < 1.0 {
            return Err(EditError::BadOrder(p));
        }
        let (_, costs) = self.apply(start)?;
        Ok(p_norm(&costs, p))
    }
}

pub(crate) fn p_norm(xs: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        xs.iter().sum()
    } else {
        xs.iter().map(|c| c.powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Couples, deletions and ghostings between a left tree `T` and a right tree `T'`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Mapping {
    pub couples: Vec<(VertexId, VertexId)>,
    pub delete_left: Vec<VertexId>,
    pub delete_right: Vec<VertexId>,
    pub ghost_left: Vec<VertexId>,
    pub ghost_right: Vec<VertexId>,
}

impl Mapping {
    /// Sorts every list so that equal mappings compare equal.
    pub fn normalized(mut self) -> Self {
        self.couples.sort_unstable();
        self.delete_left.sort_unstable();
        self.delete_right.sort_unstable();
        self.ghost_left.sort_unstable();
        self.ghost_right.sort_unstable();
        self
    }

    /// Swaps the roles of the two trees.
    pub fn reversed(&self) -> Self {
        Mapping {
            couples: self.couples.iter().map(|&(a, b)| (b, a)).collect(),
            delete_left: self.delete_right.clone(),
            delete_right: self.delete_left.clone(),
            ghost_left: self.ghost_right.clone(),
            ghost_right: self.ghost_left.clone(),
        }
        .normalized()
    }

    pub fn partner_of_left(&self, a: VertexId) -> Option<VertexId> {
        self.couples.iter().find(|c| c.0 == a).map(|c| c.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A reason why a [`Mapping`] is not a valid mapping.
#[derive(Debug, Clone, PartialEq)]
pub enum MappingViolation {
    UnknownVertex { side: Side, vertex: VertexId },
    RootListed { side: Side },
    /// Every non-root vertex must be coupled, deleted or ghosted.
    Uncovered { side: Side, vertex: VertexId },
    /// A vertex may appear only once.
    Duplicate { side: Side, vertex: VertexId },
    /// Couples must preserve the ancestor order.
    OrderBroken { first: (VertexId, VertexId), second: (VertexId, VertexId) },
    /// After deletions a ghosted vertex must have exactly one child.
    GhostNotOrderTwo { side: Side, vertex: VertexId, children: usize },
}

impl fmt::Display for MappingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Every violation of the mapping axioms.
pub fn validate_mapping(t: &WeightedTree, g: &WeightedTree, m: &Mapping) -> Vec<MappingViolation> {
    let mut out = Vec::new();
    for (side, tree, del, gh, coupled) in [
        (Side::Left, t, &m.delete_left, &m.ghost_left, m.couples.iter().map(|c| c.0).collect::<Vec<_>>()),
        (Side::Right, g, &m.delete_right, &m.ghost_right, m.couples.iter().map(|c| c.1).collect::<Vec<_>>()),
    ] {
        let mut seen = HashSet::new();
        let mut ok = true;
        for &v in coupled.iter().chain(del.iter()).chain(gh.iter()) {
            if !tree.contains(v) {
                out.push(MappingViolation::UnknownVertex { side, vertex: v });
                ok = false;
            } else if v == tree.root() {
                out.push(MappingViolation::RootListed { side });
                ok = false;
            } else if !seen.insert(v) {
                out.push(MappingViolation::Duplicate { side, vertex: v });
            }
        }
        for v in tree.edges() {
            if !seen.contains(&v) {
                out.push(MappingViolation::Uncovered { side, vertex: v });
            }
        }
        if ok {
            let mut reduced = tree.structure().clone();
            let dels: HashSet<VertexId> = del.iter().copied().collect();
            for &d in &dels {
                reduced.contract(d);
            }
            for &x in gh {
                if dels.contains(&x) {
                    continue;
                }
                let n = reduced.children(x).len();
                if n != 1 {
                    out.push(MappingViolation::GhostNotOrderTwo { side, vertex: x, children: n });
                }
            }
        }
    }
    let known = |c: &(VertexId, VertexId)| t.contains(c.0) && g.contains(c.1);
    for (i, c) in m.couples.iter().enumerate() {
        for d in &m.couples[i + 1..] {
            if !known(c) || !known(d) {
                continue;
            }
            if t.is_below(c.0, d.0) != g.is_below(c.1, d.1) || t.is_below(d.0, c.0) != g.is_below(d.1, c.1) {
                out.push(MappingViolation::OrderBroken { first: *c, second: *d });
            }
        }
    }
    out
}

fn check(t: &WeightedTree, g: &WeightedTree, m: &Mapping) -> Result<(), EditError> {
    let v = validate_mapping(t, g, m);
    if v.is_empty() {
        Ok(())
    } else {
        let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        Err(EditError::InvalidMapping(parts.join("; ")))
    }
}

/// Chain weight of each coupled vertex on one side: its own weight plus the ghosted
/// vertices above it up to the next coupled vertex (or the root).
fn chain_weights(tree: &WeightedTree, coupled: &HashSet<VertexId>, ghosts: &HashSet<VertexId>) -> HashMap<VertexId, f64> {
    coupled
        .iter()
        .map(|&a| {
            let mut w = tree.weight(a);
            let mut p = tree.parent(a);
            while let Some(x) = p {
                if x == tree.root() || coupled.contains(&x) {
                    break;
                }
                if ghosts.contains(&x) {
                    w += tree.weight(x);
                }
                p = tree.parent(x);
            }
            (a, w)
        })
        .collect()
}

/// Per-couple chain weights `(W_a, W_b)` of a valid mapping.
pub fn couple_weights(t: &WeightedTree, g: &WeightedTree, m: &Mapping) -> Vec<((VertexId, VertexId), f64, f64)> {
    let cl: HashSet<VertexId> = m.couples.iter().map(|c| c.0).collect();
    let cr: HashSet<VertexId> = m.couples.iter().map(|c| c.1).collect();
    let wl = chain_weights(t, &cl, &m.ghost_left.iter().copied().collect());
    let wr = chain_weights(g, &cr, &m.ghost_right.iter().copied().collect());
    m.couples.iter().map(|&(a, b)| ((a, b), wl[&a], wr[&b])).collect()
}

/// Cost of a mapping; fails if the mapping is invalid.
pub fn mapping_cost(t: &WeightedTree, g: &WeightedTree, m: &Mapping) -> Result<f64, EditError> {
    check(t, g, m)?;
    Ok(mapping_cost_unchecked(t, g, m))
}

pub(crate) fn mapping_cost_unchecked(t: &WeightedTree, g: &WeightedTree, m: &Mapping) -> f64 {
    let del: f64 = m.delete_left.iter().map(|&v| t.weight(v)).sum::<f64>()
        + m.delete_right.iter().map(|&v| g.weight(v)).sum::<f64>();
    del + couple_weights(t, g, m).iter().map(|(_, a, b)| (a - b).abs()).sum::<f64>()
}

/// Number of maximal coupled vertices strictly below each vertex.
fn lambda_counts(tree: &WeightedTree, coupled: &HashSet<VertexId>) -> HashMap<VertexId, usize> {
    let mut out = HashMap::new();
    for v in tree.post_order() {
        let n = tree
            .children(v)
            .iter()
            .map(|c| if coupled.contains(c) { 1 } else { out[c] })
            .sum::<usize>();
        out.insert(v, n);
    }
    out
}

/// Checks that `couples` is an injective, order-preserving set of non-root pairs.
pub fn validate_coupling(t: &WeightedTree, g: &WeightedTree, couples: &[(VertexId, VertexId)]) -> Result<(), EditError> {
    let mut l = HashSet::new();
    let mut r = HashSet::new();
    for &(a, b) in couples {
        if !t.contains(a) || !g.contains(b) || a == t.root() || b == g.root() {
            return Err(EditError::InvalidMapping(format!("bad couple ({a}, {b})")));
        }
        if !l.insert(a) || !r.insert(b) {
            return Err(EditError::InvalidMapping(format!("couple ({a}, {b}) is not injective")));
        }
    }
    for (i, c) in couples.iter().enumerate() {
        for d in &couples[i + 1..] {
            if t.is_below(c.0, d.0) != g.is_below(c.1, d.1) || t.is_below(d.0, c.0) != g.is_below(d.1, c.1) {
                return Err(EditError::InvalidMapping(format!("couples {c:?} and {d:?} break the order")));
            }
        }
    }
    Ok(())
}

/// Completes a coupling into a mapping with as many ghostings and as few deletions as
/// possible: an uncoupled vertex is ghosted exactly when one maximal coupled vertex
/// lies below it, and deleted otherwise.
pub fn mapping_from_coupling(
    t: &WeightedTree,
    g: &WeightedTree,
    couples: &[(VertexId, VertexId)],
) -> Result<Mapping, EditError> {
    validate_coupling(t, g, couples)?;
    Ok(complete_unchecked(t, g, couples))
}

pub(crate) fn complete_unchecked(t: &WeightedTree, g: &WeightedTree, couples: &[(VertexId, VertexId)]) -> Mapping {
    let mut m = Mapping { couples: couples.to_vec(), ..Default::default() };
    let cl: HashSet<VertexId> = couples.iter().map(|c| c.0).collect();
    let cr: HashSet<VertexId> = couples.iter().map(|c| c.1).collect();
    for (tree, coupled, del, gh) in [
        (t, &cl, &mut m.delete_left, &mut m.ghost_left),
        (g, &cr, &mut m.delete_right, &mut m.ghost_right),
    ] {
        let lam = lambda_counts(tree, coupled);
        for v in tree.edges() {
            if coupled.contains(&v) {
                continue;
            }
            if lam[&v] == 1 {
                gh.push(v);
            } else {
                del.push(v);
            }
        }
    }
    m.normalized()
}

/// Membership in the class of mappings with maximal ghostings and minimal deletions:
/// the mapping is the completion of its couples and no coupled vertex is left of
/// order two after the deletions.
pub fn is_m2(t: &WeightedTree, g: &WeightedTree, m: &Mapping) -> bool {
    if !validate_mapping(t, g, m).is_empty() {
        return false;
    }
    if complete_unchecked(t, g, &m.couples) != m.clone().normalized() {
        return false;
    }
    let cl: HashSet<VertexId> = m.couples.iter().map(|c| c.0).collect();
    let lam = lambda_counts(t, &cl);
    m.couples.iter().all(|c| lam[&c.0] != 1)
}

/// An edit path realising a valid mapping, with cost equal to the mapping cost.
///
/// Order: left deletions, left ghostings, shrinks of every couple to the right chain
/// weight, then the right-side ghostings and deletions undone in reverse (splits and
/// insertions). The final tree equals `g` up to vertex renaming.
pub fn realize_path(t: &WeightedTree, g: &WeightedTree, m: &Mapping) -> Result<EditPath, EditError> {
    Ok(realize_path_with_ids(t, g, m)?.0)
}

/// Like [`realize_path`], also returning the map from right-tree ids to ids in the final tree.
pub fn realize_path_with_ids(
    t: &WeightedTree,
    g: &WeightedTree,
    m: &Mapping,
) -> Result<(EditPath, HashMap<VertexId, VertexId>), EditError> {
    check(t, g, m)?;
    let mut edits = Vec::new();
    let mut cur = t.clone();
    let mut push = |e: Edit, cur: &mut WeightedTree| -> Result<Option<VertexId>, EditError> {
        let (next, id) = e.apply(cur)?;
        *cur = next;
        edits.push(e);
        Ok(id)
    };

    let mut dl = m.delete_left.clone();
    dl.sort_unstable();
    for &d in &dl {
        push(Edit::Delete { vertex: d }, &mut cur)?;
    }
    let mut gl = m.ghost_left.clone();
    gl.sort_unstable();
    for &x in &gl {
        push(Edit::Ghost { vertex: x }, &mut cur)?;
    }

    // forward simulation on the right tree, recording what each step needs to be undone
    enum Undo {
        Insert { vertex: VertexId, parent: VertexId, children: Vec<VertexId>, weight: f64 },
        Split { vertex: VertexId, child: VertexId, lower: f64 },
    }
    let mut right = g.clone();
    let mut undo = Vec::new();
    let mut dr = m.delete_right.clone();
    dr.sort_unstable();
    for &d in &dr {
        undo.push(Undo::Insert {
            vertex: d,
            parent: right.parent(d).unwrap(),
            children: right.children(d).to_vec(),
            weight: right.weight(d),
        });
        right = apply_edit(&right, &Edit::Delete { vertex: d })?;
    }
    let mut gr = m.ghost_right.clone();
    gr.sort_unstable();
    for &x in &gr {
        let child = right.children(x)[0];
        undo.push(Undo::Split { vertex: x, child, lower: right.weight(child) });
        right = right.ghost(x)?;
    }

    let mut id_of: HashMap<VertexId, VertexId> = HashMap::new();
    id_of.insert(g.root(), t.root());
    let mut couples = m.couples.clone();
    couples.sort_unstable();
    for &(a, b) in &couples {
        id_of.insert(b, a);
        push(Edit::Shrink { vertex: a, weight: right.weight(b) }, &mut cur)?;
    }
    for u in undo.into_iter().rev() {
        match u {
            Undo::Split { vertex, child, lower } => {
                let id = push(Edit::Split { vertex: id_of[&child], lower }, &mut cur)?.unwrap();
                id_of.insert(vertex, id);
            }
            Undo::Insert { vertex, parent, children, weight } => {
                let adopt = children.iter().map(|c| id_of[c]).collect();
                let id = push(Edit::Insert { parent: id_of[&parent], adopt, weight }, &mut cur)?.unwrap();
                id_of.insert(vertex, id);
            }
        }
    }
    Ok((EditPath { edits }, id_of))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::weighted_isomorphism;

    fn cherry(a: f64, b: f64) -> WeightedTree {
        WeightedTree::new(&[None, Some(0), Some(0)], &[0.0, a, b]).unwrap()
    }

    fn path(weights: &[f64]) -> WeightedTree {
        let parents: Vec<Option<usize>> = (0..=weights.len()).map(|i| i.checked_sub(1)).collect();
        let mut w = vec![0.0];
        w.extend_from_slice(weights);
        WeightedTree::new(&parents, &w).unwrap()
    }

    #[test]
    fn edit_costs() {
        let t = cherry(1.0, 2.0);
        assert_eq!(Edit::Shrink { vertex: 1, weight: 0.25 }.cost(&t), 0.75);
        assert_eq!(Edit::Delete { vertex: 2 }.cost(&t), 2.0);
        assert_eq!(Edit::Insert { parent: 0, adopt: vec![1], weight: 0.5 }.cost(&t), 0.5);
        assert!(matches!(
            apply_edit(&t, &Edit::Shrink { vertex: 1, weight: 0.0 }),
            Err(EditError::NonPositiveShrink { .. })
        ));
        assert!(matches!(
            apply_edit(&t, &Edit::Insert { parent: 1, adopt: vec![2], weight: 1.0 }),
            Err(EditError::NotAChild { .. })
        ));
    }

    #[test]
    fn split_edge_then_delete_pieces() {
        let unit = path(&[1.0]);
        let k = 16;
        let mut edits = Vec::new();
        let mut cur = unit.clone();
        let mut pieces = vec![1];
        for i in 1..k {
            let lower = 1.0 - i as f64 / k as f64;
            let (next, id) = cur.split(1, lower).unwrap();
            edits.push(Edit::Split { vertex: 1, lower });
            cur = next;
            pieces.push(id);
        }
        for &p in &pieces {
            edits.push(Edit::Delete { vertex: p });
        }
        let path = EditPath { edits };
        assert!((path.cost(&unit, 2.0).unwrap() - 0.25).abs() < 1e-12);
        assert!((path.cost(&unit, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(path.cost(&unit, 0.5), Err(EditError::BadOrder(0.5)));
    }

    #[test]
    fn completion_ghosts_and_deletes() {
        // left: root <- x <- {l1, l2}; couple only l1 with the single leaf on the right
        let t = WeightedTree::new(&[None, Some(0), Some(1), Some(1)], &[0.0, 1.0, 2.0, 3.0]).unwrap();
        let g = path(&[4.0]);
        let m = mapping_from_coupling(&t, &g, &[(2, 1)]).unwrap();
        assert_eq!(m.delete_left, vec![3]);
        assert_eq!(m.ghost_left, vec![1]);
        assert!(validate_mapping(&t, &g, &m).is_empty());
        // W = 2 + 1 = 3 against 4, plus deleting weight 3
        assert!((mapping_cost(&t, &g, &m).unwrap() - 4.0).abs() < 1e-12);
        assert!(is_m2(&t, &g, &m));
    }

    #[test]
    fn full_bijection_on_paths_is_not_m2() {
        let t = path(&[1.0, 2.0]);
        let g = path(&[1.5, 2.5]);
        let m = mapping_from_coupling(&t, &g, &[(1, 1), (2, 2)]).unwrap();
        assert!(m.ghost_left.is_empty() && m.delete_left.is_empty());
        assert!(validate_mapping(&t, &g, &m).is_empty());
        assert!(!is_m2(&t, &g, &m));
        assert!((mapping_cost(&t, &g, &m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn violations_are_reported() {
        let t = cherry(1.0, 2.0);
        let g = cherry(1.0, 2.0);
        let m = Mapping { couples: vec![(1, 1)], ghost_left: vec![2], ..Default::default() };
        let v = validate_mapping(&t, &g, &m);
        assert!(v.contains(&MappingViolation::Uncovered { side: Side::Right, vertex: 2 }));
        assert!(v.contains(&MappingViolation::GhostNotOrderTwo { side: Side::Left, vertex: 2, children: 0 }));

        let p = path(&[1.0, 1.0]);
        let crossed = Mapping { couples: vec![(1, 1), (2, 2)], ..Default::default() };
        assert!(validate_mapping(&p, &t, &crossed).iter().any(|x| matches!(x, MappingViolation::OrderBroken { .. })));
    }

    #[test]
    fn realized_path_reaches_target_at_mapping_cost() {
        let t = WeightedTree::new(&[None, Some(0), Some(1), Some(1), Some(0)], &[0.0, 1.0, 2.0, 3.0, 0.5]).unwrap();
        let g = WeightedTree::new(&[None, Some(0), Some(1), Some(2), Some(2)], &[0.0, 0.7, 0.4, 2.5, 1.0]).unwrap();
        let m = mapping_from_coupling(&t, &g, &[(2, 3), (3, 4)]).unwrap();
        let path = realize_path(&t, &g, &m).unwrap();
        let (end, costs) = path.apply(&t).unwrap();
        assert!(weighted_isomorphism(&end, &g).is_some());
        let total: f64 = costs.iter().sum();
        assert!((total - mapping_cost(&t, &g, &m).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn identity_mapping_has_zero_cost_path() {
        let t = cherry(1.0, 2.0);
        let m = mapping_from_coupling(&t, &t, &[(1, 1), (2, 2)]).unwrap();
        let path = realize_path(&t, &t, &m).unwrap();
        assert_eq!(path.cost(&t, 1.0).unwrap(), 0.0);
    }
}
