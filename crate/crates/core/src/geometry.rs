//! Geodesics, local uniqueness constants, tangent vectors and Fréchet means.
//!
//! A mapping `M` between `T` and `T'` with maximal ghostings and minimal deletions is
//! split into a vector on the edges of `T` (how much each edge must grow or shrink)
//! and a vector on the edges of `T'` (what must be inserted). The tangent space at `T`
//! is `ℝ^E_T`; `exp` adds a vector to the weights and `log` reads it back from a mapping.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distance::{edit_distance, SolverConfig};
use crate::edit::{couple_weights, is_m2, realize_path, validate_mapping, Edit, EditPath, Mapping};
use crate::error::{DistanceError, EditError, TreeError};
use crate::tree::{VertexId, WeightedTree};
use crate::TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Edit(#[from] EditError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("geodesic parameter {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("mapping does not have maximal ghostings and minimal deletions")]
    NotM2,
    #[error("coordinate {value} on edge {edge} makes its weight negative")]
    NegativeWeight { edge: VertexId, value: f64 },
    #[error("tangent vector has a coordinate on {0}, which is not an edge of its base")]
    UnknownEdge(VertexId),
    #[error("exponent p must be >= 1, got {0}")]
    BadExponent(f64),
    #[error("no data trees")]
    EmptyData,
}

// ---------------------------------------------------------------------------------
// geodesics

/// The path traced by an optimal edit path, parametrised proportionally to cost.
#[derive(Debug, Clone)]
pub struct Geodesic {
    pub start: WeightedTree,
    pub end: WeightedTree,
    pub mapping: Mapping,
    pub path: EditPath,
    /// `t_0 = 0 ≤ t_1 ≤ … ≤ t_n = 1`: cumulative edit cost over total cost.
    pub breakpoints: Vec<f64>,
    /// Total cost of the path.
    pub length: f64,
}

impl Geodesic {
    /// Geodesic along the edit path realising `mapping`. It is a shortest path only if
    /// the mapping is optimal.
    pub fn new(start: &WeightedTree, end: &WeightedTree, mapping: Mapping) -> Result<Self, GeometryError> {
        let path = realize_path(start, end, &mapping)?;
        let (_, costs) = path.apply(start)?;
        let length: f64 = costs.iter().sum();
        let mut breakpoints = vec![0.0];
        let mut acc = 0.0;
        for c in &costs {
            acc += c;
            breakpoints.push(if length > 0.0 { acc / length } else { 0.0 });
        }
        if length > 0.0 {
            *breakpoints.last_mut().unwrap() = 1.0;
        }
        Ok(Geodesic { start: start.clone(), end: end.clone(), mapping, path, breakpoints, length })
    }

    /// Tree at parameter `t`: the edits finished by `t` are applied and the current one
    /// is applied proportionally (a deletion shrinks towards zero, an insertion grows
    /// from zero).
    pub fn eval(&self, t: f64) -> Result<WeightedTree, GeometryError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(GeometryError::OutOfRange(t));
        }
        let mut cur = self.start.clone();
        for (i, e) in self.path.edits.iter().enumerate() {
            let (a, b) = (self.breakpoints[i], self.breakpoints[i + 1]);
            if b <= t {
                cur = e.apply(&cur)?.0;
                continue;
            }
            if t > a {
                if let Some(p) = partial(e, &cur, (t - a) / (b - a)) {
                    cur = p.apply(&cur)?.0;
                }
            }
            break;
        }
        Ok(cur)
    }

    /// `n ≥ 2` equally spaced samples including both ends.
    pub fn samples(&self, n: usize) -> Result<Vec<WeightedTree>, GeometryError> {
        let n = n.max(2);
        (0..n).map(|k| self.eval(k as f64 / (n - 1) as f64)).collect()
    }
}

/// The fraction `s ∈ (0, 1)` of an edit, if it changes anything.
fn partial(e: &Edit, cur: &WeightedTree, s: f64) -> Option<Edit> {
    let s = s.clamp(0.0, 1.0);
    match e {
        Edit::Shrink { vertex, weight } => {
            let w0 = cur.weight(*vertex);
            Some(Edit::Shrink { vertex: *vertex, weight: w0 + s * (weight - w0) })
        }
        Edit::Delete { vertex } => {
            let w = cur.weight(*vertex) * (1.0 - s);
            Some(if w > TOL { Edit::Shrink { vertex: *vertex, weight: w } } else { e.clone() })
        }
        Edit::Insert { parent, adopt, weight } => {
            let w = weight * s;
            (w > TOL).then(|| Edit::Insert { parent: *parent, adopt: adopt.clone(), weight: w })
        }
        Edit::Ghost { .. } | Edit::Split { .. } => None,
    }
}

/// Geodesic from an optimal mapping found by the exact solver.
pub fn geodesic(start: &WeightedTree, end: &WeightedTree, cfg: &SolverConfig) -> Result<Geodesic, GeometryError> {
    let r = edit_distance(start, end, cfg)?;
    Geodesic::new(start, end, r.mapping)
}

// ---------------------------------------------------------------------------------
// local constants

/// Constants bounding the radius in which optimal mappings out of a tree are unique.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalConstants {
    /// Smallest edge weight (`+∞` for the one-vertex tree).
    pub min_weight: f64,
    /// Smallest distance between subtrees rooted at two distinct internal vertices
    /// (`+∞` with fewer than two internal vertices).
    pub min_subtree_distance: f64,
    /// `min(min_weight, min_subtree_distance)`.
    pub kappa_internal: f64,
    /// Smallest weight gap between two leaves with the same parent (`+∞` if none).
    pub kappa_leaves: f64,
    /// `min(kappa_internal, kappa_leaves)`; zero means no uniqueness guarantee.
    pub kappa: f64,
}

pub fn local_constants(t: &WeightedTree, cfg: &SolverConfig) -> Result<LocalConstants, GeometryError> {
    let min_weight = t.edges().map(|e| t.weight(e)).fold(f64::INFINITY, f64::min);
    let internal: Vec<VertexId> = t.vertices().filter(|&v| !t.is_leaf(v)).collect();
    let subs: Vec<WeightedTree> = internal.iter().map(|&v| t.subtree_tree(v)).collect();
    let pairs: Vec<(usize, usize)> =
        (0..subs.len()).flat_map(|i| (i + 1..subs.len()).map(move |j| (i, j))).collect();
    let dists: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| edit_distance(&subs[i], &subs[j], cfg).map(|r| r.value))
        .collect::<Result<_, _>>()?;
    let min_subtree_distance = dists.into_iter().fold(f64::INFINITY, f64::min);
    let mut kappa_leaves = f64::INFINITY;
    for v in t.vertices() {
        let leaves: Vec<f64> = t.children(v).iter().filter(|&&c| t.is_leaf(c)).map(|&c| t.weight(c)).collect();
        for (i, a) in leaves.iter().enumerate() {
            for b in &leaves[i + 1..] {
                kappa_leaves = kappa_leaves.min((a - b).abs());
            }
        }
    }
    let kappa_internal = min_weight.min(min_subtree_distance);
    Ok(LocalConstants {
        min_weight,
        min_subtree_distance,
        kappa_internal,
        kappa_leaves,
        kappa: kappa_internal.min(kappa_leaves),
    })
}

// ---------------------------------------------------------------------------------
// canonical representation and decomposition

/// A mapping without left ghostings, equivalent in cost to the one it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalRepresentation {
    /// The right tree with extra order-two vertices.
    pub target: WeightedTree,
    /// Mapping from the left tree to `target`.
    pub mapping: Mapping,
}

/// Replaces every left ghosting by a couple: the ghosted vertex sits at some fraction
/// of the chain it belongs to, and the right chain is split at the same fraction (or
/// an existing right ghost at that position is coupled instead).
pub fn canonical_representation(
    t: &WeightedTree,
    g: &WeightedTree,
    m: &Mapping,
) -> Result<CanonicalRepresentation, GeometryError> {
    if !is_m2(t, g, m) {
        return Err(GeometryError::NotM2);
    }
    let ghost_l: HashSet<VertexId> = m.ghost_left.iter().copied().collect();
    let ghost_r: HashSet<VertexId> = m.ghost_right.iter().copied().collect();
    let mut target = g.clone();
    let mut couples = m.couples.clone();
    let mut reused = HashSet::new();
    for &(a, b) in &m.couples {
        // ghosts above `a`, with the position of each along the chain
        let mut left = Vec::new();
        let mut pos = t.weight(a);
        let mut p = t.parent(a);
        while let Some(x) = p.filter(|x| ghost_l.contains(x)) {
            left.push((x, pos));
            pos += t.weight(x);
            p = t.parent(x);
        }
        if left.is_empty() {
            continue;
        }
        let wa = pos;
        // (vertex, bottom position, length) along the right chain
        let mut segs = vec![(b, 0.0, g.weight(b))];
        let mut wb = g.weight(b);
        let mut q = g.parent(b);
        while let Some(y) = q.filter(|y| ghost_r.contains(y)) {
            segs.push((y, wb, g.weight(y)));
            wb += g.weight(y);
            q = g.parent(y);
        }
        for (x, px) in left {
            let at = px / wa * wb;
            let idx = segs.iter().rposition(|s| s.1 <= at + TOL).unwrap_or(0);
            let (z, bottom, len) = segs[idx];
            if idx > 0 && (at - bottom).abs() <= TOL && ghost_r.contains(&z) && !reused.contains(&z) {
                couples.push((x, z));
                reused.insert(z);
            } else {
                let (next, s) = target.split(z, at - bottom)?;
                target = next;
                segs[idx].2 = at - bottom;
                segs.insert(idx + 1, (s, at, bottom + len - at));
                couples.push((x, s));
            }
        }
    }
    let mapping = Mapping {
        couples,
        delete_left: m.delete_left.clone(),
        delete_right: m.delete_right.clone(),
        ghost_left: vec![],
        ghost_right: m.ghost_right.iter().copied().filter(|y| !reused.contains(y)).collect(),
    }
    .normalized();
    debug_assert!(validate_mapping(t, &target, &mapping).is_empty());
    Ok(CanonicalRepresentation { target, mapping })
}

/// A vector in `ℝ^E` for the edges `E` of a base tree. Missing coordinates are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: WeightedTree,
    pub coords: BTreeMap<VertexId, f64>,
}

impl TangentVector {
    pub fn zero(base: &WeightedTree) -> Self {
        TangentVector { base: base.clone(), coords: base.edges().map(|e| (e, 0.0)).collect() }
    }

    pub fn get(&self, e: VertexId) -> f64 {
        self.coords.get(&e).copied().unwrap_or(0.0)
    }

    pub fn norm1(&self) -> f64 {
        self.coords.values().map(|x| x.abs()).sum()
    }

    /// `‖self − other‖₁` over the union of coordinates.
    pub fn l1_distance(&self, other: &TangentVector) -> f64 {
        let keys: HashSet<VertexId> = self.coords.keys().chain(other.coords.keys()).copied().collect();
        keys.into_iter().map(|e| (self.get(e) - other.get(e)).abs()).sum()
    }

    /// `w + v ≥ 0` on every edge (within tolerance).
    pub fn is_admissible(&self) -> bool {
        self.base.edges().all(|e| self.base.weight(e) + self.get(e) >= -TOL)
    }
}

/// The two halves of a mapping's cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// On the edges of the left tree: `−w(e)` for deleted edges, target chain weight
    /// minus `w(e)` for coupled ones.
    pub right: TangentVector,
    /// On the edges of the right tree: `w(e')` for deleted edges, zero otherwise.
    pub left: TangentVector,
    pub representation: CanonicalRepresentation,
}

pub fn decompose(t: &WeightedTree, g: &WeightedTree, m: &Mapping) -> Result<Decomposition, GeometryError> {
    let representation = canonical_representation(t, g, m)?;
    let mut right = BTreeMap::new();
    for &d in &m.delete_left {
        right.insert(d, -t.weight(d));
    }
    for ((a, _), wa, wb) in couple_weights(t, &representation.target, &representation.mapping) {
        right.insert(a, wb - wa);
    }
    let mut left: BTreeMap<VertexId, f64> = g.edges().map(|e| (e, 0.0)).collect();
    for &d in &m.delete_right {
        left.insert(d, g.weight(d));
    }
    Ok(Decomposition {
        right: TangentVector { base: t.clone(), coords: right },
        left: TangentVector { base: g.clone(), coords: left },
        representation,
    })
}

/// Tangent vector at `t` pointing to `g` along `m`.
pub fn log_map(t: &WeightedTree, g: &WeightedTree, m: &Mapping) -> Result<TangentVector, GeometryError> {
    Ok(decompose(t, g, m)?.right)
}

/// The base tree with weights `w + v`; edges whose weight drops to zero are deleted.
/// Surviving vertices keep their ids, and the returned mapping couples each of them
/// with itself and deletes the rest.
pub fn exp_map(v: &TangentVector) -> Result<(WeightedTree, Mapping), GeometryError> {
    let t = &v.base;
    for &e in v.coords.keys() {
        if !t.contains(e) || e == t.root() {
            return Err(GeometryError::UnknownEdge(e));
        }
    }
    let mut out = t.clone();
    let mut mapping = Mapping::default();
    for e in t.edges() {
        let w = t.weight(e) + v.get(e);
        if w < -TOL {
            return Err(GeometryError::NegativeWeight { edge: e, value: v.get(e) });
        }
        if w <= TOL {
            mapping.delete_left.push(e);
        } else {
            out.set_weight(e, w);
            mapping.couples.push((e, e));
        }
    }
    for &d in &mapping.delete_left {
        out.remove_edge(d);
    }
    Ok((out, mapping.normalized()))
}

// ---------------------------------------------------------------------------------
// Fréchet means

/// `Σ d(t, x)^p` over the data.
pub fn frechet_objective(t: &WeightedTree, data: &[WeightedTree], p: f64, cfg: &SolverConfig) -> Result<f64, GeometryError> {
    if p.is_nan() || p < 1.0 {
        return Err(GeometryError::BadExponent(p));
    }
    let ds: Vec<f64> = data
        .par_iter()
        .map(|x| edit_distance(t, x, cfg).map(|r| r.value))
        .collect::<Result<_, _>>()?;
    Ok(ds.into_iter().map(|d| if p == 1.0 { d } else { d.powf(p) }).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrechetConfig {
    pub p: f64,
    /// Stop when the relative decrease of the objective falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Iteration cap of the subgradient method used for `p > 1`.
    pub inner_iters: usize,
    pub solver: SolverConfig,
}

impl Default for FrechetConfig {
    fn default() -> Self {
        FrechetConfig { p: 1.0, tol: 1e-6, max_iters: 50, inner_iters: 2000, solver: SolverConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrechetResult {
    pub mean: WeightedTree,
    pub objective: f64,
    /// Objective of every accepted iterate, starting with the initial tree.
    pub trace: Vec<f64>,
    /// Objective of every proposal, accepted or not.
    pub proposals: Vec<f64>,
}

/// Descent scheme: starting from the data tree with the smallest objective, decompose
/// optimal mappings to every datum, solve the problem in the tangent space at the
/// current tree, and move there while the objective does not increase.
pub fn frechet_mean(data: &[WeightedTree], cfg: &FrechetConfig) -> Result<FrechetResult, GeometryError> {
    if data.is_empty() {
        return Err(GeometryError::EmptyData);
    }
    let p = cfg.p;
    if p.is_nan() || p < 1.0 {
        return Err(GeometryError::BadExponent(p));
    }
    let starts: Vec<f64> =
        data.iter().map(|x| frechet_objective(x, data, p, &cfg.solver)).collect::<Result<_, _>>()?;
    let best = (0..data.len()).fold(0, |b, i| if starts[i] < starts[b] { i } else { b });
    let mut cur = data[best].canonical_form().compact().0;
    let mut f = starts[best];
    let mut trace = vec![f];
    let mut proposals = Vec::new();
    for _ in 0..cfg.max_iters {
        if f <= 0.0 {
            break;
        }
        let parts: Vec<(TangentVector, f64)> = data
            .par_iter()
            .map(|x| {
                let r = edit_distance(&cur, x, &cfg.solver)?;
                let d = decompose(&cur, x, &r.mapping)?;
                Ok((d.right, d.left.norm1()))
            })
            .collect::<Result<_, GeometryError>>()?;
        let v = tangent_solve(&cur, &parts, cfg);
        let next = exp_map(&v)?.0.canonical_form().compact().0;
        let fn_ = frechet_objective(&next, data, p, &cfg.solver)?;
        proposals.push(fn_);
        if fn_ > f {
            break;
        }
        let rel = (f - fn_) / f;
        cur = next;
        f = fn_;
        trace.push(f);
        if rel < cfg.tol {
            break;
        }
    }
    Ok(FrechetResult { mean: cur, objective: f, trace, proposals })
}

/// Minimises `Σ (‖v − v_i‖₁ + c_i)^p` over `v ≥ −w`.
fn tangent_solve(base: &WeightedTree, parts: &[(TangentVector, f64)], cfg: &FrechetConfig) -> TangentVector {
    let edges: Vec<VertexId> = base.edges().collect();
    let lower: Vec<f64> = edges.iter().map(|&e| -base.weight(e)).collect();
    let vs: Vec<Vec<f64>> = parts.iter().map(|(v, _)| edges.iter().map(|&e| v.get(e)).collect()).collect();
    let cs: Vec<f64> = parts.iter().map(|p| p.1).collect();
    let median: Vec<f64> = (0..edges.len())
        .map(|k| {
            let mut col: Vec<f64> = vs.iter().map(|v| v[k]).collect();
            col.sort_by(f64::total_cmp);
            col[(col.len() - 1) / 2].max(lower[k])
        })
        .collect();
    let x = if cfg.p == 1.0 { median } else { subgradient(&vs, &cs, &lower, median, cfg) };
    TangentVector { base: base.clone(), coords: edges.into_iter().zip(x).collect() }
}

fn subgradient(vs: &[Vec<f64>], cs: &[f64], lower: &[f64], median: Vec<f64>, cfg: &FrechetConfig) -> Vec<f64> {
    let p = cfg.p;
    let resid = |x: &[f64]| -> Vec<f64> {
        vs.iter().zip(cs).map(|(v, c)| v.iter().zip(x).map(|(a, b)| (a - b).abs()).sum::<f64>() + c).collect()
    };
    let obj = |x: &[f64]| resid(x).iter().map(|r| r.powf(p)).sum::<f64>();
    let zero = vec![0.0; lower.len()];
    let (mut best, mut best_f) = {
        let (fz, fm) = (obj(&zero), obj(&median));
        if fm < fz { (median, fm) } else { (zero, fz) }
    };
    let scale = (resid(&vec![0.0; lower.len()]).iter().sum::<f64>() / vs.len() as f64).max(TOL);
    let mut x = best.clone();
    let mut stall = 0;
    for k in 1..=cfg.inner_iters {
        let r = resid(&x);
        let grad: Vec<f64> = (0..x.len())
            .map(|e| {
                vs.iter()
                    .zip(&r)
                    .map(|(v, ri)| {
                        let d = x[e] - v[e];
                        let s = if d > 0.0 { 1.0 } else if d < 0.0 { -1.0 } else { 0.0 };
                        p * ri.powf(p - 1.0) * s
                    })
                    .sum()
            })
            .collect();
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm == 0.0 {
            break;
        }
        let step = scale / k as f64 / norm;
        for e in 0..x.len() {
            x[e] = (x[e] - step * grad[e]).max(lower[e]);
        }
        let fx = obj(&x);
        if fx < best_f * (1.0 - 1e-8) {
            stall = 0;
        } else {
            stall += 1;
        }
        if fx < best_f {
            best_f = fx;
            best.clone_from(&x);
        }
        if stall >= 100 {
            break;
        }
    }
    best
}
