//! Exact edit distance by a bounded search over couple configurations.
//!
//! For a coupled pair `(p, q)` let `F(p, q)` be the cheapest way to map everything
//! strictly below them. Below `p` the mapping is described by a *configuration*: a set
//! of *units*, each a coupled vertex `a` together with the ghosted chain from `a` up to
//! a child of `p`; everything else is deleted. Ghosted vertices see exactly one unit
//! below them, deleted ones zero or at least two, and a coupled non-root vertex never
//! exactly one — so every mapping found has maximal ghostings and minimal deletions.
//!
//! `F(p, q)` minimises, over configuration pairs with equally many units, the deleted
//! weight plus an optimal assignment of units with cost `|W_a − W_b| + F(a, b)`.
//! Pairs are explored in order of deleted weight and pruned with the lower bound
//! `deleted + Σ|mass_a − mass_b|` (sorted masses, `mass = W + weight below`), which
//! holds because `F(a, b)` is at least the difference of the weights below `a` and `b`.
//! Identical subtrees share memo entries and configurations are deduplicated by the
//! multiset of `(subtree class, W)`, which keeps symmetric trees cheap.

use std::collections::HashMap;
use std::rc::Rc;

use crate::assignment::hungarian;
use crate::edit::{complete_unchecked, mapping_cost_unchecked, Mapping};
use crate::error::DistanceError;
use crate::tree::{VertexId, WeightedTree};

use super::{DistanceResult, SolverConfig};

const NONE: usize = usize::MAX;

/// Shared interner so that class ids are comparable across both trees.
#[derive(Default)]
struct Classes {
    below: HashMap<Vec<u32>, u32>,
    full: HashMap<(u32, u64), u32>,
}

impl Classes {
    fn below_id(&mut self, mut children: Vec<u32>) -> u32 {
        children.sort_unstable();
        let n = self.below.len() as u32;
        *self.below.entry(children).or_insert(n)
    }

    fn full_id(&mut self, below: u32, w: f64) -> u32 {
        let n = self.full.len() as u32;
        *self.full.entry((below, w.to_bits())).or_insert(n)
    }
}

struct Chain {
    bottom: usize,
    w: f64,
    mass: f64,
    key: (u32, u64),
}

#[derive(Clone)]
struct Conf {
    units: Vec<u32>,
    del: f64,
    masses: Vec<f64>,
}

/// Configurations of one forest, grouped by number of units and sorted by deleted weight.
struct ConfSet {
    by_k: Vec<Vec<Conf>>,
}

struct Side {
    ids: Vec<VertexId>,
    children: Vec<Vec<usize>>,
    w: Vec<f64>,
    below: Vec<f64>,
    class_below: Vec<u32>,
    class_full: Vec<u32>,
    root: usize,
    chains: Vec<Chain>,
    chain_of: HashMap<(usize, usize), u32>,
    member: Vec<Option<Rc<Vec<Vec<u32>>>>>,
    forest: Vec<Option<Rc<ConfSet>>>,
}

impl Side {
    fn new(t: &WeightedTree, classes: &mut Classes) -> Self {
        let (c, ids) = t.compact();
        let n = c.len();
        let mut parent = vec![NONE; n];
        let mut children = vec![vec![]; n];
        let mut w = vec![0.0; n];
        for v in 0..n {
            if let Some(p) = c.parent(v) {
                parent[v] = p;
                children[p].push(v);
                w[v] = c.weight(v);
            }
        }
        let mut below = vec![0.0; n];
        let mut class_below = vec![0; n];
        let mut class_full = vec![0; n];
        for v in c.post_order() {
            below[v] = children[v].iter().map(|&ch| below[ch] + w[ch]).sum();
            class_below[v] = classes.below_id(children[v].iter().map(|&ch| class_full[ch]).collect());
            class_full[v] = classes.full_id(class_below[v], w[v]);
        }
        let mut side = Side {
            ids,
            children,
            w,
            below,
            class_below,
            class_full,
            root: c.root(),
            chains: vec![],
            chain_of: HashMap::new(),
            member: vec![None; n],
            forest: vec![None; n],
        };
        // every (bottom, top) pair with bottom ≤ top, top non-root
        for top in 0..n {
            if top == side.root {
                continue;
            }
            let mut stack = vec![top];
            while let Some(a) = stack.pop() {
                // summed bottom-up so symmetric chains get bit-identical weights
                let mut wv = 0.0;
                let mut x = a;
                loop {
                    wv += side.w[x];
                    if x == top {
                        break;
                    }
                    x = parent[x];
                }
                let id = side.chains.len() as u32;
                side.chains.push(Chain {
                    bottom: a,
                    w: wv,
                    mass: wv + side.below[a],
                    key: (side.class_below[a], wv.to_bits()),
                });
                side.chain_of.insert((a, top), id);
                stack.extend(side.children[a].iter().copied());
            }
        }
        side
    }

    fn conf(&self, units: Vec<u32>, forest_mass: f64) -> Conf {
        let mut masses: Vec<f64> = units.iter().map(|&u| self.chains[u as usize].mass).collect();
        masses.sort_by(f64::total_cmp);
        let covered: f64 = units.iter().map(|&u| self.chains[u as usize].mass).sum();
        Conf { units, del: (forest_mass - covered).max(0.0), masses }
    }

    fn key(&self, units: &[u32]) -> Vec<(u32, u64)> {
        let mut k: Vec<(u32, u64)> = units.iter().map(|&u| self.chains[u as usize].key).collect();
        k.sort_unstable();
        k
    }
}

struct Solver {
    sides: [Side; 2],
    memo: HashMap<(u32, u32, bool), f64>,
    nodes: u64,
    budget: u64,
}

type Choice = Option<(Vec<u32>, Vec<u32>, Vec<usize>)>;

impl Solver {
    fn tick(&mut self, n: u64) -> Result<(), DistanceError> {
        self.nodes += n;
        if self.nodes > self.budget {
            Err(DistanceError::BudgetExhausted { budget: self.budget })
        } else {
            Ok(())
        }
    }

    /// Unit sets of the subtree hanging from `x` (its own edge included).
    fn member_confs(&mut self, s: usize, x: usize) -> Result<Rc<Vec<Vec<u32>>>, DistanceError> {
        if let Some(m) = &self.sides[s].member[x] {
            return Ok(m.clone());
        }
        let mut out: Vec<Vec<u32>> = Vec::new();
        let side = &self.sides[s];
        let mut stack = vec![x];
        while let Some(a) = stack.pop() {
            out.push(vec![side.chain_of[&(a, x)]]);
            stack.extend(side.children[a].iter().copied());
        }
        let forest = self.forest_confs(s, x)?;
        for confs in forest.by_k.iter().skip(2) {
            out.extend(confs.iter().map(|c| c.units.clone()));
        }
        out.push(vec![]);
        self.tick(out.len() as u64)?;
        let out = Rc::new(out);
        self.sides[s].member[x] = Some(out.clone());
        Ok(out)
    }

    /// Configurations of the forest of children of `p`.
    fn forest_confs(&mut self, s: usize, p: usize) -> Result<Rc<ConfSet>, DistanceError> {
        if let Some(f) = &self.sides[s].forest[p] {
            return Ok(f.clone());
        }
        let children = self.sides[s].children[p].clone();
        let mut acc: Vec<Vec<u32>> = vec![vec![]];
        for c in children {
            let member = self.member_confs(s, c)?;
            let mut seen: HashMap<Vec<(u32, u64)>, ()> = HashMap::new();
            let mut next = Vec::new();
            for a in &acc {
                for b in member.iter() {
                    let mut u = a.clone();
                    u.extend_from_slice(b);
                    if seen.insert(self.sides[s].key(&u), ()).is_none() {
                        next.push(u);
                    }
                }
            }
            self.tick(next.len() as u64)?;
            acc = next;
        }
        let side = &self.sides[s];
        let mass = side.below[p];
        let mut by_k: Vec<Vec<Conf>> = Vec::new();
        for u in acc {
            let k = u.len();
            if by_k.len() <= k {
                by_k.resize(k + 1, Vec::new());
            }
            by_k[k].push(side.conf(u, mass));
        }
        for v in &mut by_k {
            v.sort_by(|a, b| a.del.total_cmp(&b.del));
        }
        let set = Rc::new(ConfSet { by_k });
        self.sides[s].forest[p] = Some(set.clone());
        Ok(set)
    }

    fn identical(&self, p: usize, q: usize, root: bool) -> bool {
        self.sides[0].class_below[p] == self.sides[1].class_below[q]
            && (root || self.sides[0].children[p].len() != 1)
    }

    fn value(&mut self, p: usize, q: usize, root: bool) -> Result<f64, DistanceError> {
        if self.identical(p, q, root) {
            return Ok(0.0);
        }
        let key = (self.sides[0].class_below[p], self.sides[1].class_below[q], root);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let (v, _) = self.search(p, q, root)?;
        self.memo.insert(key, v);
        Ok(v)
    }

    fn unit_cost(&mut self, ua: u32, ub: u32) -> Result<f64, DistanceError> {
        let (a, wa) = {
            let c = &self.sides[0].chains[ua as usize];
            (c.bottom, c.w)
        };
        let (b, wb) = {
            let c = &self.sides[1].chains[ub as usize];
            (c.bottom, c.w)
        };
        Ok((wa - wb).abs() + self.value(a, b, false)?)
    }

    /// Best configuration pair below `(p, q)`; `None` means delete everything.
    fn search(&mut self, p: usize, q: usize, root: bool) -> Result<(f64, Choice), DistanceError> {
        let fa = self.forest_confs(0, p)?;
        let fb = self.forest_confs(1, q)?;
        let mut best = self.sides[0].below[p] + self.sides[1].below[q];
        let mut choice: Choice = None;
        let kmax = fa.by_k.len().min(fb.by_k.len());
        for k in 1..kmax {
            if k == 1 && !root {
                continue;
            }
            let (ak, bk) = (&fa.by_k[k], &fb.by_k[k]);
            let Some(min_b) = bk.first().map(|c| c.del) else { continue };
            for ca in ak {
                if ca.del + min_b >= best {
                    break;
                }
                for cb in bk {
                    if ca.del + cb.del >= best {
                        break;
                    }
                    self.tick(1)?;
                    let spread: f64 = ca.masses.iter().zip(&cb.masses).map(|(x, y)| (x - y).abs()).sum();
                    if ca.del + cb.del + spread >= best {
                        continue;
                    }
                    let mut cost = vec![vec![0.0; k]; k];
                    for i in 0..k {
                        for j in 0..k {
                            cost[i][j] = self.unit_cost(ca.units[i], cb.units[j])?;
                        }
                    }
                    let (total, cols) = hungarian(&cost);
                    let v = ca.del + cb.del + total;
                    if v < best {
                        best = v;
                        choice = Some((ca.units.clone(), cb.units.clone(), cols));
                    }
                }
            }
        }
        Ok((best, choice))
    }

    /// Couples of an optimal mapping below `(p, q)`.
    fn reconstruct(&mut self, p: usize, q: usize, root: bool, out: &mut Vec<(usize, usize)>) -> Result<(), DistanceError> {
        if self.identical(p, q, root) {
            self.identical_couples(p, q, out);
            return Ok(());
        }
        let (_, choice) = self.search(p, q, root)?;
        if let Some((ua, ub, cols)) = choice {
            for (i, &j) in cols.iter().enumerate() {
                let a = self.sides[0].chains[ua[i] as usize].bottom;
                let b = self.sides[1].chains[ub[j] as usize].bottom;
                out.push((a, b));
                self.reconstruct(a, b, false, out)?;
            }
        }
        Ok(())
    }

    /// Zero-cost couples between subtrees of the same class: every vertex pair except
    /// those with a single child, which get ghosted.
    fn identical_couples(&self, p: usize, q: usize, out: &mut Vec<(usize, usize)>) {
        let (l, r) = (&self.sides[0], &self.sides[1]);
        let mut used = vec![false; r.children[q].len()];
        for &a in &l.children[p] {
            let j = (0..used.len())
                .find(|&j| !used[j] && r.class_full[r.children[q][j]] == l.class_full[a])
                .expect("identical classes without matching children");
            used[j] = true;
            let b = r.children[q][j];
            if l.children[a].len() != 1 {
                out.push((a, b));
            }
            self.identical_couples(a, b, out);
        }
    }
}

pub(super) fn solve(t: &WeightedTree, g: &WeightedTree, cfg: &SolverConfig) -> Result<DistanceResult, DistanceError> {
    let mut classes = Classes::default();
    let left = Side::new(t, &mut classes);
    let right = Side::new(g, &mut classes);
    let (rl, rr) = (left.root, right.root);
    let mut s = Solver { sides: [left, right], memo: HashMap::new(), nodes: 0, budget: cfg.node_budget };
    let value = s.value(rl, rr, true)?;
    let mut couples = Vec::new();
    s.reconstruct(rl, rr, true, &mut couples)?;
    let couples: Vec<(VertexId, VertexId)> =
        couples.into_iter().map(|(a, b)| (s.sides[0].ids[a], s.sides[1].ids[b])).collect();
    let mapping: Mapping = complete_unchecked(t, g, &couples);
    debug_assert!((mapping_cost_unchecked(t, g, &mapping) - value).abs() <= 1e-7);
    Ok(DistanceResult { value, mapping, nodes: s.nodes })
}
