//! Property tests for trees, edits, the distance and the diagrams.

use mted_core::distance::{edit_distance, merge_tree_distance, truncate, untruncate, SolverConfig};
use mted_core::edit::{mapping_cost, realize_path};
use mted_core::filtration::{merge_tree_from_pl, persistence_diagram, PlFunction};
use mted_core::tree::{merge_equivalent, weighted_equivalent, MergeTree, WeightedTree};
use proptest::prelude::*;

/// Random recursive trees: edge `i` hangs below a vertex chosen among `0..i`.
fn tree(max_edges: usize) -> impl Strategy<Value = WeightedTree> {
    prop::collection::vec((0.0..1.0f64, 0.1..2.0f64), 0..=max_edges).prop_map(|edges| {
        let mut parents = vec![None];
        let mut weights = vec![0.0];
        for (i, (frac, w)) in edges.into_iter().enumerate() {
            parents.push(Some(((i + 1) as f64 * frac) as usize));
            weights.push(w);
        }
        WeightedTree::new(&parents, &weights).unwrap()
    })
}

fn pl(max_points: usize) -> impl Strategy<Value = PlFunction> {
    prop::collection::vec(0.0..1.0f64, 1..=max_points)
        .prop_map(|ys| PlFunction::new((0..ys.len()).map(|i| i as f64).collect(), ys).unwrap())
}

fn d(a: &WeightedTree, b: &WeightedTree) -> f64 {
    edit_distance(a, b, &SolverConfig::default()).unwrap().value
}

fn mt_distance(a: &MergeTree, b: &MergeTree) -> f64 {
    merge_tree_distance(a, b, &SolverConfig::default()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_then_ghost_is_the_identity(t in tree(5), pick in 0.0..1.0f64, frac in 0.1..0.9f64) {
        let edges: Vec<usize> = t.edges().collect();
        prop_assume!(!edges.is_empty());
        let e = edges[(pick * edges.len() as f64) as usize];
        let (s, id) = t.split(e, t.weight(e) * frac).unwrap();
        prop_assert!((s.ghost(id).unwrap().weight(e) - t.weight(e)).abs() <= 1e-12);
        prop_assert!(weighted_equivalent(&s, &t).is_some());
        prop_assert!(d(&s, &t) <= 1e-9);
    }

    #[test]
    fn canonical_form_is_idempotent(t in tree(6)) {
        let c = t.canonical_form();
        prop_assert!(c.is_canonical());
        prop_assert_eq!(c.canonical_form(), c.clone());
        prop_assert!(d(&c, &t) <= 1e-9);
    }

    #[test]
    fn distance_is_symmetric_and_zero_on_the_diagonal(a in tree(4), b in tree(4)) {
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &a), 0.0);
    }

    #[test]
    fn zero_distance_means_equivalent(a in tree(4), b in tree(4)) {
        prop_assert_eq!(d(&a, &b) <= 1e-9, weighted_equivalent(&a, &b).is_some());
    }

    #[test]
    fn triangle_inequality(a in tree(4), b in tree(4), c in tree(4)) {
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
    }

    #[test]
    fn distance_to_the_point_is_the_norm(a in tree(5), b in tree(5)) {
        prop_assert!((d(&a, &WeightedTree::single()) - a.norm()).abs() <= 1e-9);
        prop_assert!((a.norm() - b.norm()).abs() <= d(&a, &b) + 1e-9);
    }

    #[test]
    fn scaling(a in tree(4), b in tree(4), lambda in prop::sample::select(vec![0.5, 2.0, 3.0])) {
        let (sa, sb) = (a.map_weights(|_, w| lambda * w).unwrap(), b.map_weights(|_, w| lambda * w).unwrap());
        prop_assert!((d(&sa, &sb) - lambda * d(&a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn witness_realises_the_distance(a in tree(5), b in tree(5)) {
        let r = edit_distance(&a, &b, &SolverConfig::default()).unwrap();
        prop_assert!((mapping_cost(&a, &b, &r.mapping).unwrap() - r.value).abs() <= 1e-9);
        let path = realize_path(&a, &b, &r.mapping).unwrap();
        let (end, costs) = path.apply(&a).unwrap();
        prop_assert!((costs.iter().sum::<f64>() - r.value).abs() <= 1e-9);
        prop_assert!(weighted_equivalent(&end, &b).is_some());
    }

    #[test]
    fn truncation_level_does_not_matter(f in pl(6), g in pl(6), k1 in 0.0..3.0f64, k2 in 0.0..3.0f64) {
        let (t, u) = (merge_tree_from_pl(&f), merge_tree_from_pl(&g));
        let base = t.max_height().max(u.max_height());
        let cfg = SolverConfig::default();
        let dk = |k: f64| edit_distance(&truncate(&t, k).unwrap(), &truncate(&u, k).unwrap(), &cfg).unwrap().value;
        prop_assert!((dk(base + k1) - dk(base + k2)).abs() <= 1e-9);
        let (lo, hi) = (base + k1.min(k2), base + k1.max(k2));
        let tt = edit_distance(&truncate(&t, hi).unwrap(), &truncate(&t, lo).unwrap(), &cfg).unwrap().value;
        prop_assert!((tt - (hi - lo)).abs() <= 1e-9);
    }

    #[test]
    fn truncation_round_trips(f in pl(7), k in 0.0..2.0f64) {
        let t = merge_tree_from_pl(&f);
        let level = t.max_height() + k;
        prop_assert!(merge_equivalent(&untruncate(&truncate(&t, level).unwrap(), level), &t).is_some());
    }

    #[test]
    fn diagram_has_one_point_per_leaf(f in pl(9)) {
        let t = merge_tree_from_pl(&f);
        let pd = persistence_diagram(&t);
        prop_assert_eq!(pd.rank(), t.leaves().len());
        prop_assert_eq!(pd.essential.len(), 1);
        prop_assert!(pd.points.iter().all(|p| p.0 < p.1));
    }

    #[test]
    fn shifting_the_function_shifts_the_tree(f in pl(7), h in 0.01..3.0f64) {
        let (t, u) = (merge_tree_from_pl(&f), merge_tree_from_pl(&f.shifted(h)));
        prop_assert!((mt_distance(&t, &u) - h).abs() <= 1e-9);
    }
}
