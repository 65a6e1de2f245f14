mod common;

use common::{graphs, unwrapped_count, unwrapped_values};
use mwis_core::comptree::{
    build, build_with_budget, root_membership, root_values, CompTreeError, RootMembership,
};
use mwis_core::WeightedGraph;
use proptest::prelude::*;

fn tree_mwis_by_enumeration(tree: &mwis_core::comptree::ComputationTree) -> (f64, f64) {
    let v = tree.vertices();
    let (mut with, mut without) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for mask in 0u32..(1 << v.len()) {
        let ok = v.iter().enumerate().all(|(k, x)| {
            x.parent
                .is_none_or(|p| mask >> k & 1 == 0 || mask >> p & 1 == 0)
        });
        if !ok {
            continue;
        }
        let w: f64 = (0..v.len())
            .filter(|&k| mask >> k & 1 == 1)
            .map(|k| v[k].weight)
            .sum();
        if mask & 1 == 1 {
            with = with.max(w);
        } else {
            without = without.max(w);
        }
    }
    (with, without)
}

proptest! {
    #[test]
    fn vertex_count_matches_recount(g in graphs(7), t in 1usize..6) {
        for i in 0..g.n() {
            let tree = build(&g, i, t).unwrap();
            prop_assert_eq!(tree.len(), unwrapped_count(&g, i, None, t));
            prop_assert!(tree.vertices().iter().all(|v| v.level <= t));
            prop_assert_eq!(tree.depth(), t);
        }
    }

    #[test]
    fn dp_matches_enumeration_on_small_trees(g in graphs(6), t in 1usize..5) {
        for i in 0..g.n() {
            let tree = build(&g, i, t).unwrap();
            if tree.len() > 12 {
                continue;
            }
            let (w, o) = root_values(&tree);
            let (ew, eo) = tree_mwis_by_enumeration(&tree);
            prop_assert!((w - ew).abs() <= 1e-12 && (o - eo).abs() <= 1e-12);
        }
    }

    #[test]
    fn dp_matches_recursion_on_graph(g in graphs(7), t in 1usize..6) {
        for i in 0..g.n() {
            let (w, o) = root_values(&build(&g, i, t).unwrap());
            let (rw, ro) = unwrapped_values(&g, i, None, t);
            prop_assert!((w - rw).abs() <= 1e-9 && (o - ro).abs() <= 1e-9);
        }
    }
}

#[test]
fn path_tree_membership() {
    // P3 weights 1, 3, 1 rooted at the middle, depth 2
    let g = WeightedGraph::new(vec![1.0, 3.0, 1.0], vec![(0, 1), (1, 2)]).unwrap();
    let tree = build(&g, 1, 2).unwrap();
    assert_eq!(tree.len(), 3);
    assert_eq!(root_values(&tree), (3.0, 2.0));
    assert_eq!(root_membership(&tree), RootMembership::InEveryMwis);
}

#[test]
fn budget_is_enforced() {
    let n = 6;
    let edges = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let g = WeightedGraph::new(vec![1.0; n], edges).unwrap();
    assert!(matches!(
        build_with_budget(&g, 0, 12, 1000),
        Err(CompTreeError::TooLarge { .. })
    ));
}
