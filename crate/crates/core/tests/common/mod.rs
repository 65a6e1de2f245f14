#![allow(dead_code)]

use mwis_core::WeightedGraph;
use proptest::prelude::*;

/// Graphs on 1..=max_n nodes, weights in [0.05, 1], any edge set.
pub fn graphs(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            prop::collection::vec(0.05f64..=1.0, n),
            prop::collection::vec(any::<bool>(), pairs),
        )
            .prop_map(move |(w, mask)| {
                let all = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
                let edges = all
                    .zip(mask)
                    .filter(|(_, keep)| *keep)
                    .map(|(e, _)| e)
                    .collect();
                WeightedGraph::new(w, edges).unwrap()
            })
    })
}

/// Best independent-set weight by trying every subset.
pub fn naive_mwis_value(g: &WeightedGraph) -> f64 {
    let n = g.n();
    let mut best: f64 = 0.0;
    for mask in 0u64..(1 << n) {
        let ok = g
            .edges()
            .iter()
            .all(|&(i, j)| mask >> i & 1 == 0 || mask >> j & 1 == 0);
        if ok {
            best = best.max(
                (0..n)
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| g.weight(i))
                    .sum(),
            );
        }
    }
    best
}

/// All maximum-weight independent sets as membership vectors.
pub fn naive_mwis_sets(g: &WeightedGraph) -> Vec<Vec<bool>> {
    let n = g.n();
    let best = naive_mwis_value(g);
    (0u64..(1 << n))
        .filter(|mask| {
            g.edges()
                .iter()
                .all(|&(i, j)| mask >> i & 1 == 0 || mask >> j & 1 == 0)
        })
        .filter(|mask| {
            let w: f64 = (0..n)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| g.weight(i))
                .sum();
            (w - best).abs() <= 1e-9
        })
        .map(|mask| (0..n).map(|i| mask >> i & 1 == 1).collect())
        .collect()
}

/// LP value over {0, 1/2, 1}^n by a base-3 counter.
pub fn naive_lp_value(g: &WeightedGraph) -> f64 {
    let n = g.n();
    let mut best: f64 = 0.0;
    for code in 0..3usize.pow(n as u32) {
        let mut x = vec![0.0; n];
        let mut c = code;
        for xi in x.iter_mut() {
            *xi = (c % 3) as f64 / 2.0;
            c /= 3;
        }
        if g.edges().iter().all(|&(i, j)| x[i] + x[j] <= 1.0) {
            best = best.max((0..n).map(|i| x[i] * g.weight(i)).sum());
        }
    }
    best
}

/// (with, without) root values of the depth-`t` unwrapped tree at `i`,
/// by recursion on the graph.
pub fn unwrapped_values(
    g: &WeightedGraph,
    i: usize,
    parent: Option<usize>,
    t: usize,
) -> (f64, f64) {
    let mut with = g.weight(i);
    let mut without = 0.0;
    if t > 1 {
        for j in g.neighbors(i).filter(|&j| Some(j) != parent) {
            let (cw, co) = unwrapped_values(g, j, Some(i), t - 1);
            with += co;
            without += cw.max(co);
        }
    }
    (with, without)
}

/// Vertices of the depth-`t` unwrapped tree at `i`.
pub fn unwrapped_count(g: &WeightedGraph, i: usize, parent: Option<usize>, t: usize) -> usize {
    if t <= 1 {
        return 1;
    }
    1 + g
        .neighbors(i)
        .filter(|&j| Some(j) != parent)
        .map(|j| unwrapped_count(g, j, Some(i), t - 1))
        .sum::<usize>()
}
