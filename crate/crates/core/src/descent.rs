//! Round-robin coordinate descent on the log-barrier dual
//!
//! ```text
//! g(eps, lambda) = sum_{ij} lambda_ij - eps * sum_i log(sum_{j in N(i)} lambda_ij - w_i)
//! ```
//!
//! over `lambda >= 0`. Each step replaces one edge value by the exact
//! minimizer of `g` along that coordinate, in closed form from the two
//! exclusion messages `a = w_i - sum_{k != j} lambda_ik` and
//! `b = w_j - sum_{k != i} lambda_jk`:
//!
//! ```text
//! lambda_ij = ( (a + b + 2 eps + sqrt((a - b)^2 + 4 eps^2)) / 2 )_+
//! ```
//!
//! The exclusion messages are used as they are, negative values included.
//! Clamping them at zero first gives a point that is not the coordinate
//! minimizer, and `g` can then increase from one sweep to the next.
//!
//! Isolated nodes carry no dual constraint and are left out of the barrier.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::WeightedGraph;

/// One non-negative value per undirected edge, indexed by edge index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualVector(Vec<f64>);

impl DualVector {
    /// Panics if the length is not `m`.
    pub fn from_values(graph: &WeightedGraph, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            graph.m(),
            "dual vector needs one value per edge"
        );
        DualVector(values)
    }

    /// Starting point `lambda_ij = max(w_i, w_j)`.
    pub fn initial(graph: &WeightedGraph) -> Self {
        DualVector(
            graph
                .edges()
                .iter()
                .map(|&(i, j)| graph.weight(i).max(graph.weight(j)))
                .collect(),
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.0[edge]
    }

    pub fn between(&self, graph: &WeightedGraph, i: usize, j: usize) -> Option<f64> {
        graph.edge_index(i, j).map(|e| self.0[e])
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `sum_{j in N(i)} lambda_ij`.
    pub fn node_sum(&self, graph: &WeightedGraph, i: usize) -> f64 {
        graph.incident(i).iter().map(|inc| self.0[inc.edge]).sum()
    }

    fn exclusion(&self, graph: &WeightedGraph, i: usize, edge: usize) -> f64 {
        let others: f64 = graph
            .incident(i)
            .iter()
            .filter(|inc| inc.edge != edge)
            .map(|inc| self.0[inc.edge])
            .sum();
        graph.weight(i) - others
    }

    pub fn is_valid(&self) -> bool {
        self.0.iter().all(|&l| l >= 0.0 && l.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierParams {
    pub eps: f64,
    pub delta: f64,
    pub max_sweeps: usize,
}

impl Default for BarrierParams {
    fn default() -> Self {
        BarrierParams {
            eps: 1e-3,
            delta: 1e-8,
            max_sweeps: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DescentError {
    #[error("barrier weight eps must be positive and finite, got {0}")]
    BadEps(f64),
    #[error("tolerance delta must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("max_sweeps must be at least 1")]
    NoSweeps,
    #[error("node {node} left the barrier interior after sweep {sweep} (slack {slack})")]
    InteriorLost {
        node: usize,
        sweep: usize,
        slack: f64,
    },
}

impl BarrierParams {
    pub fn new(eps: f64, delta: f64, max_sweeps: usize) -> Result<Self, DescentError> {
        let p = BarrierParams {
            eps,
            delta,
            max_sweeps,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<(), DescentError> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(DescentError::BadEps(self.eps));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(DescentError::BadDelta(self.delta));
        }
        if self.max_sweeps == 0 {
            return Err(DescentError::NoSweeps);
        }
        Ok(())
    }
}

/// `g(eps, lambda)`, or `+inf` outside the barrier domain.
pub fn barrier_objective(graph: &WeightedGraph, eps: f64, lambda: &DualVector) -> f64 {
    let mut log_sum = 0.0;
    for i in (0..graph.n()).filter(|&i| !graph.is_isolated(i)) {
        let slack = lambda.node_sum(graph, i) - graph.weight(i);
        if slack <= 0.0 {
            return f64::INFINITY;
        }
        log_sum += slack.ln();
    }
    lambda.total() - eps * log_sum
}

/// Stationary point of `g` along one coordinate, before the `(.)_+` clamp.
pub fn unclamped_update(a: f64, b: f64, eps: f64) -> f64 {
    (a + b + 2.0 * eps + (a - b).hypot(2.0 * eps)) / 2.0
}

/// Closed-form coordinate update from the exclusion messages `a` and `b`.
pub fn update_value(a: f64, b: f64, eps: f64) -> f64 {
    unclamped_update(a, b, eps).max(0.0)
}

/// True iff `max(a, b) + eps < unclamped_update(a, b, eps) <= max(a, b) + 2 eps`.
///
/// Strictness is decided on the margin `2 eps^2 / (sqrt(d^2 + 4 eps^2) + d)`,
/// `d = |a - b|`, which has no cancellation. The computed update is then
/// compared against both ends with a few ulps of slack, since the upper end
/// is attained at `a = b`.
pub fn perturbation_bounds_check(a: f64, b: f64, eps: f64) -> bool {
    let d = (a - b).abs();
    let margin = 2.0 * eps * eps / ((d * d + 4.0 * eps * eps).sqrt() + d);
    let raw = unclamped_update(a, b, eps);
    let m = a.max(b);
    let ulps = 8.0 * f64::EPSILON * (a.abs() + b.abs() + eps);
    margin > 0.0 && m + eps - ulps <= raw && raw <= m + 2.0 * eps + ulps
}

/// Exclusion messages `(a, b)` for `edge = (i, j)`, `i < j`. Negative when
/// the other edges already cover the node's weight.
pub fn edge_messages(graph: &WeightedGraph, lambda: &DualVector, edge: usize) -> (f64, f64) {
    let (i, j) = graph.edges()[edge];
    (
        lambda.exclusion(graph, i, edge),
        lambda.exclusion(graph, j, edge),
    )
}

/// Returns a copy of `lambda` with only `edge` updated.
pub fn edge_step(graph: &WeightedGraph, lambda: &DualVector, edge: usize, eps: f64) -> DualVector {
    let (a, b) = edge_messages(graph, lambda, edge);
    let mut next = lambda.clone();
    next.0[edge] = update_value(a, b, eps);
    next
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// Largest per-edge change in this sweep.
    pub max_change: f64,
    /// `g(eps, lambda)` after the sweep.
    pub objective: f64,
    /// `sum lambda` after the sweep.
    pub dual_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentOutcome {
    pub lambda: DualVector,
    pub params: BarrierParams,
    pub sweeps: Vec<SweepRecord>,
    pub converged: bool,
    /// Edge updates that broke the perturbation bounds; always 0 unless
    /// the arithmetic misbehaves.
    pub bound_violations: usize,
}

impl DescentOutcome {
    pub fn sweeps_used(&self) -> usize {
        self.sweeps.len()
    }
}

/// Runs the descent from `lambda_ij = max(w_i, w_j)`, visiting edges in
/// lexicographic order each sweep, until a full sweep moves no component
/// by `delta` or more.
pub fn run_descent(
    graph: &WeightedGraph,
    params: &BarrierParams,
) -> Result<DescentOutcome, DescentError> {
    params.check()?;
    let eps = params.eps;
    let mut lambda = DualVector::initial(graph);
    let mut sweeps = Vec::new();
    let mut bound_violations = 0;
    let mut converged = false;
    for sweep in 1..=params.max_sweeps {
        let mut max_change: f64 = 0.0;
        for e in 0..graph.m() {
            let (a, b) = edge_messages(graph, &lambda, e);
            let ok = perturbation_bounds_check(a, b, eps);
            debug_assert!(
                ok,
                "perturbation bounds failed at edge {e}: a={a} b={b} eps={eps}"
            );
            bound_violations += usize::from(!ok);
            let value = update_value(a, b, eps);
            max_change = max_change.max((value - lambda.0[e]).abs());
            lambda.0[e] = value;
        }
        if sweep == 1 {
            for i in (0..graph.n()).filter(|&i| !graph.is_isolated(i)) {
                let slack = lambda.node_sum(graph, i) - graph.weight(i);
                if slack <= 0.0 {
                    return Err(DescentError::InteriorLost {
                        node: i,
                        sweep,
                        slack,
                    });
                }
            }
        }
        sweeps.push(SweepRecord {
            max_change,
            objective: barrier_objective(graph, eps, &lambda),
            dual_value: lambda.total(),
        });
        if max_change < params.delta {
            converged = true;
            break;
        }
    }
    Ok(DescentOutcome {
        lambda,
        params: *params,
        sweeps,
        converged,
        bound_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_edge() -> WeightedGraph {
        WeightedGraph::new(vec![1.0, 2.0], vec![(0, 1)]).unwrap()
    }

    fn path3() -> WeightedGraph {
        WeightedGraph::new(vec![2.0, 3.0, 2.0], vec![(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn objective_examples() {
        let g = single_edge();
        let l = DualVector::from_values(&g, vec![3.0]);
        let v = barrier_objective(&g, 1.0, &l);
        assert!((v - (3.0 - 2f64.ln())).abs() < 1e-15);
        assert!((v - 2.3069).abs() < 1e-4);
        assert_eq!(
            barrier_objective(&g, 1.0, &DualVector::from_values(&g, vec![2.0])),
            f64::INFINITY
        );
        let v = barrier_objective(&g, 1e-12, &l);
        assert!((v - 3.0).abs() < 1e-11);
    }

    #[test]
    fn update_examples() {
        for eps in [1e-3, 0.5, 7.0] {
            assert_eq!(update_value(0.0, 0.0, eps), 2.0 * eps);
        }
        let v = update_value(1.0, 2.0, 0.01);
        assert!((v - (3.02 + 1.0004f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((v - 2.01010).abs() < 1e-5);
        assert_eq!(update_value(3.0, 1.0, 0.0), 3.0);
    }

    #[test]
    fn edge_step_single_edge() {
        let g = single_edge();
        let l0 = DualVector::initial(&g);
        assert_eq!(l0.values(), &[2.0]);
        assert_eq!(edge_messages(&g, &l0, 0), (1.0, 2.0));
        let l1 = edge_step(&g, &l0, 0, 0.01);
        assert!((l1.get(0) - 2.01010).abs() < 1e-5);
        assert_eq!(l0.values(), &[2.0]);
    }

    #[test]
    fn edge_step_touches_one_edge() {
        let g = path3();
        let l0 = DualVector::from_values(&g, vec![0.5, 0.25]);
        let l1 = edge_step(&g, &l0, 1, 0.1);
        assert_eq!(l1.get(0), 0.5);
        // a = 3 - 0.5 = 2.5, b = 2
        assert_eq!(l1.get(1), update_value(2.5, 2.0, 0.1));
    }

    #[test]
    fn negative_exclusions_are_not_clamped() {
        let g = path3();
        // node 1 is already covered by edge (0, 1): a = 3 - 5 = -2 for edge (1, 2)
        let l = DualVector::from_values(&g, vec![5.0, 1.0]);
        assert_eq!(edge_messages(&g, &l, 1), (-2.0, 2.0));
        let next = edge_step(&g, &l, 1, 0.1);
        assert_eq!(next.get(1), unclamped_update(-2.0, 2.0, 0.1));
        assert!(perturbation_bounds_check(-2.0, 2.0, 0.1));
        // both endpoints over-covered: the stationary point is negative and clamps to 0
        assert_eq!(update_value(-3.0, -2.0, 0.1), 0.0);
        assert!(perturbation_bounds_check(-3.0, -2.0, 0.1));
    }

    // Coordinate minimizer check by golden-section search on g along one edge.
    #[test]
    fn update_minimizes_along_the_coordinate() {
        let g = WeightedGraph::new(
            vec![0.4, 0.9, 0.7, 0.3],
            vec![(0, 1), (1, 2), (2, 3), (0, 3)],
        )
        .unwrap();
        let eps = 0.05;
        let base = DualVector::from_values(&g, vec![0.6, 0.5, 0.8, 0.35]);
        for e in 0..g.m() {
            let f = |x: f64| {
                let mut v = base.values().to_vec();
                v[e] = x;
                barrier_objective(&g, eps, &DualVector::from_values(&g, v))
            };
            let (a, b) = edge_messages(&g, &base, e);
            let (mut lo, mut hi) = (a.max(b).max(0.0) + 1e-12, 10.0);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..200 {
                let m1 = hi - phi * (hi - lo);
                let m2 = lo + phi * (hi - lo);
                if f(m1) < f(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            let got = edge_step(&g, &base, e, eps).get(e);
            assert!(
                (got - (lo + hi) / 2.0).abs() < 1e-7,
                "edge {e}: {got} vs {lo}"
            );
        }
    }

    #[test]
    fn bounds_examples() {
        assert!(perturbation_bounds_check(0.0, 0.0, 1.0));
        assert!(perturbation_bounds_check(1.0, 2.0, 0.01));
        let v = update_value(5.0, 0.0, 0.1);
        assert!((v - 5.10200).abs() < 1e-5);
        assert!(perturbation_bounds_check(5.0, 0.0, 0.1));
        assert!(!perturbation_bounds_check(1.0, 1.0, 0.0));
    }

    #[test]
    fn run_single_edge() {
        let g = single_edge();
        let out = run_descent(&g, &BarrierParams::new(0.01, 1e-10, 100).unwrap()).unwrap();
        assert!(out.converged);
        assert!(out.sweeps_used() <= 2);
        assert!((out.lambda.get(0) - 2.01010).abs() < 1e-5);
        assert!((out.lambda.total() - 2.0).abs() <= 0.011);
        assert_eq!(out.bound_violations, 0);
    }

    #[test]
    fn run_path3() {
        let g = path3();
        let eps = 1e-3;
        let out = run_descent(&g, &BarrierParams::new(eps, 1e-9, 100_000).unwrap()).unwrap();
        assert!(out.converged);
        let total = out.lambda.total();
        assert!(
            (4.0..=4.0 + 10.0 * eps * 3.0).contains(&total),
            "total {total}"
        );
        for i in 0..3 {
            assert!(out.lambda.node_sum(&g, i) > g.weight(i));
        }
    }

    #[test]
    fn run_is_deterministic() {
        let g = WeightedGraph::new(
            vec![0.3, 0.9, 0.5, 0.7, 0.2],
            vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)],
        )
        .unwrap();
        let p = BarrierParams::new(1e-2, 1e-10, 10_000).unwrap();
        let a = run_descent(&g, &p).unwrap();
        let b = run_descent(&g, &p).unwrap();
        assert_eq!(a, b);
        for (x, y) in a.sweeps.iter().zip(&b.sweeps) {
            assert_eq!(x.objective.to_bits(), y.objective.to_bits());
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert_eq!(
            BarrierParams::new(0.0, 1e-8, 10),
            Err(DescentError::BadEps(0.0))
        );
        assert!(matches!(
            BarrierParams::new(1e-3, f64::NAN, 10),
            Err(DescentError::BadDelta(_))
        ));
        assert_eq!(
            BarrierParams::new(1e-3, 1e-8, 0),
            Err(DescentError::NoSweeps)
        );
    }

    #[test]
    fn edgeless_graph_converges_immediately() {
        let g = WeightedGraph::new(vec![1.0, 2.0], vec![]).unwrap();
        let out = run_descent(&g, &BarrierParams::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.sweeps_used(), 1);
        assert_eq!(out.sweeps[0].objective, 0.0);
    }
}
