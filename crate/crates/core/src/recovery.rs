//! Primal recovery from an approximate dual optimum by node coloring, and
//! the composed descent-then-recover MWIS algorithm.

use serde::{Deserialize, Serialize};

use crate::descent::{run_descent, BarrierParams, DescentError, DescentOutcome, DualVector};
use crate::graph::{bipartition, NodeSubset, WeightedGraph};
use crate::oracles::lp_optimum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Color {
    /// Undecided.
    Green,
    /// `x = 0`.
    Gray,
    /// `x = 1`, forced by a gray neighbor.
    Orange,
    /// `x = 1`, left over once propagation stops.
    Red,
}

impl Color {
    pub fn value(self) -> Option<bool> {
        match self {
            Color::Green => None,
            Color::Gray => Some(false),
            Color::Orange | Color::Red => Some(true),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coloring(Vec<Color>);

impl Coloring {
    pub fn colors(&self) -> &[Color] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Color {
        self.0[i]
    }

    pub fn count(&self, c: Color) -> usize {
        self.0.iter().filter(|&&x| x == c).count()
    }

    /// `None` while any node is still green.
    pub fn assignment(&self) -> Option<NodeSubset> {
        self.0
            .iter()
            .map(|c| c.value())
            .collect::<Option<Vec<bool>>>()
            .map(NodeSubset::from)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstOutcome {
    pub x: NodeSubset,
    pub coloring: Coloring,
    /// Round-robin passes of the propagation stage.
    pub rounds: usize,
    /// Color after the initial gray marking, before propagation.
    pub initial: Coloring,
}

/// Recovers a 0/1 assignment from `lambda` with threshold `delta1`.
///
/// Nodes with `sum_j lambda_ij > w_i + delta1` start gray, the rest green.
/// Passes over the nodes in id order then turn a green node orange when a
/// gray neighbor shares an edge with `lambda > delta1`, or gray when it has
/// an orange neighbor, until nothing changes or no green node is left.
/// Remaining green nodes all become red.
pub fn est_recover(graph: &WeightedGraph, lambda: &DualVector, delta1: f64) -> EstOutcome {
    let n = graph.n();
    let mut colors: Vec<Color> = (0..n)
        .map(|i| {
            if !graph.is_isolated(i) && lambda.node_sum(graph, i) > graph.weight(i) + delta1 {
                Color::Gray
            } else {
                Color::Green
            }
        })
        .collect();
    let initial = Coloring(colors.clone());
    let mut rounds = 0;
    while colors.contains(&Color::Green) {
        rounds += 1;
        let mut changed = false;
        for i in 0..n {
            if colors[i] != Color::Green {
                continue;
            }
            let incident = graph.incident(i);
            if incident
                .iter()
                .any(|inc| colors[inc.node] == Color::Gray && lambda.get(inc.edge) > delta1)
            {
                colors[i] = Color::Orange;
                changed = true;
            } else if incident.iter().any(|inc| colors[inc.node] == Color::Orange) {
                colors[i] = Color::Gray;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for c in colors.iter_mut().filter(|c| **c == Color::Green) {
        *c = Color::Red;
    }
    let coloring = Coloring(colors);
    let x = coloring
        .assignment()
        .expect("no green node survives the red stage");
    EstOutcome {
        x,
        coloring,
        rounds,
        initial,
    }
}

/// `max(10 n eps, 1e-4)`.
pub fn default_delta1(graph: &WeightedGraph, eps: f64) -> f64 {
    (10.0 * graph.n() as f64 * eps).max(1e-4)
}

/// Instances up to this size get an LP tightness check in the diagnostics.
pub const LP_DIAGNOSTIC_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoDiagnostics {
    pub descent: DescentOutcome,
    pub est: EstOutcome,
    pub delta1: f64,
    pub bipartite: bool,
    /// Whether the LP relaxation is tight, for small instances.
    pub lp_integral: Option<bool>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoOutcome {
    pub x: NodeSubset,
    pub diagnostics: AlgoDiagnostics,
}

/// Barrier descent followed by coloring recovery. Always produces an
/// assignment; a descent that hit `max_sweeps` only adds a warning.
pub fn algo_mwis(
    graph: &WeightedGraph,
    params: &BarrierParams,
    delta1: f64,
) -> Result<AlgoOutcome, DescentError> {
    let descent = run_descent(graph, params)?;
    let est = est_recover(graph, &descent.lambda, delta1);
    let bipartite = bipartition(graph).is_bipartite();
    let lp_integral = (graph.n() <= LP_DIAGNOSTIC_LIMIT)
        .then(|| lp_optimum(graph).ok().map(|r| r.integral))
        .flatten();
    let mut warnings = Vec::new();
    if !descent.converged {
        warnings.push(format!(
            "descent did not converge within {} sweeps; recovering from the last iterate",
            params.max_sweeps
        ));
    }
    if !bipartite {
        warnings.push(
            "graph is not bipartite; the recovered set carries no optimality guarantee".into(),
        );
    }
    if lp_integral == Some(false) {
        warnings.push("LP relaxation is fractional; the recovered set may be suboptimal".into());
    }
    Ok(AlgoOutcome {
        x: est.x.clone(),
        diagnostics: AlgoDiagnostics {
            descent,
            est,
            delta1,
            bipartite,
            lp_integral,
            warnings,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_independent;

    fn single_edge() -> WeightedGraph {
        WeightedGraph::new(vec![1.0, 2.0], vec![(0, 1)]).unwrap()
    }

    #[test]
    fn est_single_edge() {
        let g = single_edge();
        let out = est_recover(&g, &DualVector::from_values(&g, vec![2.0101]), 0.05);
        assert_eq!(out.initial.colors(), &[Color::Gray, Color::Green]);
        assert_eq!(out.coloring.colors(), &[Color::Gray, Color::Orange]);
        assert_eq!(out.x, NodeSubset::from_members(2, &[1]));
        assert_eq!(out.rounds, 1);
    }

    #[test]
    fn est_path3() {
        let g = WeightedGraph::new(vec![2.0, 3.0, 2.0], vec![(0, 1), (1, 2)]).unwrap();
        let out = est_recover(&g, &DualVector::from_values(&g, vec![2.0, 2.0]), 0.1);
        assert_eq!(
            out.coloring.colors(),
            &[Color::Orange, Color::Gray, Color::Orange]
        );
        assert_eq!(out.x, NodeSubset::from_members(3, &[0, 2]));
    }

    #[test]
    fn est_isolated_node_turns_red() {
        let g = WeightedGraph::new(vec![5.0], vec![]).unwrap();
        let out = est_recover(&g, &DualVector::from_values(&g, vec![]), 0.1);
        assert_eq!(out.coloring.colors(), &[Color::Red]);
        assert_eq!(out.x, NodeSubset::from_members(1, &[0]));
        assert_eq!(out.rounds, 1);
    }

    #[test]
    fn est_propagates_along_a_path() {
        // only node 0 starts gray; orange and gray alternate down the path
        let g = WeightedGraph::new(
            vec![1.0, 5.0, 5.0, 5.0, 5.0],
            vec![(0, 1), (1, 2), (2, 3), (3, 4)],
        )
        .unwrap();
        let lambda = DualVector::from_values(&g, vec![2.0, 1.0, 1.0, 1.0]);
        let out = est_recover(&g, &lambda, 0.1);
        use Color::*;
        assert_eq!(out.coloring.colors(), &[Gray, Orange, Gray, Orange, Gray]);
        assert!(out.rounds <= g.n());
        assert!(is_independent(&g, &out.x).unwrap());
    }

    #[test]
    fn est_threshold_is_strict() {
        let g = single_edge();
        // node 0: 2.0 > 1.0 + 1.0 fails on equality, so nothing is gray
        let out = est_recover(&g, &DualVector::from_values(&g, vec![2.0]), 1.0);
        assert_eq!(out.coloring.colors(), &[Color::Red, Color::Red]);
    }

    #[test]
    fn algo_single_edge() {
        let g = single_edge();
        let p = BarrierParams::new(0.01, 1e-10, 1000).unwrap();
        let out = algo_mwis(&g, &p, 0.05).unwrap();
        assert_eq!(out.x, NodeSubset::from_members(2, &[1]));
        assert!(out.diagnostics.warnings.is_empty());
        assert_eq!(out.diagnostics.lp_integral, Some(true));
    }

    #[test]
    fn algo_flags_fractional_lp() {
        let g =
            WeightedGraph::new(vec![3.0; 5], (0..5).map(|i| (i, (i + 1) % 5)).collect()).unwrap();
        let out = algo_mwis(&g, &BarrierParams::default(), default_delta1(&g, 1e-3)).unwrap();
        assert_eq!(out.diagnostics.lp_integral, Some(false));
        assert!(!out.diagnostics.bipartite);
        assert!(out.diagnostics.descent.converged);
        assert_eq!(out.x.len(), 5);
    }

    #[test]
    fn default_delta1_floor() {
        let g = single_edge();
        assert_eq!(default_delta1(&g, 1e-3), 0.02);
        assert_eq!(default_delta1(&g, 1e-7), 1e-4);
    }
}
