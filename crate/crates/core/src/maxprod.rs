//! Max-product for MWIS in its min-sum (log-ratio) form.
//!
//! Messages live on arcs: `gamma[i -> j] = log(m_ij(0) / m_ij(1))`. One
//! synchronous sweep maps every message from the previous field:
//!
//! ```text
//! gamma'[i -> j] = ( w_i - sum_{k in N(i), k != j} gamma[k -> i] )_+
//! ```
//!
//! and node `i` is estimated from its belief gap `w_i - sum_k gamma[k -> i]`.

use serde::{Deserialize, Serialize};

use crate::graph::WeightedGraph;

/// Min-sum message state, one value per arc (see [`WeightedGraph::arc_index`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MessageField(Vec<f64>);

impl MessageField {
    /// Wraps raw per-arc values. Panics if the length is not `2 m`.
    pub fn from_values(graph: &WeightedGraph, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            graph.arc_count(),
            "message field needs one value per arc"
        );
        MessageField(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `gamma[from -> to]`, or `None` if the nodes are not adjacent.
    pub fn get(&self, graph: &WeightedGraph, from: usize, to: usize) -> Option<f64> {
        graph.arc_index(from, to).map(|a| self.0[a])
    }

    /// Sup-norm distance to another field on the same graph.
    pub fn sup_distance(&self, other: &MessageField) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Estimate {
    One,
    Zero,
    Unknown,
}

impl Estimate {
    pub fn symbol(self) -> char {
        match self {
            Estimate::One => '1',
            Estimate::Zero => '0',
            Estimate::Unknown => '?',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EstimateVector(Vec<Estimate>);

impl EstimateVector {
    pub fn as_slice(&self) -> &[Estimate] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Estimate {
        self.0[i]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Compact rendering such as `"1?0"`.
    pub fn symbols(&self) -> String {
        self.0.iter().map(|e| e.symbol()).collect()
    }
}

impl From<Vec<Estimate>> for EstimateVector {
    fn from(v: Vec<Estimate>) -> Self {
        EstimateVector(v)
    }
}

/// The uninformative initialization, every `gamma = 0`.
pub fn zero_messages(graph: &WeightedGraph) -> MessageField {
    MessageField(vec![0.0; graph.arc_count()])
}

fn incoming_sum(graph: &WeightedGraph, gamma: &MessageField, i: usize) -> f64 {
    graph
        .incident(i)
        .iter()
        .map(|inc| gamma.0[crate::graph::arc_of(inc.edge, inc.node < i)])
        .sum()
}

/// One synchronous min-sum update of every message.
pub fn sweep(graph: &WeightedGraph, gamma: &MessageField) -> MessageField {
    let mut next = vec![0.0; gamma.0.len()];
    for i in 0..graph.n() {
        let incident = graph.incident(i);
        for out in incident {
            let excluded: f64 = incident
                .iter()
                .filter(|inc| inc.node != out.node)
                .map(|inc| gamma.0[crate::graph::arc_of(inc.edge, inc.node < i)])
                .sum();
            let arc = crate::graph::arc_of(out.edge, i < out.node);
            next[arc] = (graph.weight(i) - excluded).max(0.0);
        }
    }
    MessageField(next)
}

/// `w_i - sum_{k in N(i)} gamma[k -> i]`.
pub fn belief_gap(graph: &WeightedGraph, gamma: &MessageField, i: usize) -> f64 {
    graph.weight(i) - incoming_sum(graph, gamma, i)
}

/// Ternary estimate: `One` if the gap exceeds `tau`, `Zero` if it is below
/// `-tau`, `Unknown` otherwise.
pub fn estimate(graph: &WeightedGraph, gamma: &MessageField, tau: f64) -> EstimateVector {
    (0..graph.n())
        .map(|i| {
            let gap = belief_gap(graph, gamma, i);
            if gap > tau {
                Estimate::One
            } else if gap < -tau {
                Estimate::Zero
            } else {
                Estimate::Unknown
            }
        })
        .collect::<Vec<_>>()
        .into()
}

/// Sup-norm of `gamma - sweep(gamma)`.
pub fn fixed_point_residual(graph: &WeightedGraph, gamma: &MessageField) -> f64 {
    gamma.sup_distance(&sweep(graph, gamma))
}

/// Default Unknown tolerance, `1e-9 * max(1, max_i w_i)`.
pub fn default_tau(graph: &WeightedGraph) -> f64 {
    1e-9 * graph.max_weight().max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxProductConfig {
    pub max_iters: usize,
    /// `None` selects [`default_tau`].
    pub tau: Option<f64>,
    /// Number of consecutive identical estimate vectors required to stop.
    pub window: usize,
}

impl Default for MaxProductConfig {
    fn default() -> Self {
        MaxProductConfig {
            max_iters: 200,
            tau: None,
            window: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub messages: MessageField,
    pub estimates: EstimateVector,
    /// Sup-norm change of the messages in this sweep.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxProductTrace {
    pub tau: f64,
    /// State before the first sweep; `iterations[t - 1]` is the state after `t` sweeps.
    pub initial: Iteration,
    pub iterations: Vec<Iteration>,
    pub converged: bool,
}

impl MaxProductTrace {
    pub fn iterations_used(&self) -> usize {
        self.iterations.len()
    }

    pub fn final_state(&self) -> &Iteration {
        self.iterations.last().unwrap_or(&self.initial)
    }

    pub fn final_estimates(&self) -> &EstimateVector {
        &self.final_state().estimates
    }

    /// Estimates indexed by sweep count, starting with the initial state.
    pub fn estimate_sequence(&self) -> impl Iterator<Item = &EstimateVector> {
        std::iter::once(&self.initial.estimates)
            .chain(self.iterations.iter().map(|it| &it.estimates))
    }

    /// Smallest `p` such that the last `p` estimate vectors repeat the `p`
    /// before them. `Some(1)` means the final two states agree.
    pub fn estimate_period(&self) -> Option<usize> {
        let seq: Vec<&EstimateVector> = self.estimate_sequence().collect();
        let len = seq.len();
        (1..=len / 2).find(|&p| (len - p..len).all(|k| seq[k] == seq[k - p]))
    }
}

/// Runs max-product from the zero initialization.
pub fn run(graph: &WeightedGraph, config: &MaxProductConfig) -> MaxProductTrace {
    run_from(graph, zero_messages(graph), config)
}

/// Runs synchronous sweeps from `init` until the estimates stabilize.
///
/// Stops after sweep `t` when the message change is below `tau` and either
/// the last `window` estimate vectors agree or the sweep changed nothing
/// at all (an exact fixed point, which no later sweep can leave).
pub fn run_from(
    graph: &WeightedGraph,
    init: MessageField,
    config: &MaxProductConfig,
) -> MaxProductTrace {
    assert!(config.max_iters >= 1 && config.window >= 1);
    let tau = config.tau.unwrap_or_else(|| default_tau(graph));
    let initial = Iteration {
        estimates: estimate(graph, &init, tau),
        messages: init,
        change: 0.0,
    };
    let mut iterations: Vec<Iteration> = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iters {
        let prev = iterations.last().unwrap_or(&initial);
        let messages = sweep(graph, &prev.messages);
        let change = messages.sup_distance(&prev.messages);
        let estimates = estimate(graph, &messages, tau);
        iterations.push(Iteration {
            messages,
            estimates,
            change,
        });

        let states: Vec<&EstimateVector> = std::iter::once(&initial.estimates)
            .chain(iterations.iter().map(|it| &it.estimates))
            .collect();
        let stable = states.len() >= config.window
            && states[states.len() - config.window..]
                .windows(2)
                .all(|w| w[0] == w[1]);
        if change < tau && (stable || change == 0.0) {
            converged = true;
            break;
        }
    }
    MaxProductTrace {
        tau,
        initial,
        iterations,
        converged,
    }
}

/// Estimates after `0..=sweeps` sweeps from the zero initialization, with
/// no early stopping.
pub fn estimate_history(graph: &WeightedGraph, sweeps: usize, tau: f64) -> Vec<EstimateVector> {
    let mut gamma = zero_messages(graph);
    let mut out = vec![estimate(graph, &gamma, tau)];
    for _ in 0..sweeps {
        gamma = sweep(graph, &gamma);
        out.push(estimate(graph, &gamma, tau));
    }
    out
}

/// Which of the three fixed-point structure rules a node breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureClause {
    /// A `One` node must have only `Zero` neighbors.
    OneNeedsZeroNeighbors,
    /// A `Zero` node must have a `One` neighbor.
    ZeroNeedsOneNeighbor,
    /// An `Unknown` node must have an `Unknown` neighbor.
    UnknownNeedsUnknownNeighbor,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureViolation {
    pub clause: StructureClause,
    pub node: usize,
    /// Offending neighbor for the first clause.
    pub witness: Option<usize>,
}

/// Checks the neighborhood structure every fixed-point estimate must have.
pub fn check_fixed_point_structure(
    graph: &WeightedGraph,
    est: &EstimateVector,
) -> Vec<StructureViolation> {
    let mut out = Vec::new();
    for i in 0..graph.n() {
        let mut nbrs = graph.neighbors(i).map(|j| (j, est.get(j)));
        match est.get(i) {
            Estimate::One => {
                if let Some((j, _)) = nbrs.find(|&(_, e)| e != Estimate::Zero) {
                    out.push(StructureViolation {
                        clause: StructureClause::OneNeedsZeroNeighbors,
                        node: i,
                        witness: Some(j),
                    });
                }
            }
            Estimate::Zero => {
                if !nbrs.any(|(_, e)| e == Estimate::One) {
                    out.push(StructureViolation {
                        clause: StructureClause::ZeroNeedsOneNeighbor,
                        node: i,
                        witness: None,
                    });
                }
            }
            Estimate::Unknown => {
                if !nbrs.any(|(_, e)| e == Estimate::Unknown) {
                    out.push(StructureViolation {
                        clause: StructureClause::UnknownNeedsUnknownNeighbor,
                        node: i,
                        witness: None,
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use Estimate::{One, Unknown, Zero};

    fn path3() -> WeightedGraph {
        WeightedGraph::new(vec![2.0, 3.0, 2.0], vec![(0, 1), (1, 2)]).unwrap()
    }

    fn single_edge() -> WeightedGraph {
        WeightedGraph::new(vec![1.0, 2.0], vec![(0, 1)]).unwrap()
    }

    fn cycle5() -> WeightedGraph {
        WeightedGraph::new(vec![3.0; 5], (0..5).map(|i| (i, (i + 1) % 5)).collect()).unwrap()
    }

    fn msg(g: &WeightedGraph, f: &MessageField, i: usize, j: usize) -> f64 {
        f.get(g, i, j).unwrap()
    }

    // Recomputes one update straight from the neighbor lists.
    fn naive_sweep(g: &WeightedGraph, f: &MessageField) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..g.n() {
            for j in g.neighbors(i) {
                let mut s = 0.0;
                for k in g.neighbors(i) {
                    if k != j {
                        s += msg(g, f, k, i);
                    }
                }
                out.push((i, j, (g.weight(i) - s).max(0.0)));
            }
        }
        out
    }

    #[test]
    fn zero_messages_examples() {
        let e = single_edge();
        let z = zero_messages(&e);
        assert_eq!((msg(&e, &z, 0, 1), msg(&e, &z, 1, 0)), (0.0, 0.0));
        assert_eq!(zero_messages(&path3()).values(), &[0.0; 4]);
        let lone = WeightedGraph::new(vec![1.0], vec![]).unwrap();
        assert!(zero_messages(&lone).is_empty());
    }

    #[test]
    fn sweep_path3() {
        let g = path3();
        let z = zero_messages(&g);
        let s1 = sweep(&g, &z);
        assert_eq!(msg(&g, &s1, 0, 1), 2.0);
        assert_eq!(msg(&g, &s1, 2, 1), 2.0);
        assert_eq!(msg(&g, &s1, 1, 0), 3.0);
        assert_eq!(msg(&g, &s1, 1, 2), 3.0);
        assert_eq!(z, zero_messages(&g), "input untouched");
        let s2 = sweep(&g, &s1);
        assert_eq!(msg(&g, &s2, 1, 0), 1.0);
        assert_eq!(msg(&g, &s2, 1, 2), 1.0);
        assert_eq!(msg(&g, &s2, 0, 1), 2.0);
        assert_eq!(msg(&g, &s2, 2, 1), 2.0);
        assert_eq!(sweep(&g, &s2), s2);
        for f in [&z, &s1, &s2] {
            let next = sweep(&g, f);
            for (i, j, v) in naive_sweep(&g, f) {
                assert_eq!(msg(&g, &next, i, j), v);
            }
        }
    }

    #[test]
    fn sweep_single_edge_is_constant() {
        let g = single_edge();
        let mut f = zero_messages(&g);
        for _ in 0..5 {
            f = sweep(&g, &f);
            assert_eq!((msg(&g, &f, 0, 1), msg(&g, &f, 1, 0)), (1.0, 2.0));
        }
    }

    #[test]
    fn belief_gap_examples() {
        let g = single_edge();
        let f = MessageField::from_values(&g, vec![0.0, 2.0]);
        assert_eq!(belief_gap(&g, &f, 0), -1.0);
        let p = path3();
        let z = zero_messages(&p);
        assert_eq!(belief_gap(&p, &z, 1), 3.0);
        let fp = sweep(&p, &sweep(&p, &z));
        assert_eq!(belief_gap(&p, &fp, 1), -1.0);
    }

    #[test]
    fn estimate_examples() {
        let g = path3();
        let fp = sweep(&g, &sweep(&g, &zero_messages(&g)));
        assert_eq!(estimate(&g, &fp, 1e-9).as_slice(), &[One, Zero, One]);
        assert_eq!(
            estimate(&g, &zero_messages(&g), 1.0).as_slice(),
            &[One, One, One]
        );
        let e = single_edge();
        let tie = MessageField::from_values(&e, vec![0.0, 1.0]);
        assert_eq!(estimate(&e, &tie, 0.0).get(0), Unknown);
    }

    #[test]
    fn run_path3_converges() {
        let g = path3();
        let trace = run(&g, &MaxProductConfig::default());
        assert!(trace.converged);
        assert!(
            trace.iterations_used() <= 3,
            "used {}",
            trace.iterations_used()
        );
        assert_eq!(trace.final_estimates().as_slice(), &[One, Zero, One]);
        assert_eq!(trace.estimate_period(), Some(1));
    }

    #[test]
    fn run_cycle5_oscillates() {
        let g = cycle5();
        let trace = run(&g, &MaxProductConfig::default());
        assert!(!trace.converged);
        assert_eq!(trace.iterations_used(), 200);
        for (t, est) in trace.estimate_sequence().enumerate() {
            let want = if t % 2 == 0 { One } else { Zero };
            assert!(est.as_slice().iter().all(|&e| e == want), "t={t}");
        }
        assert_eq!(trace.estimate_period(), Some(2));
    }

    #[test]
    fn run_single_node() {
        let g = WeightedGraph::new(vec![4.0], vec![]).unwrap();
        let trace = run(&g, &MaxProductConfig::default());
        assert!(trace.converged);
        assert_eq!(trace.iterations_used(), 1);
        assert_eq!(trace.final_estimates().as_slice(), &[One]);
    }

    #[test]
    fn run_is_deterministic() {
        let g = cycle5();
        let cfg = MaxProductConfig {
            max_iters: 17,
            ..Default::default()
        };
        assert_eq!(run(&g, &cfg), run(&g, &cfg));
    }

    #[test]
    fn residual_examples() {
        let g = path3();
        let z = zero_messages(&g);
        assert_eq!(fixed_point_residual(&g, &z), 3.0);
        let fp = sweep(&g, &sweep(&g, &z));
        assert_eq!(fixed_point_residual(&g, &fp), 0.0);
        let e = single_edge();
        assert_eq!(
            fixed_point_residual(&e, &MessageField::from_values(&e, vec![1.0, 2.0])),
            0.0
        );
    }

    #[test]
    fn structure_examples() {
        let g = path3();
        assert!(check_fixed_point_structure(&g, &vec![One, Zero, One].into()).is_empty());
        let e = single_edge();
        let v = check_fixed_point_structure(&e, &vec![One, One].into());
        assert_eq!(v.len(), 2);
        assert!(v
            .iter()
            .all(|x| x.clause == StructureClause::OneNeedsZeroNeighbors));
        assert_eq!(v[0].witness, Some(1));
        let v = check_fixed_point_structure(&e, &vec![Zero, Zero].into());
        assert_eq!(v.len(), 2);
        assert!(v
            .iter()
            .all(|x| x.clause == StructureClause::ZeroNeedsOneNeighbor));
        let v = check_fixed_point_structure(&e, &vec![Unknown, One].into());
        assert_eq!(v[0].clause, StructureClause::UnknownNeedsUnknownNeighbor);
    }

    #[test]
    fn leaves_send_their_weight() {
        let g = WeightedGraph::new(vec![1.5, 2.0, 0.7, 4.0], vec![(0, 1), (1, 2), (1, 3)]).unwrap();
        let mut f = MessageField::from_values(&g, vec![0.3, 1.1, 0.2, 0.9, 2.5, 0.4]);
        for _ in 0..4 {
            f = sweep(&g, &f);
            assert_eq!(msg(&g, &f, 0, 1), 1.5);
            assert_eq!(msg(&g, &f, 2, 1), 0.7);
            assert_eq!(msg(&g, &f, 3, 1), 4.0);
        }
    }
}
