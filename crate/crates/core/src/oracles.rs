//! Exact ground truth for desk-scale instances: brute-force MWIS, the LP
//! optimum by half-integral enumeration, dual feasibility and the
//! complementary-slackness certificate.
//!
//! Isolated nodes have no edge constraint, so the LP bounds them by
//! `x_i <= 1` explicitly; the matching dual variable is fixed at `w_i` and
//! reported through [`DualReport::isolated_weight`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descent::DualVector;
use crate::graph::{GraphError, NodeSubset, WeightedGraph};

pub const MAX_BRUTE_FORCE_NODES: usize = 24;
pub const MAX_BRANCH_AND_BOUND_NODES: usize = 128;
pub const MAX_LP_NODES: usize = 15;
/// Absolute tolerance for grouping equal objective values.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{what} is limited to {limit} nodes, instance has {n}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpReport {
    pub value: f64,
    /// Every maximum-weight independent set, in lexicographic order of
    /// their indicator vectors.
    pub optima: Vec<NodeSubset>,
}

impl IpReport {
    pub fn unique(&self) -> Option<&NodeSubset> {
        match self.optima.as_slice() {
            [only] => Some(only),
            _ => None,
        }
    }
}

fn neighbor_masks(graph: &WeightedGraph) -> Vec<u32> {
    (0..graph.n())
        .map(|i| graph.neighbors(i).fold(0u32, |m, j| m | 1 << j))
        .collect()
}

/// Keeps every candidate within [`TIE_TOLERANCE`] of the running best.
struct ArgMax<T> {
    best: f64,
    items: Vec<(f64, T)>,
}

impl<T> ArgMax<T> {
    fn new() -> Self {
        ArgMax {
            best: f64::NEG_INFINITY,
            items: Vec::new(),
        }
    }

    fn offer(&mut self, value: f64, make: impl FnOnce() -> T) {
        if value < self.best - TIE_TOLERANCE {
            return;
        }
        if value > self.best {
            self.best = value;
            let floor = value - TIE_TOLERANCE;
            self.items.retain(|(v, _)| *v >= floor);
        }
        self.items.push((value, make()));
    }

    fn finish(self) -> (f64, Vec<T>) {
        (self.best, self.items.into_iter().map(|(_, t)| t).collect())
    }
}

/// Exhaustive scan of all `2^n` subsets.
pub fn brute_force_mwis(graph: &WeightedGraph) -> Result<IpReport, OracleError> {
    let n = graph.n();
    if n > MAX_BRUTE_FORCE_NODES {
        return Err(OracleError::TooLarge {
            what: "brute-force MWIS",
            n,
            limit: MAX_BRUTE_FORCE_NODES,
        });
    }
    let nbr = neighbor_masks(graph);
    let mut arg = ArgMax::new();
    // Depth-first over nodes in order keeps only independent partial sets.
    fn rec(
        i: usize,
        n: usize,
        mask: u32,
        value: f64,
        nbr: &[u32],
        w: &[f64],
        arg: &mut ArgMax<u32>,
    ) {
        if i == n {
            arg.offer(value, || mask);
            return;
        }
        rec(i + 1, n, mask, value, nbr, w, arg);
        if nbr[i] & mask == 0 {
            rec(i + 1, n, mask | 1 << i, value + w[i], nbr, w, arg);
        }
    }
    rec(0, n, 0, 0.0, &nbr, graph.weights(), &mut arg);
    let (value, masks) = arg.finish();
    let mut optima: Vec<NodeSubset> = masks
        .into_iter()
        .map(|m| NodeSubset::from_mask(n, m as u64))
        .collect();
    optima.sort();
    Ok(IpReport { value, optima })
}

/// Exact MWIS by branch and bound with a greedy clique-cover bound. Returns
/// the same report as [`brute_force_mwis`], for graphs up to 128 nodes.
/// Worst-case time is exponential; graphs made of a few dense cliques, such
/// as MAP reductions, are fast.
pub fn branch_and_bound_mwis(graph: &WeightedGraph) -> Result<IpReport, OracleError> {
    let n = graph.n();
    if n > MAX_BRANCH_AND_BOUND_NODES {
        return Err(OracleError::TooLarge {
            what: "branch-and-bound MWIS",
            n,
            limit: MAX_BRANCH_AND_BOUND_NODES,
        });
    }
    let nbr: Vec<u128> = (0..n)
        .map(|i| graph.neighbors(i).fold(0u128, |m, j| m | 1 << j))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| graph.weight(b).total_cmp(&graph.weight(a)).then(a.cmp(&b)));
    let search = Search {
        w: graph.weights(),
        nbr,
        order,
    };
    let mut arg = ArgMax::new();
    let all = if n == 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    };
    search.rec(all, 0, 0.0, &mut arg);
    let (value, masks) = arg.finish();
    let mut optima: Vec<NodeSubset> = masks
        .into_iter()
        .map(|m| NodeSubset::from((0..n).map(|i| m >> i & 1 == 1).collect::<Vec<_>>()))
        .collect();
    optima.sort();
    Ok(IpReport { value, optima })
}

struct Search<'a> {
    w: &'a [f64],
    nbr: Vec<u128>,
    /// Nodes by decreasing weight.
    order: Vec<usize>,
}

impl Search<'_> {
    /// Sum of the heaviest weight per clique, cliques grown greedily in
    /// weight order.
    fn bound(&self, cand: u128) -> f64 {
        let mut cliques: Vec<u128> = Vec::new();
        let mut total = 0.0;
        for &v in self.order.iter().filter(|&&v| cand >> v & 1 == 1) {
            match cliques.iter_mut().find(|common| **common >> v & 1 == 1) {
                Some(common) => *common &= self.nbr[v],
                None => {
                    cliques.push(self.nbr[v]);
                    total += self.w[v];
                }
            }
        }
        total
    }

    fn rec(&self, cand: u128, chosen: u128, value: f64, arg: &mut ArgMax<u128>) {
        if cand == 0 {
            arg.offer(value, || chosen);
            return;
        }
        if value + self.bound(cand) < arg.best - TIE_TOLERANCE {
            return;
        }
        let v = *self
            .order
            .iter()
            .find(|&&v| cand >> v & 1 == 1)
            .expect("cand is non-empty");
        let bit = 1u128 << v;
        self.rec(
            cand & !bit & !self.nbr[v],
            chosen | bit,
            value + self.w[v],
            arg,
        );
        self.rec(cand & !bit, chosen, value, arg);
    }
}

/// A point of `{0, 1/2, 1}^n`, stored in half units (0, 1 or 2).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfIntegralPoint(Vec<u8>);

impl HalfIntegralPoint {
    /// Panics if any entry is not 0, 1 or 2.
    pub fn from_halves(halves: Vec<u8>) -> Self {
        assert!(
            halves.iter().all(|&h| h <= 2),
            "half units must be 0, 1 or 2"
        );
        HalfIntegralPoint(halves)
    }

    pub fn halves(&self) -> &[u8] {
        &self.0
    }

    pub fn value(&self, i: usize) -> f64 {
        self.0[i] as f64 / 2.0
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.0.len()).map(|i| self.value(i)).collect()
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|&h| h != 1)
    }

    pub fn is_fractional_at(&self, i: usize) -> bool {
        self.0[i] == 1
    }

    pub fn is_feasible(&self, graph: &WeightedGraph) -> bool {
        self.0.len() == graph.n()
            && graph
                .edges()
                .iter()
                .all(|&(i, j)| self.0[i] + self.0[j] <= 2)
    }

    pub fn objective(&self, graph: &WeightedGraph) -> f64 {
        self.0
            .iter()
            .zip(graph.weights())
            .map(|(&h, w)| h as f64 * w)
            .sum::<f64>()
            / 2.0
    }

    pub fn to_subset(&self) -> Option<NodeSubset> {
        self.is_integral()
            .then(|| self.0.iter().map(|&h| h == 2).collect::<Vec<_>>().into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpReport {
    pub value: f64,
    /// All optimal half-integral feasible points, lexicographically ordered.
    pub optima: Vec<HalfIntegralPoint>,
    pub unique: bool,
    /// Some optimum is integral, i.e. the relaxation is tight.
    pub integral: bool,
}

impl LpReport {
    /// The LP optimum when it is unique and integral.
    pub fn unique_integral(&self) -> Option<NodeSubset> {
        if self.unique {
            self.optima[0].to_subset()
        } else {
            None
        }
    }

    /// Nodes that are fractional in at least one listed optimum.
    pub fn fractional_nodes(&self) -> Vec<usize> {
        let n = self.optima.first().map_or(0, |p| p.halves().len());
        (0..n)
            .filter(|&i| self.optima.iter().any(|p| p.is_fractional_at(i)))
            .collect()
    }
}

/// Maximizes `sum w_i x_i` over feasible points of `{0, 1/2, 1}^n`, which
/// contains every extreme point of the LP polytope.
pub fn lp_optimum(graph: &WeightedGraph) -> Result<LpReport, OracleError> {
    let n = graph.n();
    if n > MAX_LP_NODES {
        return Err(OracleError::TooLarge {
            what: "LP enumeration",
            n,
            limit: MAX_LP_NODES,
        });
    }
    // earlier[i] = neighbors of i with a smaller id
    let earlier: Vec<Vec<usize>> = (0..n)
        .map(|i| graph.neighbors(i).filter(|&j| j < i).collect())
        .collect();
    let mut arg = ArgMax::new();
    let mut point = vec![0u8; n];
    fn rec(
        i: usize,
        point: &mut Vec<u8>,
        sum: f64,
        earlier: &[Vec<usize>],
        w: &[f64],
        arg: &mut ArgMax<Vec<u8>>,
    ) {
        if i == point.len() {
            arg.offer(sum / 2.0, || point.clone());
            return;
        }
        let cap = earlier[i].iter().map(|&j| 2 - point[j]).min().unwrap_or(2);
        for h in 0..=cap {
            point[i] = h;
            rec(i + 1, point, sum + h as f64 * w[i], earlier, w, arg);
        }
        point[i] = 0;
    }
    rec(0, &mut point, 0.0, &earlier, graph.weights(), &mut arg);
    let (value, points) = arg.finish();
    let mut optima: Vec<HalfIntegralPoint> = points.into_iter().map(HalfIntegralPoint).collect();
    optima.sort();
    let integral = optima.iter().any(HalfIntegralPoint::is_integral);
    Ok(LpReport {
        value,
        unique: optima.len() == 1,
        optima,
        integral,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualReport {
    pub feasible: bool,
    /// `sum lambda_ij`.
    pub objective: f64,
    /// Per node `sum_{j in N(i)} lambda_ij - w_i`; zero for isolated nodes.
    pub slacks: Vec<f64>,
    /// Weight carried by the implicit `x_i <= 1` bounds of isolated nodes.
    pub isolated_weight: f64,
}

impl DualReport {
    /// Dual bound on the LP value, `objective + isolated_weight`.
    pub fn bound(&self) -> f64 {
        self.objective + self.isolated_weight
    }
}

/// `sum_{j in N(i)} lambda_ij - w_i`, or 0 for an isolated node.
pub fn node_slack(graph: &WeightedGraph, lambda: &DualVector, i: usize) -> f64 {
    if graph.is_isolated(i) {
        return 0.0;
    }
    lambda.node_sum(graph, i) - graph.weight(i)
}

pub fn dual_feasible(graph: &WeightedGraph, lambda: &DualVector, tol: f64) -> DualReport {
    let slacks: Vec<f64> = (0..graph.n())
        .map(|i| node_slack(graph, lambda, i))
        .collect();
    let feasible = lambda.values().iter().all(|&l| l >= 0.0 && l.is_finite())
        && slacks.iter().all(|&s| s >= -tol);
    DualReport {
        feasible,
        objective: lambda.values().iter().sum(),
        slacks,
        isolated_weight: graph.isolated_weight(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum CsViolation {
    /// `x` is not an independent set.
    PrimalInfeasible { i: usize, j: usize },
    /// `lambda` violates a dual constraint.
    DualInfeasible { node: usize, slack: f64 },
    /// `x_i * slack_i != 0`.
    NodeSlack { node: usize, product: f64 },
    /// `(x_i + x_j - 1) * lambda_ij != 0`.
    EdgeSlack { i: usize, j: usize, product: f64 },
    /// An isolated node left out; its bound `x_i <= 1` has dual value `w_i`.
    IsolatedExcluded { node: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsReport {
    pub holds: bool,
    pub violations: Vec<CsViolation>,
}

/// Checks that `(x, lambda)` is a complementary primal/dual pair. When it
/// holds, `x` is a maximum-weight independent set. Integrality is implied
/// by `x` being a [`NodeSubset`].
pub fn check_complementary_slackness(
    graph: &WeightedGraph,
    x: &NodeSubset,
    lambda: &DualVector,
    tol: f64,
) -> Result<CsReport, GraphError> {
    if x.len() != graph.n() {
        return Err(GraphError::LengthMismatch {
            expected: graph.n(),
            got: x.len(),
        });
    }
    let mut violations = Vec::new();
    for &(i, j) in graph.edges() {
        if x.contains(i) && x.contains(j) {
            violations.push(CsViolation::PrimalInfeasible { i, j });
        }
    }
    for node in 0..graph.n() {
        let slack = node_slack(graph, lambda, node);
        if slack < -tol {
            violations.push(CsViolation::DualInfeasible { node, slack });
        }
        if x.contains(node) && slack.abs() > tol {
            violations.push(CsViolation::NodeSlack {
                node,
                product: slack,
            });
        }
        if graph.is_isolated(node) && !x.contains(node) {
            violations.push(CsViolation::IsolatedExcluded { node });
        }
    }
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        let l = lambda.get(e);
        if l < -tol {
            violations.push(CsViolation::DualInfeasible { node: i, slack: l });
        }
        let product = (x.contains(i) as u8 as f64 + x.contains(j) as u8 as f64 - 1.0) * l;
        if product.abs() > tol {
            violations.push(CsViolation::EdgeSlack { i, j, product });
        }
    }
    Ok(CsReport {
        holds: violations.is_empty(),
        violations,
    })
}
