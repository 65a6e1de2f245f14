//! MAP estimation on a discrete factor model, reduced to MWIS on an
//! auxiliary graph.
//!
//! The auxiliary graph has one node per `(factor, local assignment)` pair,
//! weighted `c + phi(local assignment)`, and an edge between every two
//! nodes that give some shared variable different values. Maximal
//! independent sets correspond one-to-one to global assignments.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descent::BarrierParams;
use crate::graph::{is_independent, subset_weight, GraphError, NodeSubset, WeightedGraph};
use crate::maxprod::{self, Estimate, MaxProductConfig};
use crate::oracles::{branch_and_bound_mwis, OracleError};
use crate::recovery::{algo_mwis, default_delta1};

pub const DEFAULT_NODE_BUDGET: usize = 4096;
pub const MAX_JOINT_ASSIGNMENTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    /// Ordered, duplicate-free variable ids.
    pub scope: Vec<usize>,
    /// Row-major over `scope`: the last variable varies fastest.
    pub table: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("model has no variables")]
    NoVariables,
    #[error("variable {0} has an empty domain")]
    EmptyDomain(usize),
    #[error("factor {0} has an empty scope")]
    EmptyScope(usize),
    #[error("factor {factor} refers to unknown variable {var}")]
    UnknownVariable { factor: usize, var: usize },
    #[error("factor {factor} lists variable {var} twice")]
    DuplicateVariable { factor: usize, var: usize },
    #[error("factor {factor} table has {got} entries, expected {expected}")]
    TableSize {
        factor: usize,
        expected: usize,
        got: usize,
    },
    #[error("factor {factor} has a non-finite entry at {index}")]
    NonFinite { factor: usize, index: usize },
    #[error("variable {0} appears in no factor")]
    UncoveredVariable(usize),
    #[error("reduction needs {nodes} nodes, budget is {budget}")]
    TooManyNodes { nodes: usize, budget: usize },
    #[error("joint assignment space too large ({0} assignments)")]
    TooManyAssignments(usize),
    #[error("node set is not independent in the auxiliary graph")]
    NotIndependent,
    #[error("node set does not pick exactly one assignment per factor")]
    NotLiftable,
    #[error("MWIS solver failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A discrete model `q(y) ~ exp(sum_a phi_a(y_a))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapProblem {
    domains: Vec<usize>,
    factors: Vec<Factor>,
}

impl MapProblem {
    pub fn new(domains: Vec<usize>, factors: Vec<Factor>) -> Result<Self, MapError> {
        if domains.is_empty() {
            return Err(MapError::NoVariables);
        }
        if let Some(v) = domains.iter().position(|&d| d == 0) {
            return Err(MapError::EmptyDomain(v));
        }
        let mut covered = vec![false; domains.len()];
        for (f, factor) in factors.iter().enumerate() {
            if factor.scope.is_empty() {
                return Err(MapError::EmptyScope(f));
            }
            let mut seen = vec![false; domains.len()];
            for &var in &factor.scope {
                if var >= domains.len() {
                    return Err(MapError::UnknownVariable { factor: f, var });
                }
                if std::mem::replace(&mut seen[var], true) {
                    return Err(MapError::DuplicateVariable { factor: f, var });
                }
                covered[var] = true;
            }
            let expected: usize = factor.scope.iter().map(|&v| domains[v]).product();
            if factor.table.len() != expected {
                return Err(MapError::TableSize {
                    factor: f,
                    expected,
                    got: factor.table.len(),
                });
            }
            if let Some(index) = factor.table.iter().position(|x| !x.is_finite()) {
                return Err(MapError::NonFinite { factor: f, index });
            }
        }
        if let Some(v) = covered.iter().position(|&c| !c) {
            return Err(MapError::UncoveredVariable(v));
        }
        Ok(MapProblem { domains, factors })
    }

    pub fn domains(&self) -> &[usize] {
        &self.domains
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    fn local_index(&self, factor: &Factor, y: &[usize]) -> usize {
        factor
            .scope
            .iter()
            .fold(0, |idx, &v| idx * self.domains[v] + y[v])
    }

    /// `sum_a phi_a(y_a)` for a full assignment.
    pub fn score(&self, y: &[usize]) -> f64 {
        self.factors
            .iter()
            .map(|f| f.table[self.local_index(f, y)])
            .sum()
    }
}

/// Decodes a row-major table index into per-variable values.
fn decode(index: usize, sizes: &[usize]) -> Vec<usize> {
    let mut rest = index;
    let mut out = vec![0; sizes.len()];
    for (slot, &d) in out.iter_mut().zip(sizes).rev() {
        *slot = rest % d;
        rest /= d;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeLabel {
    pub factor: usize,
    /// Values of the factor's scope variables, in scope order.
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MwisReduction {
    pub graph: WeightedGraph,
    pub labels: Vec<NodeLabel>,
    pub offset: f64,
    pub factor_count: usize,
    domains: Vec<usize>,
    scopes: Vec<Vec<usize>>,
}

pub fn build_reduction(p: &MapProblem) -> Result<MwisReduction, MapError> {
    build_reduction_with_budget(p, DEFAULT_NODE_BUDGET)
}

pub fn build_reduction_with_budget(
    p: &MapProblem,
    budget: usize,
) -> Result<MwisReduction, MapError> {
    let nodes: usize = p.factors.iter().map(|f| f.table.len()).sum();
    if nodes > budget {
        return Err(MapError::TooManyNodes { nodes, budget });
    }
    let min_phi = p
        .factors
        .iter()
        .flat_map(|f| f.table.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let offset = 1.0 + (-min_phi).max(0.0);
    let mut labels = Vec::with_capacity(nodes);
    let mut weights = Vec::with_capacity(nodes);
    for (fi, f) in p.factors.iter().enumerate() {
        let sizes: Vec<usize> = f.scope.iter().map(|&v| p.domains[v]).collect();
        for (k, &phi) in f.table.iter().enumerate() {
            labels.push(NodeLabel {
                factor: fi,
                assignment: decode(k, &sizes),
            });
            weights.push(offset + phi);
        }
    }
    let mut edges = Vec::new();
    for a in 0..labels.len() {
        for b in a + 1..labels.len() {
            if inconsistent(p, &labels[a], &labels[b]) {
                edges.push((a, b));
            }
        }
    }
    Ok(MwisReduction {
        graph: WeightedGraph::new(weights, edges)?,
        labels,
        offset,
        factor_count: p.factors.len(),
        domains: p.domains.clone(),
        scopes: p.factors.iter().map(|f| f.scope.clone()).collect(),
    })
}

fn inconsistent(p: &MapProblem, a: &NodeLabel, b: &NodeLabel) -> bool {
    let sa = &p.factors[a.factor].scope;
    let sb = &p.factors[b.factor].scope;
    sa.iter().enumerate().any(|(ia, v)| {
        sb.iter()
            .position(|w| w == v)
            .is_some_and(|ib| a.assignment[ia] != b.assignment[ib])
    })
}

impl MwisReduction {
    /// Auxiliary nodes consistent with the full assignment `y`, one per factor.
    pub fn nodes_for(&self, y: &[usize]) -> NodeSubset {
        let mut s = NodeSubset::empty(self.graph.n());
        for (k, label) in self.labels.iter().enumerate() {
            let scope = &self.scopes[label.factor];
            if scope
                .iter()
                .zip(&label.assignment)
                .all(|(&v, &val)| y[v] == val)
            {
                s.insert(k);
            }
        }
        s
    }

    pub fn num_variables(&self) -> usize {
        self.domains.len()
    }

    /// Turns an independent set with exactly one node per factor back into
    /// a full assignment.
    pub fn lift(&self, s: &NodeSubset) -> Result<Vec<usize>, MapError> {
        if !is_independent(&self.graph, s)? {
            return Err(MapError::NotIndependent);
        }
        let mut per_factor = vec![0usize; self.factor_count];
        let mut y: Vec<Option<usize>> = vec![None; self.domains.len()];
        for k in s.members() {
            let label = &self.labels[k];
            per_factor[label.factor] += 1;
            for (&v, &val) in self.scopes[label.factor].iter().zip(&label.assignment) {
                y[v] = Some(val);
            }
        }
        if per_factor.iter().any(|&c| c != 1) {
            return Err(MapError::NotLiftable);
        }
        // every variable sits in some factor, so all entries are set
        y.into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(MapError::NotLiftable)
    }
}

/// Anything that proposes an independent set for an MWIS instance.
pub trait MwisSolver {
    fn name(&self) -> &str;
    fn solve(&self, graph: &WeightedGraph) -> Result<NodeSubset, String>;
}

/// Exact branch and bound; returns the lexicographically first optimum.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSolver;

impl MwisSolver for ExactSolver {
    fn name(&self) -> &str {
        "exact"
    }

    fn solve(&self, graph: &WeightedGraph) -> Result<NodeSubset, String> {
        branch_and_bound_mwis(graph)
            .map_err(|e: OracleError| e.to_string())
            .map(|r| {
                r.optima
                    .into_iter()
                    .next()
                    .expect("at least one independent set")
            })
    }
}

/// Barrier descent plus coloring recovery.
#[derive(Debug, Clone, Copy, Default)]
pub struct DescentSolver {
    pub params: BarrierParams,
    /// `None` selects [`default_delta1`].
    pub delta1: Option<f64>,
}

impl MwisSolver for DescentSolver {
    fn name(&self) -> &str {
        "descent"
    }

    fn solve(&self, graph: &WeightedGraph) -> Result<NodeSubset, String> {
        let delta1 = self
            .delta1
            .unwrap_or_else(|| default_delta1(graph, self.params.eps));
        algo_mwis(graph, &self.params, delta1)
            .map(|o| o.x)
            .map_err(|e| e.to_string())
    }
}

/// Max-product from zero messages; nodes estimated `One` form the set.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxProductSolver {
    pub config: MaxProductConfig,
}

impl MwisSolver for MaxProductSolver {
    fn name(&self) -> &str {
        "maxprod"
    }

    fn solve(&self, graph: &WeightedGraph) -> Result<NodeSubset, String> {
        let trace = maxprod::run(graph, &self.config);
        let est = trace.final_estimates();
        Ok((0..graph.n())
            .map(|i| est.get(i) == Estimate::One)
            .collect::<Vec<_>>()
            .into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSolution {
    pub assignment: Vec<usize>,
    pub score: f64,
    pub mwis_weight: f64,
    pub offset: f64,
    pub solver: String,
    pub auxiliary_nodes: usize,
    pub auxiliary_edges: usize,
}

/// Builds the reduction, solves it and lifts the answer. A set that does
/// not lift is reported as an error.
pub fn map_via_mwis(p: &MapProblem, solver: &dyn MwisSolver) -> Result<MapSolution, MapError> {
    let red = build_reduction(p)?;
    let s = solver.solve(&red.graph).map_err(MapError::Solver)?;
    let assignment = red.lift(&s)?;
    Ok(MapSolution {
        score: p.score(&assignment),
        mwis_weight: subset_weight(&red.graph, &s)?,
        assignment,
        offset: red.offset,
        solver: solver.name().to_string(),
        auxiliary_nodes: red.graph.n(),
        auxiliary_edges: red.graph.m(),
    })
}

/// Exhaustive MAP; ties go to the lexicographically smallest assignment.
pub fn brute_force_map(p: &MapProblem) -> Result<(Vec<usize>, f64), MapError> {
    let total = p
        .domains
        .iter()
        .try_fold(1usize, |acc, &d| {
            acc.checked_mul(d).filter(|&t| t <= MAX_JOINT_ASSIGNMENTS)
        })
        .ok_or(MapError::TooManyAssignments(usize::MAX))?;
    let mut best: Option<(Vec<usize>, f64)> = None;
    for k in 0..total {
        let y = decode(k, &p.domains);
        let s = p.score(&y);
        if best.as_ref().is_none_or(|(_, b)| s > *b) {
            best = Some((y, s));
        }
    }
    Ok(best.expect("joint space is non-empty"))
}
