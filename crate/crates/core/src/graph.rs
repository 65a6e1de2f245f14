//! Weighted undirected graphs, node subsets and the elementary queries
//! shared by every solver in the crate.
//!
//! Node ids are dense `0..n`. Undirected edges are stored normalized as
//! `(lo, hi)` with `lo < hi` and sorted lexicographically; the position of
//! an edge in that order is its *edge index*. Every directed edge gets a
//! *arc index*: `2 * e` for `lo -> hi` and `2 * e + 1` for `hi -> lo`.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyGraph,
    NonPositiveWeight { node: usize, weight: f64 },
    NonFiniteWeight { node: usize },
    SelfLoop { node: usize },
    DuplicateEdge { i: usize, j: usize },
    NodeOutOfRange { node: usize, n: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyGraph => write!(f, "graph has no nodes"),
            Violation::NonPositiveWeight { node, weight } => {
                write!(f, "non-positive weight at node {node} ({weight})")
            }
            Violation::NonFiniteWeight { node } => write!(f, "non-finite weight at node {node}"),
            Violation::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Violation::DuplicateEdge { i, j } => write!(f, "duplicate edge ({i}, {j})"),
            Violation::NodeOutOfRange { node, n } => {
                write!(f, "edge endpoint {node} out of range for {n} nodes")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("invalid graph: {}", list(.0))]
    Invalid(Vec<Violation>),
    #[error("subset has length {got}, graph has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
}

fn list(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks raw instance data and returns every violated invariant.
/// An empty list means [`WeightedGraph::new`] will accept the data.
pub fn validate(weights: &[f64], edges: &[(usize, usize)]) -> Vec<Violation> {
    let n = weights.len();
    let mut out = Vec::new();
    if n == 0 {
        out.push(Violation::EmptyGraph);
    }
    for (node, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            out.push(Violation::NonFiniteWeight { node });
        } else if w <= 0.0 {
            out.push(Violation::NonPositiveWeight { node, weight: w });
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    for &(i, j) in edges {
        if i == j {
            out.push(Violation::SelfLoop { node: i });
            continue;
        }
        let mut bad = false;
        for node in [i, j] {
            if node >= n {
                out.push(Violation::NodeOutOfRange { node, n });
                bad = true;
            }
        }
        if bad {
            continue;
        }
        let key = (i.min(j), i.max(j));
        if !seen.insert(key) {
            out.push(Violation::DuplicateEdge { i: key.0, j: key.1 });
        }
    }
    out
}

/// Neighbor of a node together with the index of the connecting edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incident {
    pub node: usize,
    pub edge: usize,
}

/// An MWIS instance. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: Vec<f64>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<Incident>>,
}

impl WeightedGraph {
    pub fn new(weights: Vec<f64>, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let violations = validate(&weights, &edges);
        if !violations.is_empty() {
            return Err(GraphError::Invalid(violations));
        }
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(i, j)| (i.min(j), i.max(j)))
            .collect();
        edges.sort_unstable();
        let mut adjacency = vec![Vec::new(); weights.len()];
        for (e, &(i, j)) in edges.iter().enumerate() {
            adjacency[i].push(Incident { node: j, edge: e });
            adjacency[j].push(Incident { node: i, edge: e });
        }
        for adj in &mut adjacency {
            adj.sort_unstable_by_key(|inc| inc.node);
        }
        Ok(WeightedGraph {
            weights,
            edges,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }

    /// Edges as `(lo, hi)` pairs in edge-index order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of `i`, sorted by node id.
    pub fn incident(&self, i: usize) -> &[Incident] {
        &self.adjacency[i]
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[i].iter().map(|inc| inc.node)
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.adjacency[i].is_empty()
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let adj = self.adjacency.get(i)?;
        adj.binary_search_by_key(&j, |inc| inc.node)
            .ok()
            .map(|k| adj[k].edge)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge_index(i, j).is_some()
    }

    /// Arc index of the directed edge `from -> to`.
    pub fn arc_index(&self, from: usize, to: usize) -> Option<usize> {
        self.edge_index(from, to).map(|e| arc_of(e, from < to))
    }

    /// Number of directed edges, `2 m`.
    pub fn arc_count(&self) -> usize {
        2 * self.edges.len()
    }

    /// Endpoints `(from, to)` of an arc.
    pub fn arc_endpoints(&self, arc: usize) -> (usize, usize) {
        let (lo, hi) = self.edges[arc / 2];
        if arc.is_multiple_of(2) {
            (lo, hi)
        } else {
            (hi, lo)
        }
    }

    /// Sum of the weights of isolated nodes.
    pub fn isolated_weight(&self) -> f64 {
        (0..self.n())
            .filter(|&i| self.is_isolated(i))
            .map(|i| self.weights[i])
            .sum()
    }

    fn check_len(&self, len: usize) -> Result<(), GraphError> {
        if len != self.n() {
            return Err(GraphError::LengthMismatch {
                expected: self.n(),
                got: len,
            });
        }
        Ok(())
    }
}

pub(crate) fn arc_of(edge: usize, forward: bool) -> usize {
    if forward {
        2 * edge
    } else {
        2 * edge + 1
    }
}

/// A 0/1 indicator vector over the nodes of a graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSubset(Vec<bool>);

impl NodeSubset {
    pub fn empty(n: usize) -> Self {
        NodeSubset(vec![false; n])
    }

    pub fn from_members(n: usize, members: &[usize]) -> Self {
        let mut s = Self::empty(n);
        for &i in members {
            s.0[i] = true;
        }
        s
    }

    /// Subset from the low `n` bits of `mask`; bit `i` is node `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        NodeSubset((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn insert(&mut self, i: usize) {
        self.0[i] = true;
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    pub fn cardinality(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    /// The indicator as 0/1 integers.
    pub fn to_indicator(&self) -> Vec<u8> {
        self.0.iter().map(|&b| b as u8).collect()
    }
}

impl From<Vec<bool>> for NodeSubset {
    fn from(v: Vec<bool>) -> Self {
        NodeSubset(v)
    }
}

pub fn is_independent(graph: &WeightedGraph, s: &NodeSubset) -> Result<bool, GraphError> {
    graph.check_len(s.len())?;
    Ok(graph
        .edges()
        .iter()
        .all(|&(i, j)| !(s.contains(i) && s.contains(j))))
}

pub fn subset_weight(graph: &WeightedGraph, s: &NodeSubset) -> Result<f64, GraphError> {
    graph.check_len(s.len())?;
    Ok(s.members().map(|i| graph.weight(i)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bipartition {
    /// Proper two-coloring; every component's lowest node is on side A.
    Coloring(Vec<Side>),
    /// Nodes of an odd cycle, in cycle order.
    OddCycle(Vec<usize>),
}

impl Bipartition {
    pub fn is_bipartite(&self) -> bool {
        matches!(self, Bipartition::Coloring(_))
    }
}

pub fn bipartition(graph: &WeightedGraph) -> Bipartition {
    let n = graph.n();
    let mut side: Vec<Option<Side>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut queue = VecDeque::new();
    for start in 0..n {
        if side[start].is_some() {
            continue;
        }
        side[start] = Some(Side::A);
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            let su = side[u].unwrap();
            for v in graph.neighbors(u) {
                match side[v] {
                    None => {
                        side[v] = Some(su.other());
                        parent[v] = u;
                        depth[v] = depth[u] + 1;
                        queue.push_back(v);
                    }
                    Some(sv) if sv == su => {
                        return Bipartition::OddCycle(odd_cycle(u, v, &parent, &depth));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Bipartition::Coloring(side.into_iter().map(Option::unwrap).collect())
}

// u and v are adjacent with equal BFS parity; walk both up to their common
// ancestor in the BFS tree.
fn odd_cycle(u: usize, v: usize, parent: &[usize], depth: &[usize]) -> Vec<usize> {
    let (mut a, mut b) = (u, v);
    let mut left = vec![a];
    let mut right = vec![b];
    while depth[a] > depth[b] {
        a = parent[a];
        left.push(a);
    }
    while depth[b] > depth[a] {
        b = parent[b];
        right.push(b);
    }
    while a != b {
        a = parent[a];
        b = parent[b];
        left.push(a);
        right.push(b);
    }
    right.pop();
    right.reverse();
    left.extend(right);
    left
}
