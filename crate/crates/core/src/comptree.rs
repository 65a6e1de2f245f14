//! Computation trees and exact root-membership decisions on them.
//!
//! `T_i(1)` is node `i` alone. `T_i(t)` extends every leaf of `T_i(t - 1)`
//! with a copy of each graph neighbor except the one its parent copies.
//! The max-product estimate after `t` sweeps from zero messages equals the
//! root decision on `T_i(t + 1)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::WeightedGraph;
use crate::maxprod::Estimate;

pub const DEFAULT_VERTEX_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompTreeError {
    #[error("tree depth must be at least 1")]
    ZeroDepth,
    #[error("root {root} out of range for {n} nodes")]
    BadRoot { root: usize, n: usize },
    #[error("computation tree exceeds the vertex budget of {budget}")]
    TooLarge { budget: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeVertex {
    /// Graph node this vertex copies.
    pub node: usize,
    pub weight: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// 1 for the root.
    pub level: usize,
}

/// Vertices are stored breadth first; vertex 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct ComputationTree {
    vertices: Vec<TreeVertex>,
    depth: usize,
}

impl ComputationTree {
    pub fn vertices(&self) -> &[TreeVertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn root(&self) -> &TreeVertex {
        &self.vertices[0]
    }

    /// Number of levels actually present.
    pub fn levels(&self) -> usize {
        self.vertices.last().map_or(0, |v| v.level)
    }

    /// Depth requested at build time.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn total_weight(&self) -> f64 {
        self.vertices.iter().map(|v| v.weight).sum()
    }
}

pub fn build(
    graph: &WeightedGraph,
    root: usize,
    depth: usize,
) -> Result<ComputationTree, CompTreeError> {
    build_with_budget(graph, root, depth, DEFAULT_VERTEX_BUDGET)
}

pub fn build_with_budget(
    graph: &WeightedGraph,
    root: usize,
    depth: usize,
    budget: usize,
) -> Result<ComputationTree, CompTreeError> {
    if depth < 1 {
        return Err(CompTreeError::ZeroDepth);
    }
    if root >= graph.n() {
        return Err(CompTreeError::BadRoot { root, n: graph.n() });
    }
    let mut vertices = vec![TreeVertex {
        node: root,
        weight: graph.weight(root),
        parent: None,
        children: Vec::new(),
        level: 1,
    }];
    let mut frontier = 0..1;
    for level in 2..=depth {
        let start = vertices.len();
        for v in frontier.clone() {
            let node = vertices[v].node;
            let parent_node = vertices[v].parent.map(|p| vertices[p].node);
            for u in graph.neighbors(node).filter(|&u| Some(u) != parent_node) {
                if vertices.len() >= budget {
                    return Err(CompTreeError::TooLarge { budget });
                }
                let id = vertices.len();
                vertices.push(TreeVertex {
                    node: u,
                    weight: graph.weight(u),
                    parent: Some(v),
                    children: Vec::new(),
                    level,
                });
                vertices[v].children.push(id);
            }
        }
        frontier = start..vertices.len();
        if frontier.is_empty() {
            break;
        }
    }
    Ok(ComputationTree { vertices, depth })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMembership {
    InEveryMwis,
    InNoMwis,
    Ambiguous,
}

impl From<RootMembership> for Estimate {
    fn from(m: RootMembership) -> Self {
        match m {
            RootMembership::InEveryMwis => Estimate::One,
            RootMembership::InNoMwis => Estimate::Zero,
            RootMembership::Ambiguous => Estimate::Unknown,
        }
    }
}

/// Best independent-set weight of the whole tree with the root forced in
/// and forced out, by bottom-up dynamic programming.
pub fn root_values(tree: &ComputationTree) -> (f64, f64) {
    let n = tree.len();
    let mut with = vec![0.0; n];
    let mut without = vec![0.0; n];
    // breadth-first storage: children always come after their parent
    for v in (0..n).rev() {
        let vert = &tree.vertices[v];
        with[v] = vert.weight + vert.children.iter().map(|&c| without[c]).sum::<f64>();
        without[v] = vert.children.iter().map(|&c| with[c].max(without[c])).sum();
    }
    (with[0], without[0])
}

pub fn root_membership(tree: &ComputationTree) -> RootMembership {
    let (with, without) = root_values(tree);
    let tol = 1e-9 * tree.total_weight();
    if with > without + tol {
        RootMembership::InEveryMwis
    } else if with < without - tol {
        RootMembership::InNoMwis
    } else {
        RootMembership::Ambiguous
    }
}

/// Root decision on `T_i(t)` mapped to a ternary estimate.
pub fn oracle_estimate(
    graph: &WeightedGraph,
    i: usize,
    t: usize,
) -> Result<Estimate, CompTreeError> {
    Ok(root_membership(&build(graph, i, t)?).into())
}
