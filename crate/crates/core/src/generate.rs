//! Seeded instance generators. The same `(kind, n, params, seed)` always
//! yields the same graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    RandomGnp,
    RandomBipartite,
    Cycle,
    Path,
}

impl std::str::FromStr for InstanceKind {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random-gnp" | "gnp" => Ok(InstanceKind::RandomGnp),
            "random-bipartite" | "bipartite" => Ok(InstanceKind::RandomBipartite),
            "cycle" => Ok(InstanceKind::Cycle),
            "path" => Ok(InstanceKind::Path),
            other => Err(GenerateError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    /// Edge probability for the random kinds.
    pub edge_prob: f64,
    /// Use this weight for every node instead of drawing from (0, 1].
    pub weight: Option<f64>,
}

impl Default for InstanceParams {
    fn default() -> Self {
        InstanceParams {
            edge_prob: 0.4,
            weight: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("instance needs at least {min} nodes, got {n}")]
    TooSmall { n: usize, min: usize },
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("unknown instance kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub fn generate_instance(
    kind: InstanceKind,
    n: usize,
    params: InstanceParams,
    seed: u64,
) -> Result<WeightedGraph, GenerateError> {
    let min = match kind {
        InstanceKind::Cycle => 3,
        _ => 1,
    };
    if n < min {
        return Err(GenerateError::TooSmall { n, min });
    }
    let p = params.edge_prob;
    if !(0.0..=1.0).contains(&p) {
        return Err(GenerateError::BadProbability(p));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    match kind {
        InstanceKind::RandomGnp => {
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(p) {
                        edges.push((i, j));
                    }
                }
            }
        }
        InstanceKind::RandomBipartite => {
            // sides are {0..n/2} and {n/2..n}
            let half = n / 2;
            for i in 0..half {
                for j in half..n {
                    if rng.random_bool(p) {
                        edges.push((i, j));
                    }
                }
            }
        }
        InstanceKind::Cycle => edges.extend((0..n).map(|i| (i, (i + 1) % n))),
        InstanceKind::Path => edges.extend((1..n).map(|i| (i - 1, i))),
    }
    let weights = match params.weight {
        Some(w) => vec![w; n],
        None => (0..n).map(|_| 1.0 - rng.random::<f64>()).collect(),
    };
    Ok(WeightedGraph::new(weights, edges)?)
}
