use std::path::PathBuf;

use mwis_core::generate::InstanceKind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::GraphFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Maxprod,
    Descent,
    Algo,
    Oracle,
    Comptree,
    ReduceMap,
    Verify,
    Generate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Maxprod => "maxprod",
            Command::Descent => "descent",
            Command::Algo => "algo",
            Command::Oracle => "oracle",
            Command::Comptree => "comptree",
            Command::ReduceMap => "reduce-map",
            Command::Verify => "verify",
            Command::Generate => "generate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    #[default]
    Exact,
    Descent,
    Maxprod,
}

/// Everything one invocation needs. Unset numeric fields take the library
/// defaults; the report echoes the values actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub instance: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<GraphFormat>,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub delta1: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub max_sweeps: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// comptree root node.
    #[serde(default)]
    pub root: Option<usize>,
    /// comptree depth.
    #[serde(default)]
    pub depth: Option<usize>,
    /// reduce-map MWIS solver.
    #[serde(default)]
    pub solver: Option<SolverChoice>,
    /// verify: file with `x` and optionally `lambda`.
    #[serde(default)]
    pub solution: Option<PathBuf>,
    /// verify: complementary-slackness tolerance.
    #[serde(default)]
    pub tol: Option<f64>,
    /// generate: instance family.
    #[serde(default)]
    pub kind: Option<InstanceKind>,
    /// generate: node count.
    #[serde(default)]
    pub n: Option<usize>,
    /// generate: edge probability for the random families.
    #[serde(default)]
    pub edge_prob: Option<f64>,
    /// generate: fixed weight for every node.
    #[serde(default)]
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{name} must be positive and finite, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be at least 1")]
    Zero { name: &'static str },
    #[error("{command} needs {what}")]
    Missing {
        command: &'static str,
        what: &'static str,
    },
    #[error("invalid config: {0}")]
    Parse(String),
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            instance: None,
            format: None,
            eps: None,
            delta: None,
            delta1: None,
            tau: None,
            max_iters: None,
            max_sweeps: None,
            seed: None,
            out: None,
            root: None,
            depth: None,
            solver: None,
            solution: None,
            tol: None,
            kind: None,
            n: None,
            edge_prob: None,
            weight: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let c: RunConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("eps", self.eps),
            ("delta", self.delta),
            ("delta1", self.delta1),
            ("tau", self.tau),
            ("weight", self.weight),
        ];
        for (name, v) in positive {
            if let Some(value) = v {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(ConfigError::NotPositive { name, value });
                }
            }
        }
        if let Some(value) = self.tol {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ConfigError::NotPositive { name: "tol", value });
            }
        }
        for (name, v) in [
            ("max_iters", self.max_iters),
            ("max_sweeps", self.max_sweeps),
            ("depth", self.depth),
        ] {
            if v == Some(0) {
                return Err(ConfigError::Zero { name });
            }
        }
        let command = self.command.name();
        match self.command {
            Command::Generate => {
                if self.kind.is_none() {
                    return Err(ConfigError::Missing {
                        command,
                        what: "an instance kind",
                    });
                }
                if self.n.is_none() {
                    return Err(ConfigError::Missing {
                        command,
                        what: "a node count",
                    });
                }
            }
            _ if self.instance.is_none() => {
                return Err(ConfigError::Missing {
                    command,
                    what: "an instance path",
                });
            }
            Command::Comptree if self.root.is_none() || self.depth.is_none() => {
                return Err(ConfigError::Missing {
                    command,
                    what: "--root and --depth",
                });
            }
            Command::Verify if self.solution.is_none() => {
                return Err(ConfigError::Missing {
                    command,
                    what: "a solution file",
                });
            }
            _ => {}
        }
        Ok(())
    }
}
