//! Graph and factor-model file formats.
//!
//! Text graphs follow DIMACS habits:
//!
//! ```text
//! # comment
//! p mwis <n> <m>
//! v <label> <weight>
//! e <label> <label>
//! ```
//!
//! Structured graphs are `{"nodes":[{"id":..,"w":..}],"edges":[[a,b]]}` and
//! factor models `{"vars":[domain sizes],"factors":[{"scope":[..],"table":[..]}]}`.
//! Node labels are arbitrary and remapped to `0..n` in order of declaration.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use mwis_core::graph::{validate, Violation};
use mwis_core::map_reduction::{Factor, MapError, MapProblem};
use mwis_core::WeightedGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum GraphFormat {
    /// JSON for a leading `{`, otherwise the line format.
    Auto,
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("{message} at line {line}")]
    Line { line: usize, message: String },
    #[error("{path}: {message}")]
    Json { path: String, message: String },
    #[error("missing `p mwis <n> <m>` header")]
    NoHeader,
    #[error("header announces {expected} {what}, found {got}")]
    Count {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid JSON: {0}")]
    Syntax(String),
    #[error("invalid factor model: {0}")]
    Model(#[from] MapError),
}

fn line_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Line {
        line,
        message: message.into(),
    }
}

fn json_err(path: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Json {
        path: path.into(),
        message: message.into(),
    }
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<WeightedGraph, FormatError> {
    match format {
        GraphFormat::Text => parse_text(text),
        GraphFormat::Json => parse_json(text),
        GraphFormat::Auto if text.trim_start().starts_with('{') => parse_json(text),
        GraphFormat::Auto => parse_text(text),
    }
}

/// Weight problems the core validator would report, phrased for one node.
fn weight_problem(w: f64) -> Option<String> {
    match validate(&[w], &[]).into_iter().next() {
        Some(Violation::NonFiniteWeight { .. }) => Some("non-finite weight".into()),
        Some(Violation::NonPositiveWeight { weight, .. }) => {
            Some(format!("non-positive weight {weight}"))
        }
        _ => None,
    }
}

/// Labels to dense ids, plus the edge-level checks that need a source position.
struct Builder<P> {
    ids: BTreeMap<String, usize>,
    weights: Vec<f64>,
    edges: Vec<(usize, usize)>,
    seen: BTreeMap<(usize, usize), P>,
}

impl<P: Copy> Builder<P> {
    fn new() -> Self {
        Builder {
            ids: BTreeMap::new(),
            weights: Vec::new(),
            edges: Vec::new(),
            seen: BTreeMap::new(),
        }
    }

    fn node(&mut self, label: &str, w: f64) -> Result<(), String> {
        if self.ids.contains_key(label) {
            return Err(format!("duplicate node {label}"));
        }
        if let Some(p) = weight_problem(w) {
            return Err(p);
        }
        self.ids.insert(label.to_string(), self.weights.len());
        self.weights.push(w);
        Ok(())
    }

    fn edge(&mut self, a: &str, b: &str, pos: P) -> Result<(), (P, String)> {
        let id = |l: &str| {
            self.ids
                .get(l)
                .copied()
                .ok_or_else(|| (pos, format!("unknown node {l}")))
        };
        let (i, j) = (id(a)?, id(b)?);
        if i == j {
            return Err((pos, "self-loop".into()));
        }
        let key = (i.min(j), i.max(j));
        if self.seen.insert(key, pos).is_some() {
            return Err((pos, format!("duplicate edge {a}-{b}")));
        }
        self.edges.push(key);
        Ok(())
    }

    fn finish(self) -> WeightedGraph {
        WeightedGraph::new(self.weights, self.edges).expect("checked while reading")
    }
}

pub fn parse_text(text: &str) -> Result<WeightedGraph, FormatError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut b = Builder::new();
    let mut pending: Vec<(usize, String, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tok: Vec<&str> = content.split_whitespace().collect();
        match tok[0] {
            "p" => {
                if header.is_some() {
                    return Err(line_err(line, "second header"));
                }
                match tok.as_slice() {
                    ["p", "mwis", n, m] => {
                        let n = n
                            .parse()
                            .map_err(|_| line_err(line, format!("bad node count `{n}`")))?;
                        let m = m
                            .parse()
                            .map_err(|_| line_err(line, format!("bad edge count `{m}`")))?;
                        header = Some((line, n, m));
                    }
                    _ => return Err(line_err(line, "expected `p mwis <n> <m>`")),
                }
            }
            _ if header.is_none() => return Err(line_err(line, "line before the `p mwis` header")),
            "v" => match tok.as_slice() {
                ["v", label, w] => {
                    let w: f64 = w
                        .parse()
                        .map_err(|_| line_err(line, format!("bad weight `{w}`")))?;
                    b.node(label, w).map_err(|m| line_err(line, m))?;
                }
                _ => return Err(line_err(line, "expected `v <id> <weight>`")),
            },
            "e" => match tok.as_slice() {
                ["e", a, c] if a == c => return Err(line_err(line, "self-loop")),
                ["e", a, c] => pending.push((line, a.to_string(), c.to_string())),
                _ => return Err(line_err(line, "expected `e <i> <j>`")),
            },
            other => return Err(line_err(line, format!("unknown line type `{other}`"))),
        }
    }
    let (_, n, m) = header.ok_or(FormatError::NoHeader)?;
    for (line, a, c) in &pending {
        b.edge(a, c, *line).map_err(|(l, msg)| line_err(l, msg))?;
    }
    if b.weights.len() != n {
        return Err(FormatError::Count {
            what: "nodes",
            expected: n,
            got: b.weights.len(),
        });
    }
    if b.edges.len() != m {
        return Err(FormatError::Count {
            what: "edges",
            expected: m,
            got: b.edges.len(),
        });
    }
    if n == 0 {
        return Err(FormatError::Count {
            what: "nodes",
            expected: 1,
            got: 0,
        });
    }
    Ok(b.finish())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonGraph {
    nodes: Vec<JsonNode>,
    #[serde(default)]
    edges: Vec<(Label, Label)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonNode {
    id: Label,
    w: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Label {
    Int(u64),
    Str(String),
}

impl Label {
    fn key(&self) -> String {
        match self {
            Label::Int(i) => i.to_string(),
            Label::Str(s) => s.clone(),
        }
    }
}

pub fn parse_json(text: &str) -> Result<WeightedGraph, FormatError> {
    let g: JsonGraph =
        serde_json::from_str(text).map_err(|e| FormatError::Syntax(e.to_string()))?;
    if g.nodes.is_empty() {
        return Err(json_err("nodes", "graph has no nodes"));
    }
    let mut b = Builder::new();
    for (k, node) in g.nodes.iter().enumerate() {
        b.node(&node.id.key(), node.w)
            .map_err(|m| json_err(format!("nodes[{k}]"), m))?;
    }
    for (k, (a, c)) in g.edges.iter().enumerate() {
        b.edge(&a.key(), &c.key(), k)
            .map_err(|(k, m)| json_err(format!("edges[{k}]"), m))?;
    }
    Ok(b.finish())
}

pub fn serialize_text(g: &WeightedGraph) -> String {
    let mut out = format!("p mwis {} {}\n", g.n(), g.m());
    for (i, w) in g.weights().iter().enumerate() {
        writeln!(out, "v {i} {w:?}").unwrap();
    }
    for (i, j) in g.edges() {
        writeln!(out, "e {i} {j}").unwrap();
    }
    out
}

#[derive(Serialize)]
struct JsonGraphOut {
    nodes: Vec<JsonNodeOut>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize)]
struct JsonNodeOut {
    id: usize,
    w: f64,
}

pub fn serialize_json(g: &WeightedGraph) -> String {
    let out = JsonGraphOut {
        nodes: g
            .weights()
            .iter()
            .enumerate()
            .map(|(id, &w)| JsonNodeOut { id, w })
            .collect(),
        edges: g.edges().to_vec(),
    };
    serde_json::to_string_pretty(&out).unwrap() + "\n"
}

pub fn serialize_graph(g: &WeightedGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Json => serialize_json(g),
        GraphFormat::Text | GraphFormat::Auto => serialize_text(g),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonModel {
    vars: Vec<usize>,
    factors: Vec<JsonFactor>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonFactor {
    scope: Vec<usize>,
    table: Vec<f64>,
}

pub fn parse_factor_model(text: &str) -> Result<MapProblem, FormatError> {
    let m: JsonModel =
        serde_json::from_str(text).map_err(|e| FormatError::Syntax(e.to_string()))?;
    let factors = m
        .factors
        .into_iter()
        .map(|f| Factor {
            scope: f.scope,
            table: f.table,
        })
        .collect();
    Ok(MapProblem::new(m.vars, factors)?)
}

pub fn serialize_factor_model(p: &MapProblem) -> String {
    let m = JsonModel {
        vars: p.domains().to_vec(),
        factors: p
            .factors()
            .iter()
            .map(|f| JsonFactor {
                scope: f.scope.clone(),
                table: f.table.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&m).unwrap() + "\n"
}
