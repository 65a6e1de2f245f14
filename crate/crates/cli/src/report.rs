//! Report layout. Field order is fixed by the struct definitions, so equal
//! runs serialize to equal bytes; only `timing` varies between runs.

use serde::Serialize;

pub const TOOL: &str = "mwis";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// Effective parameter values, defaults included.
    pub params: Params,
    pub instance: InstanceInfo,
    pub result: CommandResult,
    /// Exact cross-checks; absent when the instance is too large for them.
    pub oracle: Option<OracleCheck>,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub root: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceInfo {
    pub path: String,
    pub kind: &'static str,
    pub n: usize,
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bipartite: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_clock_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum CommandResult {
    Maxprod(MaxprodResult),
    Descent(DescentResult),
    Algo(AlgoResult),
    Oracle(OracleResult),
    Comptree(ComptreeResult),
    ReduceMap(ReduceMapResult),
    Verify(VerifyResult),
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxprodResult {
    pub converged: bool,
    pub iterations: usize,
    /// Period of the estimate sequence at the end of the run.
    pub oscillation_period: Option<usize>,
    /// One symbol per node: `1`, `0` or `?`.
    pub estimates: String,
    pub residual: f64,
    pub messages: Vec<ArcValue>,
    /// Fixed-point structure violations, checked when the run converged.
    pub structure_violations: Option<usize>,
    /// Estimates after the last even and last odd sweep count.
    pub last_even: Option<SweepEstimates>,
    pub last_odd: Option<SweepEstimates>,
    pub trace: Vec<MaxprodStep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEstimates {
    pub sweep: usize,
    pub estimates: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct MaxprodStep {
    pub sweep: usize,
    pub change: f64,
    pub estimates: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcValue {
    pub from: usize,
    pub to: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeValue {
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentResult {
    pub converged: bool,
    pub sweeps: usize,
    pub dual_value: f64,
    pub objective: f64,
    pub bound_violations: usize,
    pub lambda: Vec<EdgeValue>,
    /// Every `trace_stride`-th sweep plus the first and last.
    pub trace_stride: usize,
    pub trace: Vec<DescentStep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescentStep {
    pub sweep: usize,
    pub max_change: f64,
    pub objective: f64,
    pub dual_value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgoResult {
    pub x: Vec<u8>,
    pub weight: f64,
    pub colors: Vec<String>,
    pub est_rounds: usize,
    pub descent: DescentResult,
    pub lp_integral: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub lp_value: Option<f64>,
    pub ip_value: f64,
    /// LP relaxation tight; `null` when the LP was not enumerated.
    pub integral: Option<bool>,
    pub lp_unique: Option<bool>,
    pub lp_optima: Option<Vec<Vec<f64>>>,
    pub fractional_nodes: Option<Vec<usize>>,
    pub ip_optima: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComptreeResult {
    pub vertices: usize,
    pub level_sizes: Vec<usize>,
    pub total_weight: f64,
    pub with_root: f64,
    pub without_root: f64,
    pub membership: String,
    pub estimate: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReduceMapResult {
    pub variables: usize,
    pub factors: usize,
    pub auxiliary_nodes: usize,
    pub auxiliary_edges: usize,
    pub offset: f64,
    /// Whether the solver's set is independent in the auxiliary graph.
    pub independent: bool,
    pub mwis_weight: f64,
    /// `mwis_weight == score + offset * factors`, compared exactly.
    pub weight_identity: Option<bool>,
    /// `null` when the set does not lift; see `lift_error`.
    pub assignment: Option<Vec<usize>>,
    pub score: Option<f64>,
    pub lift_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyResult {
    pub independent: bool,
    pub weight: f64,
    pub dual: Option<DualCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualCheck {
    pub feasible: bool,
    pub dual_value: f64,
    pub bound: f64,
    pub complementary_slackness: bool,
    pub violations: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleCheck {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ip_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_integral: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_unique: Option<bool>,
    /// maxprod: converged estimates equal the unique integral LP optimum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_agreement: Option<bool>,
    /// descent: `|sum lambda + isolated weight - LP|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_gap: Option<f64>,
    /// algo, verify: the set is a maximum-weight independent set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_match: Option<bool>,
    /// comptree: max-product estimate after `depth - 1` sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maxprod_estimate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agrees: Option<bool>,
    /// reduce-map: exhaustive MAP score.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map_assignment: Option<Vec<usize>>,
}
