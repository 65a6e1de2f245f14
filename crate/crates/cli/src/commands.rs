use std::fs;
use std::path::Path;
use std::time::Instant;

use mwis_core::comptree::{self, CompTreeError, RootMembership};
use mwis_core::descent::{run_descent, BarrierParams, DescentOutcome, DualVector};
use mwis_core::generate::{generate_instance, InstanceParams};
use mwis_core::graph::{bipartition, is_independent, subset_weight};
use mwis_core::map_reduction::{
    brute_force_map, build_reduction, DescentSolver, ExactSolver, MapError, MaxProductSolver,
    MwisSolver,
};
use mwis_core::maxprod::{
    self, check_fixed_point_structure, fixed_point_residual, Estimate, MaxProductConfig,
};
use mwis_core::oracles::{
    brute_force_mwis, check_complementary_slackness, dual_feasible, lp_optimum, OracleError,
    MAX_BRUTE_FORCE_NODES, MAX_LP_NODES,
};
use mwis_core::recovery::{algo_mwis, default_delta1, Color};
use mwis_core::{NodeSubset, WeightedGraph};
use serde_json::Value;
use thiserror::Error;

use crate::config::{Command, ConfigError, RunConfig, SolverChoice};
use crate::format::{parse_factor_model, parse_graph, serialize_graph, FormatError, GraphFormat};
use crate::report::*;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("size limit: {0}")]
    SizeLimit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::SizeLimit(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Model(m) => m.into(),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. } => CliError::SizeLimit(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<CompTreeError> for CliError {
    fn from(e: CompTreeError) -> Self {
        match e {
            CompTreeError::TooLarge { .. } => CliError::SizeLimit(e.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<MapError> for CliError {
    fn from(e: MapError) -> Self {
        match e {
            MapError::TooManyNodes { .. } | MapError::TooManyAssignments(_) => {
                CliError::SizeLimit(e.to_string())
            }
            e => CliError::Input(e.to_string()),
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

/// What a command produces: a report, or for `generate` an instance file.
#[derive(Debug)]
pub enum Output {
    Report(Box<Report>),
    Instance(String),
}

impl Output {
    /// Serialized bytes as written to `--out` or stdout.
    pub fn render(&self) -> String {
        match self {
            Output::Report(r) => serde_json::to_string_pretty(r).expect("reports serialize") + "\n",
            Output::Instance(s) => s.clone(),
        }
    }
}

pub fn run_command(config: &RunConfig) -> Result<Output, CliError> {
    config.validate()?;
    let start = Instant::now();
    if config.command == Command::Generate {
        return generate(config).map(Output::Instance);
    }
    let path = config.instance.as_deref().expect("validated");
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut report = match config.command {
        Command::ReduceMap => reduce_map(config, path, &text)?,
        _ => {
            let g = parse_graph(&text, config.format.unwrap_or(GraphFormat::Auto))?;
            let instance = InstanceInfo {
                path: path.display().to_string(),
                kind: "graph",
                n: g.n(),
                m: g.m(),
                bipartite: Some(bipartition(&g).is_bipartite()),
            };
            let (params, result, oracle, warnings) = match config.command {
                Command::Maxprod => maxprod_cmd(config, &g)?,
                Command::Descent => descent_cmd(config, &g)?,
                Command::Algo => algo_cmd(config, &g)?,
                Command::Oracle => oracle_cmd(&g)?,
                Command::Comptree => comptree_cmd(config, &g)?,
                Command::Verify => verify_cmd(config, &g)?,
                Command::ReduceMap | Command::Generate => unreachable!(),
            };
            Report {
                tool: TOOL,
                version: env!("CARGO_PKG_VERSION"),
                command: config.command.name(),
                params,
                instance,
                result,
                oracle,
                warnings,
                timing: Timing { wall_clock_ms: 0.0 },
            }
        }
    };
    report.timing.wall_clock_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(Output::Report(Box::new(report)))
}

type Parts = (Params, CommandResult, Option<OracleCheck>, Vec<String>);

fn symbols(est: &maxprod::EstimateVector) -> String {
    est.symbols()
}

fn lp_if_small(g: &WeightedGraph) -> Option<mwis_core::oracles::LpReport> {
    (g.n() <= MAX_LP_NODES).then(|| lp_optimum(g).expect("within the LP limit"))
}

fn ip_if_small(g: &WeightedGraph) -> Option<mwis_core::oracles::IpReport> {
    (g.n() <= MAX_BRUTE_FORCE_NODES)
        .then(|| brute_force_mwis(g).expect("within the brute-force limit"))
}

fn maxprod_cmd(config: &RunConfig, g: &WeightedGraph) -> Result<Parts, CliError> {
    let defaults = MaxProductConfig::default();
    let mp = MaxProductConfig {
        max_iters: config.max_iters.unwrap_or(defaults.max_iters),
        tau: Some(config.tau.unwrap_or_else(|| maxprod::default_tau(g))),
        window: defaults.window,
    };
    let trace = maxprod::run(g, &mp);
    let last = trace.final_state();
    let gamma = &last.messages;
    let residual = fixed_point_residual(g, gamma);
    let seq: Vec<_> = trace.estimate_sequence().collect();
    let parity = |odd: usize| {
        (0..seq.len())
            .rev()
            .find(|t| t % 2 == odd)
            .map(|t| SweepEstimates {
                sweep: t,
                estimates: symbols(seq[t]),
            })
    };
    let result = MaxprodResult {
        converged: trace.converged,
        iterations: trace.iterations_used(),
        oscillation_period: if trace.converged {
            None
        } else {
            trace.estimate_period()
        },
        estimates: symbols(&last.estimates),
        residual,
        messages: (0..g.arc_count())
            .map(|a| {
                let (from, to) = g.arc_endpoints(a);
                ArcValue {
                    from,
                    to,
                    value: gamma.values()[a],
                }
            })
            .collect(),
        structure_violations: trace
            .converged
            .then(|| check_fixed_point_structure(g, &last.estimates).len()),
        last_even: parity(0),
        last_odd: parity(1),
        trace: trace
            .iterations
            .iter()
            .enumerate()
            .map(|(k, it)| MaxprodStep {
                sweep: k + 1,
                change: it.change,
                estimates: symbols(&it.estimates),
            })
            .collect(),
    };
    let mut warnings = Vec::new();
    if !trace.converged {
        warnings.push(format!(
            "max-product did not converge within {} sweeps",
            mp.max_iters
        ));
    }
    let oracle = lp_if_small(g).map(|lp| {
        let agreement = match (trace.converged, lp.unique_integral()) {
            (true, Some(x)) => Some((0..g.n()).all(|i| {
                let want = if x.contains(i) {
                    Estimate::One
                } else {
                    Estimate::Zero
                };
                last.estimates.get(i) == want
            })),
            _ => None,
        };
        OracleCheck {
            ip_value: ip_if_small(g).map(|r| r.value),
            lp_value: Some(lp.value),
            lp_integral: Some(lp.integral),
            lp_unique: Some(lp.unique),
            lp_agreement: agreement,
            ..Default::default()
        }
    });
    let params = Params {
        tau: mp.tau,
        max_iters: Some(mp.max_iters),
        window: Some(mp.window),
        ..Default::default()
    };
    Ok((params, CommandResult::Maxprod(result), oracle, warnings))
}

fn barrier_params(config: &RunConfig) -> Result<BarrierParams, CliError> {
    let d = BarrierParams::default();
    BarrierParams::new(
        config.eps.unwrap_or(d.eps),
        config.delta.unwrap_or(d.delta),
        config.max_sweeps.unwrap_or(d.max_sweeps),
    )
    .map_err(input)
}

const TRACE_POINTS: usize = 1000;

fn descent_result(g: &WeightedGraph, out: &DescentOutcome) -> DescentResult {
    let total = out.sweeps.len();
    let stride = total.div_ceil(TRACE_POINTS).max(1);
    let last = out.sweeps.last();
    DescentResult {
        converged: out.converged,
        sweeps: total,
        dual_value: out.lambda.total(),
        objective: last.map_or(0.0, |s| s.objective),
        bound_violations: out.bound_violations,
        lambda: g
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(i, j))| EdgeValue {
                i,
                j,
                value: out.lambda.get(e),
            })
            .collect(),
        trace_stride: stride,
        trace: out
            .sweeps
            .iter()
            .enumerate()
            .filter(|(k, _)| *k == 0 || (k + 1) % stride == 0 || k + 1 == total)
            .map(|(k, s)| DescentStep {
                sweep: k + 1,
                max_change: s.max_change,
                objective: s.objective,
                dual_value: s.dual_value,
            })
            .collect(),
    }
}

fn descent_cmd(config: &RunConfig, g: &WeightedGraph) -> Result<Parts, CliError> {
    let p = barrier_params(config)?;
    let out = run_descent(g, &p).map_err(input)?;
    let mut warnings = Vec::new();
    if !out.converged {
        warnings.push(format!(
            "descent did not converge within {} sweeps",
            p.max_sweeps
        ));
    }
    let bound = out.lambda.total() + g.isolated_weight();
    let oracle = lp_if_small(g).map(|lp| OracleCheck {
        lp_value: Some(lp.value),
        lp_integral: Some(lp.integral),
        dual_gap: Some((bound - lp.value).abs()),
        ..Default::default()
    });
    let params = Params {
        eps: Some(p.eps),
        delta: Some(p.delta),
        max_sweeps: Some(p.max_sweeps),
        ..Default::default()
    };
    Ok((
        params,
        CommandResult::Descent(descent_result(g, &out)),
        oracle,
        warnings,
    ))
}

fn color_name(c: Color) -> String {
    match c {
        Color::Green => "green",
        Color::Gray => "gray",
        Color::Orange => "orange",
        Color::Red => "red",
    }
    .to_string()
}

fn match_check(g: &WeightedGraph, x: &NodeSubset) -> Option<OracleCheck> {
    ip_if_small(g).map(|ip| OracleCheck {
        ip_value: Some(ip.value),
        oracle_match: Some(ip.optima.contains(x)),
        ..Default::default()
    })
}

fn algo_cmd(config: &RunConfig, g: &WeightedGraph) -> Result<Parts, CliError> {
    let p = barrier_params(config)?;
    let delta1 = config.delta1.unwrap_or_else(|| default_delta1(g, p.eps));
    let out = algo_mwis(g, &p, delta1).map_err(input)?;
    let d = &out.diagnostics;
    let result = AlgoResult {
        x: out.x.to_indicator(),
        weight: subset_weight(g, &out.x).map_err(input)?,
        colors: d
            .est
            .coloring
            .colors()
            .iter()
            .map(|&c| color_name(c))
            .collect(),
        est_rounds: d.est.rounds,
        descent: descent_result(g, &d.descent),
        lp_integral: d.lp_integral,
    };
    let params = Params {
        eps: Some(p.eps),
        delta: Some(p.delta),
        delta1: Some(delta1),
        max_sweeps: Some(p.max_sweeps),
        ..Default::default()
    };
    Ok((
        params,
        CommandResult::Algo(result),
        match_check(g, &out.x),
        d.warnings.clone(),
    ))
}

fn oracle_cmd(g: &WeightedGraph) -> Result<Parts, CliError> {
    let ip = brute_force_mwis(g)?;
    let lp = lp_if_small(g);
    let mut warnings = Vec::new();
    if lp.is_none() {
        warnings.push(format!(
            "LP enumeration skipped: limited to {MAX_LP_NODES} nodes"
        ));
    }
    let result = OracleResult {
        lp_value: lp.as_ref().map(|r| r.value),
        ip_value: ip.value,
        integral: lp.as_ref().map(|r| r.integral),
        lp_unique: lp.as_ref().map(|r| r.unique),
        lp_optima: lp
            .as_ref()
            .map(|r| r.optima.iter().map(|p| p.values()).collect()),
        fractional_nodes: lp.as_ref().map(|r| r.fractional_nodes()),
        ip_optima: ip.optima.iter().map(|s| s.to_indicator()).collect(),
    };
    Ok((
        Params::default(),
        CommandResult::Oracle(result),
        None,
        warnings,
    ))
}

fn comptree_cmd(config: &RunConfig, g: &WeightedGraph) -> Result<Parts, CliError> {
    let (root, depth) = (
        config.root.expect("validated"),
        config.depth.expect("validated"),
    );
    let tree = comptree::build(g, root, depth)?;
    let (with, without) = comptree::root_values(&tree);
    let membership = comptree::root_membership(&tree);
    let estimate: Estimate = membership.into();
    let mut level_sizes = vec![0; tree.levels()];
    for v in tree.vertices() {
        level_sizes[v.level - 1] += 1;
    }
    let result = ComptreeResult {
        vertices: tree.len(),
        level_sizes,
        total_weight: tree.total_weight(),
        with_root: with,
        without_root: without,
        membership: match membership {
            RootMembership::InEveryMwis => "in_every_mwis",
            RootMembership::InNoMwis => "in_no_mwis",
            RootMembership::Ambiguous => "ambiguous",
        }
        .to_string(),
        estimate: estimate.symbol().to_string(),
    };
    let hist = maxprod::estimate_history(g, depth - 1, maxprod::default_tau(g));
    let mp = hist[depth - 1].get(root);
    let oracle = OracleCheck {
        maxprod_estimate: Some(mp.symbol().to_string()),
        agrees: Some(mp == estimate),
        ..Default::default()
    };
    let params = Params {
        root: Some(root),
        depth: Some(depth),
        ..Default::default()
    };
    Ok((
        params,
        CommandResult::Comptree(result),
        Some(oracle),
        Vec::new(),
    ))
}

/// `x` as 0/1 or booleans; `lambda` as numbers in edge order or `{i, j, value}` objects.
fn read_solution(
    path: &Path,
    g: &WeightedGraph,
) -> Result<(NodeSubset, Option<DualVector>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let v: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("solution: {e}")))?;
    // a saved algo report carries both under `result`
    let body = v.get("result").unwrap_or(&v);
    let x = body
        .get("x")
        .and_then(Value::as_array)
        .ok_or_else(|| input("solution has no `x` array"))?;
    let x: Vec<bool> = x
        .iter()
        .map(|e| match e {
            Value::Bool(b) => Ok(*b),
            Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
            Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
            other => Err(CliError::Input(format!(
                "solution: `x` entry {other} is not 0/1"
            ))),
        })
        .collect::<Result<_, _>>()?;
    if x.len() != g.n() {
        return Err(CliError::Input(format!(
            "solution has {} entries, graph has {} nodes",
            x.len(),
            g.n()
        )));
    }
    let lambda = body
        .get("lambda")
        .or_else(|| body.get("descent").and_then(|d| d.get("lambda")));
    let lambda = match lambda {
        None | Some(Value::Null) => None,
        Some(Value::Array(items)) => {
            let mut values = vec![0.0; g.m()];
            if items.len() != g.m() {
                return Err(CliError::Input(format!(
                    "lambda has {} entries, graph has {} edges",
                    items.len(),
                    g.m()
                )));
            }
            for (k, item) in items.iter().enumerate() {
                let (e, value) = match item {
                    Value::Number(n) => (Some(k), n.as_f64()),
                    Value::Object(o) => {
                        let end =
                            |key: &str| o.get(key).and_then(Value::as_u64).map(|x| x as usize);
                        let e = end("i").zip(end("j")).and_then(|(i, j)| g.edge_index(i, j));
                        (e, o.get("value").and_then(Value::as_f64))
                    }
                    _ => (None, None),
                };
                let (Some(e), Some(value)) = (e, value) else {
                    return Err(CliError::Input(format!(
                        "lambda entry {k} is malformed or names no edge"
                    )));
                };
                values[e] = value;
            }
            Some(DualVector::from_values(g, values))
        }
        Some(_) => return Err(input("`lambda` must be an array")),
    };
    Ok((NodeSubset::from(x), lambda))
}

fn verify_cmd(config: &RunConfig, g: &WeightedGraph) -> Result<Parts, CliError> {
    let tol = config.tol.unwrap_or(1e-6);
    let (x, lambda) = read_solution(config.solution.as_deref().expect("validated"), g)?;
    let independent = is_independent(g, &x).map_err(input)?;
    let dual = match &lambda {
        Some(l) => {
            let d = dual_feasible(g, l, tol);
            let cs = check_complementary_slackness(g, &x, l, tol).map_err(input)?;
            Some(DualCheck {
                feasible: d.feasible,
                dual_value: d.objective,
                bound: d.bound(),
                complementary_slackness: cs.holds,
                violations: cs.violations.len(),
            })
        }
        None => None,
    };
    let mut warnings = Vec::new();
    if !independent {
        warnings.push("x is not an independent set".into());
    }
    let result = VerifyResult {
        independent,
        weight: subset_weight(g, &x).map_err(input)?,
        dual,
    };
    let params = Params {
        tol: Some(tol),
        ..Default::default()
    };
    Ok((
        params,
        CommandResult::Verify(result),
        match_check(g, &x),
        warnings,
    ))
}

fn reduce_map(config: &RunConfig, path: &Path, text: &str) -> Result<Report, CliError> {
    let p = parse_factor_model(text)?;
    let choice = config.solver.unwrap_or_default();
    let bp = barrier_params(config)?;
    let descent;
    let maxprod_solver;
    let solver: &dyn MwisSolver = match choice {
        SolverChoice::Exact => &ExactSolver,
        SolverChoice::Descent => {
            descent = DescentSolver {
                params: bp,
                delta1: config.delta1,
            };
            &descent
        }
        SolverChoice::Maxprod => {
            let d = MaxProductConfig::default();
            maxprod_solver = MaxProductSolver {
                config: MaxProductConfig {
                    max_iters: config.max_iters.unwrap_or(d.max_iters),
                    tau: config.tau,
                    ..d
                },
            };
            &maxprod_solver
        }
    };
    let red = build_reduction(&p)?;
    let set = solver.solve(&red.graph).map_err(CliError::Input)?;
    let k = p.factors().len();
    let (map_assignment, map_score) = brute_force_map(&p)?;
    let mwis_weight = subset_weight(&red.graph, &set).map_err(input)?;
    let lifted = red.lift(&set);
    let mut warnings = Vec::new();
    let (assignment, score, lift_error) = match lifted {
        Ok(y) => {
            let score = p.score(&y);
            if score != map_score {
                warnings.push(format!(
                    "lifted score {score} is below the MAP score {map_score}"
                ));
            }
            (Some(y), Some(score), None)
        }
        Err(e) => {
            warnings.push(format!(
                "{} returned a set that does not lift: {e}",
                solver.name()
            ));
            (None, None, Some(e.to_string()))
        }
    };
    let result = ReduceMapResult {
        variables: p.domains().len(),
        factors: k,
        auxiliary_nodes: red.graph.n(),
        auxiliary_edges: red.graph.m(),
        offset: red.offset,
        independent: is_independent(&red.graph, &set).map_err(input)?,
        mwis_weight,
        weight_identity: score.map(|sc| mwis_weight == sc + red.offset * k as f64),
        assignment,
        score,
        lift_error,
    };
    let mut params = Params {
        solver: Some(solver.name().to_string()),
        ..Default::default()
    };
    match choice {
        SolverChoice::Exact => {}
        SolverChoice::Descent => {
            params.eps = Some(bp.eps);
            params.delta = Some(bp.delta);
            params.max_sweeps = Some(bp.max_sweeps);
            params.delta1 = config.delta1;
        }
        SolverChoice::Maxprod => {
            params.max_iters = Some(
                config
                    .max_iters
                    .unwrap_or(MaxProductConfig::default().max_iters),
            );
            params.tau = config.tau;
        }
    }
    Ok(Report {
        tool: TOOL,
        version: env!("CARGO_PKG_VERSION"),
        command: Command::ReduceMap.name(),
        params,
        instance: InstanceInfo {
            path: path.display().to_string(),
            kind: "factor-model",
            n: result.auxiliary_nodes,
            m: result.auxiliary_edges,
            bipartite: None,
        },
        oracle: Some(OracleCheck {
            map_score: Some(map_score),
            agrees: Some(result.score == Some(map_score)),
            map_assignment: Some(map_assignment),
            ..Default::default()
        }),
        result: CommandResult::ReduceMap(result),
        warnings,
        timing: Timing { wall_clock_ms: 0.0 },
    })
}

fn generate(config: &RunConfig) -> Result<String, CliError> {
    let d = InstanceParams::default();
    let params = InstanceParams {
        edge_prob: config.edge_prob.unwrap_or(d.edge_prob),
        weight: config.weight,
    };
    let g = generate_instance(
        config.kind.expect("validated"),
        config.n.expect("validated"),
        params,
        config.seed.unwrap_or(0),
    )
    .map_err(input)?;
    Ok(serialize_graph(
        &g,
        config.format.unwrap_or(GraphFormat::Text),
    ))
}
