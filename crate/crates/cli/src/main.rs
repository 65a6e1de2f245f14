use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mwis_cli::config::SolverChoice;
use mwis_cli::format::GraphFormat;
use mwis_cli::{run_command, CliError, Command, RunConfig};
use mwis_core::generate::InstanceKind;

/// Message passing for maximum-weight independent sets.
#[derive(Parser)]
#[command(name = "mwis", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Barrier weight for descent.
    #[arg(long)]
    eps: Option<f64>,
    /// Descent stopping tolerance on the per-sweep change.
    #[arg(long)]
    delta: Option<f64>,
    /// Coloring threshold; defaults to max(10 n eps, 1e-4).
    #[arg(long)]
    delta1: Option<f64>,
    /// Max-product Unknown tolerance; defaults to 1e-9 max(1, max weight).
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    max_sweeps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Graph file format.
    #[arg(long, value_enum)]
    format: Option<GraphFormat>,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synchronous min-sum max-product from zero messages.
    Maxprod {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Coordinate descent on the barrier dual.
    Descent {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Descent followed by coloring recovery.
    Algo {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Exact LP and MWIS by enumeration.
    Oracle {
        instance: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Root decision on the computation tree.
    Comptree {
        instance: PathBuf,
        #[arg(long)]
        root: usize,
        #[arg(long)]
        depth: usize,
        #[command(flatten)]
        common: Common,
    },
    /// MAP estimation through the MWIS reduction.
    ReduceMap {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = SolverChoice::Exact)]
        solver: SolverChoice,
        #[command(flatten)]
        common: Common,
    },
    /// Check a candidate set, and optionally a dual vector, against the instance.
    Verify {
        instance: PathBuf,
        /// JSON with `x` and optional `lambda`, or a saved algo report.
        #[arg(long)]
        solution: PathBuf,
        /// Complementary-slackness tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Write a seeded random or structured instance.
    Generate {
        /// random-gnp, random-bipartite, cycle or path.
        kind: InstanceKind,
        n: usize,
        #[arg(long)]
        edge_prob: Option<f64>,
        /// Use this weight for every node.
        #[arg(long)]
        weight: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a JSON RunConfig file.
    Run { config: PathBuf },
}

fn with_common(command: Command, c: Common) -> RunConfig {
    RunConfig {
        eps: c.eps,
        delta: c.delta,
        delta1: c.delta1,
        tau: c.tau,
        max_iters: c.max_iters,
        max_sweeps: c.max_sweeps,
        seed: c.seed,
        format: c.format,
        out: c.out,
        ..RunConfig::new(command)
    }
}

fn to_config(cmd: Cmd) -> Result<RunConfig, CliError> {
    Ok(match cmd {
        Cmd::Maxprod { instance, common } => RunConfig {
            instance: Some(instance),
            ..with_common(Command::Maxprod, common)
        },
        Cmd::Descent { instance, common } => RunConfig {
            instance: Some(instance),
            ..with_common(Command::Descent, common)
        },
        Cmd::Algo { instance, common } => RunConfig {
            instance: Some(instance),
            ..with_common(Command::Algo, common)
        },
        Cmd::Oracle { instance, common } => RunConfig {
            instance: Some(instance),
            ..with_common(Command::Oracle, common)
        },
        Cmd::Comptree {
            instance,
            root,
            depth,
            common,
        } => RunConfig {
            instance: Some(instance),
            root: Some(root),
            depth: Some(depth),
            ..with_common(Command::Comptree, common)
        },
        Cmd::ReduceMap {
            model,
            solver,
            common,
        } => RunConfig {
            instance: Some(model),
            solver: Some(solver),
            ..with_common(Command::ReduceMap, common)
        },
        Cmd::Verify {
            instance,
            solution,
            tol,
            common,
        } => RunConfig {
            instance: Some(instance),
            solution: Some(solution),
            tol,
            ..with_common(Command::Verify, common)
        },
        Cmd::Generate {
            kind,
            n,
            edge_prob,
            weight,
            common,
        } => RunConfig {
            kind: Some(kind),
            n: Some(n),
            edge_prob,
            weight,
            ..with_common(Command::Generate, common)
        },
        Cmd::Run { config } => {
            let text = fs::read_to_string(&config)
                .map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
            RunConfig::from_json(&text)?
        }
    })
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors; 2 is reserved for size limits here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = to_config(cli.command).and_then(|config| {
        let out = run_command(&config)?;
        let text = out.render();
        match &config.out {
            Some(path) => fs::write(path, text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mwis: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
