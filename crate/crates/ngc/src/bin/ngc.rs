//! Experiment harness CLI.
//!
//! Three subcommands:
//! * `run <config> [--check] [--out DIR] [--seeds SPEC]` — run the experiment
//!   described by a config file and write `results.csv`, `config.effective`,
//!   and `manifest.json` to the output directory.
//! * `tau <edge-file|generator-spec> --lambda L --order S [--mode rw|sym]` —
//!   report the connectivity factor τ for a graph.
//! * `validate <config>` — parse and validate a config without running it.
//!
//! Exit codes: 0 on success, 1 on config/input errors, 2 when `--check` was
//! requested and an experiment check failed.

use clap::{Parser, Subcommand, ValueEnum};
use ngc::harness::{execute, parse_seed_spec, ExperimentConfig};
use ngc::{read_edge_list, Graph, GraphKind, NeumannOperator, NormMode};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ngc", version, about = "Neumann graph convolution experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Row-stochastic normalization (certified τ range).
    Rw,
    /// Symmetric normalization.
    Sym,
}

impl From<ModeArg> for NormMode {
    fn from(m: ModeArg) -> NormMode {
        match m {
            ModeArg::Rw => NormMode::Rw,
            ModeArg::Sym => NormMode::Sym,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        /// Path to the experiment config file.
        config: String,
        /// Evaluate the experiment's built-in checks; exit 2 if any fail.
        #[arg(long)]
        check: bool,
        /// Override the config's output directory.
        #[arg(long, value_name = "DIR")]
        out: Option<String>,
        /// Override the config's seeds, e.g. `0..9` or `1,4,7`.
        #[arg(long, value_name = "SPEC")]
        seeds: Option<String>,
    },
    /// Report the connectivity factor τ of a graph.
    Tau {
        /// Edge-list file, or a generator spec: `isolated:N`, `star:N`,
        /// `complete:N`, `ring:N`, `er:N:P[:SEED]`,
        /// `sbm:N:BLOCKS:P_IN:P_OUT[:SEED]`.
        graph: String,
        /// Regularization strength λ ≥ 0.
        #[arg(long)]
        lambda: f64,
        /// Truncation order S.
        #[arg(long)]
        order: usize,
        /// Adjacency normalization.
        #[arg(long, value_enum, default_value_t = ModeArg::Rw)]
        mode: ModeArg,
        /// Largest node count for which every row is computed exactly;
        /// larger graphs fall back to a row sample (τ becomes a lower bound).
        #[arg(long, value_name = "N", default_value_t = 4096)]
        row_cap: usize,
        /// Rows to sample when the graph exceeds the row cap.
        #[arg(long, value_name = "K", default_value_t = 256)]
        sample: usize,
        /// Seed for random generator specs and row sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Parse and validate a config file without running it.
    Validate {
        /// Path to the experiment config file.
        config: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help/version are successful outputs; anything else is a usage
            // error and takes the generic-failure exit code.
            let ok = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match cli.command {
        Command::Run { config, check, out, seeds } => cmd_run(&config, check, out, seeds),
        Command::Tau { graph, lambda, order, mode, row_cap, sample, seed } => {
            cmd_tau(&graph, lambda, order, mode.into(), row_cap, sample, seed)
        }
        Command::Validate { config } => cmd_validate(&config),
    }
}

fn cmd_run(config: &str, check: bool, out: Option<String>, seeds: Option<String>) -> ExitCode {
    let mut cfg = match ExperimentConfig::from_file(config) {
        Ok(cfg) => cfg,
        Err(err) => return fail(&err.to_string()),
    };
    if let Some(dir) = out {
        cfg.output = dir;
    }
    if let Some(spec) = seeds {
        match parse_seed_spec(&spec) {
            Ok(s) => cfg.seeds = s,
            Err(msg) => return fail(&format!("invalid --seeds value: {msg}")),
        }
    }
    if let Err(err) = cfg.validate() {
        return fail(&err.to_string());
    }
    match execute(&cfg, check) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => fail(&err.to_string()),
    }
}

fn cmd_tau(
    spec: &str,
    lambda: f64,
    order: usize,
    mode: NormMode,
    row_cap: usize,
    sample: usize,
    seed: u64,
) -> ExitCode {
    let graph = match load_graph(spec, seed) {
        Ok(g) => g,
        Err(msg) => return fail(&msg),
    };
    let op = match NeumannOperator::new(graph.normalize(mode), lambda, order) {
        Ok(op) => op,
        Err(err) => return fail(&err.to_string()),
    };
    let report = match op.connectivity_factor(row_cap, sample, seed) {
        Ok(r) => r,
        Err(err) => return fail(&err.to_string()),
    };
    println!("graph = {spec}");
    println!("nodes = {}", graph.node_count());
    println!("edges = {}", graph.edge_count());
    println!("mode = {mode}");
    println!("lambda = {lambda:?}");
    println!("order = {order}");
    println!("tau = {:?}", report.tau);
    println!("predictor = {:?}", report.predictor);
    println!("exact = {}", report.exact);
    if !report.exact {
        println!("sampled_rows = {}", report.sampled_rows);
        println!("note = tau is a lower bound from a uniform row sample");
    }
    ExitCode::SUCCESS
}

fn cmd_validate(config: &str) -> ExitCode {
    let cfg = match ExperimentConfig::from_file(config) {
        Ok(cfg) => cfg,
        Err(err) => return fail(&err.to_string()),
    };
    if let Err(err) = cfg.validate() {
        return fail(&err.to_string());
    }
    println!("ok: {config} is a valid {} config", cfg.experiment.as_str());
    ExitCode::SUCCESS
}

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

/// Interpret the graph argument: a known `name:args` prefix selects a
/// generator, anything else is read as an edge-list file.
fn load_graph(spec: &str, seed: u64) -> Result<Graph, String> {
    let name = spec.split(':').next().unwrap_or("");
    if matches!(name, "isolated" | "star" | "complete" | "ring" | "er" | "sbm") {
        build_generated(spec, seed)
    } else {
        let (edges, n) =
            read_edge_list(spec).map_err(|err| format!("{err} (not a generator spec either; known specs: isolated:N, star:N, complete:N, ring:N, er:N:P[:SEED], sbm:N:BLOCKS:P_IN:P_OUT[:SEED])"))?;
        Graph::build(n, &edges).map_err(|err| err.to_string())
    }
}

fn build_generated(spec: &str, default_seed: u64) -> Result<Graph, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let usage = |msg: &str| format!("bad generator spec `{spec}`: {msg}");
    let parse_n = |s: &str| s.parse::<usize>().map_err(|_| usage("node count must be an integer"));
    let parse_f = |s: &str, what: &str| {
        s.parse::<f64>().map_err(|_| usage(&format!("{what} must be a number")))
    };
    let (kind, n, seed) = match parts.as_slice() {
        [name @ ("isolated" | "star" | "complete" | "ring"), n] => {
            let kind = match *name {
                "isolated" => GraphKind::Isolated,
                "star" => GraphKind::Star,
                "complete" => GraphKind::Complete,
                _ => GraphKind::Ring,
            };
            (kind, parse_n(n)?, default_seed)
        }
        ["er", n, p, rest @ ..] => {
            let seed = match rest {
                [] => default_seed,
                [s] => s.parse().map_err(|_| usage("seed must be an integer"))?,
                _ => return Err(usage("expected er:N:P[:SEED]")),
            };
            (GraphKind::ErdosRenyi { p: parse_f(p, "edge probability")? }, parse_n(n)?, seed)
        }
        ["sbm", n, blocks, p_in, p_out, rest @ ..] => {
            let seed = match rest {
                [] => default_seed,
                [s] => s.parse().map_err(|_| usage("seed must be an integer"))?,
                _ => return Err(usage("expected sbm:N:BLOCKS:P_IN:P_OUT[:SEED]")),
            };
            let blocks =
                blocks.parse::<usize>().map_err(|_| usage("block count must be an integer"))?;
            let kind = GraphKind::Sbm {
                blocks,
                p_in: parse_f(p_in, "p_in")?,
                p_out: parse_f(p_out, "p_out")?,
            };
            (kind, parse_n(n)?, seed)
        }
        _ => {
            return Err(usage(
                "expected isolated:N, star:N, complete:N, ring:N, er:N:P[:SEED], or sbm:N:BLOCKS:P_IN:P_OUT[:SEED]",
            ))
        }
    };
    Graph::canonical(kind, n, seed).map_err(|err| err.to_string())
}
