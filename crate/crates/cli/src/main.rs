//! Batch front end: check specifications, export graphs, simulate runs,
//! and print model statistics.
//!
//! Exit codes: 0 when every selected specification holds, 1 when any is
//! refuted, 2 on parse/validation/resource errors.

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use swapmc_core::checker::{check, verdict_to_json, CheckOptions, Outcome, Verdict};
use swapmc_core::compile::{compile, normalize_ws, CompiledModel};
use swapmc_core::graph::{build_graph, BuildOptions, StateGraph};
use swapmc_core::semantics::{initial_states, render_profile, State};
use swapmc_core::sim::{simulate, state_delta};

#[derive(Parser)]
#[command(
    name = "swapmc",
    version,
    about = "Explicit-state model checker for multi-agent guarded-command models"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify specifications against a model
    Check(CheckArgs),
    /// Export the reachable state graph in DOT format
    Graph(GraphArgs),
    /// Walk a seeded pseudorandom run and print each step
    Simulate(SimulateArgs),
    /// Print model and state-space statistics
    Stats(StatsArgs),
}

#[derive(Args)]
struct ModelArg {
    /// Path to a .swapmc model file
    model: PathBuf,

    /// Maximum reachable states before giving up
    #[arg(long, default_value_t = 5_000_000)]
    node_budget: usize,

    /// Worker threads for state-space exploration
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArg,

    /// Specification to check: a verbatim label (whitespace-insensitive) or
    /// #N for the N-th specification (1-based)
    #[arg(long, conflicts_with = "all")]
    spec: Option<String>,

    /// Check every specification (the default when --spec is absent)
    #[arg(long)]
    all: bool,

    /// Emit the JSON report instead of text
    #[arg(long)]
    json: bool,

    /// Maximum product states before giving up
    #[arg(long, default_value_t = 20_000_000)]
    product_budget: usize,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    model: ModelArg,

    /// Write DOT here instead of stdout
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArg,

    /// Random seed; equal seeds reproduce equal runs
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Number of steps to walk (must be at least 1)
    #[arg(long, default_value_t = 20)]
    steps: usize,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    model: ModelArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.cmd {
        Cmd::Check(args) => cmd_check(args),
        Cmd::Graph(args) => cmd_graph(args),
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Stats(args) => cmd_stats(args),
    };
    ExitCode::from(code)
}

/// Parse, validate, and compile a model file; diagnostics go to stderr.
fn load_model(path: &Path) -> Result<CompiledModel, u8> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(2);
        }
    };
    let ir = match swapmc_core::parse_model(&text) {
        Ok(ir) => ir,
        Err(errors) => {
            for e in errors {
                eprintln!("{}:{e}", path.display());
            }
            return Err(2);
        }
    };
    match compile(&ir) {
        Ok(m) => {
            for w in &m.warnings {
                eprintln!("{}:{}: warning: {}", path.display(), w.span, w.message);
            }
            Ok(m)
        }
        Err(report) => {
            for e in &report.errors {
                eprintln!("{}:{}: error: {}", path.display(), e.span, e.message);
            }
            Err(2)
        }
    }
}

fn load_graph(m: &CompiledModel, args: &ModelArg) -> Result<StateGraph, u8> {
    build_graph(
        m,
        BuildOptions {
            node_budget: args.node_budget,
            threads: args.threads,
        },
    )
    .map_err(|e| {
        eprintln!("error: {e}");
        2
    })
}

fn cmd_check(args: CheckArgs) -> u8 {
    let m = match load_model(&args.model.model) {
        Ok(m) => m,
        Err(c) => return c,
    };
    let g = match load_graph(&m, &args.model) {
        Ok(g) => g,
        Err(c) => return c,
    };

    let indices: Vec<usize> = if let Some(sel) = &args.spec {
        match resolve_spec(&m, sel) {
            Ok(i) => vec![i],
            Err(msg) => {
                eprintln!("error: {msg}");
                return 2;
            }
        }
    } else {
        (0..m.specs.len()).collect()
    };
    if indices.is_empty() {
        eprintln!("error: model declares no specifications");
        return 2;
    }

    let opts = CheckOptions {
        product_budget: args.product_budget,
    };
    let mut verdicts: Vec<Verdict> = Vec::new();
    for i in indices {
        match check(&m, &g, i, opts) {
            Ok(v) => verdicts.push(v),
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        }
    }

    let model_name = args
        .model
        .model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| args.model.model.display().to_string());
    if args.json {
        let docs: Vec<serde_json::Value> = verdicts
            .iter()
            .map(|v| verdict_to_json(&m, &model_name, v))
            .collect();
        let out = if args.spec.is_some() {
            serde_json::to_string_pretty(&docs[0]).unwrap()
        } else {
            serde_json::to_string_pretty(&docs).unwrap()
        };
        println!("{out}");
    } else {
        for (k, v) in verdicts.iter().enumerate() {
            println!(
                "spec {}: {}  [{} states, {} product states, {} ms]",
                k + 1,
                v.outcome.name(),
                v.stats.reachable_states,
                v.stats.product_states,
                v.stats.millis
            );
            println!("    {}", normalize_ws(&v.label));
            if let Outcome::Refuted(trace) = &v.outcome {
                print_trace(&m, trace);
            }
            if matches!(v.outcome, Outcome::Vacuous) {
                println!(
                    "    note: some initial state admits no fair run; the specification holds \
                     vacuously there"
                );
            }
        }
    }
    if verdicts.iter().any(|v| v.outcome.is_refuted()) {
        1
    } else {
        0
    }
}

fn print_trace(m: &CompiledModel, trace: &swapmc_core::checker::LassoTrace) {
    let print_step = |tag: &str, i: usize, s: &State, p: &[usize]| {
        println!(
            "    {tag}[{i}] {}\n        actions: {}",
            s.render(m),
            render_profile(m, p)
        );
    };
    for (i, (s, p)) in trace.prefix.iter().enumerate() {
        print_step("prefix", i, s, p);
    }
    for (i, (s, p)) in trace.cycle.iter().enumerate() {
        print_step("cycle ", i, s, p);
    }
}

fn resolve_spec(m: &CompiledModel, sel: &str) -> Result<usize, String> {
    if let Some(rest) = sel.strip_prefix('#') {
        let n: usize = rest
            .parse()
            .map_err(|_| format!("bad specification index {sel:?}"))?;
        if n == 0 || n > m.specs.len() {
            return Err(format!(
                "specification index {n} out of range 1..={}",
                m.specs.len()
            ));
        }
        return Ok(n - 1);
    }
    m.spec_by_label(sel)
        .ok_or_else(|| format!("no specification labelled {sel:?}"))
}

fn cmd_graph(args: GraphArgs) -> u8 {
    let m = match load_model(&args.model.model) {
        Ok(m) => m,
        Err(c) => return c,
    };
    let g = match load_graph(&m, &args.model) {
        Ok(g) => g,
        Err(c) => return c,
    };
    let dot = g.to_dot(&m);
    match &args.dot {
        Some(path) => {
            if let Err(e) = std::fs::write(path, dot) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
            println!("nodes: {}", g.node_count());
            println!("edges: {}", g.edge_count());
        }
        None => {
            print!("{dot}");
            eprintln!("nodes: {}", g.node_count());
            eprintln!("edges: {}", g.edge_count());
        }
    }
    0
}

fn cmd_simulate(args: SimulateArgs) -> u8 {
    if args.steps == 0 {
        eprintln!("error: --steps must be at least 1");
        return 2;
    }
    let m = match load_model(&args.model.model) {
        Ok(m) => m,
        Err(c) => return c,
    };
    let steps = match simulate(&m, args.seed, args.steps) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    println!("seed {} start: {}", args.seed, steps[0].state.render(&m));
    for (i, st) in steps.iter().enumerate() {
        let delta = state_delta(&m, &st.state, &st.next);
        let delta = if delta.is_empty() {
            "(unchanged)".to_string()
        } else {
            delta.join(", ")
        };
        println!(
            "step {:>3}: [{}] {}",
            i + 1,
            render_profile(&m, &st.profile),
            delta
        );
    }
    0
}

fn cmd_stats(args: StatsArgs) -> u8 {
    let m = match load_model(&args.model.model) {
        Ok(m) => m,
        Err(c) => return c,
    };
    println!("variables: {}", m.vars.len());
    for v in &m.vars {
        let dom = &m.domains[v.domain];
        println!("  {} : {} (size {})", v.name, dom.name, dom.size());
    }
    println!("agents: {}", m.agents.len());
    println!("specifications: {}", m.specs.len());
    println!("fairness constraints: {}", m.fairness.len());
    let init = initial_states(&m);
    println!("initial states: {}", init.len());
    if init.is_empty() {
        eprintln!("error: model has no initial states");
        return 2;
    }
    let g = match load_graph(&m, &args.model) {
        Ok(g) => g,
        Err(c) => return c,
    };
    println!("reachable states: {}", g.node_count());
    println!("reachable edges: {}", g.edge_count());
    0
}
