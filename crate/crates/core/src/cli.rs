//! Command-line front end: `validate`, `analyze`, `simulate`, `optimize`.
//!
//! Exit codes: 0 success, 1 unschedulable or infeasible (analyze), 2 parse
//! or validation error, 3 runtime error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::capacity::{bfs_search, brute_force_oracle, e2e_under_q, QuantSearch, DEFAULT_ORACLE_CAP};
use crate::scenario::{units, Scenario, ScenarioError};
use crate::sim::{replicate_per_edge, run_simulation, Phases, SimTrace, FLOW_CSV_SCHEMA};
use crate::time::TimePs;
use crate::topology::{aggregation_delay_bound, e2e_schedulable, validate, EdgeScheduler, TopologyError};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSCHEDULABLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "fronthaul", version, about = "Real-time baseband transport over fat-tree networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a scenario against the design requirements.
    Validate(Common),
    /// Delay bound, reduced deadlines and per-edge schedulability.
    Analyze(Common),
    /// Packet-level simulation; writes per-flow CSV and a JSON summary.
    Simulate(Common),
    /// Quantization search maximizing capacity under schedulability.
    Optimize(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (TOML).
    pub scenario: PathBuf,
    /// Directory for CSV and JSON outputs.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the scenario's seeds.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the simulation horizon, e.g. "1s".
    #[arg(long)]
    pub horizon: Option<String>,
}

enum Failure {
    Input(String),
    Runtime(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Read { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn runtime(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Parses `args` and runs the command, returning the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Validate(c) => cmd_validate(c),
        Command::Analyze(c) => cmd_analyze(c),
        Command::Simulate(c) => cmd_simulate(c),
        Command::Optimize(c) => cmd_optimize(c),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))
}

fn load(c: &Common) -> Result<Scenario, Failure> {
    Ok(Scenario::parse(&read_text(&c.scenario)?)?)
}

fn out_dir(c: &Common) -> Result<Option<&Path>, Failure> {
    match &c.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(runtime)?;
    fs::write(dir.join(name), text + "\n").map_err(runtime)
}

fn provenance_line(hash: &str, seed: u64) -> String {
    format!("# scenario {hash} seed {seed} fronthaul {VERSION}")
}

fn cmd_validate(c: &Common) -> Result<i32, Failure> {
    let s = Scenario::parse_unvalidated(&read_text(&c.scenario)?)?;
    let violations = validate(&s.topology, &s.flows);
    println!("scenario {}", s.hash);
    println!(
        "tree: arity {} height {}, {} edge switches, {} radios",
        s.topology.arity(),
        s.topology.height(),
        s.topology.edge_count(),
        s.flows.len()
    );
    if violations.is_empty() {
        println!("all design requirements hold");
        Ok(EXIT_OK)
    } else {
        for v in &violations {
            println!("violation: {v}");
        }
        Ok(EXIT_INPUT)
    }
}

fn cmd_analyze(c: &Common) -> Result<i32, Failure> {
    let s = load(c)?;
    let policy = s.policy();
    let bound = aggregation_delay_bound(&s.topology);
    println!("scenario {}", s.hash);
    println!(
        "aggregation bound {} (switching+propagation {}, transmission+queuing {}, background {})",
        bound.total, bound.switching_propagation, bound.transmission_queuing, bound.background
    );
    let (code, report) = match e2e_schedulable(&s.topology, &s.flows, policy) {
        Ok(r) => {
            println!("edge policy {policy:?}, deadline reduction {}", r.budget.total);
            for e in r.edges.iter().filter(|e| e.verdict.is_some()) {
                let v = e.verdict.as_ref().expect("filtered");
                match &v.witness {
                    None => println!("edge {}: schedulable ({} radios)", e.edge, e.flows.len()),
                    Some(w) => println!("edge {}: UNSCHEDULABLE, witness {w:?}", e.edge),
                }
            }
            println!("verdict: {}", if r.schedulable { "schedulable" } else { "unschedulable" });
            let code = if r.schedulable { EXIT_OK } else { EXIT_UNSCHEDULABLE };
            (code, json!({ "report": r }))
        }
        Err(TopologyError::Infeasible { flows, budget }) => {
            println!("verdict: infeasible, the aggregation budget {} exceeds these deadlines:", budget.total);
            for (id, d) in &flows {
                println!("  flow {id}: d' = {d} ps");
            }
            (EXIT_UNSCHEDULABLE, json!({ "infeasible": flows, "budget": budget }))
        }
        Err(TopologyError::UnsupportedPolicy(p)) => {
            return Err(Failure::Input(format!(
                "edge scheduler {p:?} has no schedulability test; choose edf or fixed-priority"
            )));
        }
        Err(e) => return Err(Failure::Input(e.to_string())),
    };
    if let Some(dir) = out_dir(c)? {
        let mut doc = json!({
            "scenario": s.hash,
            "version": VERSION,
            "policy": policy,
            "aggregation_bound": bound,
        });
        doc.as_object_mut().expect("object").extend(report.as_object().expect("object").clone());
        write_json(dir, "analysis.json", &doc)?;
    }
    Ok(code)
}

struct Run {
    policy: EdgeScheduler,
    arity: u32,
    repetition: u32,
    seed: u64,
}

fn cmd_simulate(c: &Common) -> Result<i32, Failure> {
    let s = load(c)?;
    let sim = s.file.simulation.clone();
    let base_seed = c.seed.or(sim.as_ref().map(|x| x.seed)).unwrap_or(0);
    let reps = sim.as_ref().map_or(1, |x| x.repetitions);
    let arities = sim.as_ref().and_then(|x| x.arities.clone());
    let sweep = arities.is_some();
    let arities = arities.unwrap_or_else(|| vec![s.topology.arity()]);
    let horizon = match &c.horizon {
        Some(h) => Some(units::parse_duration(h).map_err(|e| Failure::Input(format!("--horizon: {e}")))?),
        None => None,
    };
    if horizon.is_some_and(TimePs::is_zero) {
        return Err(Failure::Input("--horizon: must be positive".into()));
    }

    let mut runs = Vec::new();
    for policy in s.sim_policies() {
        for &arity in &arities {
            for repetition in 0..reps {
                runs.push(Run { policy, arity, repetition, seed: base_seed + u64::from(repetition) });
            }
        }
    }
    let template = s.per_edge_template();
    let results: Vec<(Run, SimTrace, TimePs, Option<bool>)> = runs
        .into_par_iter()
        .map(|run| {
            let topo = if sweep { s.topology.with_arity(run.arity).map_err(runtime)? } else { s.topology.clone() };
            let flows = if sweep { replicate_per_edge(&topo, &template) } else { s.flows.clone() };
            let mut cfg = s.sim_config(run.policy)?.with_seed(run.seed);
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            if run.repetition > 0 && cfg.phases == Phases::Synchronous {
                cfg.phases = Phases::Random;
            }
            let trace = run_simulation(&topo, &flows, &cfg).map_err(runtime)?;
            let verdict = match run.policy {
                EdgeScheduler::Fifo => None,
                p => match e2e_schedulable(&topo, &flows, p) {
                    Ok(r) => Some(r.schedulable),
                    Err(TopologyError::Infeasible { .. }) => Some(false),
                    Err(e) => return Err(runtime(e)),
                },
            };
            Ok((run, trace, aggregation_delay_bound(&topo).total, verdict))
        })
        .collect::<Result<_, Failure>>()?;

    println!("scenario {}", s.hash);
    println!(
        "{:<15} {:>5} {:>6} {:>4} {:>14} {:>14} {:>14} {:>8}",
        "policy", "arity", "radios", "rep", "max delay", "max post-edge", "bound", "misses"
    );
    let dir = out_dir(c)?;
    let mut summary = Vec::new();
    for (run, trace, bound, verdict) in &results {
        println!(
            "{:<15} {:>5} {:>6} {:>4} {:>14} {:>14} {:>14} {:>8}",
            format!("{:?}", run.policy),
            run.arity,
            trace.flows.len(),
            run.repetition,
            trace.max_delay().to_string(),
            trace.max_post_edge().to_string(),
            bound.to_string(),
            trace.total_misses()
        );
        for w in &trace.warnings {
            eprintln!("warning: {w}");
        }
        let file = format!("flows_{}_q{}_rep{}.csv", policy_name(run.policy), run.arity, run.repetition);
        if let Some(dir) = dir {
            let mut csv = Vec::new();
            trace.write_csv(&mut csv).map_err(runtime)?;
            // schema line first, provenance second
            let split = csv.iter().position(|&b| b == b'\n').map_or(0, |i| i + 1);
            let mut buf = csv[..split].to_vec();
            writeln!(buf, "{}", provenance_line(&s.hash, run.seed)).map_err(runtime)?;
            buf.extend_from_slice(&csv[split..]);
            fs::write(dir.join(&file), buf).map_err(runtime)?;
        }
        summary.push(json!({
            "policy": run.policy,
            "arity": run.arity,
            "radios": trace.flows.len(),
            "repetition": run.repetition,
            "seed": run.seed,
            "horizon_ps": trace.horizon,
            "max_delay_ps": trace.max_delay(),
            "max_post_edge_ps": trace.max_post_edge(),
            "aggregation_bound_ps": bound,
            "misses": trace.total_misses(),
            "analytic_schedulable": verdict,
            "csv": file,
        }));
    }
    if let Some(dir) = dir {
        write_json(
            dir,
            "summary.json",
            &json!({ "scenario": s.hash, "version": VERSION, "seed": base_seed, "flow_csv_schema": FLOW_CSV_SCHEMA, "runs": summary }),
        )?;
    }
    Ok(EXIT_OK)
}

fn policy_name(p: EdgeScheduler) -> &'static str {
    match p {
        EdgeScheduler::Fifo => "fifo",
        EdgeScheduler::FixedPriority => "fixed-priority",
        EdgeScheduler::Edf => "edf",
    }
}

fn cmd_optimize(c: &Common) -> Result<i32, Failure> {
    let mut s = load(c)?;
    if let (Some(seed), Some(opt)) = (c.seed, s.file.optimization.as_mut()) {
        opt.seed = seed;
    }
    let (ladder, ensemble, noise, policy) =
        s.optimization()?.ok_or_else(|| Failure::Input("scenario has no [optimization] section".into()))?;
    let search =
        QuantSearch { topology: &s.topology, radios: &s.flows, ladder: &ladder, ensemble: &ensemble, noise, policy };
    let report = bfs_search(&search).map_err(|e| Failure::Input(e.to_string()))?;
    println!("scenario {}", s.hash);
    match &report.best {
        Some(q) => println!("best quantization {q}, capacity {:.6} b/s/Hz", report.capacity),
        None => println!("no schedulable quantization, capacity 0"),
    }
    println!("expanded {}, evaluated {}, {:.1} ms", report.expanded, report.evaluated, report.wall_time_ms);
    let seed = ensemble.seed().unwrap_or(0);
    let mut oracle = None;
    if s.file.optimization.as_ref().is_some_and(|o| o.oracle) {
        match brute_force_oracle(&search, DEFAULT_ORACLE_CAP) {
            Ok(b) => {
                let matched = b.capacity == report.capacity;
                println!("oracle: {}", if matched { "match" } else { "MISMATCH" });
                oracle = Some(json!({ "capacity": b.capacity, "best": b.best, "match": matched }));
                if !matched {
                    return Err(Failure::Runtime(format!(
                        "oracle capacity {} differs from search {}",
                        b.capacity, report.capacity
                    )));
                }
            }
            Err(e) => println!("oracle: skipped ({e})"),
        }
    }
    if let Some(dir) = out_dir(c)? {
        let edges = match &report.best {
            Some(q) => serde_json::to_value(e2e_under_q(q, &s.topology, &s.flows, policy).map_err(runtime)?.edges)
                .map_err(runtime)?,
            None => serde_json::Value::Null,
        };
        write_json(
            dir,
            "search.json",
            &json!({
                "scenario": s.hash,
                "version": VERSION,
                "seed": seed,
                "best": report.best,
                "capacity_bps_hz": report.capacity,
                "expanded": report.expanded,
                "evaluated": report.evaluated,
                "wall_time_ms": report.wall_time_ms,
                "edges": edges,
                "oracle": oracle,
            }),
        )?;
        let mut buf = Vec::new();
        writeln!(buf, "# schema: q,schedulable,capacity_bps_hz").map_err(runtime)?;
        writeln!(buf, "{}", provenance_line(&s.hash, seed)).map_err(runtime)?;
        report.write_csv(&mut buf).map_err(runtime)?;
        fs::write(dir.join("lattice.csv"), buf).map_err(runtime)?;
    }
    Ok(EXIT_OK)
}
