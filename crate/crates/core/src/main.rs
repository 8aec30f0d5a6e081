use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cbt_topo::connectivity::{connected_components, reduced_betti, BettiReport};
use cbt_topo::sim::{
    check_trace, find_violation, parse_schedule_jsonl, run, SearchMode, SimError, SimSetup,
    TwoPhaseCommit, DEFAULT_STATE_LIMIT,
};
use cbt_topo::solvability::{
    connectivity_obstruction, search_carried_simplicial_map, SolveError, DEFAULT_NODE_BUDGET,
};
use cbt_topo::task::{CarrierViolation, TaskLoadError};
use cbt_topo::{build_colorless_task, build_task, CbtConfig, Complex, SearchOptions, Task, Value, Verdict, Vertex};

/// Environment variable overriding the default search node budget.
const BUDGET_ENV: &str = "CBT_NODE_BUDGET";

#[derive(Parser)]
#[command(name = "cbt-topo", version, about = "Topology of cross-blockchain transactions under fork suspension")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the transaction task for n + 1 chains as JSON.
    Build(BuildArgs),
    /// Check carrier properties, connectivity and the obstruction verdict.
    Analyze(AnalyzeArgs),
    /// Search for a carried simplicial map on a subdivided input skeleton.
    Search(SearchArgs),
    /// Run the two-phase-commit simulator against fork suspension.
    Simulate(SimulateArgs),
    /// Render the 1-skeleton of the input or output complex.
    Export(ExportArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    block_index: u64,
    /// Emit the colorless variant.
    #[arg(long)]
    colorless: bool,
    /// Output file; JSON goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    task: PathBuf,
    #[arg(long)]
    t: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    task: PathBuf,
    #[arg(long)]
    t: usize,
    /// Number of barycentric subdivisions.
    #[arg(long)]
    depth: usize,
    /// Node budget; defaults to $CBT_NODE_BUDGET or 10^7.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: usize,
    /// Depth-first enumeration of schedules (default).
    #[arg(long, conflicts_with = "random")]
    exhaustive: bool,
    /// Random schedules.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Maximum adversary schedule length.
    #[arg(long, default_value_t = 40)]
    depth: usize,
    #[arg(long, default_value_t = DEFAULT_STATE_LIMIT)]
    state_limit: usize,
    /// Disallow fork suspension.
    #[arg(long)]
    no_suspend: bool,
    /// Initial local values, comma separated (0, 1 or bot); all 1 by default.
    #[arg(long, value_delimiter = ',')]
    inputs: Option<Vec<String>>,
    /// Replay this schedule (JSON lines) instead of searching.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Write the resulting trace as JSON lines.
    #[arg(long)]
    jsonl: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Input,
    Output,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    task: PathBuf,
    #[arg(long, value_enum)]
    format: Format,
    #[arg(long, value_enum, default_value = "output")]
    complex: Side,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure classes, one per exit code.
enum Failure {
    Usage(String),
    Io(String),
    Claim(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
            Failure::Claim(_) => 4,
            Failure::Resource(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Claim(m) | Failure::Resource(m) => m,
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Search(a) => cmd_search(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn write_output(path: Option<&Path>, contents: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn load_task(path: &Path) -> Result<Task, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Task::from_json(&text).map_err(|e| match e {
        TaskLoadError::Parse(e) => Failure::Io(format!("{}: {e}", path.display())),
        TaskLoadError::Invalid(e) => Failure::Claim(format!("{}: {e}", path.display())),
    })
}

fn check_t(task: &Task, t: usize) -> CmdResult {
    let processes = task.processes();
    if t == 0 || 2 * t >= processes {
        return Err(Failure::Usage(format!(
            "t = {t} violates 0 < t < (n+1)/2 for n = {}",
            processes.saturating_sub(1)
        )));
    }
    Ok(())
}

fn solve_failure(e: SolveError) -> Failure {
    match e {
        SolveError::BadResilience { .. } => Failure::Usage(e.to_string()),
        SolveError::ResourceBound { .. } => Failure::Resource(e.to_string()),
        SolveError::Task(_) => Failure::Claim(e.to_string()),
    }
}

fn sim_failure(e: SimError) -> Failure {
    match e {
        SimError::ResourceBound { .. } => Failure::Resource(e.to_string()),
        _ => Failure::Usage(e.to_string()),
    }
}

fn cmd_build(a: BuildArgs) -> CmdResult {
    let cfg = CbtConfig::with_block(a.n, a.block_index).map_err(|e| Failure::Usage(e.to_string()))?;
    let task = if a.colorless {
        build_colorless_task(&cfg)
    } else {
        build_task(&cfg)
    };
    let mut json = task.to_json();
    json.push('\n');
    write_output(a.out.as_deref(), &json)?;
    let summary = format!(
        "{} task, n = {}: input f-vector {:?}, output f-vector {:?}, {} carrier entries",
        if a.colorless { "colorless" } else { "colored" },
        cfg.n(),
        task.input().f_vector(),
        task.output().f_vector(),
        task.carrier().len()
    );
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

#[derive(Serialize)]
struct PropertyResult {
    name: &'static str,
    passed: bool,
    counterexample: Option<CarrierViolation>,
}

#[derive(Serialize)]
struct Analysis {
    colored: bool,
    n: usize,
    t: usize,
    input_f_vector: Vec<usize>,
    input_pure: bool,
    input_skeleton: BettiReport,
    output_f_vector: Vec<usize>,
    output_components: usize,
    output_component_betti: Vec<BettiReport>,
    properties: Vec<PropertyResult>,
    verdict: cbt_topo::SolvabilityReport,
    failed_claims: Vec<String>,
}

fn cmd_analyze(a: AnalyzeArgs) -> CmdResult {
    let task = load_task(&a.task)?;
    check_t(&task, a.t)?;

    let skel = task.input().skeleton(a.t);
    let input_skeleton = reduced_betti(&skel, a.t - 1).expect("t - 1 <= dim");
    let components = connected_components(task.output());
    let output_component_betti: Vec<BettiReport> = components
        .iter()
        .map(|c| {
            let sub = task.output().induced_subcomplex(c).expect("component vertices");
            reduced_betti(&sub, sub.dimension().max(0) as usize).expect("within dimension")
        })
        .collect();

    let mut properties = vec![property("monotonic", task.verify_monotonic())];
    if task.is_colored() {
        properties.push(property("rigid", task.verify_rigid()));
        let np = task.verify_name_preserving().expect("colored task");
        properties.push(property("name_preserving", np));
    }

    let colorless = if task.is_colored() {
        task.colorless_projection().expect("colored task")
    } else {
        task.clone()
    };
    let verdict = connectivity_obstruction(&colorless, a.t).map_err(solve_failure)?;

    let mut failed = Vec::new();
    if !task.input().is_pure() {
        failed.push("input complex is not pure".to_string());
    }
    if components.len() < 2 {
        failed.push("output complex is connected".to_string());
    }
    if output_component_betti
        .iter()
        .any(|b| b.reduced_betti.iter().any(|&x| x != 0))
    {
        failed.push("an output component has nonzero reduced homology".to_string());
    }
    for p in &properties {
        if let Some(c) = &p.counterexample {
            failed.push(c.to_string());
        }
    }
    if verdict.verdict != Verdict::UnsolvableByObstruction {
        failed.push("connectivity obstruction did not fire".to_string());
    }

    let analysis = Analysis {
        colored: task.is_colored(),
        n: task.processes() - 1,
        t: a.t,
        input_f_vector: task.input().f_vector(),
        input_pure: task.input().is_pure(),
        input_skeleton,
        output_f_vector: task.output().f_vector(),
        output_components: components.len(),
        output_component_betti,
        properties,
        verdict,
        failed_claims: failed,
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&analysis).expect("serializable"));
    } else {
        print!("{}", render_analysis(&analysis));
    }
    if analysis.failed_claims.is_empty() {
        Ok(())
    } else {
        Err(Failure::Claim(format!(
            "{} claim(s) failed: {}",
            analysis.failed_claims.len(),
            analysis.failed_claims.join("; ")
        )))
    }
}

fn property(name: &'static str, check: Result<(), CarrierViolation>) -> PropertyResult {
    PropertyResult {
        name,
        passed: check.is_ok(),
        counterexample: check.err(),
    }
}

fn render_analysis(a: &Analysis) -> String {
    let mut s = String::new();
    let mark = |ok: bool| if ok { "ok" } else { "FAILED" };
    let _ = writeln!(
        s,
        "{} task, n = {}, t = {}",
        if a.colored { "colored" } else { "colorless" },
        a.n,
        a.t
    );
    let _ = writeln!(s, "input f-vector {:?}, pure: {}", a.input_f_vector, a.input_pure);
    let _ = writeln!(
        s,
        "skel^{} of input: {} component(s), reduced Betti {:?}",
        a.t, a.input_skeleton.components, a.input_skeleton.reduced_betti
    );
    let _ = writeln!(
        s,
        "output f-vector {:?}, {} component(s)",
        a.output_f_vector, a.output_components
    );
    for (i, b) in a.output_component_betti.iter().enumerate() {
        let _ = writeln!(s, "  component {i}: reduced Betti {:?}", b.reduced_betti);
    }
    for p in &a.properties {
        let _ = writeln!(s, "carrier {}: {}", p.name, mark(p.passed));
        if let Some(c) = &p.counterexample {
            let _ = writeln!(s, "  counterexample: {c}");
        }
    }
    let _ = write!(s, "{}", a.verdict);
    if a.failed_claims.is_empty() {
        let _ = writeln!(s, "all claims confirmed");
    }
    s
}

fn node_budget(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .parse()
            .map_err(|_| Failure::Usage(format!("{BUDGET_ENV}={v:?} is not a number"))),
        Err(_) => Ok(DEFAULT_NODE_BUDGET),
    }
}

fn cmd_search(a: SearchArgs) -> CmdResult {
    let task = load_task(&a.task)?;
    check_t(&task, a.t)?;
    let opts = SearchOptions {
        node_budget: node_budget(a.budget)?,
    };
    let task = if task.is_colored() {
        task.colorless_projection().expect("colored task")
    } else {
        task
    };
    let report = search_carried_simplicial_map(&task, a.t, a.depth, &opts).map_err(solve_failure)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        print!("{report}");
    }
    Ok(())
}

fn parse_inputs(raw: &[String]) -> Result<Vec<Value>, Failure> {
    raw.iter()
        .map(|s| {
            Value::parse(s.trim()).ok_or_else(|| Failure::Usage(format!("bad input value {s:?}")))
        })
        .collect()
}

fn cmd_simulate(a: SimulateArgs) -> CmdResult {
    let mut setup = SimSetup::new(a.n, a.t).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(raw) = &a.inputs {
        setup = setup
            .with_inputs(parse_inputs(raw)?)
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if a.no_suspend {
        setup = setup.with_max_suspensions(0);
    }
    let protocol = TwoPhaseCommit;

    let trace = if let Some(path) = &a.schedule {
        let text =
            fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let schedule = parse_schedule_jsonl(&text).map_err(sim_failure)?;
        println!("replaying {} schedule events", schedule.len());
        Some(run(&setup, &protocol, &schedule).map_err(sim_failure)?)
    } else {
        let mode = if a.random {
            println!(
                "random search: seed {}, {} trials, depth {}",
                a.seed, a.trials, a.depth
            );
            SearchMode::Random {
                seed: a.seed,
                trials: a.trials,
                depth: a.depth,
            }
        } else {
            println!("exhaustive search: depth {}", a.depth);
            SearchMode::Exhaustive {
                depth: a.depth,
                state_limit: a.state_limit,
            }
        };
        find_violation(&setup, &protocol, mode).map_err(sim_failure)?
    };

    let Some(trace) = trace else {
        println!("no violation within bound");
        return Ok(());
    };
    let report = check_trace(&trace);
    if report.is_clean() {
        println!("no violation");
    } else {
        println!("violation found");
        for v in &report.atomicity {
            println!("  atomicity: {}", serde_json::to_string(v).expect("serializable"));
        }
        if !report.non_termination.is_empty() {
            println!("  non-termination: chains {:?} never decide", report.non_termination);
        }
    }
    print!("{}", trace.render_timeline());
    if let Some(path) = &a.jsonl {
        write_output(Some(path), &trace.to_jsonl())?;
    }
    Ok(())
}

fn node_id(v: &Vertex) -> String {
    match v.block {
        Some(b) => format!("v{}.{}:{}", b.chain, b.block, v.value.as_str()),
        None => format!(":{}", v.value.as_str()),
    }
}

fn fill(v: &Vertex) -> &'static str {
    match v.value {
        Value::Zero => "lightblue",
        Value::One => "palegreen",
        Value::Bottom => "lightcoral",
    }
}

fn render_dot(name: &str, k: &Complex<Vertex>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "graph {name} {{");
    let _ = writeln!(s, "  node [style=filled];");
    for v in k.vertices() {
        let _ = writeln!(
            s,
            "  \"{}\" [label=\"{}\", fillcolor={}];",
            node_id(&v),
            v,
            fill(&v)
        );
    }
    for e in k.simplices_of_dim(1) {
        let [a, b] = e.vertices() else { unreachable!() };
        let _ = writeln!(s, "  \"{}\" -- \"{}\";", node_id(a), node_id(b));
    }
    s.push_str("}\n");
    s
}

fn render_graph_json(name: &str, k: &Complex<Vertex>) -> String {
    #[derive(Serialize)]
    struct Node {
        id: String,
        vertex: Vertex,
    }
    #[derive(Serialize)]
    struct Graph<'a> {
        complex: &'a str,
        nodes: Vec<Node>,
        edges: Vec<[String; 2]>,
    }
    let g = Graph {
        complex: name,
        nodes: k
            .vertices()
            .into_iter()
            .map(|v| Node {
                id: node_id(&v),
                vertex: v,
            })
            .collect(),
        edges: k
            .simplices_of_dim(1)
            .iter()
            .map(|e| [node_id(&e.vertices()[0]), node_id(&e.vertices()[1])])
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&g).expect("serializable");
    out.push('\n');
    out
}

fn cmd_export(a: ExportArgs) -> CmdResult {
    let task = load_task(&a.task)?;
    let (name, k) = match a.complex {
        Side::Input => ("input", task.input()),
        Side::Output => ("output", task.output()),
    };
    let text = match a.format {
        Format::Dot => render_dot(name, k),
        Format::Json => render_graph_json(name, k),
    };
    write_output(a.out.as_deref(), &text)
}
