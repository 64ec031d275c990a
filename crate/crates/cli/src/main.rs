use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};

use distauto::catalog::{self, machine_rules_value, machine_to_value};
use distauto::corpus::{connected_corpus, load_corpus_dir};
use distauto::engine::{check_model_class, simulate, trace_to_json, ModelClass, Policy};
use distauto::error::Error;
use distauto::graph::{
    chain_construction, export_dot, generate_complete, generate_cycle, generate_path, generate_star, graph_to_value,
    kronecker_cover, labelings, parse_graph, LabeledGraph, NodePairAnchor,
};
use distauto::machine::Machine;
use distauto::popproto::{parity_protocol, pp_decide, threshold_protocol, PopulationProtocol};
use distauto::verdict::{
    build_config_graph, decide, DecideOptions, Outcome, WeakMethod, DEFAULT_MAX_CONFIGS, DEFAULT_MAX_PRODUCT,
};
use distauto::zoo;

const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "distauto", version, about = "Distributed automata on labeled graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, transform and enumerate graphs.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Decide acceptance of a graph exactly.
    Decide(DecideArgs),
    /// Simulate one run under a scheduling policy.
    Run(RunArgs),
    /// Compile a machine into another model.
    Transform(TransformArgs),
    /// Built-in machines.
    #[command(subcommand)]
    Zoo(ZooCmd),
    /// Built-in and user population protocols.
    #[command(subcommand)]
    Protocol(ProtocolCmd),
    /// Recognition matrix of zoo machines against model classes.
    Table(TableArgs),
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Generate star, cycle, path or complete graphs.
    Gen {
        /// star | cycle | path | complete
        kind: String,
        /// Leaf count for stars, comma-separated node labels otherwise.
        spec: String,
        #[arg(long)]
        dot: bool,
    },
    /// Kronecker (bipartite double) cover.
    Cover {
        file: PathBuf,
        #[arg(long)]
        dot: bool,
    },
    /// Chain of alternating copies of two graphs.
    Chain {
        g: PathBuf,
        h: PathBuf,
        #[arg(long)]
        t: usize,
        #[arg(long = "g-anchor")]
        g_anchor: String,
        #[arg(long = "h-anchor")]
        h_anchor: String,
        #[arg(long)]
        dot: bool,
    },
    /// All connected graphs up to isomorphism.
    Enumerate {
        #[arg(long = "max-nodes")]
        max_nodes: usize,
        /// Also enumerate labelings over these comma-separated labels.
        #[arg(long)]
        labels: Option<String>,
    },
}

#[derive(Args)]
struct Caps {
    #[arg(long = "max-configs", default_value_t = DEFAULT_MAX_CONFIGS)]
    max_configs: usize,
    #[arg(long = "max-product", default_value_t = DEFAULT_MAX_PRODUCT)]
    max_product: usize,
}

#[derive(Args)]
struct DecideArgs {
    /// Machine JSON file, or zoo:<name>.
    #[arg(long)]
    machine: String,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    class: String,
    #[command(flatten)]
    caps: Caps,
    #[arg(long)]
    witness: bool,
    /// Use the pending-set product for weak fairness.
    #[arg(long = "weak-product")]
    weak_product: bool,
    /// Write the explored configuration graph in DOT form to this file.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    machine: String,
    #[arg(long)]
    graph: PathBuf,
    /// sync | exclusive-uniform | liberal-bernoulli:p | file:<schedule.json>
    #[arg(long, default_value = "sync")]
    policy: String,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "dot-config-graph")]
    dot_config_graph: Option<PathBuf>,
    #[arg(long = "max-configs", default_value_t = DEFAULT_MAX_CONFIGS)]
    max_configs: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TransformArgs {
    /// synchronize | lib2excl-strong | excl2lib-strong | exclweak2sync | product | decount | from-popproto
    name: String,
    /// Input machine (protocol for from-popproto); zoo:<name> is accepted.
    inputs: Vec<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value = "and")]
    combinator: String,
    /// Emit the explicit rule table instead of the transform document.
    #[arg(long)]
    rules: bool,
}

#[derive(Subcommand)]
enum ZooCmd {
    List,
    Get {
        name: String,
        /// Always emit the builtin reference.
        #[arg(long)]
        reference: bool,
    },
}

#[derive(Subcommand)]
enum ProtocolCmd {
    /// parity | threshold-<c>
    Get { name: String },
    /// Exact strong-fairness decision.
    Decide {
        /// Protocol JSON file, or builtin:<name>.
        #[arg(long)]
        protocol: String,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct TableArgs {
    /// Directory of graph JSON files; defaults to enumerated connected graphs.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long = "max-nodes", default_value_t = 4)]
    max_nodes: usize,
    /// Comma-separated zoo names.
    #[arg(long)]
    zoo: Option<String>,
    #[arg(long = "max-configs", default_value_t = DEFAULT_MAX_CONFIGS)]
    max_configs: usize,
    #[arg(long)]
    json: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: EXIT_INVALID,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: msg.into(),
    }
}

type CliResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Graph(cmd) => cmd_graph(cmd),
        Command::Decide(a) => cmd_decide(a),
        Command::Run(a) => cmd_run(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Zoo(cmd) => cmd_zoo(cmd),
        Command::Protocol(cmd) => cmd_protocol(cmd),
        Command::Table(a) => cmd_table(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<LabeledGraph, Failure> {
    Ok(parse_graph(&read(path)?)?)
}

fn load_machine(spec: &str) -> Result<Machine, Failure> {
    if let Some(name) = spec.strip_prefix("zoo:") {
        return Ok(zoo::zoo_entry(name)?.machine);
    }
    Ok(catalog::parse_machine(&read(Path::new(spec))?)?)
}

fn load_protocol(spec: &str) -> Result<PopulationProtocol, Failure> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        return builtin_protocol(name);
    }
    Ok(PopulationProtocol::parse(&read(Path::new(spec))?)?)
}

fn builtin_protocol(name: &str) -> Result<PopulationProtocol, Failure> {
    if name == "parity" {
        return Ok(parity_protocol());
    }
    if let Some(c) = name.strip_prefix("threshold-") {
        let c: usize = c.parse().map_err(|_| usage(format!("bad threshold in {name:?}")))?;
        return Ok(threshold_protocol(c)?);
    }
    Err(usage(format!("unknown protocol {name:?}; known: parity, threshold-<c>")))
}

// A closed pipe (e.g. `| head`) is not an error worth a panic.
fn print_json(v: &Value) {
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("json"));
}

fn emit_graph(g: &LabeledGraph, dot: bool) {
    if dot {
        let _ = write!(std::io::stdout().lock(), "{}", export_dot(g));
    } else {
        print_json(&graph_to_value(g));
    }
}

fn split_labels(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).collect()
}

fn anchor(s: &str) -> Result<NodePairAnchor, Failure> {
    match split_labels(s).as_slice() {
        [a, b] => Ok(NodePairAnchor::new(*a, *b)),
        _ => Err(usage(format!("anchor {s:?} must be two comma-separated node ids"))),
    }
}

fn cmd_graph(cmd: GraphCmd) -> CliResult {
    match cmd {
        GraphCmd::Gen { kind, spec, dot } => {
            let g = match kind.as_str() {
                "star" => {
                    let n: usize = spec.parse().map_err(|_| usage("star expects a leaf count"))?;
                    generate_star(n)?
                }
                "cycle" => generate_cycle(&split_labels(&spec))?,
                "path" => generate_path(&split_labels(&spec))?,
                "complete" => generate_complete(&split_labels(&spec))?,
                _ => return Err(usage(format!("unknown graph family {kind:?}"))),
            };
            emit_graph(&g, dot);
        }
        GraphCmd::Cover { file, dot } => {
            let g = load_graph(&file)?;
            let cover = kronecker_cover(&g);
            if !cover.is_connected() {
                eprintln!("warning: disconnected cover (the input graph is bipartite)");
            }
            emit_graph(&cover, dot);
        }
        GraphCmd::Chain {
            g,
            h,
            t,
            g_anchor,
            h_anchor,
            dot,
        } => {
            let (g, h) = (load_graph(&g)?, load_graph(&h)?);
            let out = chain_construction(&g, &h, t, &anchor(&g_anchor)?, &anchor(&h_anchor)?)?;
            emit_graph(&out, dot);
        }
        GraphCmd::Enumerate { max_nodes, labels } => {
            if max_nodes > 8 {
                return Err(usage("enumeration is limited to 8 nodes"));
            }
            let mut out = Vec::new();
            for g in connected_corpus(max_nodes) {
                match &labels {
                    None => out.push(graph_to_value(&g)),
                    Some(l) => out.extend(labelings(&g, &split_labels(l)).iter().map(graph_to_value)),
                }
            }
            print_json(&Value::Array(out));
        }
    }
    Ok(0)
}

fn outcome_code(o: Outcome) -> u8 {
    match o {
        Outcome::Accept => 0,
        Outcome::Reject => 3,
        Outcome::Inconsistent => 4,
        Outcome::TooLarge => 5,
    }
}

fn parse_class(s: &str) -> Result<ModelClass, Failure> {
    s.parse::<ModelClass>().map_err(|e| usage(e.to_string()))
}

fn cmd_decide(a: DecideArgs) -> CliResult {
    let m = load_machine(&a.machine)?;
    let g = load_graph(&a.graph)?;
    let mc = parse_class(&a.class)?;
    let violations = check_model_class(&m, &mc);
    if !violations.is_empty() {
        let mut msg = format!("machine does not fit class {mc}:");
        for v in &violations {
            msg.push_str("\n  - ");
            msg.push_str(v);
        }
        return Err(invalid(msg));
    }
    let opts = DecideOptions {
        max_configs: a.caps.max_configs,
        max_product: a.caps.max_product,
        witness: a.witness,
        weak_method: if a.weak_product {
            WeakMethod::PendingProduct
        } else {
            WeakMethod::Coverage
        },
    };
    let v = decide(&m, &g, &mc, &opts)?;
    if let Some(path) = &a.dot {
        let cg = build_config_graph(&m, &g, mc.selection, a.caps.max_configs)?;
        std::fs::write(path, cg.to_dot(&m)).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    if a.json || a.witness {
        let mut doc = v.to_json(&m, &g);
        doc["class"] = json!(mc.to_string());
        doc["machine"] = json!(m.name());
        print_json(&doc);
    } else {
        println!(
            "{} ({} configurations, {} components)",
            v.outcome, v.stats.configs, v.stats.components
        );
        if let Some(n) = &v.note {
            println!("note: {n}");
        }
    }
    Ok(outcome_code(v.outcome))
}

fn load_policy(s: &str, g: &LabeledGraph) -> Result<Policy, Failure> {
    let Some(path) = s.strip_prefix("file:") else {
        return s.parse::<Policy>().map_err(|e| usage(e.to_string()));
    };
    let doc: Value = serde_json::from_str(&read(Path::new(path))?)
        .map_err(|e| invalid(format!("schedule {path}: {e}")))?;
    let rows = doc
        .as_array()
        .ok_or_else(|| invalid("schedule must be an array of selections"))?;
    let mut sched = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let items = row
            .as_array()
            .ok_or_else(|| invalid(format!("schedule[{i}] must be an array")))?;
        let mut sel = Vec::with_capacity(items.len());
        for x in items {
            let v = match x {
                Value::String(id) => g.index_of(id),
                Value::Number(n) => n.as_u64().map(|n| n as usize).filter(|&n| n < g.n()),
                _ => None,
            }
            .ok_or_else(|| invalid(format!("schedule[{i}]: unknown node {x}")))?;
            sel.push(v);
        }
        sched.push(sel);
    }
    if sched.is_empty() {
        return Err(invalid("schedule is empty"));
    }
    Ok(Policy::Schedule(sched))
}

fn cmd_run(a: RunArgs) -> CliResult {
    if a.steps == 0 {
        return Err(usage("--steps must be positive"));
    }
    let m = load_machine(&a.machine)?;
    let g = load_graph(&a.graph)?;
    let policy = load_policy(&a.policy, &g)?;
    let trace = simulate(&m, &g, &policy, a.steps, a.seed)?;
    if let Some(path) = &a.dot_config_graph {
        let cg = build_config_graph(&m, &g, policy.selection(), a.max_configs)?;
        std::fs::write(path, cg.to_dot(&m)).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))?;
    }
    if a.json {
        print_json(&trace_to_json(&trace, &m, &g));
    } else {
        for (t, c) in trace.configurations.iter().enumerate() {
            let names: Vec<&str> = c.iter().map(|&q| m.state_name(q)).collect();
            println!("{t:>6}  {}", names.join(" "));
        }
        println!("terminal: {}", trace.terminal);
    }
    Ok(0)
}

fn cmd_transform(a: TransformArgs) -> CliResult {
    let out = if a.name == "from-popproto" {
        let [p] = a.inputs.as_slice() else {
            return Err(usage("from-popproto takes one protocol"));
        };
        distauto::transforms::popproto_to_automaton(&load_protocol(p)?)?
    } else {
        if !catalog::TRANSFORM_NAMES.contains(&a.name.as_str()) {
            return Err(usage(format!(
                "unknown transform {:?}; known: {}",
                a.name,
                catalog::TRANSFORM_NAMES.join(", ")
            )));
        }
        let machines = a.inputs.iter().map(|s| load_machine(s)).collect::<Result<Vec<_>, _>>()?;
        let mut params = json!({ "combinator": a.combinator });
        if let Some(k) = a.k {
            params["k"] = json!(k);
        } else if a.name == "decount" {
            return Err(usage("decount needs --k"));
        }
        catalog::apply_transform(&a.name, &machines, &params)?
    };
    let doc = if a.rules {
        machine_rules_value(&out, distauto::machine::TABLE_CAP)?
    } else {
        let mut doc = machine_to_value(&out)?;
        doc["states"] = json!(out.states());
        doc
    };
    print_json(&doc);
    Ok(0)
}

fn cmd_zoo(cmd: ZooCmd) -> CliResult {
    match cmd {
        ZooCmd::List => {
            for e in zoo::all_entries() {
                println!("{:<20} {:<34} {} states", e.name, e.model_class.to_string(), e.machine.num_states());
            }
        }
        ZooCmd::Get { name, reference } => {
            let e = zoo::zoo_entry(&name)?;
            let doc = if reference {
                json!({ "builtin": e.name })
            } else {
                machine_rules_value(&e.machine, 100_000).unwrap_or_else(|_| json!({ "builtin": e.name }))
            };
            print_json(&doc);
        }
    }
    Ok(0)
}

fn cmd_protocol(cmd: ProtocolCmd) -> CliResult {
    match cmd {
        ProtocolCmd::Get { name } => {
            print_json(&builtin_protocol(&name)?.to_json());
            Ok(0)
        }
        ProtocolCmd::Decide { protocol, graph, json } => {
            let pp = load_protocol(&protocol)?;
            let g = load_graph(&graph)?;
            let v = pp_decide(&pp, &g)?;
            if json {
                print_json(&json!({ "outcome": v.outcome, "stats": v.stats }));
            } else {
                println!("{} ({} configurations)", v.outcome, v.stats.configs);
            }
            Ok(outcome_code(v.outcome))
        }
    }
}

/// Result of one (machine, class) cell over a corpus.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Cell {
    Recognizes,
    Wrong,
    Inconsistent,
    Unknown,
}

impl Cell {
    fn mark(self) -> &'static str {
        match self {
            Cell::Recognizes => "✓",
            Cell::Wrong => "✗",
            Cell::Inconsistent => "!",
            Cell::Unknown => "?",
        }
    }
}

fn cmd_table(a: TableArgs) -> CliResult {
    let entries = match &a.zoo {
        None => zoo::all_entries(),
        Some(list) => split_labels(list)
            .into_iter()
            .map(zoo::zoo_entry)
            .collect::<Result<Vec<_>, _>>()?,
    };
    let dir_corpus = match &a.corpus {
        Some(d) => Some(load_corpus_dir(d)?.into_iter().map(|(_, g)| g).collect::<Vec<_>>()),
        None => None,
    };
    let base = connected_corpus(a.max_nodes);
    let classes = ModelClass::all();
    let opts = DecideOptions {
        max_configs: a.max_configs,
        ..DecideOptions::default()
    };
    let mut jobs = Vec::new();
    for (ei, e) in entries.iter().enumerate() {
        for (ci, mc) in classes.iter().enumerate() {
            if check_model_class(&e.machine, mc).is_empty() {
                jobs.push((ei, ci));
            }
        }
    }
    let corpora: Vec<Vec<LabeledGraph>> = entries
        .iter()
        .map(|e| match &dir_corpus {
            Some(gs) => gs.clone(),
            None => {
                let alpha = e.corpus_alphabet();
                base.iter().flat_map(|g| labelings(g, &alpha)).collect()
            }
        })
        .collect();
    let cells: Vec<((usize, usize), Cell)> = jobs
        .par_iter()
        .map(|&(ei, ci)| {
            let e = &entries[ei];
            let mut cell = Cell::Recognizes;
            for g in &corpora[ei] {
                let outcome = match decide(&e.machine, g, &classes[ci], &opts) {
                    Ok(v) => v.outcome,
                    Err(_) => Outcome::TooLarge,
                };
                let next = match outcome {
                    Outcome::Inconsistent => Cell::Inconsistent,
                    Outcome::TooLarge => Cell::Unknown,
                    o if o == Outcome::from_bool((e.oracle)(g)) => Cell::Recognizes,
                    _ => Cell::Wrong,
                };
                cell = match (cell, next) {
                    (Cell::Inconsistent, _) | (_, Cell::Inconsistent) => Cell::Inconsistent,
                    (Cell::Wrong, _) | (_, Cell::Wrong) => Cell::Wrong,
                    (Cell::Unknown, _) | (_, Cell::Unknown) => Cell::Unknown,
                    _ => Cell::Recognizes,
                };
            }
            ((ei, ci), cell)
        })
        .collect();
    let lookup = |ei: usize, ci: usize| cells.iter().find(|(k, _)| *k == (ei, ci)).map(|(_, c)| *c);
    if a.json {
        let rows: Vec<Value> = entries
            .iter()
            .enumerate()
            .map(|(ei, e)| {
                let cols: serde_json::Map<String, Value> = classes
                    .iter()
                    .enumerate()
                    .filter_map(|(ci, mc)| lookup(ei, ci).map(|c| (mc.to_string(), json!(c.mark()))))
                    .collect();
                json!({ "machine": e.name, "graphs": corpora[ei].len(), "classes": cols })
            })
            .collect();
        print_json(&Value::Array(rows));
        return Ok(0);
    }
    println!("✓ recognizes on corpus   ✗ wrong verdict   ! inconsistent   ? over caps   . not applicable");
    for (ei, e) in entries.iter().enumerate() {
        println!("\n{} ({} graphs)", e.name, corpora[ei].len());
        for (ci, mc) in classes.iter().enumerate() {
            let mark = lookup(ei, ci).map_or(".", Cell::mark);
            println!("  {mark} {mc}");
        }
    }
    Ok(0)
}
