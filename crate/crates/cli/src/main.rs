use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sdg_core::bounds::{bounds_report, effective_size_cap, SizeCap};
use sdg_core::dp::{solve_dp, solve_dp_auto, MAX_TOPOLOGY_SIZE};
use sdg_core::instances::{
    make_lemma2, make_lemma3, random_instance, random_triangle_covered, reduce_3ctcg, GraphFilter,
};
use sdg_core::io::{
    instance_to_json, outcome_to_json, parse_instance, parse_outcome, InstanceFile,
    InstanceOverrides,
};
use sdg_core::oracle::{solve_exact_with, OracleOptions, DEFAULT_LIMIT_N};
use sdg_core::stability::{find_ir_deviation, find_ns_deviation, Deviation};
use sdg_core::treewidth::{build_nice_decomposition, NiceTreeDecomposition};
use sdg_core::vc::{solve_vc, vertex_cover_at_most};
use sdg_core::{Instance, ScoringVector, SdgError, SolveMode, SolveResult};

/// Largest vertex cover for which `--algo auto` picks the cover solver.
const AUTO_VC_MAX: usize = 6;

#[derive(Parser)]
#[command(
    name = "sdg",
    version,
    about = "Exact solvers for score-based social distance games"
)]
struct Cli {
    /// Pretty-print JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Worker threads for parallel solvers (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a welfare-maximizing outcome.
    Solve(SolveArgs),
    /// Validate an outcome and look for deviations.
    Check(CheckArgs),
    /// Report coalition size and diameter bounds.
    Bounds(InputArgs),
    /// Write a generated instance.
    Gen(GenArgs),
    /// Compute a nice tree decomposition.
    Decompose(DecomposeArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Instance file (JSON or edge list).
    #[arg(long)]
    input: PathBuf,
    /// Scoring vector, comma separated; required for edge lists.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    scoring: Option<Vec<i64>>,
    /// Treat the scoring vector as open.
    #[arg(long)]
    open: bool,
}

impl InputArgs {
    fn load(&self) -> anyhow::Result<Instance> {
        let text = read(&self.input)?;
        let overrides = InstanceOverrides {
            scoring: self.scoring.clone(),
            open: self.open.then_some(true),
        };
        Ok(parse_instance(&text, &overrides)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Oracle,
    Dp,
    Vc,
    Auto,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "wf")]
    mode: SolveMode,
    #[arg(long, value_enum, default_value = "auto")]
    algo: Algo,
    /// Largest coalition size considered: a number or `auto`.
    #[arg(long)]
    size_cap: Option<String>,
    /// Answer the decision question "welfare at least b" through the exit code.
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<i64>,
    /// Write the best outcome to this file.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Nice tree decomposition to use with `--algo dp`.
    #[arg(long)]
    decomposition: Option<PathBuf>,
    /// Largest connected component the oracle accepts.
    #[arg(long, default_value_t = DEFAULT_LIMIT_N)]
    limit_n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stability {
    Ir,
    Ns,
    None,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Outcome JSON file.
    #[arg(long)]
    outcome: PathBuf,
    #[arg(long, value_enum, default_value = "ns")]
    stability: Stability,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Lemma2,
    Lemma3,
    #[value(name = "3ctcg")]
    Ctcg,
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    /// Agents (random) or triangles (3ctcg).
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Edge probability (random) or cross-triangle edge probability (3ctcg).
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Scoring vector for random instances.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "1,-1"
    )]
    scoring: Vec<i64>,
    #[arg(long)]
    open: bool,
    /// Redraw random graphs until connected.
    #[arg(long)]
    connected: bool,
    /// Score of adjacent agents in the 3ctcg reduction.
    #[arg(long, default_value_t = 1)]
    s1: i64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Outcome of a command: a JSON document and an exit code.
struct Report {
    doc: Value,
    code: u8,
}

fn to_text(doc: &Value, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(doc).expect("JSON values serialize")
    } else {
        serde_json::to_string(doc).expect("JSON values serialize")
    }
}

fn write_json(path: &Path, doc: &Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(doc)? + "\n";
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn parse_cap(text: Option<&str>) -> anyhow::Result<Option<SizeCap>> {
    match text {
        None => Ok(None),
        Some("auto") => Ok(Some(SizeCap::Auto)),
        Some(t) => match t.parse::<usize>() {
            Ok(0) => Err(SdgError::Contract("size cap must be at least 1".into()).into()),
            Ok(k) => Ok(Some(SizeCap::Fixed(k))),
            Err(_) => Err(SdgError::Parse(format!(
                "size cap {t:?} is neither a number nor `auto`"
            ))
            .into()),
        },
    }
}

fn solve(args: &SolveArgs) -> anyhow::Result<Report> {
    let instance = args.input.load()?;
    let cap = parse_cap(args.size_cap.as_deref())?;
    let decomposition: Option<NiceTreeDecomposition> = match &args.decomposition {
        Some(path) => Some(
            serde_json::from_str(&read(path)?)
                .map_err(|e| SdgError::Parse(format!("decomposition JSON: {e}")))?,
        ),
        None => None,
    };
    let algo = match args.algo {
        Algo::Auto => choose_algo(&instance, decomposition.is_some()),
        a => a,
    };
    let oracle_opts = |cap: Option<SizeCap>| OracleOptions {
        limit_n: args.limit_n,
        size_cap: match cap {
            Some(SizeCap::Fixed(k)) => Some(k),
            _ => None,
        },
        prune: true,
    };
    let (name, result): (&str, SolveResult) = match algo {
        Algo::Oracle => (
            "oracle",
            solve_exact_with(&instance, args.mode, &oracle_opts(cap))?,
        ),
        Algo::Dp => {
            let cap = cap.unwrap_or(SizeCap::Auto);
            let result = match &decomposition {
                Some(td) => solve_dp(&instance, args.mode, cap, td)?,
                None => solve_dp_auto(&instance, args.mode, cap)?,
            };
            ("dp", result)
        }
        Algo::Vc => {
            if cap.is_some() {
                bail!(SdgError::Contract(
                    "--size-cap does not apply to the vc solver".into()
                ));
            }
            ("vc", solve_vc(&instance, args.mode)?)
        }
        Algo::Auto => unreachable!("auto resolved above"),
    };
    let outcome = result.best.as_ref().map(|o| outcome_to_json(&instance, o));
    if let (Some(path), Some(doc)) = (&args.output, &outcome) {
        write_json(path, doc)?;
    }
    let mut doc = json!({
        "algo": name,
        "mode": args.mode.to_string(),
        "welfare": result.welfare,
        "optimal_count": result.optimal_count,
        "explored": result.explored,
        "outcome": outcome,
    });
    let code = match args.threshold {
        Some(b) => {
            let yes = result.best.is_some() && result.welfare >= b.into();
            doc["threshold"] = json!(b);
            doc["decision"] = json!(yes);
            if yes {
                0
            } else {
                1
            }
        }
        None if result.best.is_some() => 0,
        None => 1,
    };
    Ok(Report { doc, code })
}

fn choose_algo(instance: &Instance, have_decomposition: bool) -> Algo {
    if have_decomposition {
        return Algo::Dp;
    }
    if vertex_cover_at_most(instance, AUTO_VC_MAX).is_some() {
        return Algo::Vc;
    }
    if !instance.is_open() {
        let td = build_nice_decomposition(instance);
        let cap = effective_size_cap(instance, SizeCap::Auto, td.width()).cap;
        if cap <= MAX_TOPOLOGY_SIZE {
            return Algo::Dp;
        }
    }
    Algo::Oracle
}

fn deviation_json(instance: &Instance, d: &Deviation) -> Value {
    let mut v = serde_json::to_value(d).expect("deviation serializes");
    v["agent_label"] = json!(instance.label(d.agent));
    v
}

fn check(args: &CheckArgs) -> anyhow::Result<Report> {
    let instance = args.input.load()?;
    let outcome = parse_outcome(&read(&args.outcome)?, &instance)?;
    let (name, deviation) = match args.stability {
        Stability::Ir => ("ir", find_ir_deviation(&instance, &outcome)),
        Stability::Ns => ("ns", find_ns_deviation(&instance, &outcome)),
        Stability::None => ("none", None),
    };
    let doc = json!({
        "valid": true,
        "welfare": outcome.welfare(),
        "stability": name,
        "stable": deviation.is_none(),
        "deviation": deviation.as_ref().map(|d| deviation_json(&instance, d)),
    });
    Ok(Report {
        doc,
        code: if deviation.is_none() { 0 } else { 1 },
    })
}

fn bounds(args: &InputArgs) -> anyhow::Result<Report> {
    let instance = args.load()?;
    let doc = serde_json::to_value(bounds_report(&instance))?;
    Ok(Report { doc, code: 0 })
}

fn gen(args: &GenArgs) -> anyhow::Result<Report> {
    let doc = match args.kind {
        Kind::Lemma2 | Kind::Lemma3 => {
            let f = if matches!(args.kind, Kind::Lemma2) {
                make_lemma2()
            } else {
                make_lemma3()
            };
            let labels = f
                .named_agents
                .iter()
                .map(|(&name, &id)| (id, name.to_string()))
                .collect();
            instance_to_json(&f.instance.with_labels(labels)?)
        }
        Kind::Ctcg => {
            let g = random_triangle_covered(args.n, args.p, args.seed);
            let (instance, threshold) = reduce_3ctcg(&g, args.s1)?;
            let file = InstanceFile {
                threshold: Some(threshold),
                triangles: Some(g.triangles.clone()),
                ..InstanceFile::from_instance(&instance)
            };
            serde_json::to_value(file)?
        }
        Kind::Random => {
            let scoring = ScoringVector::new(args.scoring.clone())?;
            let filter = if args.connected {
                GraphFilter::Connected
            } else {
                GraphFilter::None
            };
            instance_to_json(&random_instance(
                args.n, args.p, args.seed, scoring, args.open, filter,
            ))
        }
    };
    if let Some(path) = &args.output {
        write_json(path, &doc)?;
    }
    Ok(Report { doc, code: 0 })
}

fn decompose(args: &DecomposeArgs) -> anyhow::Result<Report> {
    let instance = args.input.load()?;
    let td = build_nice_decomposition(&instance);
    let doc = serde_json::to_value(&td)?;
    if let Some(path) = &args.output {
        write_json(path, &doc)?;
    }
    log::info!(
        "decomposition of width {} with {} nodes",
        td.width(),
        td.nodes.len()
    );
    Ok(Report { doc, code: 0 })
}

fn run(cli: &Cli) -> anyhow::Result<Report> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("cannot configure worker threads")?;
    }
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Check(a) => check(a),
        Command::Bounds(a) => bounds(a),
        Command::Gen(a) => gen(a),
        Command::Decompose(a) => decompose(a),
    }
}

/// Error kind and exit code: bad input is 2, anything else 3.
fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    if let Some(e) = err.downcast_ref::<SdgError>() {
        return match e {
            SdgError::InvalidInstance(_) => ("invalid_instance", 2),
            SdgError::InvalidScoring(_) => ("invalid_scoring", 2),
            SdgError::InvalidOutcome { .. } => ("invalid_outcome", 2),
            SdgError::InvalidCoalition(_) => ("invalid_coalition", 2),
            SdgError::InvalidDecomposition(_) => ("invalid_decomposition", 2),
            SdgError::InvalidReduction(_) => ("invalid_reduction", 2),
            SdgError::Parse(_) => ("parse", 2),
            SdgError::Contract(_) => ("usage", 2),
            SdgError::LimitExceeded { .. } => ("limit_exceeded", 2),
            SdgError::Internal(_) => ("internal", 3),
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return ("io", 2);
    }
    ("internal", 3)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let pretty = cli.pretty;
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(report)) => {
            println!("{}", to_text(&report.doc, pretty));
            ExitCode::from(report.code)
        }
        Ok(Err(err)) => {
            let (kind, code) = classify(&err);
            let doc = json!({"error": {"kind": kind, "message": format!("{err:#}")}});
            eprintln!("{}", to_text(&doc, pretty));
            ExitCode::from(code)
        }
        Err(_) => {
            let doc = json!({"error": {"kind": "internal", "message": "solver panicked"}});
            eprintln!("{}", to_text(&doc, pretty));
            ExitCode::from(3)
        }
    }
}
