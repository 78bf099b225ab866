//! Command-line front end. Exit status: 0 when every certification passes,
//! 2 when a certified bound fails (a witness instance is printed), 1 on
//! usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;

use multialloc::harness::generate::{generate, Family};
use multialloc::harness::instance::InstanceFile;
use multialloc::harness::report::{AgentRow, RunReport};
use multialloc::harness::search::{search_d3, SearchConfig};
use multialloc::harness::suite::{run_suite, SuiteConfig};
use multialloc::mms::{
    guarantee_for_n, mms_with_partition, sampling_pipeline_with, BruteProvider, FileProvider,
    MultiAllocationProvider, PipelineOptions,
};
use multialloc::multigraph::{
    certify_graph_allocation, from_two_multi, pad_even, token_game_with, JumpRule, MultiGraph,
    TokenGameConfig,
};
use multialloc::picking_game::{omega, GameQuery, PickSequence};
use multialloc::reduction::{transform_vector_with, transform_with, HalvingOptions};
use multialloc::{ItemSet, Rational, SetFunction, Valuation};

#[derive(Parser)]
#[command(name = "multialloc", version, about = "Exact multi-allocation to allocation tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Value an agent can guarantee in a picking game.
    Omega(OmegaArgs),
    /// Orient a width-2 instance with the token game and certify it.
    GraphAllocate(GraphArgs),
    /// Turn a d-multi-allocation into an allocation and certify it.
    Transform(TransformArgs),
    /// Exact maximin share of each agent.
    Mms(MmsArgs),
    /// Peel, obtain a multi-allocation, transform, certify against α·MMS.
    Pipeline(PipelineArgs),
    /// Which MMS fraction is reached for n agents.
    Guarantee(GuaranteeArgs),
    /// Write a random instance.
    Gen(GenArgs),
    /// Run the seeded cross-module property suite.
    Verify(VerifyArgs),
    /// Search width-3 instances against the exact-3 bound.
    SearchD3(SearchArgs),
}

#[derive(Args)]
struct Output {
    /// Write a JSON run report here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the witness instance here when a bound fails.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
struct OmegaArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Picking sequence such as `pqpq`; its length must match the items.
    #[arg(long)]
    sequence: String,
    #[arg(long, default_value_t = 0)]
    agent: usize,
    /// Comma-separated item ids; defaults to all items.
    #[arg(long)]
    items: Option<String>,
}

#[derive(Args)]
struct GraphArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Jump to a seeded random live vertex instead of the lowest one.
    #[arg(long)]
    jump_seed: Option<u64>,
    /// Write the token trace log here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Uniform width bound; defaults to the instance's declared d.
    #[arg(long, conflicts_with = "d_vector")]
    d: Option<usize>,
    /// Per-agent width bounds, comma-separated.
    #[arg(long)]
    d_vector: Option<String>,
    #[arg(long)]
    jump_seed: Option<u64>,
    /// Write the token traces of all levels here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct MmsArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Only this agent; defaults to all.
    #[arg(long)]
    agent: Option<usize>,
    /// Number of parts; defaults to the number of agents.
    #[arg(long)]
    parts: Option<usize>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProviderKind {
    Brute,
    File,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Exact ratio such as `1/2`.
    #[arg(long)]
    rho: String,
    #[arg(long)]
    d: usize,
    #[arg(long, value_enum, default_value = "brute")]
    provider: ProviderKind,
    /// Instance file whose multi-allocation the file provider supplies;
    /// defaults to the input instance.
    #[arg(long)]
    provider_file: Option<PathBuf>,
    /// Recompute thresholds on the shrinking instance after each peel.
    #[arg(long)]
    recompute_thresholds: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GuaranteeArgs {
    #[arg(long)]
    n: String,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    agents: usize,
    #[arg(long, default_value_t = 5)]
    items: usize,
    /// Also draw a random multi-allocation of width at most d.
    #[arg(long)]
    d: Option<usize>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiplies the default trial counts.
    #[arg(long, default_value_t = 1)]
    scale: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long, default_value_t = 4)]
    max_agents: usize,
    #[arg(long, default_value_t = 5)]
    max_items: usize,
    #[arg(long, default_value = "xos")]
    family: String,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// `Ok(false)` means a certified bound failed.
fn run(command: Command) -> Result<bool> {
    match command {
        Command::Omega(a) => cmd_omega(a),
        Command::GraphAllocate(a) => cmd_graph(a),
        Command::Transform(a) => cmd_transform(a),
        Command::Mms(a) => cmd_mms(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Guarantee(a) => cmd_guarantee(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a),
        Command::SearchD3(a) => cmd_search(a),
    }
}

struct Loaded {
    bytes: Vec<u8>,
    file: InstanceFile,
    valuations: Vec<Valuation>,
}

impl Loaded {
    fn refs(&self) -> Vec<&dyn SetFunction> {
        self.valuations.iter().map(|v| v as &dyn SetFunction).collect()
    }
}

fn load(path: &Path) -> Result<Loaded> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).context("instance file is not UTF-8")?;
    let file = InstanceFile::from_json(text).with_context(|| format!("loading {}", path.display()))?;
    let valuations = file.valuations()?;
    Ok(Loaded {
        bytes,
        file,
        valuations,
    })
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().with_context(|| format!("invalid integer {s:?}")))
        .collect()
}

fn jump_rule(seed: Option<u64>) -> JumpRule {
    seed.map_or(JumpRule::Lowest, JumpRule::Random)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes the report and, on failure, prints and optionally writes the witness.
fn finish(report: &RunReport, output: &Output, witness: &InstanceFile) -> Result<bool> {
    if let Some(path) = &output.report {
        write_file(path, &report.to_json())?;
    }
    if !report.pass {
        let text = witness.to_json();
        println!("certification FAILED; witness instance:\n{text}");
        if let Some(path) = &output.witness {
            write_file(path, &text)?;
        }
    }
    Ok(report.pass)
}

fn cmd_omega(a: OmegaArgs) -> Result<bool> {
    let loaded = load(&a.instance)?;
    let Some(v) = loaded.valuations.get(a.agent) else {
        bail!("agent {} out of range", a.agent);
    };
    let items: ItemSet = match &a.items {
        Some(list) => parse_list(list)?.into_iter().collect(),
        None => ItemSet::full(loaded.file.items),
    };
    let sequence: PickSequence = a.sequence.parse()?;
    let result = omega(&GameQuery {
        sequence,
        items,
        valuation: v,
    })?;
    println!("omega = {}", result.omega);
    Ok(true)
}

fn cmd_graph(a: GraphArgs) -> Result<bool> {
    let start = Instant::now();
    let loaded = load(&a.instance)?;
    let n = loaded.file.agents;
    let (graph, direct): (MultiGraph, Vec<(usize, usize)>) = match loaded.file.graph()? {
        Some(g) => (g, Vec::new()),
        None => match loaded.file.multi_allocation()? {
            Some((alloc, _)) => from_two_multi(&alloc)?,
            None => bail!("instance has neither a graph nor a multi-allocation"),
        },
    };
    let refs = loaded.refs();
    let padded = pad_even(&graph);
    let config = TokenGameConfig {
        start: a.start,
        jump: jump_rule(a.jump_seed),
    };
    let (orientation, trace) = token_game_with(&padded, &refs, &vec![ItemSet::EMPTY; n], config)?;
    let certs = certify_graph_allocation(&padded, &refs, &orientation)?;
    let mut bundles = orientation.bundles(&padded);
    if bundles.is_empty() {
        bundles = vec![ItemSet::EMPTY; n];
    }
    for &(agent, item) in &direct {
        bundles[agent].insert(item);
    }

    let mut report = RunReport::new("graph-allocate", &loaded.bytes);
    report.seed = a.jump_seed;
    for c in &certs {
        report.push(
            AgentRow::new(c.agent, None, c.value)
                .bound("omega_q", c.omega_q)
                .bound("half_gap", c.half_gap)
                .bound("half_mms2", c.half_mms2),
        );
    }
    println!("agent  value  omega_q  (v(M)-delta)/2  MMS2/2  pass  bundle");
    for c in &certs {
        println!(
            "{:>5}  {:>5}  {:>7}  {:>14}  {:>6}  {:>4}  {}",
            c.agent,
            c.value,
            c.omega_q,
            c.half_gap,
            c.half_mms2,
            if c.pass() { "yes" } else { "NO" },
            bundles[c.agent]
        );
    }
    if let Some(path) = &a.trace {
        write_file(path, &trace.to_log())?;
        report.trace = Some(path.display().to_string());
    }
    report.details = serde_json::json!({
        "bundles": bundles,
        "auxiliary_edges": padded.auxiliary_count(),
    });
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    let witness = loaded.file.clone();
    finish(&report, &a.output, &witness)
}

fn cmd_transform(a: TransformArgs) -> Result<bool> {
    let start = Instant::now();
    let loaded = load(&a.instance)?;
    let Some((alloc, declared)) = loaded.file.multi_allocation()? else {
        bail!("instance has no multi-allocation");
    };
    let refs = loaded.refs();
    let options = HalvingOptions {
        start: 0,
        jump: jump_rule(a.jump_seed),
    };
    let outcome = match &a.d_vector {
        Some(list) => transform_vector_with(&alloc, &refs, &parse_list(list)?, options)?,
        None => transform_with(&alloc, &refs, a.d.unwrap_or(declared), options)?,
    };
    let rep = &outcome.report;
    let mut report = RunReport::new("transform", &loaded.bytes);
    report.seed = a.jump_seed;
    println!("levels: {}, widths: {:?}", rep.depth, rep.widths);
    println!("agent  initial  delta  d_hat  bound  final  pass  bundle");
    for ag in &rep.agents {
        println!(
            "{:>5}  {:>7}  {:>5}  {:>5}  {:>5}  {:>5}  {:>4}  {}",
            ag.agent,
            ag.initial,
            ag.delta,
            ag.d_used,
            ag.bound,
            ag.final_value,
            if ag.pass { "yes" } else { "NO" },
            outcome.allocation.bundle(ag.agent)
        );
        report.push(AgentRow::new(ag.agent, Some(ag.initial), ag.final_value).bound("width", ag.bound));
    }
    report.pass &= rep.all_pass() && outcome.allocation.is_allocation();
    if let Some(path) = &a.trace {
        let log: String = outcome
            .traces
            .iter()
            .enumerate()
            .map(|(k, t)| format!("# level {k}\n{}", t.to_log()))
            .collect();
        write_file(path, &log)?;
        report.trace = Some(path.display().to_string());
    }
    report.details = serde_json::json!({
        "transform": rep,
        "allocation": outcome.allocation,
    });
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    finish(&report, &a.output, &loaded.file)
}

fn cmd_mms(a: MmsArgs) -> Result<bool> {
    let loaded = load(&a.instance)?;
    let parts = a.parts.unwrap_or(loaded.file.agents);
    let items = ItemSet::full(loaded.file.items);
    let agents: Vec<usize> = match a.agent {
        Some(i) if i < loaded.file.agents => vec![i],
        Some(i) => bail!("agent {i} out of range"),
        None => (0..loaded.file.agents).collect(),
    };
    for i in agents {
        let (value, partition) = mms_with_partition(items, &loaded.valuations[i], parts)?;
        let shown: Vec<String> = partition.iter().map(|p| p.to_string()).collect();
        println!("agent {i}: MMS = {value} via {}", shown.join(" "));
    }
    Ok(true)
}

fn cmd_pipeline(a: PipelineArgs) -> Result<bool> {
    let start = Instant::now();
    let loaded = load(&a.instance)?;
    let rho: Rational = a.rho.parse().with_context(|| format!("invalid rho {:?}", a.rho))?;
    let refs = loaded.refs();
    let file_provider;
    let provider: &dyn MultiAllocationProvider = match a.provider {
        ProviderKind::Brute => &BruteProvider,
        ProviderKind::File => {
            let source = match &a.provider_file {
                Some(p) => load(p)?.file,
                None => loaded.file.clone(),
            };
            let Some((allocation, _)) = source.multi_allocation()? else {
                bail!("provider file has no multi-allocation");
            };
            file_provider = FileProvider { allocation };
            &file_provider
        }
    };
    let options = PipelineOptions {
        recompute_thresholds: a.recompute_thresholds,
        ..PipelineOptions::default()
    };
    let rep = match sampling_pipeline_with(loaded.file.items, &refs, provider, rho, a.d, options) {
        Ok(rep) => rep,
        Err(e @ multialloc::mms::PipelineError::Insufficient { .. }) => {
            println!("{e}");
            let mut report = RunReport::new("pipeline", &loaded.bytes);
            report.pass = false;
            report.details = serde_json::json!({ "error": e.to_string() });
            return finish(&report, &a.output, &loaded.file);
        }
        Err(e) => return Err(e.into()),
    };
    println!("alpha = {}, d_hat = {}, peeled = {:?}, survivors = {:?}", rep.alpha, rep.d_hat, rep.peeled, rep.survivors);
    println!("agent  MMS  target  value  pass  bundle");
    let mut report = RunReport::new("pipeline", &loaded.bytes);
    for ag in &rep.agents {
        println!(
            "{:>5}  {:>3}  {:>6}  {:>5}  {:>4}  {}",
            ag.agent,
            ag.mms,
            ag.target,
            ag.value,
            if ag.pass { "yes" } else { "NO" },
            rep.allocation.bundle(ag.agent)
        );
        report.push(AgentRow::new(ag.agent, None, ag.value).bound("alpha_mms", ag.target));
    }
    report.pass &= rep.all_pass();
    report.details = serde_json::to_value(&rep)?;
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    finish(&report, &a.output, &loaded.file)
}

fn cmd_guarantee(a: GuaranteeArgs) -> Result<bool> {
    let n = parse_big(&a.n)?;
    if n == BigUint::ZERO {
        bail!("n must be at least 1");
    }
    let g = guarantee_for_n(&n);
    println!("n = {}", g.n);
    println!("d = {}", g.d);
    println!("d_hat = {}", g.d_hat);
    println!("alpha = {}", g.alpha);
    println!("guarantee = {}", g.guarantee);
    println!("floor 1/(8 log2 log2 n): {:?}", g.floor_check);
    Ok(!matches!(g.floor_check, multialloc::mms::FloorCheck::Fails))
}

/// Decimal integer, or `a^b`.
fn parse_big(text: &str) -> Result<BigUint> {
    let text = text.trim();
    if let Some((base, exp)) = text.split_once('^') {
        let base: BigUint = base.trim().parse().with_context(|| format!("invalid base {base:?}"))?;
        let exp: u32 = exp.trim().parse().with_context(|| format!("invalid exponent {exp:?}"))?;
        return Ok(base.pow(exp));
    }
    text.parse().with_context(|| format!("invalid integer {text:?}"))
}

fn cmd_gen(a: GenArgs) -> Result<bool> {
    let family: Family = a.family.parse()?;
    let file = generate(family, a.agents, a.items, a.seed, a.d)?;
    let text = file.to_json();
    match &a.out {
        Some(path) => write_file(path, &text)?,
        None => println!("{text}"),
    }
    Ok(true)
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let start = Instant::now();
    let suite = run_suite(SuiteConfig {
        seed: a.seed,
        scale: a.scale,
    });
    for c in &suite.checks {
        println!(
            "[{}] {:<20} trials {:>5}  skipped {:>4}  violations {}  ({} ms)",
            if c.pass() { "PASS" } else { "FAIL" },
            c.name,
            c.trials,
            c.skipped,
            c.violations.len(),
            c.elapsed_ms
        );
    }
    let mut report = RunReport::new("verify", a.seed.to_string().as_bytes());
    report.seed = Some(a.seed);
    report.pass = suite.pass();
    report.details = serde_json::to_value(&suite)?;
    report.elapsed_ms = start.elapsed().as_millis() as u64;
    if let Some(path) = &a.output.report {
        write_file(path, &report.to_json())?;
    }
    if let Some(v) = suite.violations().next() {
        println!("first violation: {} trial {}: {}", v.check, v.trial, v.detail);
        if let Some(w) = &v.witness {
            let text = w.to_json();
            println!("witness instance:\n{text}");
            if let Some(path) = &a.output.witness {
                write_file(path, &text)?;
            }
        }
    }
    Ok(suite.pass())
}

fn cmd_search(a: SearchArgs) -> Result<bool> {
    let family: Family = a.family.parse()?;
    let rep = search_d3(SearchConfig {
        seed: a.seed,
        budget: a.budget,
        max_agents: a.max_agents,
        max_items: a.max_items,
        family,
    });
    println!("trials: {}", rep.trials);
    if let Some(s) = rep.tightest_slack {
        println!("tightest best-allocation slack: {s}");
    }
    if let Some(s) = rep.transform_worst_slack {
        println!("transform worst slack against exact-3 bounds: {s}");
    }
    if rep.findings.is_empty() {
        println!("none found in budget");
    } else {
        println!("{} candidate(s) flagged for manual review", rep.findings.len());
        for f in &rep.findings {
            println!("trial {}: best slack {}", f.trial, f.best_slack);
        }
    }
    if let Some(path) = &a.report {
        write_file(path, &serde_json::to_string_pretty(&rep)?)?;
    }
    Ok(true)
}
