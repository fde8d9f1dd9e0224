use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use wsbmf::bigraph::{assemble_weight_mask, Part};
use wsbmf::density::select_c;
use wsbmf::experiment::{run_fig2, run_fig3, ProtocolConfig};
use wsbmf::factorize::{detect_masked, ContinuousMembership, DEFAULT_SEED};
use wsbmf::ingest::{
    ingest_votes, parse_cover, parse_edgelist, parse_priors, parse_votes_csv, sha256_hex, write_cover,
    write_edgelist, write_priors, CoverDocument, CoverFormat,
};
use wsbmf::metrics::{exponential_entropy, gnmi, nmi, HardPartition};
use wsbmf::synth::{gen_classic, gen_nonoverlapping, gen_overlapping, sample_priors};
use wsbmf::{BipartiteGraph, CommunityCover, Error, PriorConstraints, SolverConfig, WeightMask};

const MANIFEST_SCHEMA: &str = "wsbmf-manifest/1";
const SWEEP_SCHEMA: &str = "wsbmf-sweep/1";

#[derive(Parser)]
#[command(name = "wsbmf", version, about = "Overlapping community detection in bipartite networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect communities in one network.
    Detect(DetectArgs),
    /// Run detection over a range of community counts and pick one by partition density.
    Sweep(SweepArgs),
    /// Generate a benchmark network with its planted cover.
    Generate(GenerateArgs),
    /// Score a found cover against a reference cover.
    Evaluate(EvaluateArgs),
    /// Print the exponential entropy of each node's membership row.
    Entropy(EntropyArgs),
    /// Run a scripted benchmark protocol.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum InputFormat {
    /// Whitespace-separated `delta_id gamma_id` lines.
    Edgelist,
    /// CSV `voter,bill,vote` records.
    Votes,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Tsv,
    Json,
}

impl From<OutputFormat> for CoverFormat {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Tsv => CoverFormat::Tsv,
            OutputFormat::Json => CoverFormat::Json,
        }
    }
}

impl OutputFormat {
    fn ext(self) -> &'static str {
        match self {
            OutputFormat::Tsv => "tsv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Network file.
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "edgelist")]
    input_format: InputFormat,
    /// Abstention share above which voters and bills are dropped (votes input only).
    #[arg(long, default_value_t = 0.30)]
    abstain_threshold: f64,
    /// Prior file with `e|a id1 id2` lines.
    #[arg(long)]
    priors: Option<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Reliability weight of observed entries.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Number of threshold candidates.
    #[arg(long, default_value_t = 101)]
    grid: usize,
}

impl SolverArgs {
    fn config(&self, communities: usize) -> SolverConfig {
        SolverConfig {
            restarts: self.restarts,
            seed: self.seed,
            gamma: self.gamma,
            threshold_grid: self.grid,
            ..SolverConfig::with_communities(communities)
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of communities.
    #[arg(long)]
    c: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, value_enum, default_value = "tsv")]
    format: OutputFormat,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 2)]
    c_min: usize,
    #[arg(long, default_value_t = 8)]
    c_max: usize,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Family {
    /// Equal communities with p_out = alpha * p_in.
    Classic {
        #[arg(long, default_value_t = 5)]
        communities: usize,
        #[arg(long, default_value_t = 10)]
        nodes_per_side: usize,
        #[arg(long)]
        pin: f64,
        #[arg(long)]
        alpha: f64,
    },
    /// Four 32+32 communities, z_in + z_out = 16.
    Nonoverlap {
        #[arg(long)]
        zout: f64,
    },
    /// Four communities with t shared Δ nodes per consecutive pair.
    Overlap {
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 10.0)]
        zin: f64,
        #[arg(long, default_value_t = 6.0)]
        zout: f64,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    family: Family,
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    seed: u64,
    /// Also sample this share of same-part pairs as priors.
    #[arg(long, global = true)]
    prior_fraction: Option<f64>,
    /// Part the priors are sampled on.
    #[arg(long, default_value = "delta", global = true)]
    prior_part: Part,
    #[arg(long, value_enum, default_value = "tsv", global = true)]
    format: OutputFormat,
    #[arg(long, default_value = ".", global = true)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Nmi,
    Gnmi,
}

#[derive(Clone, Copy, ValueEnum)]
enum PartFilter {
    All,
    Delta,
    Gamma,
}

impl PartFilter {
    fn keeps(self, part: Part) -> bool {
        match self {
            PartFilter::All => true,
            PartFilter::Delta => part == Part::Delta,
            PartFilter::Gamma => part == Part::Gamma,
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    truth: PathBuf,
    found: PathBuf,
    #[arg(long, value_enum, default_value = "nmi")]
    mode: Mode,
    /// Restrict scoring to one part.
    #[arg(long, value_enum, default_value = "all")]
    part: PartFilter,
}

#[derive(Args)]
struct EntropyArgs {
    /// Cover file written by `detect`.
    cover: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    part: PartFilter,
}

#[derive(Clone, Copy, ValueEnum)]
enum Protocol {
    Fig2,
    Fig3,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    name: Protocol,
    /// Comma-separated grid values (z_out for fig2, t for fig3).
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    replicates: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = 0.05)]
    prior_fraction: f64,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 2)]
    c_min: usize,
    #[arg(long, default_value_t = 8)]
    c_max: usize,
    /// Skip the per-instance estimate of c.
    #[arg(long)]
    no_estimate_c: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Input(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Solver(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Solver(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::AllRestartsFailed { .. } | Error::ZeroRow(_) | Error::DegenerateColumn { .. } => {
                Failure::Solver(e.to_string())
            }
            Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))
}

#[derive(Serialize)]
struct InputHash {
    path: String,
    sha256: String,
}

struct Manifest {
    command: &'static str,
    started: Instant,
    inputs: Vec<InputHash>,
    outputs: Vec<String>,
}

impl Manifest {
    fn new(command: &'static str) -> Self {
        Manifest {
            command,
            started: Instant::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn input(&mut self, path: &Path, text: &str) {
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: sha256_hex(text.as_bytes()),
        });
    }

    fn output(&mut self, dir: &Path, name: &str, contents: &str) -> CliResult<()> {
        write(&dir.join(name), contents)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn finish(self, dir: &Path, config: Value, seed: u64) -> CliResult<()> {
        let doc = json!({
            "schema": MANIFEST_SCHEMA,
            "command": self.command,
            "args": std::env::args().skip(1).collect::<Vec<_>>(),
            "config": config,
            "seed": seed,
            "version": env!("CARGO_PKG_VERSION"),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "elapsed_seconds": self.started.elapsed().as_secs_f64(),
        });
        write(&dir.join("manifest.json"), &pretty(&doc))
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

struct LoadedInput {
    graph: BipartiteGraph,
    mask: WeightMask,
    priors: PriorConstraints,
}

fn load_input(args: &InputArgs, gamma: f64, manifest: &mut Manifest) -> CliResult<LoadedInput> {
    let text = read(&args.graph)?;
    manifest.input(&args.graph, &text);
    let (graph, mask) = match args.input_format {
        InputFormat::Edgelist => {
            let graph = parse_edgelist(&text)?;
            let mask = assemble_weight_mask(&graph, gamma)?;
            (graph, mask)
        }
        InputFormat::Votes => {
            let net = ingest_votes(&parse_votes_csv(&text)?, args.abstain_threshold, gamma)?;
            log::info!(
                "vote filtering removed {} voters and {} bills",
                net.removed_voters.len(),
                net.removed_bills.len()
            );
            (net.graph, net.mask)
        }
    };
    let priors = match &args.priors {
        None => PriorConstraints::empty(),
        Some(path) => {
            let text = read(path)?;
            manifest.input(path, &text);
            parse_priors(&text, &graph, gamma)?
        }
    };
    Ok(LoadedInput { graph, mask, priors })
}

fn entropy_table(doc: &CoverDocument) -> String {
    let mut out = String::from("# id\tpart\tentropy\n");
    for r in &doc.nodes {
        if let Some(e) = r.entropy {
            out.push_str(&format!("{}\t{}\t{}\n", r.id, r.part.as_str(), e));
        }
    }
    out
}

fn cmd_detect(args: DetectArgs) -> CliResult<()> {
    let mut manifest = Manifest::new("detect");
    let config = args.solver.config(args.c);
    config.validate()?;
    let input = load_input(&args.input, config.gamma, &mut manifest)?;
    let result = detect_masked(&input.graph, input.mask, &input.priors, &config)?;
    let doc = CoverDocument::from_result(&input.graph, &result, &config);

    ensure_dir(&args.out)?;
    manifest.output(&args.out, &format!("cover.{}", args.format.ext()), &write_cover(&doc, args.format.into()))?;
    manifest.output(&args.out, "entropy.tsv", &entropy_table(&doc))?;
    let cover = result.cover();
    println!(
        "communities={} objective={} density={:.6} outliers={} overlapping={}",
        config.communities,
        result.objective,
        result.density,
        cover.outliers(),
        cover.overlapping()
    );
    let restarts = serde_json::to_value(&result.restarts).expect("serializable");
    let mut cfg = serde_json::to_value(&config).expect("serializable");
    cfg["restart_outcomes"] = restarts;
    manifest.finish(&args.out, cfg, config.seed)
}

fn cmd_sweep(args: SweepArgs) -> CliResult<()> {
    if args.c_min > args.c_max {
        return Err(Failure::Usage(format!("--c-min {} exceeds --c-max {}", args.c_min, args.c_max)));
    }
    if !matches!(args.input.input_format, InputFormat::Edgelist) {
        return Err(Failure::Usage("sweep reads edge lists only".into()));
    }
    let mut manifest = Manifest::new("sweep");
    let config = args.solver.config(args.c_min.max(1));
    config.validate()?;
    let input = load_input(&args.input, config.gamma, &mut manifest)?;
    let selection = select_c(&input.graph, &input.priors, args.c_min..=args.c_max, &config)?;
    let best_c = selection
        .best_c
        .ok_or_else(|| Failure::Solver("every community count failed".into()))?;
    ensure_dir(&args.out)?;
    let doc = json!({
        "schema": SWEEP_SCHEMA,
        "rows": selection.rows,
        "best_c": best_c,
    });
    manifest.output(&args.out, "sweep.json", &pretty(&doc))?;
    for row in &selection.rows {
        match row.mean_density {
            Some(d) => println!("c={} mean_density={:.6}", row.communities, d),
            None => println!("c={} failed", row.communities),
        }
    }
    println!("best_c={best_c}");
    let mut cfg = serde_json::to_value(&config).expect("serializable");
    cfg["c_min"] = json!(args.c_min);
    cfg["c_max"] = json!(args.c_max);
    manifest.finish(&args.out, cfg, config.seed)
}

fn cmd_generate(args: GenerateArgs) -> CliResult<()> {
    let mut manifest = Manifest::new("generate");
    let (graph, truth) = match args.family {
        Family::Classic {
            communities,
            nodes_per_side,
            pin,
            alpha,
        } => gen_classic(communities, nodes_per_side, pin, alpha, args.seed)?,
        Family::Nonoverlap { zout } => gen_nonoverlapping(zout, args.seed)?,
        Family::Overlap { t, zin, zout } => gen_overlapping(t, args.seed, zin, zout)?,
    };
    ensure_dir(&args.out)?;
    manifest.output(&args.out, "graph.tsv", &write_edgelist(&graph))?;
    let truth_doc = CoverDocument::from_cover(&graph, &truth.cover);
    manifest.output(
        &args.out,
        &format!("truth.{}", args.format.ext()),
        &write_cover(&truth_doc, args.format.into()),
    )?;
    if let Some(fraction) = args.prior_fraction {
        let priors = sample_priors(&truth.cover, &graph, args.prior_part, fraction, 1.0, args.seed)?;
        manifest.output(&args.out, "priors.txt", &write_priors(&priors, &graph))?;
    }
    println!(
        "n_delta={} n_gamma={} edges={} overlapping={}",
        graph.n_delta(),
        graph.n_gamma(),
        graph.n_edges(),
        truth.cover.overlapping()
    );
    let mut cfg = serde_json::to_value(&truth.spec).expect("serializable");
    cfg["prior_fraction"] = json!(args.prior_fraction);
    cfg["prior_part"] = json!(args.prior_part);
    manifest.finish(&args.out, cfg, args.seed)
}

/// Node key used to align two cover files.
fn keyed(doc: &CoverDocument) -> HashMap<(Part, &str), usize> {
    doc.nodes
        .iter()
        .enumerate()
        .map(|(i, r)| ((r.part, r.id.as_str()), i))
        .collect()
}

/// A single label per node: the argmax of its membership row when present,
/// else its only community; outliers get their own label.
fn hard_label(doc: &CoverDocument, i: usize) -> CliResult<usize> {
    let r = &doc.nodes[i];
    if let Some(m) = &r.membership {
        if m.iter().any(|&v| v > 0.0) {
            let (best, _) = m
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
            return Ok(best);
        }
    }
    match r.communities.as_slice() {
        [] => Ok(doc.communities),
        [only] => Ok(*only),
        _ => Err(Failure::Input(format!(
            "node {} belongs to several communities; use --mode gnmi",
            r.id
        ))),
    }
}

fn cmd_evaluate(args: EvaluateArgs) -> CliResult<()> {
    let truth = parse_cover(&read(&args.truth)?)?;
    let found = parse_cover(&read(&args.found)?)?;
    let found_index = keyed(&found);
    let mut pairs = Vec::new();
    for (i, r) in truth.nodes.iter().enumerate() {
        if !args.part.keeps(r.part) {
            continue;
        }
        let j = *found_index
            .get(&(r.part, r.id.as_str()))
            .ok_or_else(|| Failure::Input(format!("node {} missing from {}", r.id, args.found.display())))?;
        pairs.push((i, j));
    }
    if pairs.len() != found.nodes.len() && matches!(args.part, PartFilter::All) {
        return Err(Failure::Input("the covers list different nodes".into()));
    }
    let score = match args.mode {
        Mode::Nmi => {
            let mut t = Vec::with_capacity(pairs.len());
            let mut f = Vec::with_capacity(pairs.len());
            for &(i, j) in &pairs {
                t.push(hard_label(&truth, i)?);
                f.push(hard_label(&found, j)?);
            }
            nmi(&HardPartition::new(t), &HardPartition::new(f))?
        }
        Mode::Gnmi => {
            let pick = |doc: &CoverDocument, idx: Vec<usize>| -> CliResult<CommunityCover> {
                Ok(CommunityCover::new(
                    idx.into_iter().map(|i| doc.nodes[i].communities.clone()).collect(),
                    doc.communities,
                )?)
            };
            let t = pick(&truth, pairs.iter().map(|p| p.0).collect())?;
            let f = pick(&found, pairs.iter().map(|p| p.1).collect())?;
            gnmi(&t, &f)?
        }
    };
    println!("{score}");
    Ok(())
}

fn cmd_entropy(args: EntropyArgs) -> CliResult<()> {
    let doc = parse_cover(&read(&args.cover)?)?;
    let u = doc
        .membership()
        .ok_or_else(|| Failure::Input("the cover carries no membership rows".into()))?;
    let u = ContinuousMembership::new(u)?;
    let nodes: Vec<usize> = (0..doc.nodes.len())
        .filter(|&i| args.part.keeps(doc.nodes[i].part))
        .collect();
    let mut out = String::from("# id\tpart\tentropy\n");
    for (&i, e) in nodes.iter().zip(exponential_entropy(&u, &nodes)) {
        out.push_str(&format!("{}\t{}\t{}\n", doc.nodes[i].id, doc.nodes[i].part.as_str(), e));
    }
    print!("{out}");
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> CliResult<()> {
    if args.c_min > args.c_max {
        return Err(Failure::Usage(format!("--c-min {} exceeds --c-max {}", args.c_min, args.c_max)));
    }
    if args.replicates == 0 {
        return Err(Failure::Usage("--replicates must be at least 1".into()));
    }
    let mut manifest = Manifest::new("experiment");
    let mut cfg = match args.name {
        Protocol::Fig2 => ProtocolConfig::fig2(),
        Protocol::Fig3 => ProtocolConfig::fig3(),
    };
    if let Some(grid) = args.grid {
        cfg.grid = grid;
    }
    cfg.replicates = args.replicates;
    cfg.master_seed = args.seed;
    cfg.prior_fraction = args.prior_fraction;
    cfg.solver.restarts = args.restarts;
    cfg.estimate_c = (!args.no_estimate_c).then_some(args.c_min..=args.c_max);
    cfg.solver.validate()?;

    let (report, name) = match args.name {
        Protocol::Fig2 => (run_fig2(&cfg)?, "fig2.json"),
        Protocol::Fig3 => (run_fig3(&cfg)?, "fig3.json"),
    };
    ensure_dir(&args.out)?;
    manifest.output(&args.out, name, &pretty(&report))?;
    for p in &report.points {
        println!(
            "x={} {}: wsbmf={:.4}±{:.4} priors={:.4}±{:.4} projection={:.4}±{:.4}",
            p.x,
            report.metric,
            p.wsbmf.mean,
            p.wsbmf.std,
            p.wsbmf_priors.mean,
            p.wsbmf_priors.std,
            p.projection.mean,
            p.projection.std
        );
    }
    manifest.finish(&args.out, serde_json::to_value(&cfg).expect("serializable"), args.seed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Entropy(a) => cmd_entropy(a),
        Command::Experiment(a) => cmd_experiment(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
