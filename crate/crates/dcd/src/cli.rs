//! The `dcd` command line: `gen`, `detect`, `eval` and `bench`.
//!
//! Errors are printed as one `error[kind]: message` line on stderr, with
//! exit code 2 for usage errors, 3 for unreadable or malformed input and 4
//! for numerical failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dcd_core::detection::Detector;
use dcd_core::division::GroupMode;
use dcd_core::evaluation::{make_mask, masked_link_eval, nmi};
use dcd_core::generators::{sample_dcsbm, sample_sbm, SimulationKind};
use dcd_core::pipeline::{run_pipeline_with, Method, ModelKind, PipelineConfig, DEFAULT_K_MAX};
use dcd_core::selection::DEFAULT_LAMBDA;
use dcd_core::Labeling;
use serde::Serialize;

use crate::bench::{run_bench, to_csv, BenchConfig, Design};
use crate::error::{CliError, Result};
use crate::exec::{MonotonicClock, Threads};
use crate::io;

#[derive(Debug, Parser)]
#[command(name = "dcd", version, about = "Divide-and-conquer community detection for grouped networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a network with planted communities and groups.
    Gen(GenArgs),
    /// Detect groups and communities in an edge list.
    Detect(DetectArgs),
    /// Score a report against true labels, or link prediction on masked pairs.
    Eval(EvalArgs),
    /// Run a simulation design and summarize accuracy and time.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Sbm,
    Dcsbm,
}

impl ModelArg {
    fn kind(self) -> ModelKind {
        match self {
            ModelArg::Sbm => ModelKind::Sbm,
            ModelArg::Dcsbm => ModelKind::Dcsbm,
        }
    }

    fn simulation(self) -> SimulationKind {
        match self {
            ModelArg::Sbm => SimulationKind::Sbm,
            ModelArg::Dcsbm => SimulationKind::Dcsbm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DetectorArg {
    Ssp,
    Score,
    Vsbm,
}

impl From<DetectorArg> for Detector {
    fn from(d: DetectorArg) -> Self {
        match d {
            DetectorArg::Ssp => Detector::Ssp,
            DetectorArg::Score => Detector::Score,
            DetectorArg::Vsbm => Detector::Vsbm,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GroupModeArg {
    Max,
    Threshold,
}

/// Options shared by every command that runs the pipeline.
#[derive(Debug, Args)]
struct PipelineArgs {
    /// Network model [default: sbm, or the design's model for bench].
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Within-group detector [default: ssp for sbm, score for dcsbm].
    #[arg(long, value_enum)]
    detector: Option<DetectorArg>,
    /// Fix the number of groups instead of choosing it.
    #[arg(long, conflicts_with = "group_mode")]
    groups: Option<usize>,
    /// How to choose the number of groups.
    #[arg(long, visible_alias = "mode", value_enum, default_value = "threshold")]
    group_mode: GroupModeArg,
    /// Minimal modularity gain per extra group in threshold mode.
    #[arg(long, default_value_t = GroupMode::DEFAULT_DELTA)]
    delta: f64,
    /// Largest community count tried inside a group.
    #[arg(long, default_value_t = DEFAULT_K_MAX)]
    kmax: usize,
    /// Penalty weight of the community-count criterion.
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Groups processed concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl PipelineArgs {
    fn group_mode(&self) -> GroupMode {
        match (self.groups, self.group_mode) {
            (Some(g), _) => GroupMode::Fixed(g),
            (None, GroupModeArg::Max) => GroupMode::Max,
            (None, GroupModeArg::Threshold) => GroupMode::Threshold(self.delta),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        if self.kmax == 0 {
            return Err(CliError::Usage("--kmax must be at least 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(CliError::Usage("--lambda must be a non-negative number".into()));
        }
        if !self.delta.is_finite() {
            return Err(CliError::Usage("--delta must be finite".into()));
        }
        Ok(())
    }

    fn config(&self, default_model: ModelKind) -> Result<PipelineConfig> {
        self.validate()?;
        let model = self.model.map_or(default_model, ModelArg::kind);
        Ok(PipelineConfig {
            model,
            group_mode: self.group_mode(),
            detector: self.detector.map_or(model.default_detector(), Detector::from),
            k_max: self.kmax,
            lambda: self.lambda,
            seed: self.seed,
            parallelism: self.jobs,
        })
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Simulation design.
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    design: Option<String>,
    /// Model spec JSON to sample from instead of a design.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Communities per group, overriding the design.
    #[arg(long, value_delimiter = ',', conflicts_with = "spec")]
    group_sizes: Option<Vec<usize>>,
    /// Model family, overriding the design.
    #[arg(long, value_enum, conflicts_with = "spec")]
    model: Option<ModelArg>,
    /// Number of nodes [default: the design's size].
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix: writes PREFIX.edges, PREFIX.communities, PREFIX.groups,
    /// PREFIX.model.json and, for degree-corrected models, PREFIX.theta.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Edge list.
    input: PathBuf,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Report path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    no_timings: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Report written by `detect`.
    #[arg(long)]
    report: Option<PathBuf>,
    /// True community labels.
    #[arg(long)]
    communities: Option<PathBuf>,
    /// True group labels.
    #[arg(long = "true-groups")]
    true_groups: Option<PathBuf>,
    /// Edge list; required with --mask.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Fraction of node pairs hidden for link prediction.
    #[arg(long)]
    mask: Option<f64>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Metrics path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Simulation design.
    #[arg(long)]
    design: String,
    /// Network sizes [default: the design's size].
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Replicates per size.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Methods, e.g. D-SSP,SSP,FG [default: depends on the model].
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Summary CSV path [default: stdout].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-replicate CSV path.
    #[arg(long)]
    series: Option<PathBuf>,
    /// Leave the time columns empty.
    #[arg(long)]
    no_timings: bool,
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    
    run_with_exit_code(std::env::args_os(), &mut stdout.lock())
}

/// Parses `args`, runs the command writing results to `out`, and reports
/// errors on stderr.
pub fn run_with_exit_code<I, T, W>(args: I, out: &mut W) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    W: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error[usage]: {}", first.strip_prefix("error: ").unwrap_or(first));
            return 2;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {}", e.kind(), e.to_string().replace('\n', " "));
            e.exit_code()
        }
    }
}

fn execute<W: Write>(command: Command, out: &mut W) -> Result<()> {
    match command {
        Command::Gen(a) => gen(a, out),
        Command::Detect(a) => detect(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

fn emit<W: Write>(text: &str, path: Option<&Path>, out: &mut W) -> Result<()> {
    match path {
        Some(p) => io::write_text(p, text),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn load_graph(path: &Path) -> Result<dcd_core::Graph> {
    io::parse_edge_list(&io::read_text(path)?, &path.display().to_string())
}

fn load_labels(path: &Path) -> Result<Labeling> {
    io::parse_labels(&io::read_text(path)?, &path.display().to_string())
}

#[derive(Serialize)]
struct GenSummary {
    nodes: usize,
    edges: usize,
    communities: usize,
    groups: usize,
    files: Vec<String>,
}

fn gen<W: Write>(a: GenArgs, out: &mut W) -> Result<()> {
    let (spec, sample) = match (&a.design, &a.spec) {
        (Some(name), _) => {
            let mut design = Design::from_name(name).ok_or_else(|| unknown_design(name))?;
            if let Some(m) = a.model {
                design = design.with_kind(m.simulation());
            }
            let n = a.n.unwrap_or(design.default_n);
            let sizes = a.group_sizes.clone().unwrap_or_else(|| design.group_sizes(n));
            let inst = dcd_core::generators::sample_paper_simulation(design.kind, n, &sizes, a.seed)?;
            let spec = io::ModelSpec::from_model(design.kind, &inst.model, inst.law.as_ref(), Some(inst.draws));
            (spec, inst.sample)
        }
        (None, Some(path)) => {
            let spec = io::parse_model_spec(&io::read_text(path)?, &path.display().to_string())?;
            let n = a.n.ok_or_else(|| CliError::Usage("--n is required with --spec".into()))?;
            let (model, law) = spec.to_model()?;
            let sample = match &law {
                None => sample_sbm(&model, n, a.seed),
                Some(law) => sample_dcsbm(&model, law, n, a.seed),
            };
            (spec, sample)
        }
        (None, None) => return Err(CliError::Usage("gen needs --design or --spec".into())),
    };
    let mut files = vec![
        (with_suffix(&a.out, ".edges"), io::format_edge_list(&sample.graph)),
        (with_suffix(&a.out, ".communities"), io::format_labels(&sample.communities)),
        (with_suffix(&a.out, ".groups"), io::format_labels(&sample.groups)),
        (with_suffix(&a.out, ".model.json"), io::to_json(&spec)),
    ];
    if let Some(theta) = &sample.theta {
        files.push((with_suffix(&a.out, ".theta"), io::format_reals(theta)));
    }
    for (path, text) in &files {
        io::write_text(path, text)?;
    }
    let summary = GenSummary {
        nodes: sample.graph.node_count(),
        edges: sample.graph.edge_count(),
        communities: sample.communities.used_count(),
        groups: sample.groups.used_count(),
        files: files.iter().map(|(p, _)| p.display().to_string()).collect(),
    };
    emit(&io::to_json(&summary), None, out)
}

fn unknown_design(name: &str) -> CliError {
    CliError::Usage(format!("unknown design `{name}`; expected one of {}", Design::names().collect::<Vec<_>>().join(", ")))
}

fn detect<W: Write>(a: DetectArgs, out: &mut W) -> Result<()> {
    let cfg = a.pipeline.config(ModelKind::Sbm)?;
    let g = load_graph(&a.input)?;
    let report = run_pipeline_with(&g, &cfg, &Threads, &MonotonicClock::new())?;
    emit(&io::report_json(&report, !a.no_timings), a.out.as_deref(), out)
}

#[derive(Serialize, Default)]
struct Metrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    nmi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g_nmi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mask: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    masked_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    auc: Option<f64>,
}

fn eval<W: Write>(a: EvalArgs, out: &mut W) -> Result<()> {
    let has_truth = a.communities.is_some() || a.true_groups.is_some();
    if !has_truth && a.mask.is_none() {
        return Err(CliError::Usage(
            "nothing to evaluate: give --report with --communities and/or --true-groups, or --graph with --mask".into(),
        ));
    }
    let mut m = Metrics::default();
    let graph = a.graph.as_deref().map(load_graph).transpose()?;
    if has_truth {
        let path = a.report.as_deref().ok_or_else(|| CliError::Usage("true labels need --report".into()))?;
        let report = io::parse_report_labels(&io::read_text(path)?, &path.display().to_string())?;
        let n = report.communities.len();
        if let Some(g) = &graph {
            if g.node_count() != n {
                return Err(CliError::Input(format!("report has {n} nodes but graph has {}", g.node_count())));
            }
        }
        let score = |truth: &Path, estimate: &Labeling| -> Result<f64> {
            let t = load_labels(truth)?;
            if t.len() != n {
                return Err(CliError::Input(format!("{} has {} labels but the report has {n} nodes", truth.display(), t.len())));
            }
            Ok(nmi(&t, estimate)?)
        };
        m.nmi = a.communities.as_deref().map(|p| score(p, &report.communities)).transpose()?;
        m.g_nmi = a.true_groups.as_deref().map(|p| score(p, &report.groups)).transpose()?;
    }
    if let Some(p) = a.mask {
        if !(p > 0.0 && p < 1.0) {
            return Err(CliError::Usage("--mask must lie strictly between 0 and 1".into()));
        }
        let g = graph.as_ref().ok_or_else(|| CliError::Usage("--mask needs --graph".into()))?;
        let cfg = a.pipeline.config(ModelKind::Sbm)?;
        let (auc, _) = masked_link_eval(g, &cfg, p, cfg.seed, &Threads, &MonotonicClock::new())?;
        m.mask = Some(p);
        m.masked_pairs = Some(make_mask(g.node_count(), p, cfg.seed)?.pairs.len());
        m.auc = Some(auc);
    }
    emit(&io::to_json(&m), a.out.as_deref(), out)
}

fn bench<W: Write>(a: BenchArgs, out: &mut W) -> Result<()> {
    let mut design = Design::from_name(&a.design).ok_or_else(|| unknown_design(&a.design))?;
    if let Some(m) = a.pipeline.model {
        design = design.with_kind(m.simulation());
    }
    let pcfg = a.pipeline.config(design.model())?;
    let mut cfg = BenchConfig::new(design);
    if let Some(sizes) = a.n {
        cfg.sizes = sizes;
    }
    if let Some(names) = &a.methods {
        cfg.methods = names
            .iter()
            .map(|s| Method::from_name(s).ok_or_else(|| CliError::Usage(format!("unknown method `{s}`"))))
            .collect::<Result<_>>()?;
    }
    cfg.reps = a.reps;
    cfg.seed = pcfg.seed;
    cfg.jobs = pcfg.parallelism;
    cfg.k_max = pcfg.k_max;
    cfg.lambda = pcfg.lambda;
    cfg.group_mode = pcfg.group_mode;
    let mut result = run_bench(&cfg, &Threads, &MonotonicClock::new())?;
    if a.no_timings {
        result = result.without_timings();
    }
    if let Some(path) = &a.series {
        io::write_text(path, &to_csv(&result.records))?;
    }
    emit(&to_csv(&result.rows), a.out.as_deref(), out)
}
