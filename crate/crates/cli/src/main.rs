//! `hypfill` command line: generate spaces, run the full pipeline, re-check
//! saved bundles, export graphs and compare reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hypfill_core::boundary::BallMetric;
use hypfill_core::filling::GraphJson;
use hypfill_core::io::{self, SpaceFile};
use hypfill_core::report::{self, AtStage, InputSpec, RhoSpec, RunConfig, Stage};
use hypfill_core::weights::WeightsJson;
use hypfill_core::{FillingGraph, WeightAssignment, WeightKind};

#[derive(Parser)]
#[command(name = "hypfill", version, about = "Hyperbolic fillings of finite metric spaces")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "HYPFILL_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated test space as space.json.
    Gen(GenArgs),
    /// Run the whole pipeline and write the report bundle.
    Run(RunArgs),
    /// Re-verify the weight conditions of a saved graph and weights.
    Check(SavedArgs),
    /// Re-run the boundary checks on a saved graph and weights.
    Boundary(SavedArgs),
    /// Convert a saved graph to json or dot.
    Export(ExportArgs),
    /// Compare two report.json files field by field.
    Diff(DiffArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Cantor,
    Circle,
    Sierpinski,
    Interval,
}

#[derive(Args)]
struct InputArgs {
    /// Generator to use instead of an input file.
    #[arg(long, value_enum, required_unless_present = "input", conflicts_with = "input")]
    kind: Option<Kind>,
    /// Recursion level for cantor and sierpinski.
    #[arg(long)]
    level: Option<u32>,
    /// Point count for circle and interval.
    #[arg(long)]
    n: Option<usize>,
    /// Distance matrix (.csv) or space/point-cloud JSON.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Rescale a file input to this diameter.
    #[arg(long)]
    normalize: Option<f64>,
    /// Replace d by d^EPS after loading.
    #[arg(long, value_name = "EPS")]
    snowflake: Option<f64>,
}

impl InputArgs {
    fn spec(&self) -> anyhow::Result<InputSpec> {
        if let Some(path) = &self.input {
            return Ok(InputSpec::File {
                path: path.to_string_lossy().into_owned(),
                normalize: self.normalize,
            });
        }
        let need = |v: Option<u32>, what: &str| v.ok_or_else(|| anyhow!("generators: --{what} is required"));
        let need_n = || self.n.ok_or_else(|| anyhow!("generators: --n is required"));
        Ok(match self.kind.expect("clap enforces kind or input") {
            Kind::Cantor => InputSpec::Cantor { level: need(self.level, "level")? },
            Kind::Sierpinski => InputSpec::Sierpinski { level: need(self.level, "level")? },
            Kind::Circle => InputSpec::Circle { n: need_n()? },
            Kind::Interval => InputSpec::Interval { n: need_n()? },
        })
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Sample sizes and seed shared by every checking command.
#[derive(Args)]
struct SampleArgs {
    /// Level whose net points represent boundary points; defaults to the depth.
    #[arg(long)]
    rep_level: Option<usize>,
    #[arg(long, default_value_t = 128)]
    boundary_points: usize,
    #[arg(long, default_value_t = 2000)]
    pairs: usize,
    #[arg(long, default_value_t = 2000)]
    triples: usize,
    #[arg(long, default_value_t = 2000)]
    cells: usize,
    #[arg(long, default_value_t = 48)]
    delta_sample: usize,
    #[arg(long, default_value_t = 16)]
    ahlfors_centers: usize,
    #[arg(long, default_value_t = 8)]
    radii: usize,
    #[arg(long, default_value = "rho")]
    ball_metric: String,
    /// Exponent of the boundary measure.
    #[arg(long)]
    ahlfors_p: Option<f64>,
    #[arg(long, default_value_t = hypfill_core::sampling::DEFAULT_SEED)]
    seed: u64,
}

impl SampleArgs {
    fn apply(&self, c: &mut RunConfig) -> anyhow::Result<()> {
        c.rep_level = self.rep_level;
        c.boundary_points = self.boundary_points;
        c.pairs = self.pairs;
        c.triples = self.triples;
        c.cells = self.cells;
        c.delta_sample = self.delta_sample;
        c.ahlfors_centers = self.ahlfors_centers;
        c.radii = self.radii;
        c.ball_metric = self.ball_metric.parse::<BallMetric>().at(Stage::Boundary)?;
        c.ahlfors_p = self.ahlfors_p;
        c.seed = self.seed;
        Ok(())
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Defaults to 2 alpha^2 + 1.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, default_value_t = 6)]
    depth: usize,
    /// constant:C, measure or measure:P. Defaults to constant 1/alpha.
    #[arg(long)]
    rho: Option<String>,
    #[command(flatten)]
    sample: SampleArgs,
    #[arg(long, default_value = "hypfill-out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SavedArgs {
    #[arg(long)]
    space: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    weights: PathBuf,
    #[command(flatten)]
    sample: SampleArgs,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "dot")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiffArgs {
    a: PathBuf,
    b: PathBuf,
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("io: reading {}", path.display()))
}

fn emit(out: Option<&Path>, body: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, body).with_context(|| format!("io: writing {}", p.display())),
        None => {
            use std::io::Write;
            match std::io::stdout().lock().write_all(body) {
                // reader went away (`| head`)
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.context("io: writing stdout"),
            }
        }
    }
}

fn gen(args: &GenArgs) -> anyhow::Result<()> {
    let mut loaded = report::load_input(&args.input.spec()?)?;
    if let Some(eps) = args.input.snowflake {
        loaded.space = loaded.space.snowflake(eps).at(Stage::MetricSpace)?;
        loaded.known_dimension = loaded.known_dimension.map(|d| d / eps);
    }
    let mut file = SpaceFile::from_space(&loaded.space);
    file.masses = loaded.masses;
    file.known_dimension = loaded.known_dimension;
    let mut body = serde_json::to_vec(&file)?;
    body.push(b'\n');
    emit(args.out.as_deref(), &body)
}

fn run(args: &RunArgs) -> anyhow::Result<()> {
    let alpha = args.alpha;
    let tau = args.tau.unwrap_or(2.0 * alpha * alpha + 1.0);
    let rho = match &args.rho {
        Some(s) => s.parse::<RhoSpec>().at(Stage::Weights)?,
        None => RhoSpec::Constant { c: 1.0 / alpha },
    };
    let mut config = RunConfig::new(args.input.spec()?, alpha, tau, args.depth, rho);
    config.snowflake = args.input.snowflake;
    args.sample.apply(&mut config)?;
    let out = report::run(&config)?;
    out.write_bundle(&args.out_dir).at(Stage::Io)?;
    let r = &out.report;
    let p_star = r.conditions.p_star.as_ref().map(|p| p.median);
    println!(
        "{}: depth {} vertices {} eta [{:.4}, {:.4}] K0 {:.4} K1 {} p* {} -> {}",
        r.space.label,
        r.graph.depth,
        r.graph.vertices,
        r.weights.eta_minus,
        r.weights.eta_plus,
        r.conditions.h2.k0,
        r.conditions.h3.as_ref().map_or("n/a".to_string(), |h| format!("{:.4}", h.k1)),
        p_star.map_or("n/a".to_string(), |p| format!("{p:.4}")),
        args.out_dir.display()
    );
    for w in &r.graph.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

/// Loads a saved bundle and runs every check on it.
fn reassess(args: &SavedArgs) -> anyhow::Result<report::RunOutput> {
    let loaded = io::load_space(&args.space, None).at(Stage::MetricSpace)?;
    let gj: GraphJson = serde_json::from_str(&read(&args.graph)?)
        .map_err(hypfill_core::Error::from)
        .at(Stage::Filling)?;
    let graph = FillingGraph::from_json(&gj).at(Stage::Filling)?;
    let wj: WeightsJson = serde_json::from_str(&read(&args.weights)?)
        .map_err(hypfill_core::Error::from)
        .at(Stage::Weights)?;
    let weights = WeightAssignment::from_json(&graph, &wj).at(Stage::Weights)?;
    let rho = match weights.kind {
        WeightKind::Constant => RhoSpec::Constant { c: weights.rho[0] },
        WeightKind::Measure => RhoSpec::Measure { p: weights.p },
        WeightKind::Custom => RhoSpec::Custom,
    };
    let mut config = RunConfig::new(
        InputSpec::File { path: args.space.to_string_lossy().into_owned(), normalize: None },
        graph.alpha,
        graph.tau,
        graph.depth,
        rho,
    );
    args.sample.apply(&mut config)?;
    let warnings = graph.warnings.clone();
    Ok(report::assess(&config, loaded, graph, weights, warnings)?)
}

fn check(args: &SavedArgs) -> anyhow::Result<()> {
    let out = reassess(args)?;
    let body = serde_json::json!({
        "schema_version": report::SCHEMA_VERSION,
        "graph": out.report.graph,
        "weights": out.report.weights,
        "conditions": out.report.conditions,
    });
    let mut s = serde_json::to_vec_pretty(&body)?;
    s.push(b'\n');
    emit(args.out.as_deref(), &s)
}

fn boundary(args: &SavedArgs) -> anyhow::Result<()> {
    let out = reassess(args)?;
    let b = out
        .report
        .boundary
        .ok_or_else(|| anyhow!("boundary: EtaPlusNotBelowOne: eta_plus = {}", out.weights.eta_plus))?;
    let mut s = serde_json::to_vec_pretty(&b)?;
    s.push(b'\n');
    emit(args.out.as_deref(), &s)
}

fn export(args: &ExportArgs) -> anyhow::Result<()> {
    let gj: GraphJson = serde_json::from_str(&read(&args.graph)?)
        .map_err(hypfill_core::Error::from)
        .at(Stage::Filling)?;
    let graph = FillingGraph::from_json(&gj).at(Stage::Filling)?;
    let body = graph.export(&args.format).at(Stage::Filling)?;
    emit(args.out.as_deref(), &body)
}

fn diff(args: &DiffArgs) -> anyhow::Result<()> {
    let parse = |p: &Path| -> anyhow::Result<serde_json::Value> {
        serde_json::from_str(&read(p)?).with_context(|| format!("io: parsing {}", p.display()))
    };
    let text = report::diff_reports(&parse(&args.a)?, &parse(&args.b)?).map_err(|e| anyhow!("diff: {e}"))?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = report::with_threads(cli.threads, || match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Run(a) => run(a),
        Command::Check(a) => check(a),
        Command::Boundary(a) => boundary(a),
        Command::Export(a) => export(a),
        Command::Diff(a) => diff(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
