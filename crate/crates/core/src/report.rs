//! The full pipeline: load or generate a space, build nets, graph and
//! weights, run every check, and write the report bundle.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::boundary::{self, AhlforsReport, BallMetric, BiholderReport, DiamReport, MeetReport, MuTotals, QsReport, SandwichReport};
use crate::error::{Error, Result};
use crate::filling::FillingGraph;
use crate::generators::{self, GeneratedSpace};
use crate::io::{self, LoadedSpace, SpaceFile};
use crate::metric_space::{FiniteMetricSpace, PerfectnessReport};
use crate::nets::{max_useful_depth, scale, NetCheck};
use crate::rho_metric::RhoSidecar;
use crate::sampling::{self, Stream, DEFAULT_SEED};
use crate::verifier::{self, CellSums, DeltaReport, GapAnnuli, H1Report, H2Report, H3Report, PStarReport};
use crate::weights::{DiscreteMeasure, WeightAssignment};

pub const SCHEMA_VERSION: &str = "hypfill-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InputSpec {
    Cantor { level: u32 },
    Circle { n: usize },
    Sierpinski { level: u32 },
    Interval { n: usize },
    File { path: String, normalize: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RhoSpec {
    Constant { c: f64 },
    /// `p = None` takes the known dimension of the space, or 1.
    Measure { p: Option<f64> },
    /// Weights read from a file; only meaningful with [`assess`].
    Custom,
}

impl std::str::FromStr for RhoSpec {
    type Err = Error;

    /// `constant:C`, `measure` or `measure:P`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let num = |a: &str| {
            a.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number {a:?} in rho spec {s:?}")))
        };
        match (kind, arg) {
            ("constant", Some(a)) => Ok(RhoSpec::Constant { c: num(a)? }),
            ("measure", None) => Ok(RhoSpec::Measure { p: None }),
            ("measure", Some(a)) => Ok(RhoSpec::Measure { p: Some(num(a)?) }),
            _ => Err(Error::InvalidParameter(format!(
                "rho spec {s:?}: expected constant:C, measure or measure:P"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub input: InputSpec,
    /// Replace `d` by `d^epsilon` after loading.
    pub snowflake: Option<f64>,
    pub alpha: f64,
    pub tau: f64,
    pub depth: usize,
    pub rho: RhoSpec,
    /// Defaults to the depth actually built.
    pub rep_level: Option<usize>,
    pub boundary_points: usize,
    pub pairs: usize,
    pub triples: usize,
    pub cells: usize,
    pub delta_sample: usize,
    pub ahlfors_centers: usize,
    pub radii: usize,
    pub ball_metric: BallMetric,
    /// Exponent for the boundary measure; defaults to the measure exponent,
    /// else the median critical exponent.
    pub ahlfors_p: Option<f64>,
    pub p_grid: Vec<f64>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(input: InputSpec, alpha: f64, tau: f64, depth: usize, rho: RhoSpec) -> Self {
        RunConfig {
            input,
            snowflake: None,
            alpha,
            tau,
            depth,
            rho,
            rep_level: None,
            boundary_points: 128,
            pairs: 2000,
            triples: 2000,
            cells: verifier::DEFAULT_CELL_CAP,
            delta_sample: 48,
            ahlfors_centers: 16,
            radii: 8,
            ball_metric: BallMetric::Rho,
            ahlfors_p: None,
            p_grid: (1..=12).map(|k| k as f64 * 0.25).collect(),
            seed: DEFAULT_SEED,
        }
    }
}

/// Pipeline stage, named in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    MetricSpace,
    Generators,
    Nets,
    Filling,
    Weights,
    RhoMetric,
    Verifier,
    Boundary,
    Io,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::MetricSpace => "metric_space",
            Stage::Generators => "generators",
            Stage::Nets => "nets",
            Stage::Filling => "filling",
            Stage::Weights => "weights",
            Stage::RhoMetric => "rho_metric",
            Stage::Verifier => "verifier",
            Stage::Boundary => "boundary",
            Stage::Io => "io",
        };
        f.write_str(s)
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

// no `source`: the message already carries the inner error
impl std::error::Error for StageError {}

pub trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

// ---------- report types ----------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceSummary {
    pub n: usize,
    pub diam: f64,
    pub label: String,
    pub resolution: f64,
    pub known_dimension: Option<f64>,
    pub doubling: usize,
    pub uniform_perfectness: PerfectnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeSummary {
    pub alpha: f64,
    pub tau: f64,
    pub basic: bool,
    pub part_ii: Option<bool>,
    pub j0: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub requested_depth: usize,
    pub depth: usize,
    pub level_sizes: Vec<usize>,
    pub vertices: usize,
    pub horizontal_edges: usize,
    pub vertical_edges: usize,
    pub max_degree: usize,
    pub nets: NetCheck,
    pub rescan_mismatches: usize,
    pub clause8_violations: usize,
    pub tree_total: bool,
    pub connected: bool,
    pub overlap_by_level: Vec<usize>,
    /// Levels with `tau alpha^-n <= diam/2` and `alpha^-n >= resolution`.
    pub overlap_levels: Vec<usize>,
    /// Largest over smallest overlap on those levels.
    pub overlap_drift: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightSummary {
    pub kind: crate::weights::WeightKind,
    pub p: Option<f64>,
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub saturated_levels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H4Summary {
    pub cells: usize,
    pub grid: Vec<(f64, f64)>,
    /// `K2` at the median critical exponent and 0.25 on either side.
    pub at_p_star: Option<[(f64, f64); 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSummary {
    pub p: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    pub n: u32,
    pub annuli: GapAnnuli,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub h1: H1Report,
    pub h2: H2Report,
    pub h3: Option<H3Report>,
    pub h4: H4Summary,
    pub p_star: Option<PStarReport>,
    pub delta: DeltaReport,
    pub n_gap: Option<GapSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub rep_level: usize,
    pub sample_points: usize,
    pub pairs: usize,
    pub unresolved_pairs: usize,
    pub tail_bound: f64,
    pub reps_valid: bool,
    pub scale_index_consistent: bool,
    pub sandwich: SandwichReport,
    pub biholder: BiholderReport,
    pub meet: MeetReport,
    pub qs: QsReport,
    pub mu_totals: MuTotals,
    pub ahlfors: AhlforsReport,
    pub diam: DiamReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: String,
    pub params: RunConfig,
    pub space: SpaceSummary,
    pub regime: RegimeSummary,
    pub graph: GraphSummary,
    pub weights: WeightSummary,
    pub conditions: ConditionReport,
    /// Absent when `eta_plus >= 1`.
    pub boundary: Option<BoundaryReport>,
}

/// Everything a run produces.
pub struct RunOutput {
    pub space: LoadedSpace,
    pub graph: FillingGraph,
    pub weights: WeightAssignment,
    pub report: Report,
    pub tables: Vec<(String, String)>,
    pub drho_csv: Option<(String, RhoSidecar)>,
}

pub fn load_input(input: &InputSpec) -> std::result::Result<LoadedSpace, StageError> {
    let gen = |g: Result<GeneratedSpace>| {
        g.map(|g| LoadedSpace {
            space: g.space,
            masses: Some(g.masses),
            known_dimension: g.known_dimension,
        })
        .at(Stage::Generators)
    };
    match input {
        InputSpec::Cantor { level } => gen(generators::make_cantor(*level)),
        InputSpec::Circle { n } => gen(generators::make_circle(*n)),
        InputSpec::Sierpinski { level } => gen(generators::make_sierpinski(*level)),
        InputSpec::Interval { n } => gen(generators::make_interval(*n)),
        InputSpec::File { path, normalize } => {
            let p = Path::new(path);
            if !p.exists() {
                return Err(StageError {
                    stage: Stage::Io,
                    error: Error::Io(std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        format!("{path} not found"),
                    )),
                });
            }
            io::load_space(p, *normalize).at(Stage::MetricSpace)
        }
    }
}

/// Runs the whole pipeline in memory.
pub fn run(config: &RunConfig) -> std::result::Result<RunOutput, StageError> {
    let mut loaded = load_input(&config.input)?;
    if let Some(eps) = config.snowflake {
        loaded.space = loaded.space.snowflake(eps).at(Stage::MetricSpace)?;
        loaded.known_dimension = loaded.known_dimension.map(|d| d / eps);
    }
    run_on(config, loaded)
}

pub fn run_on(config: &RunConfig, loaded: LoadedSpace) -> std::result::Result<RunOutput, StageError> {
    let space = &loaded.space;
    let cap = max_useful_depth(space, config.alpha).max(1);
    let depth = config.depth.min(cap);
    let mut warnings = Vec::new();
    if depth < config.depth {
        warnings.push(format!(
            "ResolutionExceeded: depth {} capped at {depth}, alpha^-n would drop below half the resolution",
            config.depth
        ));
    }
    let graph = FillingGraph::build(space, config.alpha, config.tau, depth).at(Stage::Filling)?;
    warnings.extend(graph.warnings.iter().cloned());

    let weights = match config.rho {
        RhoSpec::Constant { c } => WeightAssignment::constant(&graph, c),
        RhoSpec::Measure { p } => {
            let p = p.or(loaded.known_dimension).unwrap_or(1.0);
            let masses = loaded
                .masses
                .clone()
                .unwrap_or_else(|| vec![1.0 / space.len() as f64; space.len()]);
            DiscreteMeasure::new(space, masses).and_then(|mu| WeightAssignment::measure(&graph, &mu, p))
        }
        RhoSpec::Custom => Err(Error::InvalidParameter(
            "custom weights must be supplied as a weights file".into(),
        )),
    }
    .at(Stage::Weights)?;
    assess(config, loaded, graph, weights, warnings)
}

/// Runs every check on an already built graph and weight assignment.
pub fn assess(
    config: &RunConfig,
    loaded: LoadedSpace,
    graph: FillingGraph,
    weights: WeightAssignment,
    warnings: Vec<String>,
) -> std::result::Result<RunOutput, StageError> {
    let space = &loaded.space;
    if graph.num_points() != space.len() {
        return Err(StageError {
            stage: Stage::Filling,
            error: Error::InvalidParameter(format!(
                "graph is over {} points but the space has {}",
                graph.num_points(),
                space.len()
            )),
        });
    }
    let uniform = space.estimate_uniform_perfectness(16);
    let mut regime = graph.regime();
    regime.c_u = uniform.c_u;
    let space_summary = SpaceSummary {
        n: space.len(),
        diam: space.diameter(),
        label: space.label().to_string(),
        resolution: space.resolution(),
        known_dimension: loaded.known_dimension,
        doubling: space.estimate_doubling(),
        uniform_perfectness: uniform,
    };
    let regime_summary = RegimeSummary {
        alpha: regime.alpha,
        tau: regime.tau,
        basic: regime.basic(),
        part_ii: regime.part_ii(),
        j0: regime.j0(),
    };
    let graph_summary = summarize_graph(&graph, space, config.depth, warnings);

    let mut tables = Vec::new();
    let rep_level = config.rep_level.unwrap_or(graph.depth);
    let (conditions, sample_points) = verify(config, &graph, space, &weights, rep_level, &mut tables)?;
    let (boundary, drho_csv) = if weights.eta_plus < 1.0 {
        let (b, csv) = boundary_checks(config, &graph, space, &weights, &conditions, &sample_points, rep_level, &mut tables)?;
        (Some(b), Some(csv))
    } else {
        (None, None)
    };

    let report = Report {
        schema_version: SCHEMA_VERSION.to_string(),
        params: config.clone(),
        space: space_summary,
        regime: regime_summary,
        graph: graph_summary,
        weights: WeightSummary {
            kind: weights.kind,
            p: weights.p,
            eta_minus: weights.eta_minus,
            eta_plus: weights.eta_plus,
            saturated_levels: weights.saturated_levels.clone(),
        },
        conditions,
        boundary,
    };
    Ok(RunOutput { space: loaded, graph, weights, report, tables, drho_csv })
}

pub fn summarize_graph(
    g: &FillingGraph,
    space: &FiniteMetricSpace,
    requested_depth: usize,
    warnings: Vec<String>,
) -> GraphSummary {
    let (h, v) = g.edge_counts();
    let overlap = g.overlap_by_level(space);
    let overlap_levels: Vec<usize> = (0..=g.depth)
        .filter(|&n| g.tau * scale(g.alpha, n) <= space.diameter() / 2.0 && scale(g.alpha, n) >= space.resolution())
        .collect();
    let vals: Vec<f64> = overlap_levels.iter().map(|&n| overlap[n] as f64).collect();
    let drift = if vals.is_empty() {
        1.0
    } else {
        vals.iter().copied().fold(0.0, f64::max) / vals.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let mut warnings = warnings;
    warnings.dedup();
    GraphSummary {
        requested_depth,
        depth: g.depth,
        level_sizes: g.nets.levels.iter().map(Vec::len).collect(),
        vertices: g.num_vertices(),
        horizontal_edges: h,
        vertical_edges: v,
        max_degree: g.max_degree(),
        nets: g.nets.check(space),
        rescan_mismatches: g.rescan_mismatches(space),
        clause8_violations: g.clause8_violations(),
        tree_total: g.tree_is_total(),
        connected: g.is_connected(),
        overlap_by_level: overlap,
        overlap_levels,
        overlap_drift: drift,
        warnings,
    }
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Weight-condition checks. Also returns the boundary sample points, which
/// the pair-based checks share.
pub fn verify(
    config: &RunConfig,
    g: &FillingGraph,
    space: &FiniteMetricSpace,
    w: &WeightAssignment,
    rep_level: usize,
    tables: &mut Vec<(String, String)>,
) -> std::result::Result<(ConditionReport, Vec<usize>), StageError> {
    let seed = config.seed;
    let h1 = verifier::check_h1(g, w);
    let h2 = verifier::check_h2(g, w);
    let points = sampling::subset(space.len(), config.boundary_points, seed, Stream::BoundaryPoints);
    let pair_idx = sampling::pairs(points.len(), config.pairs, seed, Stream::Pairs);
    let point_pairs: Vec<(usize, usize)> = pair_idx.iter().map(|&(i, j)| (points[i], points[j])).collect();
    let h3 = if w.eta_plus < 1.0 {
        Some(verifier::check_h3(g, space, w, &point_pairs, rep_level).at(Stage::Verifier)?)
    } else {
        None
    };

    let cells = verifier::sample_cells(g, config.cells, seed);
    let sums = CellSums::new(g, w, &cells).at(Stage::Verifier)?;
    let p_star = (w.eta_plus < 1.0 && !sums.is_empty()).then(|| verifier::critical_exponent(&sums));
    if let Some(ps) = &p_star {
        tables.push((
            "p_star_cells.csv".into(),
            csv_table(
                &["point", "level", "n", "size", "p_star"],
                sums.cells.iter().zip(&sums.sizes).zip(&ps.per_cell).map(|((c, size), p)| {
                    let v = g.vertex(c.vertex);
                    vec![
                        v.point.to_string(),
                        v.level.to_string(),
                        c.n.to_string(),
                        size.to_string(),
                        p.map_or(String::new(), |p| p.to_string()),
                    ]
                }),
            ),
        ));
    }
    let grid: Vec<(f64, f64)> = config.p_grid.iter().map(|&p| (p, sums.k2(p))).collect();
    tables.push((
        "h4_grid.csv".into(),
        csv_table(&["p", "K2"], grid.iter().map(|(p, k)| vec![p.to_string(), k.to_string()])),
    ));
    let median = p_star.as_ref().map(|p| p.median).filter(|m| m.is_finite());
    let at_p_star = median.map(|m| {
        let at = |p: f64| (p, sums.k2(p));
        [at(m - 0.25), at(m), at(m + 0.25)]
    });
    let h4 = H4Summary { cells: sums.len(), grid, at_p_star };

    let delta = verifier::delta_hyperbolicity(g, config.delta_sample, seed);

    let gap_p = w.p.or(median);
    let n_gap = match gap_p {
        Some(p) if w.eta_plus < 1.0 && !sums.is_empty() => {
            let k2 = sums.k2(p);
            let n = verifier::perfectness_gap(k2, w.eta_plus, p);
            let annuli = verifier::check_gap_annuli(space, g.alpha, n, &points);
            Some(GapSummary { p, k2, n, annuli })
        }
        _ => None,
    };
    Ok((ConditionReport { h1, h2, h3, h4, p_star, delta, n_gap }, points))
}

#[allow(clippy::too_many_arguments)]
fn boundary_checks(
    config: &RunConfig,
    g: &FillingGraph,
    space: &FiniteMetricSpace,
    w: &WeightAssignment,
    conditions: &ConditionReport,
    points: &[usize],
    rep_level: usize,
    tables: &mut Vec<(String, String)>,
) -> std::result::Result<(BoundaryReport, (String, RhoSidecar)), StageError> {
    let seed = config.seed;
    let bs = boundary::build_boundary_sample(g, space, w, points, rep_level, config.pairs, seed)
        .at(Stage::Boundary)?;
    let sandwich = boundary::check_scale_sandwich(&bs);
    let biholder = boundary::check_biholder(&bs);
    let meet = boundary::check_meet_comparability(&bs, conditions.h3.as_ref().map(|h| h.k1));
    let triples = sampling::triples(points.len(), config.triples, seed, Stream::Triples);
    let qs = boundary::qs_envelope(&bs, g, &triples);
    tables.push((
        "qs_pairs.csv".into(),
        csv_table(&["t", "s"], qs.table.iter().map(|(t, s)| vec![t.to_string(), s.to_string()])),
    ));

    let p = config
        .ahlfors_p
        .or(w.p)
        .or(conditions.p_star.as_ref().map(|p| p.median).filter(|m| m.is_finite()))
        .unwrap_or(1.0);
    let mu_totals = boundary::mu_totals(g, w, p);
    tables.push((
        "mu_totals.csv".into(),
        csv_table(&["n", "total"], mu_totals.totals.iter().map(|(n, t)| vec![n.to_string(), t.to_string()])),
    ));
    let mu = boundary::build_mu_n(g, w, rep_level, p);
    let centers = sampling::subset(points.len(), config.ahlfors_centers, seed, Stream::Centers);
    let ahlfors = boundary::check_ahlfors(&bs, g, space, w, &mu, &centers, config.radii, config.ball_metric);
    tables.push((
        "ahlfors.csv".into(),
        csv_table(
            &["center", "r", "ratio"],
            ahlfors.table.iter().map(|(c, r, q)| vec![c.to_string(), r.to_string(), q.to_string()]),
        ),
    ));
    let non_root = g.num_vertices() - 1;
    let diam_vertices: Vec<usize> = sampling::subset(non_root, 256, seed, Stream::DiamVertices)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    let diam = boundary::check_diam_comparison(&bs, g, space, w, &diam_vertices);

    let drho_csv = io::write_csv_matrix(&bs.dmatrix).at(Stage::Io)?;
    let sidecar = RhoSidecar {
        rep_level,
        tail_bound: bs.tail_bound,
        eta_plus: bs.eta_plus,
        points: bs.points.clone(),
    };
    let report = BoundaryReport {
        rep_level,
        sample_points: bs.points.len(),
        pairs: bs.pairs.len(),
        unresolved_pairs: bs.unresolved_count(),
        tail_bound: bs.tail_bound,
        reps_valid: bs.reps_valid(g, space),
        scale_index_consistent: bs.scale_index_consistent(),
        sandwich,
        biholder,
        meet,
        qs,
        mu_totals,
        ahlfors,
        diam,
    };
    Ok((report, (drho_csv, sidecar)))
}

impl RunOutput {
    pub fn report_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `space.json`, `graph.json`, `weights.json`, `report.json` and
    /// `tables/*.csv` under `dir`.
    pub fn write_bundle(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("tables"))?;
        let mut space_file = SpaceFile::from_space(&self.space.space);
        space_file.masses = self.space.masses.clone();
        space_file.known_dimension = self.space.known_dimension;
        fs::write(dir.join("space.json"), serde_json::to_vec(&space_file)?)?;
        fs::write(dir.join("graph.json"), self.graph.export("json")?)?;
        fs::write(
            dir.join("weights.json"),
            serde_json::to_vec_pretty(&self.weights.to_json(&self.graph))?,
        )?;
        fs::write(dir.join("report.json"), self.report_json())?;
        for (name, body) in &self.tables {
            fs::write(dir.join("tables").join(name), body)?;
        }
        if let Some((csv, sidecar)) = &self.drho_csv {
            fs::write(dir.join("tables").join("drho.csv"), csv)?;
            fs::write(dir.join("tables").join("drho.json"), serde_json::to_vec_pretty(sidecar)?)?;
        }
        Ok(())
    }
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        _ => f(),
    }
}

/// Per-field comparison of two reports. Numbers get relative deltas,
/// anything else is reported as changed.
pub fn diff_reports(a: &Value, b: &Value) -> Result<String> {
    let va = a.get("schema_version").and_then(Value::as_str).unwrap_or("none");
    let vb = b.get("schema_version").and_then(Value::as_str).unwrap_or("none");
    if va != vb {
        return Err(Error::SchemaMismatch(va.to_string(), vb.to_string()));
    }
    let mut lines = Vec::new();
    diff_values("", a, b, &mut lines);
    if lines.is_empty() {
        return Ok("no differences\n".to_string());
    }
    let mut out = lines.join("\n");
    out.push('\n');
    Ok(out)
}

fn diff_values(path: &str, a: &Value, b: &Value, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(ma), Value::Object(mb)) => {
            let mut keys: Vec<&String> = ma.keys().chain(mb.keys()).collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match (ma.get(k), mb.get(k)) {
                    (Some(x), Some(y)) => diff_values(&p, x, y, out),
                    (Some(_), None) => out.push(format!("{p}: only in first")),
                    (None, Some(_)) => out.push(format!("{p}: only in second")),
                    (None, None) => {}
                }
            }
        }
        (Value::Array(xa), Value::Array(xb)) if xa.len() == xb.len() => {
            for (i, (x, y)) in xa.iter().zip(xb).enumerate() {
                diff_values(&format!("{path}[{i}]"), x, y, out);
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if x != y {
                let rel = (x - y).abs() / x.abs().max(y.abs());
                out.push(format!("{path}: {x} -> {y} (relative delta {rel:.3e})"));
            }
        }
        _ if a != b => out.push(format!("{path}: {a} -> {b}")),
        _ => {}
    }
}
