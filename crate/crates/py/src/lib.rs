//! Python bindings: metric spaces, fillings, weights, `d_rho` and the full
//! report pipeline.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use hypfill_core::io::LoadedSpace;
use hypfill_core::report::{self, InputSpec, RhoSpec, RunConfig};
use hypfill_core::{generators, rho_metric, DiscreteMeasure, FiniteMetricSpace};

create_exception!(hypfill, HypfillError, PyException);

fn err(e: impl std::fmt::Display) -> PyErr {
    HypfillError::new_err(e.to_string())
}

fn json_value<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// A finite metric space, with point masses and dimension when generated.
#[pyclass(name = "MetricSpace", module = "hypfill", skip_from_py_object)]
#[derive(Clone)]
struct PyMetricSpace {
    space: FiniteMetricSpace,
    masses: Option<Vec<f64>>,
    known_dimension: Option<f64>,
}

impl PyMetricSpace {
    fn plain(space: FiniteMetricSpace) -> Self {
        PyMetricSpace { space, masses: None, known_dimension: None }
    }

    fn generated(g: hypfill_core::Result<generators::GeneratedSpace>) -> PyResult<Self> {
        let g = g.map_err(err)?;
        Ok(PyMetricSpace { space: g.space, masses: Some(g.masses), known_dimension: g.known_dimension })
    }
}

#[pymethods]
impl PyMetricSpace {
    /// Validates a full distance matrix; `normalize` rescales to that diameter.
    #[staticmethod]
    #[pyo3(signature = (rows, label = "matrix", normalize = None))]
    fn from_matrix(rows: Vec<Vec<f64>>, label: &str, normalize: Option<f64>) -> PyResult<Self> {
        let space = match normalize {
            Some(t) => FiniteMetricSpace::from_matrix_normalized(&rows, label, t),
            None => FiniteMetricSpace::from_matrix(&rows, label),
        };
        space.map(Self::plain).map_err(err)
    }

    #[staticmethod]
    fn cantor(level: u32) -> PyResult<Self> {
        Self::generated(generators::make_cantor(level))
    }

    #[staticmethod]
    fn circle(n: usize) -> PyResult<Self> {
        Self::generated(generators::make_circle(n))
    }

    #[staticmethod]
    fn sierpinski(level: u32) -> PyResult<Self> {
        Self::generated(generators::make_sierpinski(level))
    }

    #[staticmethod]
    fn interval(n: usize) -> PyResult<Self> {
        Self::generated(generators::make_interval(n))
    }

    fn __len__(&self) -> usize {
        self.space.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "MetricSpace(label={:?}, n={}, diameter={})",
            self.space.label(),
            self.space.len(),
            self.space.diameter()
        )
    }

    fn dist(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.space.len();
        if i >= n || j >= n {
            return Err(pyo3::exceptions::PyIndexError::new_err(format!("point index out of range 0..{n}")));
        }
        Ok(self.space.dist(i, j))
    }

    #[getter]
    fn diameter(&self) -> f64 {
        self.space.diameter()
    }

    #[getter]
    fn resolution(&self) -> f64 {
        self.space.resolution()
    }

    #[getter]
    fn label(&self) -> String {
        self.space.label().to_string()
    }

    #[getter]
    fn masses(&self) -> Option<Vec<f64>> {
        self.masses.clone()
    }

    #[getter]
    fn known_dimension(&self) -> Option<f64> {
        self.known_dimension
    }

    fn matrix(&self) -> Vec<Vec<f64>> {
        self.space.matrix()
    }

    /// The metric `d^epsilon`; masses are kept and the dimension divided by epsilon.
    fn snowflake(&self, epsilon: f64) -> PyResult<Self> {
        Ok(PyMetricSpace {
            space: self.space.snowflake(epsilon).map_err(err)?,
            masses: self.masses.clone(),
            known_dimension: self.known_dimension.map(|d| d / epsilon),
        })
    }

    fn normalize(&self, target: f64) -> PyResult<Self> {
        Ok(PyMetricSpace { space: self.space.normalize_diameter(target).map_err(err)?, ..self.clone() })
    }
}

/// Hyperbolic filling over nested nets of a space.
#[pyclass(name = "FillingGraph", module = "hypfill")]
struct PyFillingGraph {
    graph: hypfill_core::FillingGraph,
}

#[pymethods]
impl PyFillingGraph {
    #[new]
    fn new(space: &PyMetricSpace, alpha: f64, tau: f64, depth: usize) -> PyResult<Self> {
        let graph = hypfill_core::FillingGraph::build(&space.space, alpha, tau, depth).map_err(err)?;
        Ok(PyFillingGraph { graph })
    }

    #[getter]
    fn depth(&self) -> usize {
        self.graph.depth
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.graph.warnings.clone()
    }

    fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    /// `(point, level)` of a vertex id.
    fn vertex(&self, vid: usize) -> PyResult<(usize, usize)> {
        if vid >= self.graph.num_vertices() {
            return Err(pyo3::exceptions::PyIndexError::new_err("vertex id out of range"));
        }
        let v = self.graph.vertex(vid);
        Ok((v.point, v.level))
    }

    fn vid(&self, point: usize, level: usize) -> PyResult<usize> {
        self.graph.vid_of(point, level).map_err(err)
    }

    fn level_sizes(&self) -> Vec<usize> {
        self.graph.nets.levels.iter().map(Vec::len).collect()
    }

    /// `(a, b, kind)` with `a < b` and kind `"horizontal"` or `"vertical"`.
    fn edges(&self) -> Vec<(usize, usize, &'static str)> {
        self.graph
            .edges()
            .map(|(a, b)| {
                let kind = match self.graph.edge_kind(a, b) {
                    Some(hypfill_core::EdgeKind::Horizontal) => "horizontal",
                    _ => "vertical",
                };
                (a, b, kind)
            })
            .collect()
    }

    fn parent(&self, vid: usize) -> Option<usize> {
        self.graph.parent(vid)
    }

    fn descendants(&self, vid: usize, n: usize) -> PyResult<Vec<usize>> {
        self.graph.descendants(vid, n).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        let bytes = self.graph.export("json").map_err(err)?;
        String::from_utf8(bytes).map_err(err)
    }

    fn to_dot(&self) -> String {
        self.graph.to_dot()
    }
}

/// Vertex weights `rho` and their products `pi` along the tree.
#[pyclass(name = "Weights", module = "hypfill")]
struct PyWeights {
    weights: hypfill_core::WeightAssignment,
}

#[pymethods]
impl PyWeights {
    #[staticmethod]
    fn constant(graph: &PyFillingGraph, c: f64) -> PyResult<Self> {
        let weights = hypfill_core::WeightAssignment::constant(&graph.graph, c).map_err(err)?;
        Ok(PyWeights { weights })
    }

    /// Ball-mass weights from the space's masses (uniform when it has none).
    #[staticmethod]
    #[pyo3(signature = (graph, space, p = None))]
    fn measure(graph: &PyFillingGraph, space: &PyMetricSpace, p: Option<f64>) -> PyResult<Self> {
        let n = space.space.len();
        if graph.graph.num_points() != n {
            return Err(err(format!("graph is over {} points but the space has {n}", graph.graph.num_points())));
        }
        let masses = space.masses.clone().unwrap_or_else(|| vec![1.0 / n as f64; n]);
        let mu = DiscreteMeasure::new(&space.space, masses).map_err(err)?;
        let p = p.or(space.known_dimension).unwrap_or(1.0);
        let weights = hypfill_core::WeightAssignment::measure(&graph.graph, &mu, p).map_err(err)?;
        Ok(PyWeights { weights })
    }

    #[staticmethod]
    fn custom(graph: &PyFillingGraph, rho: Vec<f64>) -> PyResult<Self> {
        let weights = hypfill_core::WeightAssignment::custom(&graph.graph, rho).map_err(err)?;
        Ok(PyWeights { weights })
    }

    #[getter]
    fn rho(&self) -> Vec<f64> {
        self.weights.rho.clone()
    }

    #[getter]
    fn pi(&self) -> Vec<f64> {
        self.weights.pi.clone()
    }

    #[getter]
    fn eta_minus(&self) -> f64 {
        self.weights.eta_minus
    }

    #[getter]
    fn eta_plus(&self) -> f64 {
        self.weights.eta_plus
    }

    #[getter]
    fn saturated_levels(&self) -> Vec<usize> {
        self.weights.saturated_levels.clone()
    }

    fn to_json(&self, graph: &PyFillingGraph) -> PyResult<String> {
        serde_json::to_string(&self.weights.to_json(&graph.graph)).map_err(err)
    }
}

/// `d_rho` between two vertex ids, with the vertex path realizing it.
#[pyfunction]
fn drho(graph: &PyFillingGraph, weights: &PyWeights, u: usize, v: usize) -> PyResult<(f64, Vec<usize>)> {
    let n = graph.graph.num_vertices();
    if u >= n || v >= n || weights.weights.pi.len() != n {
        return Err(err("vertex ids or weights do not match the graph"));
    }
    let r = rho_metric::drho(&graph.graph, &weights.weights, u, v);
    Ok((r.value, r.path))
}

/// Runs the full pipeline and returns the report as a dict. Pass either a
/// generator `kind` (`cantor`, `circle`, `sierpinski`, `interval`) with
/// `level` or `n`, or an `input` file path. `out_dir` also writes the bundle.
#[pyfunction]
#[pyo3(signature = (
    kind = None, level = None, n = None, input = None, normalize = None, snowflake = None,
    alpha = 2.0, tau = None, depth = 6, rho = None, rep_level = None,
    boundary_points = 128, pairs = 2000, triples = 2000, cells = 2000,
    ahlfors_p = None, ball_metric = "rho", seed = 1729, threads = None, out_dir = None,
))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    kind: Option<&str>,
    level: Option<u32>,
    n: Option<usize>,
    input: Option<String>,
    normalize: Option<f64>,
    snowflake: Option<f64>,
    alpha: f64,
    tau: Option<f64>,
    depth: usize,
    rho: Option<&str>,
    rep_level: Option<usize>,
    boundary_points: usize,
    pairs: usize,
    triples: usize,
    cells: usize,
    ahlfors_p: Option<f64>,
    ball_metric: &str,
    seed: u64,
    threads: Option<usize>,
    out_dir: Option<String>,
) -> PyResult<Bound<'py, PyAny>> {
    let need_level = || level.ok_or_else(|| err("generators: level is required"));
    let need_n = || n.ok_or_else(|| err("generators: n is required"));
    let input = match (kind, input) {
        (Some(_), Some(_)) => return Err(err("pass either kind or input, not both")),
        (None, Some(path)) => InputSpec::File { path, normalize },
        (Some("cantor"), None) => InputSpec::Cantor { level: need_level()? },
        (Some("sierpinski"), None) => InputSpec::Sierpinski { level: need_level()? },
        (Some("circle"), None) => InputSpec::Circle { n: need_n()? },
        (Some("interval"), None) => InputSpec::Interval { n: need_n()? },
        (Some(k), None) => return Err(err(format!("generators: unknown kind {k:?}"))),
        (None, None) => return Err(err("pass a generator kind or an input path")),
    };
    let rho = match rho {
        Some(s) => s.parse::<RhoSpec>().map_err(err)?,
        None => RhoSpec::Constant { c: 1.0 / alpha },
    };
    let mut config = RunConfig::new(input, alpha, tau.unwrap_or(2.0 * alpha * alpha + 1.0), depth, rho);
    config.snowflake = snowflake;
    config.rep_level = rep_level;
    config.boundary_points = boundary_points;
    config.pairs = pairs;
    config.triples = triples;
    config.cells = cells;
    config.ahlfors_p = ahlfors_p;
    config.ball_metric = ball_metric.parse().map_err(err)?;
    config.seed = seed;
    let text = py
        .detach(|| {
            report::with_threads(threads, || -> Result<String, String> {
                let out = report::run(&config).map_err(|e| e.to_string())?;
                if let Some(dir) = &out_dir {
                    out.write_bundle(std::path::Path::new(dir)).map_err(|e| format!("io: {e}"))?;
                }
                Ok(out.report_json())
            })
        })
        .map_err(err)?;
    json_value(py, &text)
}

/// Runs every check on a space, graph and weights built from Python.
#[pyfunction]
#[pyo3(signature = (space, graph, weights, seed = 1729))]
fn assess<'py>(
    py: Python<'py>,
    space: &PyMetricSpace,
    graph: &PyFillingGraph,
    weights: &PyWeights,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let g = &graph.graph;
    let rho = match weights.weights.kind {
        hypfill_core::WeightKind::Constant => RhoSpec::Constant { c: weights.weights.rho[0] },
        hypfill_core::WeightKind::Measure => RhoSpec::Measure { p: weights.weights.p },
        hypfill_core::WeightKind::Custom => RhoSpec::Custom,
    };
    let mut config = RunConfig::new(
        InputSpec::File { path: space.space.label().to_string(), normalize: None },
        g.alpha,
        g.tau,
        g.depth,
        rho,
    );
    config.seed = seed;
    let loaded = LoadedSpace {
        space: space.space.clone(),
        masses: space.masses.clone(),
        known_dimension: space.known_dimension,
    };
    let out = report::assess(&config, loaded, g.clone(), weights.weights.clone(), g.warnings.clone())
        .map_err(err)?;
    json_value(py, &out.report_json())
}

/// Field-by-field comparison of two report JSON strings.
#[pyfunction]
fn diff_reports(a: &str, b: &str) -> PyResult<String> {
    let a: serde_json::Value = serde_json::from_str(a).map_err(err)?;
    let b: serde_json::Value = serde_json::from_str(b).map_err(err)?;
    report::diff_reports(&a, &b).map_err(err)
}

#[pymodule]
pub fn hypfill(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HypfillError", m.py().get_type::<HypfillError>())?;
    m.add("SCHEMA_VERSION", report::SCHEMA_VERSION)?;
    m.add_class::<PyMetricSpace>()?;
    m.add_class::<PyFillingGraph>()?;
    m.add_class::<PyWeights>()?;
    m.add_function(wrap_pyfunction!(drho, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(assess, m)?)?;
    m.add_function(wrap_pyfunction!(diff_reports, m)?)?;
    Ok(())
}
