use thiserror::Error;

/// Ways in which an input matrix fails to be a metric.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    NotSquare { rows: usize, row: usize, len: usize },
    TooFewPoints(usize),
    NonFinite { i: usize, j: usize },
    NonzeroDiagonal { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize },
    NonPositive { i: usize, j: usize, value: f64 },
    /// `d(i,k) > d(i,j) + d(j,k)`.
    Triangle { i: usize, j: usize, k: usize, lhs: f64, rhs: f64 },
}

impl std::fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricViolation::NotSquare { rows, row, len } => {
                write!(f, "matrix is not square: {rows} rows but row {row} has {len} entries")
            }
            MetricViolation::TooFewPoints(n) => write!(f, "need at least 2 points, got {n}"),
            MetricViolation::NonFinite { i, j } => write!(f, "({i},{j}) is not finite"),
            MetricViolation::NonzeroDiagonal { i, value } => {
                write!(f, "({i},{i}): diagonal entry {value} is not 0")
            }
            MetricViolation::Asymmetric { i, j } => write!(f, "({i},{j}): d(i,j) != d(j,i)"),
            MetricViolation::NonPositive { i, j, value } => {
                write!(f, "({i},{j}): distinct points at distance {value}")
            }
            MetricViolation::Triangle { i, j, k, lhs, rhs } => {
                write!(f, "({i},{j},{k}): d({i},{k})={lhs} > d({i},{j})+d({j},{k})={rhs}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("MetricViolation {0}")]
    MetricViolation(MetricViolation),

    #[error("DiameterOutOfRange: diameter {0} is not in (0,1)")]
    DiameterOutOfRange(f64),

    #[error("DegenerateSpace: all distances are zero")]
    DegenerateSpace,

    #[error("SizeLimit: {requested} points requested, cap is {cap}")]
    SizeLimit { requested: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("EmptyLevel: net level {0} is empty")]
    EmptyLevel(usize),

    #[error("DepthExceeded: level {requested} is outside 1..={depth} below vertex level {from}")]
    DepthExceeded { requested: usize, from: usize, depth: usize },

    #[error("vertex ({point},{level}) is not in the graph")]
    UnknownVertex { point: usize, level: usize },

    #[error("UnknownFormat: {0:?}")]
    UnknownFormat(String),

    #[error("ZeroMass: ball around vertex ({point},{level}) has zero mass")]
    ZeroMass { point: usize, level: usize },

    #[error("MissingVertex: no weight for vertex ({point},{level})")]
    MissingVertex { point: usize, level: usize },

    #[error("NonPositiveWeight: vertex ({point},{level}) has weight {value}")]
    NonPositiveWeight { point: usize, level: usize, value: f64 },

    #[error("NotAnEdge: vertices {0} and {1} are not neighbors")]
    NotAnEdge(usize, usize),

    #[error("EtaPlusNotBelowOne: eta_plus = {0}, tail bound undefined")]
    EtaPlusNotBelowOne(f64),

    #[error("SchemaMismatch: {0} vs {1}")]
    SchemaMismatch(String, String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
