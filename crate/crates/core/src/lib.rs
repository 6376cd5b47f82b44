//! Hyperbolic fillings of finite metric spaces.
//!
//! A finite metric space is turned into a leveled graph over nested nets,
//! weighted by a vertex function `rho`, and measured with the induced path
//! metric `d_rho`. The verifier and boundary modules check the weight
//! conditions and the geometry of the resulting boundary numerically.

pub mod error;
pub mod boundary;
pub mod filling;
pub mod generators;
pub mod io;
pub mod metric_space;
pub mod nets;
pub mod report;
pub mod rho_metric;
pub mod sampling;
pub mod verifier;
pub mod weights;

pub use error::{Error, MetricViolation, Result};
pub use filling::{EdgeKind, FillingGraph, ParamRegime, Vertex};
pub use generators::GeneratedSpace;
pub use metric_space::{FiniteMetricSpace, PointMetric};
pub use nets::NetHierarchy;
pub use weights::{DiscreteMeasure, MeasureOracle, WeightAssignment, WeightKind};
