//! Finite metric spaces stored as dense distance matrices.
//!
//! Every constructor validates the metric axioms exhaustively (the triangle
//! check is `O(n^3)` and runs in parallel over rows) and enforces
//! `0 < diam < 1`, either by rejecting the input or by rescaling it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, MetricViolation, Result};

/// Default diameter after normalization.
pub const DEFAULT_DIAMETER: f64 = 0.9;

/// Relative slack used by the triangle and symmetry checks. Distances computed
/// with square roots can miss exact collinear equalities by an ulp.
const AXIOM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<f64>,
    diameter: f64,
    resolution: f64,
    label: String,
}

/// Metrics understood by the point-cloud loader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointMetric {
    Euclidean,
    Linf,
    /// Angle between the (nonzero) vectors, i.e. great-circle distance on the unit sphere.
    Arc,
}

impl PointMetric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            PointMetric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            PointMetric::Linf => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            PointMetric::Arc => {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                (dot / (na * nb)).clamp(-1.0, 1.0).acos()
            }
        }
    }
}

impl std::str::FromStr for PointMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(PointMetric::Euclidean),
            "linf" => Ok(PointMetric::Linf),
            "arc" => Ok(PointMetric::Arc),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

impl FiniteMetricSpace {
    /// Validates a square matrix as a metric with diameter in `(0,1)`.
    pub fn from_matrix(values: &[Vec<f64>], label: &str) -> Result<Self> {
        let space = Self::validated(values, label)?;
        if !(space.diameter > 0.0 && space.diameter < 1.0) {
            return Err(Error::DiameterOutOfRange(space.diameter));
        }
        Ok(space)
    }

    /// Validates a square matrix as a metric and rescales it to diameter `target`.
    pub fn from_matrix_normalized(values: &[Vec<f64>], label: &str, target: f64) -> Result<Self> {
        Self::validated(values, label)?.normalize_diameter(target)
    }

    /// Builds the distance matrix of a point cloud. With `normalize = None` the
    /// raw diameter must already lie in `(0,1)`.
    pub fn from_points(
        points: &[Vec<f64>],
        metric: PointMetric,
        label: &str,
        normalize: Option<f64>,
    ) -> Result<Self> {
        let n = points.len();
        if let Some(bad) = points.iter().position(|p| p.len() != points[0].len()) {
            return Err(Error::Parse(format!(
                "point {bad} has dimension {} but point 0 has {}",
                points[bad].len(),
                points[0].len()
            )));
        }
        let mut flat = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric.distance(&points[i], &points[j]);
                flat[i * n + j] = d;
                flat[j * n + i] = d;
            }
        }
        let space = Self::from_flat(n, flat, label)?;
        match normalize {
            Some(target) => space.normalize_diameter(target),
            None if space.diameter > 0.0 && space.diameter < 1.0 => Ok(space),
            None => Err(Error::DiameterOutOfRange(space.diameter)),
        }
    }

    fn validated(values: &[Vec<f64>], label: &str) -> Result<Self> {
        let n = values.len();
        if let Some((row, r)) = values.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::MetricViolation(MetricViolation::NotSquare {
                rows: n,
                row,
                len: r.len(),
            }));
        }
        let flat: Vec<f64> = values.iter().flatten().copied().collect();
        Self::from_flat(n, flat, label)
    }

    /// Validates a row-major matrix. The diameter is not range-checked here.
    pub(crate) fn from_flat(n: usize, dist: Vec<f64>, label: &str) -> Result<Self> {
        Self::from_flat_checked(n, dist, label, true)
    }

    /// Like `from_flat` but skips the cubic triangle scan, for matrices that
    /// are metrics by construction (generators, snowflakes).
    pub(crate) fn from_flat_known_metric(n: usize, dist: Vec<f64>, label: &str) -> Result<Self> {
        Self::from_flat_checked(n, dist, label, false)
    }

    fn from_flat_checked(n: usize, mut dist: Vec<f64>, label: &str, triangle: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::MetricViolation(MetricViolation::TooFewPoints(n)));
        }
        debug_assert_eq!(dist.len(), n * n);
        let scale = dist.iter().fold(0.0f64, |m, &d| if d.is_finite() { m.max(d.abs()) } else { m });
        let slack = AXIOM_SLACK * scale.max(1.0);
        for i in 0..n {
            for j in 0..n {
                let d = dist[i * n + j];
                if !d.is_finite() {
                    return Err(Error::MetricViolation(MetricViolation::NonFinite { i, j }));
                }
                if i == j {
                    if d != 0.0 {
                        return Err(Error::MetricViolation(MetricViolation::NonzeroDiagonal {
                            i,
                            value: d,
                        }));
                    }
                } else if d <= 0.0 {
                    return Err(Error::MetricViolation(MetricViolation::NonPositive {
                        i,
                        j,
                        value: d,
                    }));
                } else if j > i && (d - dist[j * n + i]).abs() > slack {
                    return Err(Error::MetricViolation(MetricViolation::Asymmetric { i, j }));
                }
            }
        }
        // store an exactly symmetric matrix
        for i in 0..n {
            for j in (i + 1)..n {
                dist[j * n + i] = dist[i * n + j];
            }
        }
        if triangle {
            if let Some(v) = first_triangle_violation(n, &dist, slack) {
                return Err(Error::MetricViolation(v));
            }
        }
        let diameter = dist.iter().copied().fold(0.0, f64::max);
        let resolution = min_positive(&dist);
        Ok(FiniteMetricSpace {
            n,
            dist,
            diameter,
            resolution,
            label: label.to_string(),
        })
    }

    /// Multiplies every distance by `target / diam`.
    pub fn normalize_diameter(&self, target: f64) -> Result<Self> {
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "normalization target {target} is not in (0,1)"
            )));
        }
        if self.diameter <= 0.0 {
            return Err(Error::DegenerateSpace);
        }
        if self.diameter == target {
            return Ok(self.clone());
        }
        let factor = target / self.diameter;
        let dist: Vec<f64> = self.dist.iter().map(|d| d * factor).collect();
        let diameter = dist.iter().copied().fold(0.0, f64::max);
        Ok(FiniteMetricSpace {
            n: self.n,
            resolution: min_positive(&dist),
            dist,
            diameter,
            label: self.label.clone(),
        })
    }

    /// The snowflaked metric `d^epsilon`.
    pub fn snowflake(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "snowflake exponent {epsilon} is not in (0,1]"
            )));
        }
        if epsilon == 1.0 {
            return Ok(self.clone());
        }
        let dist: Vec<f64> = self.dist.iter().map(|d| d.powf(epsilon)).collect();
        let label = format!("{}^{epsilon}", self.label);
        Self::from_flat_known_metric(self.n, dist, &label)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Smallest positive distance.
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Points of the open ball `B(center, r)`, in ascending id order.
    pub fn ball(&self, center: usize, r: f64) -> impl Iterator<Item = usize> + '_ {
        self.row(center)
            .iter()
            .enumerate()
            .filter(move |(_, &d)| d < r)
            .map(|(i, _)| i)
    }

    /// Largest nearest-neighbor distance: below it some point is isolated.
    pub fn max_nearest_neighbor(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &d)| d)
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Smallest `C_U` such that every sampled annulus `B(z,r) \ B(z,r/C_U)` is
    /// non-empty, over all centers and `radius_grid_size` radii geometrically
    /// spaced strictly between the resolution cutoff and `diam/2`.
    ///
    /// The cutoff `r_min` is the largest nearest-neighbor distance: below it
    /// some point is isolated and no finite constant can work.
    pub fn estimate_uniform_perfectness(&self, radius_grid_size: usize) -> PerfectnessReport {
        let r_min = self.max_nearest_neighbor();
        let r_max = self.diameter / 2.0;
        let grid = radius_grid_size.max(1);
        if r_min >= r_max {
            return PerfectnessReport {
                c_u: None,
                r_min,
                radii: Vec::new(),
                worst: None,
                empty_annuli: Vec::new(),
            };
        }
        let q = (r_max / r_min).powf(1.0 / (grid as f64 + 1.0));
        let radii: Vec<f64> = (1..=grid).map(|i| r_min * q.powi(i as i32)).collect();

        let per_center: Vec<(f64, usize, f64, Vec<(usize, f64)>)> = (0..self.n)
            .into_par_iter()
            .map(|z| {
                let row = self.row(z);
                let mut worst = (1.0, z, radii[0]);
                let mut empty = Vec::new();
                for &r in &radii {
                    let inner = row
                        .iter()
                        .enumerate()
                        .filter(|&(w, &d)| w != z && d < r)
                        .map(|(_, &d)| d)
                        .fold(0.0, f64::max);
                    if inner <= 0.0 {
                        empty.push((z, r));
                        continue;
                    }
                    let needed = r / inner;
                    if needed > worst.0 {
                        worst = (needed, z, r);
                    }
                }
                (worst.0, worst.1, worst.2, empty)
            })
            .collect();

        let mut empty_annuli = Vec::new();
        let mut worst: Option<(f64, usize, f64)> = None;
        for (c, z, r, empty) in per_center {
            empty_annuli.extend(empty);
            if worst.map_or(true, |w| c > w.0) {
                worst = Some((c, z, r));
            }
        }
        let worst = worst.expect("at least one center");
        PerfectnessReport {
            c_u: if empty_annuli.is_empty() { Some(worst.0) } else { None },
            r_min,
            radii,
            worst: Some((worst.1, worst.2)),
            empty_annuli,
        }
    }

    /// Largest greedy `r/2`-separated subset of a ball `B(z,r)` over all
    /// centers and dyadic radii `2·diam·2^-k` down to the resolution.
    pub fn estimate_doubling(&self) -> usize {
        let mut radii = Vec::new();
        let mut r = 2.0 * self.diameter;
        while r > self.resolution {
            radii.push(r);
            r /= 2.0;
        }
        (0..self.n)
            .into_par_iter()
            .map(|z| {
                let mut best = 1;
                for &r in &radii {
                    let mut packed: Vec<usize> = Vec::new();
                    for w in self.ball(z, r) {
                        if packed.iter().all(|&u| self.dist(u, w) >= r / 2.0) {
                            packed.push(w);
                        }
                    }
                    best = best.max(packed.len());
                }
                best
            })
            .max()
            .unwrap_or(0)
    }
}

/// Uniform perfectness estimate of a finite sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerfectnessReport {
    /// `None` means degenerate: no sampled radius above the cutoff, or some
    /// annulus had no point at all.
    pub c_u: Option<f64>,
    /// Resolution cutoff; radii at or below it are exempt.
    pub r_min: f64,
    pub radii: Vec<f64>,
    /// (center, radius) attaining the reported constant.
    pub worst: Option<(usize, f64)>,
    pub empty_annuli: Vec<(usize, f64)>,
}

fn min_positive(dist: &[f64]) -> f64 {
    dist.iter()
        .copied()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// First `(i,j,k)` in lexicographic order with `d(i,k) > d(i,j) + d(j,k) + slack`.
fn first_triangle_violation(n: usize, dist: &[f64], slack: f64) -> Option<MetricViolation> {
    (0..n).into_par_iter().find_map_first(|i| {
        let ri = &dist[i * n..(i + 1) * n];
        for j in 0..n {
            let rj = &dist[j * n..(j + 1) * n];
            let dij = ri[j];
            // d(i,k) - d(j,k) <= d(i,j) for every k
            let worst = ri
                .iter()
                .zip(rj)
                .map(|(a, b)| a - b)
                .fold(f64::NEG_INFINITY, f64::max);
            if worst > dij + slack {
                let k = (0..n).find(|&k| ri[k] > dij + rj[k] + slack)?;
                return Some(MetricViolation::Triangle {
                    i,
                    j,
                    k,
                    lhs: ri[k],
                    rhs: dij + rj[k],
                });
            }
        }
        None
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> FiniteMetricSpace {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        FiniteMetricSpace::from_points(&pts, PointMetric::Euclidean, "line", None).unwrap()
    }

    #[test]
    fn two_point_space() {
        let s = FiniteMetricSpace::from_matrix(&[vec![0.0, 0.9], vec![0.9, 0.0]], "two").unwrap();
        assert_eq!(s.diameter(), 0.9);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn unit_diameter_is_rejected() {
        let err = FiniteMetricSpace::from_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]], "unit");
        assert!(matches!(err, Err(Error::DiameterOutOfRange(d)) if d == 1.0));
    }

    #[test]
    fn triangle_violation_reports_offending_triple() {
        let m = vec![
            vec![0.0, 0.3, 0.1],
            vec![0.3, 0.0, 0.5],
            vec![0.1, 0.5, 0.0],
        ];
        match FiniteMetricSpace::from_matrix(&m, "bad") {
            Err(Error::MetricViolation(MetricViolation::Triangle { i, j, k, .. })) => {
                assert_eq!((i, j, k), (1, 0, 2));
            }
            other => panic!("expected triangle violation, got {other:?}"),
        }
        let msg = FiniteMetricSpace::from_matrix(&m, "bad").unwrap_err().to_string();
        assert!(msg.starts_with("MetricViolation (1,0,2)"), "{msg}");
    }

    #[test]
    fn other_axiom_failures() {
        let asym = vec![vec![0.0, 0.3], vec![0.4, 0.0]];
        assert!(matches!(
            FiniteMetricSpace::from_matrix(&asym, ""),
            Err(Error::MetricViolation(MetricViolation::Asymmetric { i: 0, j: 1 }))
        ));
        let diag = vec![vec![0.1, 0.3], vec![0.3, 0.0]];
        assert!(matches!(
            FiniteMetricSpace::from_matrix(&diag, ""),
            Err(Error::MetricViolation(MetricViolation::NonzeroDiagonal { i: 0, .. }))
        ));
        let ragged = vec![vec![0.0, 0.3], vec![0.3]];
        assert!(matches!(
            FiniteMetricSpace::from_matrix(&ragged, ""),
            Err(Error::MetricViolation(MetricViolation::NotSquare { .. }))
        ));
        let one = vec![vec![0.0]];
        assert!(matches!(
            FiniteMetricSpace::from_matrix(&one, ""),
            Err(Error::MetricViolation(MetricViolation::TooFewPoints(1)))
        ));
        let dup = vec![vec![0.0, 0.0], vec![0.0, 0.0]];
        assert!(matches!(
            FiniteMetricSpace::from_matrix(&dup, ""),
            Err(Error::MetricViolation(MetricViolation::NonPositive { .. }))
        ));
    }

    #[test]
    fn normalize_scales_linearly() {
        let m = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let s = FiniteMetricSpace::from_matrix_normalized(&m, "three", 0.9).unwrap();
        assert!((s.dist(0, 1) - 0.45).abs() < 1e-15);
        assert!((s.diameter() - 0.9).abs() < 1e-12);

        let s = FiniteMetricSpace::from_matrix_normalized(&m, "three", 0.5).unwrap();
        assert!((s.dist(0, 1) - 0.25).abs() < 1e-15);
        assert!((s.dist(1, 2) - 0.25).abs() < 1e-15);
        assert!((s.dist(0, 2) - 0.5).abs() < 1e-15);

        let again = s.normalize_diameter(0.5).unwrap();
        assert_eq!(again, s);
        assert!(s.normalize_diameter(1.0).is_err());
    }

    #[test]
    fn snowflake_examples() {
        let s = FiniteMetricSpace::from_matrix(&[vec![0.0, 0.81], vec![0.81, 0.0]], "").unwrap();
        assert_eq!(s.snowflake(1.0).unwrap(), s);
        assert!((s.snowflake(0.5).unwrap().dist(0, 1) - 0.9).abs() < 1e-15);

        let l = line(&[0.0, 0.3, 0.5, 0.9]);
        let sf = l.snowflake(0.5).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!((sf.dist(i, j) - l.dist(i, j).sqrt()).abs() < 1e-15);
                for k in 0..4 {
                    assert!(sf.dist(i, k) <= sf.dist(i, j) + sf.dist(j, k));
                }
            }
        }
        assert!(sf.diameter() < 1.0);
        assert!(l.snowflake(0.0).is_err());
    }

    #[test]
    fn two_point_space_is_not_uniformly_perfect() {
        let s = line(&[0.0, 0.9]);
        let r = s.estimate_uniform_perfectness(16);
        assert_eq!(r.c_u, None);
        assert_eq!(r.r_min, 0.9);
        assert_eq!(s.estimate_doubling(), 2);
    }

    #[test]
    fn point_metrics() {
        let a = [0.0, 0.0];
        let b = [3.0, 4.0];
        assert_eq!(PointMetric::Euclidean.distance(&a, &b), 5.0);
        assert_eq!(PointMetric::Linf.distance(&a, &b), 4.0);
        let e1 = [1.0, 0.0];
        let e2 = [0.0, 2.0];
        assert!((PointMetric::Arc.distance(&e1, &e2) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!("chord".parse::<PointMetric>().is_err());
    }
}
