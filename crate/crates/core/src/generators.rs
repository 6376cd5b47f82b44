//! Test spaces with known dimension and natural measure: middle-thirds Cantor
//! endpoints, equally spaced circle points, and Sierpiński gasket vertices.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::metric_space::{FiniteMetricSpace, DEFAULT_DIAMETER};

/// Largest point count any generator will produce.
pub const MAX_POINTS: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSpace {
    pub space: FiniteMetricSpace,
    /// Point masses summing to 1.
    pub masses: Vec<f64>,
    pub known_dimension: Option<f64>,
}

impl GeneratedSpace {
    fn uniform(space: FiniteMetricSpace, known_dimension: f64) -> Self {
        let n = space.len();
        GeneratedSpace {
            space,
            masses: vec![1.0 / n as f64; n],
            known_dimension: Some(known_dimension),
        }
    }

    pub fn resolution(&self) -> f64 {
        self.space.resolution()
    }
}

fn check_size(requested: usize, cap: usize) -> Result<()> {
    if requested > cap {
        return Err(Error::SizeLimit { requested, cap });
    }
    Ok(())
}

pub fn make_cantor(level: u32) -> Result<GeneratedSpace> {
    make_cantor_capped(level, MAX_POINTS)
}

/// Left endpoints of the `2^level` intervals surviving `level` middle-third
/// removals. Coordinates are kept as integers over `3^level` so distances
/// are exact up to one division.
pub fn make_cantor_capped(level: u32, cap: usize) -> Result<GeneratedSpace> {
    if level == 0 || level > 12 {
        return Err(Error::InvalidParameter(format!("cantor level {level} is not in 1..=12")));
    }
    check_size(1usize << level, cap)?;
    let mut ends: Vec<u64> = vec![0];
    for _ in 0..level {
        // scale by 3, then keep the left and right thirds
        ends = ends.iter().flat_map(|&m| [3 * m, 3 * m + 2]).collect();
    }
    let denom = 3f64.powi(level as i32);
    let n = ends.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = ends[i].abs_diff(ends[j]) as f64 / denom;
        }
    }
    let space = FiniteMetricSpace::from_flat_known_metric(n, dist, &format!("cantor-{level}"))?;
    if space.diameter() >= 1.0 {
        return Err(Error::DiameterOutOfRange(space.diameter()));
    }
    Ok(GeneratedSpace::uniform(space, 2f64.ln() / 3f64.ln()))
}

pub fn make_circle(n: usize) -> Result<GeneratedSpace> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("circle needs n >= 3, got {n}")));
    }
    check_size(n, MAX_POINTS)?;
    // arc length in units of one step, rescaled so the longest arc is 0.9
    let unit = DEFAULT_DIAMETER / (n / 2) as f64;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let k = i.abs_diff(j);
            dist[i * n + j] = k.min(n - k) as f64 * unit;
        }
    }
    let space = FiniteMetricSpace::from_flat_known_metric(n, dist, &format!("circle-{n}"))?;
    Ok(GeneratedSpace::uniform(space, 1.0))
}

/// `n` equally spaced points of an interval, rescaled to diameter 0.9.
pub fn make_interval(n: usize) -> Result<GeneratedSpace> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("interval needs n >= 2, got {n}")));
    }
    check_size(n, MAX_POINTS)?;
    let unit = DEFAULT_DIAMETER / (n - 1) as f64;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = i.abs_diff(j) as f64 * unit;
        }
    }
    let space = FiniteMetricSpace::from_flat_known_metric(n, dist, &format!("interval-{n}"))?;
    Ok(GeneratedSpace::uniform(space, 1.0))
}

/// Number of gasket vertices at `level`: `3(3^level + 1)/2`.
pub fn sierpinski_count(level: u32) -> usize {
    3 * (3usize.pow(level) + 1) / 2
}

pub fn make_sierpinski(level: u32) -> Result<GeneratedSpace> {
    if level == 0 || level > 7 {
        return Err(Error::InvalidParameter(format!("sierpinski level {level} is not in 1..=7")));
    }
    check_size(sierpinski_count(level), MAX_POINTS)?;
    // corners in integer lattice coordinates (a, b) on a triangle of side 2^level
    let side = 1i64 << level;
    let mut triangles = vec![[(0i64, 0i64), (side, 0), (0, side)]];
    for _ in 0..level {
        triangles = triangles
            .into_iter()
            .flat_map(|[p, q, r]| {
                let mid = |u: (i64, i64), v: (i64, i64)| ((u.0 + v.0) / 2, (u.1 + v.1) / 2);
                let (pq, qr, rp) = (mid(p, q), mid(q, r), mid(r, p));
                [[p, pq, rp], [pq, q, qr], [rp, qr, r]]
            })
            .collect();
    }
    let corners: BTreeSet<(i64, i64)> = triangles.iter().flatten().copied().collect();
    let h = 3f64.sqrt() / 2.0;
    let points: Vec<(f64, f64)> = corners
        .iter()
        .map(|&(a, b)| (a as f64 + b as f64 / 2.0, b as f64 * h))
        .collect();
    let n = points.len();
    let scale = DEFAULT_DIAMETER / side as f64;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let (dx, dy) = (points[i].0 - points[j].0, points[i].1 - points[j].1);
            dist[i * n + j] = dx.hypot(dy) * scale;
        }
    }
    let space = FiniteMetricSpace::from_flat_known_metric(n, dist, &format!("sierpinski-{level}"))?;
    Ok(GeneratedSpace::uniform(space, 3f64.ln() / 2f64.ln()))
}
