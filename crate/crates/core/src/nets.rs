//! Nested maximal separated nets `A_0 ⊂ A_1 ⊂ … ⊂ A_N`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_space::FiniteMetricSpace;

/// `alpha^-n`. Every threshold in the crate goes through this so that the
/// same comparison is made everywhere.
#[inline]
pub fn scale(alpha: f64, n: usize) -> f64 {
    1.0 / alpha.powi(n as i32)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetHierarchy {
    pub alpha: f64,
    pub depth: usize,
    /// `levels[n]` lists `A_n`: the members of `A_{n-1}` first, then the
    /// newly admitted points in ascending id order.
    pub levels: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Deepest level worth building: once `alpha^-n` is below half the
/// resolution every level already contains every point. The pipeline caps
/// its depth here; `build_nested_nets` itself builds whatever is asked.
pub fn max_useful_depth(space: &FiniteMetricSpace, alpha: f64) -> usize {
    let mut n = 0;
    while scale(alpha, n + 1) >= space.resolution() / 2.0 {
        n += 1;
    }
    n
}

/// Greedy construction: `A_{n+1}` starts as `A_n`, then the remaining points
/// are scanned in ascending id order and admitted when at distance
/// `>= alpha^-(n+1)` from every current member.
pub fn build_nested_nets(space: &FiniteMetricSpace, alpha: f64, depth: usize) -> Result<NetHierarchy> {
    if !(alpha >= 2.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be >= 2")));
    }
    if depth == 0 {
        return Err(Error::InvalidParameter("depth must be >= 1".into()));
    }
    let mut warnings = Vec::new();
    if scale(alpha, depth) < space.resolution() {
        warnings.push(format!(
            "ResolutionExceeded: alpha^-{depth} = {} is below the resolution {}",
            scale(alpha, depth),
            space.resolution()
        ));
    }

    let n = space.len();
    let mut member = vec![false; n];
    let mut current: Vec<usize> = Vec::new();
    let mut levels = Vec::with_capacity(depth + 1);
    for level in 0..=depth {
        let r = scale(alpha, level);
        for z in 0..n {
            if member[z] {
                continue;
            }
            let row = space.row(z);
            if current.iter().all(|&w| row[w] >= r) {
                member[z] = true;
                current.push(z);
            }
        }
        if current.is_empty() {
            return Err(Error::EmptyLevel(level));
        }
        levels.push(current.clone());
    }
    Ok(NetHierarchy { alpha, depth, levels, warnings })
}

/// Outcome of the exhaustive separation / covering / nesting check.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NetCheck {
    pub separation_violations: usize,
    pub covering_violations: usize,
    pub nesting_violations: usize,
    pub root_singleton: bool,
}

impl NetCheck {
    pub fn ok(&self) -> bool {
        self.separation_violations == 0
            && self.covering_violations == 0
            && self.nesting_violations == 0
            && self.root_singleton
    }
}

impl NetHierarchy {
    pub fn level(&self, n: usize) -> &[usize] {
        &self.levels[n]
    }

    pub fn root_point(&self) -> usize {
        self.levels[0][0]
    }

    pub fn check(&self, space: &FiniteMetricSpace) -> NetCheck {
        let mut out = NetCheck {
            root_singleton: self.levels[0].len() == 1,
            ..Default::default()
        };
        for (n, level) in self.levels.iter().enumerate() {
            let r = scale(self.alpha, n);
            for (i, &a) in level.iter().enumerate() {
                for &b in &level[i + 1..] {
                    if space.dist(a, b) < r {
                        out.separation_violations += 1;
                    }
                }
            }
            for z in 0..space.len() {
                if !level.iter().any(|&w| space.dist(z, w) < r) {
                    out.covering_violations += 1;
                }
            }
            if n > 0 {
                let prev = &self.levels[n - 1];
                if level.len() < prev.len() || level[..prev.len()] != prev[..] {
                    out.nesting_violations += 1;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::PointMetric;

    fn line() -> FiniteMetricSpace {
        let pts: Vec<Vec<f64>> = [0.0, 0.3, 0.5, 0.9].iter().map(|&x| vec![x]).collect();
        FiniteMetricSpace::from_points(&pts, PointMetric::Euclidean, "line", None).unwrap()
    }

    #[test]
    fn four_point_line() {
        let space = line();
        let nets = build_nested_nets(&space, 2.0, 3).unwrap();
        assert_eq!(nets.levels, vec![vec![0], vec![0, 2], vec![0, 2, 3], vec![0, 2, 3, 1]]);
        assert!(nets.check(&space).ok());
    }

    #[test]
    fn coarse_levels_are_singletons() {
        let space = line();
        let nets = build_nested_nets(&space, 2.0, 1).unwrap();
        assert_eq!(nets.levels[0], vec![0]);
        assert_eq!(nets.root_point(), 0);
    }

    #[test]
    fn circle_reaches_every_point() {
        let g = crate::generators::make_circle(256).unwrap();
        let nets = build_nested_nets(&g.space, 2.0, 8).unwrap();
        assert_eq!(nets.depth, 8);
        assert!(nets.check(&g.space).ok());
        assert_eq!(nets.levels[8].len(), 256);
        for w in nets.levels.windows(2) {
            assert!(w[0].len() <= w[1].len());
        }
    }

    #[test]
    fn deep_levels_warn() {
        let space = line();
        // resolution 0.2: alpha^-n >= 0.1 keeps n <= 3
        assert_eq!(max_useful_depth(&space, 2.0), 3);
        let nets = build_nested_nets(&space, 2.0, 5).unwrap();
        assert_eq!(nets.depth, 5);
        assert_eq!(nets.levels[5], nets.levels[3]);
        assert!(nets.warnings[0].starts_with("ResolutionExceeded"));
        assert!(build_nested_nets(&space, 1.5, 3).is_err());
    }
}
