//! Vertex weights `rho`, the accumulated weight `pi`, and the measure-based
//! recipe built from ball masses.
//!
//! `pi` is computed along the spanning tree: `pi(w0) = rho(w0)` and
//! `pi(v) = rho(v) * pi(parent(v))`. All vectors are indexed by vertex id.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filling::{FillingGraph, Vertex};
use crate::metric_space::FiniteMetricSpace;
use crate::nets::scale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Constant,
    Measure,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightAssignment {
    pub kind: WeightKind,
    pub rho: Vec<f64>,
    pub pi: Vec<f64>,
    /// Bounds of `rho` over non-root vertices outside saturated levels.
    pub eta_minus: f64,
    pub eta_plus: f64,
    /// Levels where some ball `B(x, tau alpha^-n)` already holds the whole space.
    pub saturated_levels: Vec<usize>,
    /// Regularity exponent of the measure behind a measure assignment.
    pub p: Option<f64>,
}

/// Ball masses of a measure on the point set.
pub trait MeasureOracle: Sync {
    /// Mass of the open ball `B(center, radius)`.
    fn mass(&self, center: usize, radius: f64) -> f64;
    fn total(&self) -> f64;
    /// Whether the open ball contains every point with positive mass.
    fn covers(&self, center: usize, radius: f64) -> bool {
        self.mass(center, radius) >= self.total()
    }
}

/// Point masses on a finite space.
pub struct DiscreteMeasure<'a> {
    space: &'a FiniteMetricSpace,
    masses: Vec<f64>,
    total: f64,
}

impl<'a> DiscreteMeasure<'a> {
    pub fn new(space: &'a FiniteMetricSpace, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != space.len() {
            return Err(Error::InvalidParameter(format!(
                "{} masses for {} points",
                masses.len(),
                space.len()
            )));
        }
        if let Some(i) = masses.iter().position(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass {} at point {i}", masses[i])));
        }
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("total mass is zero".into()));
        }
        Ok(DiscreteMeasure { space, masses, total })
    }

    /// Normalized counting measure.
    pub fn uniform(space: &'a FiniteMetricSpace) -> Self {
        let n = space.len();
        DiscreteMeasure { space, masses: vec![1.0 / n as f64; n], total: 1.0 }
    }
}

impl MeasureOracle for DiscreteMeasure<'_> {
    fn mass(&self, center: usize, radius: f64) -> f64 {
        self.space
            .row(center)
            .iter()
            .zip(&self.masses)
            .filter(|(&d, _)| d < radius)
            .map(|(_, &m)| m)
            .sum()
    }

    fn total(&self) -> f64 {
        self.total
    }

    fn covers(&self, center: usize, radius: f64) -> bool {
        self.space
            .row(center)
            .iter()
            .zip(&self.masses)
            .all(|(&d, &m)| d < radius || m == 0.0)
    }
}

/// Top-down product along tree parents; parents always have smaller ids.
fn accumulate(g: &FillingGraph, rho: &[f64]) -> Vec<f64> {
    let mut pi = vec![0.0; rho.len()];
    for v in 0..rho.len() {
        pi[v] = match g.parent(v) {
            Some(p) => rho[v] * pi[p],
            None => rho[v],
        };
    }
    pi
}

fn eta_bounds(g: &FillingGraph, rho: &[f64], saturated: &[usize]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in 1..rho.len() {
        if saturated.contains(&g.vertex(v).level) {
            continue;
        }
        lo = lo.min(rho[v]);
        hi = hi.max(rho[v]);
    }
    if lo > hi {
        // nothing left after exclusions
        return (f64::NAN, f64::NAN);
    }
    (lo, hi)
}

impl WeightAssignment {
    fn assemble(
        g: &FillingGraph,
        kind: WeightKind,
        rho: Vec<f64>,
        saturated_levels: Vec<usize>,
        p: Option<f64>,
    ) -> Self {
        let pi = accumulate(g, &rho);
        let (eta_minus, eta_plus) = eta_bounds(g, &rho, &saturated_levels);
        WeightAssignment { kind, rho, pi, eta_minus, eta_plus, saturated_levels, p }
    }

    /// `rho` constant `c` everywhere, so `pi(v) = c^(level+1)`.
    pub fn constant(g: &FillingGraph, c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidParameter(format!("constant rho {c} is not in (0,1)")));
        }
        Ok(Self::assemble(g, WeightKind::Constant, vec![c; g.num_vertices()], Vec::new(), None))
    }

    /// `rho((x,n)) = (mu(B(x, tau alpha^-n)) / mu(B(z, tau alpha^(1-n))))^(1/p)` with
    /// `z` the tree parent, and `rho(w0) = 1` after normalizing the total mass.
    pub fn measure(g: &FillingGraph, oracle: &dyn MeasureOracle, p: f64) -> Result<Self> {
        if !(p > 0.0) {
            return Err(Error::InvalidParameter(format!("p = {p} must be positive")));
        }
        let total = oracle.total();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("total mass is zero".into()));
        }
        let per_vertex: Vec<(f64, bool)> = g
            .vertices()
            .par_iter()
            .map(|v| {
                let r = g.tau * scale(g.alpha, v.level);
                (oracle.mass(v.point, r) / total, oracle.covers(v.point, r))
            })
            .collect();
        let mut saturated_levels = Vec::new();
        for (vid, &(m, covers)) in per_vertex.iter().enumerate() {
            let v = g.vertex(vid);
            if !(m > 0.0) {
                return Err(Error::ZeroMass { point: v.point, level: v.level });
            }
            if covers && saturated_levels.last() != Some(&v.level) {
                saturated_levels.push(v.level);
            }
        }
        let inv_p = 1.0 / p;
        let rho: Vec<f64> = (0..g.num_vertices())
            .map(|v| match g.parent(v) {
                Some(par) => (per_vertex[v].0 / per_vertex[par].0).powf(inv_p),
                None => 1.0,
            })
            .collect();
        let w = Self::assemble(g, WeightKind::Measure, rho, saturated_levels, Some(p));
        let worst = w
            .pi
            .iter()
            .zip(&per_vertex)
            .map(|(pi, (m, _))| (pi - m.powf(inv_p)).abs())
            .fold(0.0, f64::max);
        // the product telescopes to the ball mass itself
        assert!(worst <= 1e-9, "telescoping identity off by {worst}");
        Ok(w)
    }

    /// Arbitrary positive weights given per vertex id.
    pub fn custom(g: &FillingGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != g.num_vertices() {
            let v = g.vertex(values.len().min(g.num_vertices() - 1));
            return Err(Error::MissingVertex { point: v.point, level: v.level });
        }
        check_positive(g, &values)?;
        Ok(Self::assemble(g, WeightKind::Custom, values, Vec::new(), None))
    }

    /// Arbitrary positive weights keyed by vertex.
    pub fn custom_map(g: &FillingGraph, values: &BTreeMap<Vertex, f64>) -> Result<Self> {
        let rho = g
            .vertices()
            .iter()
            .map(|v| {
                values
                    .get(v)
                    .copied()
                    .ok_or(Error::MissingVertex { point: v.point, level: v.level })
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::custom(g, rho)
    }

    /// The density `omega := pi`.
    pub fn omega(&self) -> Vec<f64> {
        self.pi.clone()
    }

    /// Inverse of [`omega`](Self::omega): `pi := omega`, `rho(v) := omega(v)/omega(parent)`.
    pub fn from_omega(g: &FillingGraph, omega: &[f64]) -> Result<Self> {
        if omega.len() != g.num_vertices() {
            let v = g.vertex(omega.len().min(g.num_vertices() - 1));
            return Err(Error::MissingVertex { point: v.point, level: v.level });
        }
        check_positive(g, omega)?;
        let rho: Vec<f64> = (0..omega.len())
            .map(|v| match g.parent(v) {
                Some(p) => omega[v] / omega[p],
                None => omega[v],
            })
            .collect();
        let (eta_minus, eta_plus) = eta_bounds(g, &rho, &[]);
        Ok(WeightAssignment {
            kind: WeightKind::Custom,
            rho,
            pi: omega.to_vec(),
            eta_minus,
            eta_plus,
            saturated_levels: Vec::new(),
            p: None,
        })
    }

    /// `(pi(u) + pi(v)) / 2`: the integral of the linear interpolation of `pi`
    /// over the unit-length edge `uv`.
    pub fn edge_integral(&self, g: &FillingGraph, u: usize, v: usize) -> Result<f64> {
        if !g.is_edge(u, v) {
            return Err(Error::NotAnEdge(u, v));
        }
        Ok(edge_cost(&self.pi, u, v))
    }

    pub fn is_saturated(&self, level: usize) -> bool {
        self.saturated_levels.contains(&level)
    }

    pub fn to_json(&self, g: &FillingGraph) -> WeightsJson {
        WeightsJson {
            kind: self.kind,
            p: self.p,
            rho: g
                .vertices()
                .iter()
                .zip(&self.rho)
                .map(|(v, &r)| (v.point, v.level, r))
                .collect(),
            eta_minus: self.eta_minus,
            eta_plus: self.eta_plus,
            saturated_levels: self.saturated_levels.clone(),
        }
    }

    pub fn from_json(g: &FillingGraph, json: &WeightsJson) -> Result<Self> {
        let mut rho = vec![f64::NAN; g.num_vertices()];
        for &(point, level, r) in &json.rho {
            rho[g.vid_of(point, level)?] = r;
        }
        if let Some(v) = rho.iter().position(|r| r.is_nan()) {
            let v = g.vertex(v);
            return Err(Error::MissingVertex { point: v.point, level: v.level });
        }
        check_positive(g, &rho)?;
        Ok(Self::assemble(g, json.kind, rho, json.saturated_levels.clone(), json.p))
    }
}

#[inline]
pub(crate) fn edge_cost(pi: &[f64], u: usize, v: usize) -> f64 {
    (pi[u] + pi[v]) / 2.0
}

fn check_positive(g: &FillingGraph, values: &[f64]) -> Result<()> {
    if let Some(i) = values.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
        let v = g.vertex(i);
        return Err(Error::NonPositiveWeight { point: v.point, level: v.level, value: values[i] });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsJson {
    pub kind: WeightKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub rho: Vec<(usize, usize, f64)>,
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub saturated_levels: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::make_circle;
    use crate::metric_space::PointMetric;

    fn line_graph() -> FillingGraph {
        let pts: Vec<Vec<f64>> = [0.0, 0.3, 0.5, 0.9].iter().map(|&x| vec![x]).collect();
        let s = FiniteMetricSpace::from_points(&pts, PointMetric::Euclidean, "line", None).unwrap();
        FillingGraph::build(&s, 2.0, 9.0, 3).unwrap()
    }

    #[test]
    fn constant_products() {
        let g = line_graph();
        let w = WeightAssignment::constant(&g, 0.5).unwrap();
        for vid in 0..g.num_vertices() {
            let level = g.vertex(vid).level;
            assert_eq!(w.pi[vid], 0.5f64.powi(level as i32 + 1));
        }
        assert_eq!((w.eta_minus, w.eta_plus), (0.5, 0.5));
        let w = WeightAssignment::constant(&g, 0.9).unwrap();
        assert_eq!(w.eta_plus, 0.9);
        assert!(WeightAssignment::constant(&g, 1.0).is_err());
    }

    #[test]
    fn custom_weights() {
        let g = line_graph();
        let half = WeightAssignment::custom(&g, vec![0.5; g.num_vertices()]).unwrap();
        let c = WeightAssignment::constant(&g, 0.5).unwrap();
        assert_eq!(half.pi, c.pi);
        assert_eq!(half.rho, c.rho);

        let mut vals = vec![0.5; g.num_vertices()];
        vals[3] = 1.5;
        let w = WeightAssignment::custom(&g, vals).unwrap();
        assert_eq!(w.eta_plus, 1.5);

        let mut map: BTreeMap<Vertex, f64> = g.vertices().iter().map(|&v| (v, 0.5)).collect();
        map.remove(&g.vertex(2));
        assert!(matches!(
            WeightAssignment::custom_map(&g, &map),
            Err(Error::MissingVertex { .. })
        ));
        let mut vals = vec![0.5; g.num_vertices()];
        vals[1] = 0.0;
        assert!(matches!(
            WeightAssignment::custom(&g, vals),
            Err(Error::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn omega_roundtrip() {
        let g = line_graph();
        let w = WeightAssignment::constant(&g, 0.5).unwrap();
        let omega = w.omega();
        for vid in 0..g.num_vertices() {
            assert_eq!(omega[vid], 0.5f64.powi(g.vertex(vid).level as i32 + 1));
        }
        let back = WeightAssignment::from_omega(&g, &omega).unwrap();
        assert_eq!(back.rho, w.rho);
        assert_eq!(back.pi, w.pi);
        assert_eq!((back.eta_minus, back.eta_plus), (w.eta_minus, w.eta_plus));
    }

    #[test]
    fn edge_integrals() {
        let g = line_graph();
        let w = WeightAssignment::constant(&g, 0.5).unwrap();
        let (a, b) = (g.root(), g.vid_of(0, 1).unwrap());
        assert_eq!(w.edge_integral(&g, a, b).unwrap(), 0.375);
        assert_eq!(w.edge_integral(&g, b, a).unwrap(), 0.375);
        let c = g.vid_of(0, 2).unwrap();
        assert_eq!(w.edge_integral(&g, b, c).unwrap(), 0.1875);
        let h = g.vid_of(2, 1).unwrap();
        assert_eq!(w.edge_integral(&g, b, h).unwrap(), 0.25);
        assert!(matches!(w.edge_integral(&g, a, c), Err(Error::NotAnEdge(..))));
    }

    #[test]
    fn measure_weights_on_circle() {
        let gen = make_circle(256).unwrap();
        let g = FillingGraph::build(&gen.space, 2.0, 9.0, 8).unwrap();
        let mu = DiscreteMeasure::new(&gen.space, gen.masses.clone()).unwrap();
        let w = WeightAssignment::measure(&g, &mu, 1.0).unwrap();
        assert_eq!(w.rho[g.root()], 1.0);
        // tau alpha^-n >= 0.9 for n <= 3
        assert_eq!(w.saturated_levels, vec![0, 1, 2, 3]);
        for vid in 0..g.num_vertices() {
            let v = g.vertex(vid);
            let r = 9.0 / 2f64.powi(v.level as i32);
            let count = (0..256).filter(|&j| gen.space.dist(v.point, j) < r).count();
            assert!((w.pi[vid] - count as f64 / 256.0).abs() < 1e-9, "{v}");
        }
        assert!(w.eta_plus < 1.0);
        let json = w.to_json(&g);
        let back = WeightAssignment::from_json(&g, &json).unwrap();
        assert_eq!(back, w);
    }
}
