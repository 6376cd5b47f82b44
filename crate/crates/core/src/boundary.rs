//! The boundary map at finite depth: sample points of the space are sent to
//! their representatives on a deep level, and distances between
//! representatives are compared with the original metric, with `pi` at the
//! meet vertex, and with the measure built from `pi^p`.
//!
//! Pair-based checks only use *resolved* pairs, whose meet vertex lies
//! strictly above the representative level. For the others the two
//! representatives are already neighbors and `d_rho` is a single edge at the
//! truncation scale, which says nothing about the pair.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::filling::{scale_index, FillingGraph};
use crate::metric_space::FiniteMetricSpace;
use crate::nets::scale;
use crate::rho_metric::SourceDistances;
use crate::sampling::{self, Stream};
use crate::weights::WeightAssignment;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySample {
    pub points: Vec<usize>,
    pub rep_level: usize,
    /// Representative vertex ids.
    pub reps: Vec<usize>,
    pub dmatrix: Vec<Vec<f64>>,
    pub dz: Vec<Vec<f64>>,
    pub tail_bound: f64,
    pub alpha: f64,
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub j0: i64,
    /// Index pairs `i < j` into `points` used by the pair checks.
    pub pairs: Vec<(usize, usize)>,
    /// Meet vertex id per entry of `pairs`.
    pub meets: Vec<usize>,
    pub meet_levels: Vec<usize>,
    pub meet_pi: Vec<f64>,
    /// `n_xy` per entry of `pairs`.
    pub n_xy: Vec<i64>,
    /// Tree branch of each representative, root first.
    #[serde(skip)]
    pub branches: Vec<Vec<usize>>,
}

/// Representatives are nearest net points on `rep_level`. Pairs are all
/// index pairs, or `pair_cap` of them sampled with `seed`.
pub fn build_boundary_sample(
    g: &FillingGraph,
    space: &FiniteMetricSpace,
    w: &WeightAssignment,
    points: &[usize],
    rep_level: usize,
    pair_cap: usize,
    seed: u64,
) -> Result<BoundarySample> {
    let m = crate::rho_metric::drho_matrix(g, space, w, points, rep_level)?;
    let k = points.len();
    let dz: Vec<Vec<f64>> = points
        .iter()
        .map(|&x| points.iter().map(|&y| space.dist(x, y)).collect())
        .collect();
    let pairs = sampling::pairs(k, pair_cap, seed, Stream::Pairs);
    let branches: Vec<Vec<usize>> = m.reps.iter().map(|&r| g.tree_branch(r)).collect();
    let meets: Vec<usize> = pairs
        .par_iter()
        .map(|&(i, j)| g.meet_vertex(&branches[i], &branches[j]))
        .collect();
    let n_xy = pairs
        .iter()
        .map(|&(i, j)| scale_index(g.alpha, dz[i][j]))
        .collect();
    Ok(BoundarySample {
        points: points.to_vec(),
        rep_level,
        reps: m.reps,
        dmatrix: m.values,
        dz,
        tail_bound: m.tail_bound,
        alpha: g.alpha,
        eta_minus: w.eta_minus,
        eta_plus: w.eta_plus,
        j0: g.regime().j0(),
        meet_levels: meets.iter().map(|&v| g.vertex(v).level).collect(),
        meet_pi: meets.iter().map(|&v| w.pi[v]).collect(),
        meets,
        pairs,
        n_xy,
        branches,
    })
}

impl BoundarySample {
    pub fn resolved(&self, pair: usize) -> bool {
        self.meet_levels[pair] < self.rep_level
    }

    fn resolved_pairs(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.pairs.len()).filter(|&k| self.resolved(k))
    }

    /// Resolution test for any index pair, sampled or not.
    pub fn resolved_any(&self, g: &FillingGraph, i: usize, j: usize) -> bool {
        let key = (i.min(j), i.max(j));
        match self.pairs.binary_search(&key) {
            Ok(k) => self.resolved(k),
            Err(_) => g.vertex(g.meet_vertex(&self.branches[i], &self.branches[j])).level < self.rep_level,
        }
    }

    pub fn unresolved_count(&self) -> usize {
        self.pairs.len() - self.resolved_pairs().count()
    }

    /// Representatives lie within `alpha^-rep_level` of their points.
    pub fn reps_valid(&self, g: &FillingGraph, space: &FiniteMetricSpace) -> bool {
        let r = scale(self.alpha, self.rep_level);
        self.points
            .iter()
            .zip(&self.reps)
            .all(|(&x, &v)| space.dist(x, g.vertex(v).point) < r)
    }

    /// `n_xy` brackets every stored `d_Z`.
    pub fn scale_index_consistent(&self) -> bool {
        self.pairs.iter().zip(&self.n_xy).all(|(&(i, j), &n)| {
            let d = self.dz[i][j];
            crate::filling::scale_signed(self.alpha, n) < d
                && d <= crate::filling::scale_signed(self.alpha, n - 1)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub j0: i64,
    pub checked: usize,
    /// Pairs whose lower bound lies below the representative level.
    pub exempt: usize,
    pub violations: usize,
    /// `(x, y, meet level, lower, upper)` of the first violation.
    pub witness: Option<(usize, usize, usize, i64, i64)>,
}

/// `Pi_2(v_xy)` within `[n_xy - |j0| - 1, n_xy + |j0| + 3]`.
pub fn check_scale_sandwich(bs: &BoundarySample) -> SandwichReport {
    let j = bs.j0.abs();
    let mut out = SandwichReport { j0: bs.j0, checked: 0, exempt: 0, violations: 0, witness: None };
    for (k, &(i, jj)) in bs.pairs.iter().enumerate() {
        let lo = bs.n_xy[k] - j - 1;
        let hi = bs.n_xy[k] + j + 3;
        if lo > bs.rep_level as i64 {
            out.exempt += 1;
            continue;
        }
        out.checked += 1;
        let level = bs.meet_levels[k] as i64;
        if level < lo || level > hi {
            out.violations += 1;
            out.witness
                .get_or_insert((bs.points[i], bs.points[jj], bs.meet_levels[k], lo, hi));
        }
    }
    out
}

/// `ln(eta) / ln(1/alpha)`.
pub fn holder_exponent(eta: f64, alpha: f64) -> f64 {
    eta.ln() / (1.0 / alpha).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiholderReport {
    pub tau_minus: f64,
    pub tau_plus: f64,
    /// `min d_rho / d_Z^tau_minus`.
    pub c: f64,
    /// `max d_rho / d_Z^tau_plus`.
    #[serde(rename = "C")]
    pub big_c: f64,
    /// Least-squares slope of `ln d_rho` against `ln d_Z`.
    pub slope: f64,
    pub pairs_used: usize,
    pub unresolved: usize,
    pub finite: bool,
}

pub fn check_biholder(bs: &BoundarySample) -> BiholderReport {
    let tau_minus = holder_exponent(bs.eta_minus, bs.alpha);
    let tau_plus = holder_exponent(bs.eta_plus, bs.alpha);
    let mut c = f64::INFINITY;
    let mut big_c: f64 = 0.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in bs.resolved_pairs() {
        let (i, j) = bs.pairs[k];
        let (dz, dr) = (bs.dz[i][j], bs.dmatrix[i][j]);
        c = c.min(dr / dz.powf(tau_minus));
        big_c = big_c.max(dr / dz.powf(tau_plus));
        xs.push(dz.ln());
        ys.push(dr.ln());
    }
    let slope = least_squares_slope(&xs, &ys);
    BiholderReport {
        tau_minus,
        tau_plus,
        c,
        big_c,
        slope,
        pairs_used: xs.len(),
        unresolved: bs.unresolved_count(),
        finite: c.is_finite() && big_c.is_finite() && c > 0.0 && big_c > 0.0,
    }
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeetReport {
    /// `min d_rho / pi(v_xy)`.
    pub lower: f64,
    /// `min (d_rho + tail) / pi(v_xy)`; this is `1/K1` over the same pairs.
    pub lower_with_tail: f64,
    /// `max d_rho / pi(v_xy)`.
    pub upper: f64,
    /// `2 / (1 - eta_plus)`.
    pub upper_bound: f64,
    /// Pairs with `d_rho > 2 pi(v_xy) / (1 - eta_plus) + tail`.
    pub violations: usize,
    pub pairs_used: usize,
    pub unresolved: usize,
    /// `lower_with_tail >= 1/K1` for the supplied `K1`.
    pub consistent_with_k1: Option<bool>,
}

pub fn check_meet_comparability(bs: &BoundarySample, k1: Option<f64>) -> MeetReport {
    let bound = 2.0 / (1.0 - bs.eta_plus);
    let mut lower = f64::INFINITY;
    let mut lower_t = f64::INFINITY;
    let mut upper: f64 = 0.0;
    let mut violations = 0;
    let mut used = 0;
    for k in bs.resolved_pairs() {
        let (i, j) = bs.pairs[k];
        let d = bs.dmatrix[i][j];
        let pi = bs.meet_pi[k];
        used += 1;
        lower = lower.min(d / pi);
        lower_t = lower_t.min((d + bs.tail_bound) / pi);
        upper = upper.max(d / pi);
        if d > bound * pi + bs.tail_bound {
            violations += 1;
        }
    }
    MeetReport {
        lower,
        lower_with_tail: lower_t,
        upper,
        upper_bound: bound,
        violations,
        pairs_used: used,
        unresolved: bs.unresolved_count(),
        consistent_with_k1: k1.map(|k1| lower_t * k1 >= 1.0 - 1e-12),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QsReport {
    #[serde(rename = "C")]
    pub c_fit: f64,
    /// `min(tau_plus, 1/tau_minus, 1)`: with it `C max{t^Theta, t^(1/Theta)}`
    /// dominates the fitted envelope.
    pub theta: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub triples_used: usize,
    pub skipped_degenerate: usize,
    pub skipped_unresolved: usize,
    pub violations_at_fit: usize,
    #[serde(skip)]
    pub table: Vec<(f64, f64)>,
}

/// `max{t^tau_plus, t^tau_minus}`.
pub fn envelope(t: f64, tau_plus: f64, tau_minus: f64) -> f64 {
    t.powf(tau_plus).max(t.powf(tau_minus))
}

/// For each triple `(x,y,z)` of sample indices records
/// `t = d_Z(x,y)/d_Z(x,z)`, `s = d_rho(x,y)/d_rho(x,z)` and fits the
/// smallest `C` with `s <= C max{t^tau_plus, t^tau_minus}`.
pub fn qs_envelope(bs: &BoundarySample, g: &FillingGraph, triples: &[(usize, usize, usize)]) -> QsReport {
    let tau_minus = holder_exponent(bs.eta_minus, bs.alpha);
    let tau_plus = holder_exponent(bs.eta_plus, bs.alpha);
    let mut table = Vec::new();
    let mut degenerate = 0;
    let mut unresolved = 0;
    for &(x, y, z) in triples {
        if x == y || x == z || y == z {
            degenerate += 1;
            continue;
        }
        if !(bs.resolved_any(g, x, y) && bs.resolved_any(g, x, z)) {
            unresolved += 1;
            continue;
        }
        let (dxy, dxz) = (bs.dmatrix[x][y], bs.dmatrix[x][z]);
        if dxz <= 0.0 {
            degenerate += 1;
            continue;
        }
        table.push((bs.dz[x][y] / bs.dz[x][z], dxy / dxz));
    }
    let c_fit = table
        .iter()
        .map(|&(t, s)| s / envelope(t, tau_plus, tau_minus))
        .fold(0.0, f64::max);
    let violations = table
        .iter()
        .filter(|&&(t, s)| s > c_fit * envelope(t, tau_plus, tau_minus) * (1.0 + 1e-12))
        .count();
    QsReport {
        c_fit,
        theta: tau_plus.min(1.0 / tau_minus).min(1.0),
        tau_plus,
        tau_minus,
        triples_used: table.len(),
        skipped_degenerate: degenerate,
        skipped_unresolved: unresolved,
        violations_at_fit: violations,
        table,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryMeasure {
    pub level: usize,
    pub p: f64,
    /// `pi((x,n))^p` per level-`n` vertex, in net order.
    pub masses: Vec<f64>,
    pub total: f64,
}

pub fn build_mu_n(g: &FillingGraph, w: &WeightAssignment, n: usize, p: f64) -> BoundaryMeasure {
    let masses: Vec<f64> = g.level_range(n).map(|v| w.pi[v].powf(p)).collect();
    let total = masses.iter().sum();
    BoundaryMeasure { level: n, p, masses, total }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuTotals {
    pub p: f64,
    /// `(n, mu_n(Z))` for `n = 2..=depth`.
    pub totals: Vec<(usize, f64)>,
    /// Largest total over smallest.
    pub band: f64,
}

pub fn mu_totals(g: &FillingGraph, w: &WeightAssignment, p: f64) -> MuTotals {
    let totals: Vec<(usize, f64)> = (2.min(g.depth)..=g.depth)
        .map(|n| (n, build_mu_n(g, w, n, p).total))
        .collect();
    let hi = totals.iter().map(|t| t.1).fold(0.0, f64::max);
    let lo = totals.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
    MuTotals { p, totals, band: hi / lo }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallMetric {
    Rho,
    Dz,
}

impl std::str::FromStr for BallMetric {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rho" => Ok(BallMetric::Rho),
            "dz" => Ok(BallMetric::Dz),
            other => Err(crate::error::Error::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AhlforsReport {
    pub p: f64,
    pub ball_metric: BallMetric,
    pub c_reg: f64,
    pub radii: Vec<f64>,
    /// Radii dropped for lying below `floor`.
    pub excluded_radii: usize,
    /// Largest `pi` on the measure level: below it a ball is a single vertex.
    pub floor: f64,
    /// Decades spanned by the radii kept.
    pub decades: f64,
    /// Geometric mean of the ratio over centers, per kept radius.
    pub mean_ratio: Vec<f64>,
    /// Log-log slope of `mean_ratio` against the radius.
    pub slope: f64,
    /// `mean_ratio` is monotone in `r` with `|slope| >= TREND_SLOPE`.
    pub trend: bool,
    #[serde(skip)]
    pub table: Vec<(usize, f64, f64)>,
}

pub const TREND_SLOPE: f64 = 0.2;

/// Ratios `mu(ball)/r^p` for balls around the representatives of the given
/// centers (indices into the sample). In `rho` mode the ball is
/// `{(a, L) : d_rho(rep, (a, L)) < r}` for `r` on a dyadic grid below the
/// sample's `d_rho` diameter. In `dz` mode the ball is `B_dZ(x, s)` for a
/// dyadic grid of `s` below `diam Z`, and `r` is the largest `d_rho` from the
/// representative to a vertex of that ball.
pub fn check_ahlfors(
    bs: &BoundarySample,
    g: &FillingGraph,
    space: &FiniteMetricSpace,
    w: &WeightAssignment,
    mu: &BoundaryMeasure,
    centers: &[usize],
    radii_count: usize,
    mode: BallMetric,
) -> AhlforsReport {
    let level = mu.level;
    let verts: Vec<usize> = g.level_range(level).collect();
    let floor = verts.iter().map(|&v| w.pi[v]).fold(0.0, f64::max);
    let center_reps: Vec<usize> = centers.iter().map(|&c| bs.reps[c]).collect();
    let dists = SourceDistances::new(g, w, &center_reps);
    let top = match mode {
        BallMetric::Rho => bs.dmatrix.iter().flatten().copied().fold(0.0, f64::max),
        BallMetric::Dz => space.diameter(),
    };
    let grid: Vec<f64> = (0..radii_count).map(|k| top / 2f64.powi(k as i32)).collect();

    let per_center: Vec<Vec<Option<(f64, f64)>>> = centers
        .par_iter()
        .zip(&center_reps)
        .map(|(&c, &rc)| {
            let row = dists.from_source(rc);
            grid.iter()
                .map(|&s| {
                    let (mass, r) = match mode {
                        BallMetric::Rho => {
                            let m: f64 = verts
                                .iter()
                                .zip(&mu.masses)
                                .filter(|(&v, _)| row[v] < s)
                                .map(|(_, &m)| m)
                                .sum();
                            (m, s)
                        }
                        BallMetric::Dz => {
                            let x = bs.points[c];
                            let mut m = 0.0;
                            let mut r: f64 = 0.0;
                            for (&v, &mv) in verts.iter().zip(&mu.masses) {
                                if space.dist(x, g.vertex(v).point) < s {
                                    m += mv;
                                    r = r.max(row[v]);
                                }
                            }
                            (m, r)
                        }
                    };
                    (r >= floor && r > 0.0).then(|| (r, mass / r.powf(mu.p)))
                })
                .collect()
        })
        .collect();

    let mut table = Vec::new();
    let mut kept_radii = Vec::new();
    let mut mean_ratio = Vec::new();
    let mut excluded = 0;
    for (k, &s) in grid.iter().enumerate() {
        let col: Vec<(f64, f64)> = per_center.iter().filter_map(|row| row[k]).collect();
        if col.len() < per_center.len() || col.is_empty() {
            excluded += 1;
            continue;
        }
        for (ci, &(r, ratio)) in col.iter().enumerate() {
            table.push((bs.points[centers[ci]], r, ratio));
        }
        let radius = match mode {
            BallMetric::Rho => s,
            // geometric mean of the induced d_rho radii
            BallMetric::Dz => (col.iter().map(|c| c.0.ln()).sum::<f64>() / col.len() as f64).exp(),
        };
        kept_radii.push(radius);
        mean_ratio.push((col.iter().map(|c| c.1.ln()).sum::<f64>() / col.len() as f64).exp());
    }
    let hi = table.iter().map(|t| t.2).fold(0.0, f64::max);
    let lo = table.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = kept_radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = mean_ratio.iter().map(|r| r.ln()).collect();
    let slope = least_squares_slope(&xs, &ys);
    // non-strict, up to rounding: plateaus appear where no new vertex enters the ball
    let tol = 1e-9;
    let monotone = mean_ratio.windows(2).all(|p| p[1] <= p[0] * (1.0 + tol))
        || mean_ratio.windows(2).all(|p| p[1] >= p[0] * (1.0 - tol));
    let decades = match (kept_radii.first(), kept_radii.last()) {
        (Some(a), Some(b)) => (a / b).log10().abs(),
        _ => 0.0,
    };
    let trend = monotone && mean_ratio.len() >= 3 && slope.abs() >= TREND_SLOPE;
    AhlforsReport {
        p: mu.p,
        ball_metric: mode,
        c_reg: hi / lo,
        radii: kept_radii,
        excluded_radii: excluded,
        floor,
        decades,
        mean_ratio,
        slope,
        trend,
        table,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiamReport {
    /// Range of `diam_rho(ball) / pi((x,n))`.
    pub lower: f64,
    pub upper: f64,
    /// Same with the tail bound added to the diameter.
    pub lower_with_tail: f64,
    pub upper_with_tail: f64,
    pub used: usize,
    /// Balls whose sample points share one representative, or hold fewer than two.
    pub skipped: usize,
}

/// For each vertex `(x,n)`: the `d_rho` diameter of the representatives of
/// the sample points in `B_dZ(x, alpha^-n)`, over `pi((x,n))`.
pub fn check_diam_comparison(
    bs: &BoundarySample,
    g: &FillingGraph,
    space: &FiniteMetricSpace,
    w: &WeightAssignment,
    vertices: &[usize],
) -> DiamReport {
    let mut out = DiamReport {
        lower: f64::INFINITY,
        upper: 0.0,
        lower_with_tail: f64::INFINITY,
        upper_with_tail: 0.0,
        used: 0,
        skipped: 0,
    };
    for &v in vertices {
        let vx = g.vertex(v);
        let r = scale(g.alpha, vx.level);
        let members: Vec<usize> = (0..bs.points.len())
            .filter(|&i| space.dist(vx.point, bs.points[i]) < r)
            .collect();
        let mut diam: f64 = 0.0;
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                diam = diam.max(bs.dmatrix[i][j]);
            }
        }
        if diam == 0.0 {
            out.skipped += 1;
            continue;
        }
        let pi = w.pi[v];
        out.used += 1;
        out.lower = out.lower.min(diam / pi);
        out.upper = out.upper.max(diam / pi);
        out.lower_with_tail = out.lower_with_tail.min((diam + bs.tail_bound) / pi);
        out.upper_with_tail = out.upper_with_tail.max((diam + bs.tail_bound) / pi);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::make_cantor;

    fn cantor_sample(level: u32) -> (crate::generators::GeneratedSpace, FillingGraph, WeightAssignment) {
        let gen = make_cantor(level).unwrap();
        let g = FillingGraph::build(&gen.space, 3.0, 19.0, level as usize).unwrap();
        let w = WeightAssignment::constant(&g, 1.0 / 3.0).unwrap();
        (gen, g, w)
    }

    #[test]
    fn exponents_and_envelope() {
        assert!((holder_exponent(1.0 / 3.0, 3.0) - 1.0).abs() < 1e-12);
        assert!((holder_exponent(0.25, 2.0) - 2.0).abs() < 1e-12);
        assert_eq!(envelope(4.0, 2.0, 0.5), 16.0);
        assert_eq!(envelope(0.25, 2.0, 0.5), 0.5);
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 * x - 2.0).collect();
        assert!((least_squares_slope(&xs, &ys) - 1.5).abs() < 1e-12);
        assert!(least_squares_slope(&[1.0], &[1.0]).is_nan());
    }

    #[test]
    fn cantor_sample_is_consistent() {
        let (gen, g, w) = cantor_sample(5);
        let pts: Vec<usize> = (0..gen.space.len()).collect();
        let bs = build_boundary_sample(&g, &gen.space, &w, &pts, 5, usize::MAX, 1729).unwrap();
        assert_eq!(bs.pairs.len(), 32 * 31 / 2);
        assert!(bs.reps_valid(&g, &gen.space));
        assert!(bs.scale_index_consistent());
        // every point is its own representative on the last level
        assert!(bs.reps.iter().zip(&pts).all(|(&v, &x)| g.vertex(v).point == x));
        for (k, &(i, j)) in bs.pairs.iter().enumerate() {
            assert_eq!(bs.resolved(k), bs.resolved_any(&g, j, i));
        }
        let s = check_scale_sandwich(&bs);
        assert_eq!(s.violations, 0, "{:?}", s.witness);

        let b = check_biholder(&bs);
        assert!(b.finite);
        assert_eq!(b.tau_minus, b.tau_plus);
        assert!(b.c <= b.big_c);
        assert_eq!(b.pairs_used + b.unresolved, bs.pairs.len());

        let m = check_meet_comparability(&bs, None);
        assert!(m.lower > 0.0 && m.upper <= m.upper_bound + 1e-12);
        assert_eq!(m.violations, 0);
    }

    #[test]
    fn mu_totals_are_flat_at_the_dimension() {
        let (_, g, w) = cantor_sample(6);
        for n in 0..=6 {
            assert_eq!(g.level_range(n).len(), 1 << n);
        }
        let dim = 2f64.ln() / 3f64.ln();
        let flat = mu_totals(&g, &w, dim);
        assert!((flat.band - 1.0).abs() < 1e-9, "{}", flat.band);
        assert!((flat.totals[0].1 - 2f64.powi(2) * 3f64.powf(-3.0 * dim)).abs() < 1e-12);
        assert!(mu_totals(&g, &w, 1.0).band > 2.0);
    }

    #[test]
    fn ball_metric_parsing() {
        assert_eq!("rho".parse::<BallMetric>().unwrap(), BallMetric::Rho);
        assert_eq!("dz".parse::<BallMetric>().unwrap(), BallMetric::Dz);
        assert!("euclid".parse::<BallMetric>().is_err());
    }
}
