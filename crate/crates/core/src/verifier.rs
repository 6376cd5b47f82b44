//! Empirical checks of the weight conditions: bounds on `rho`, the
//! ambiguity of `pi` across edges, lower bounds for `d_rho` through meet
//! vertices, and scale-invariant power sums over descendant sets. Also the
//! critical exponent, the perfectness gap and a four-point `delta`.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::filling::{FillingGraph, Vertex};
use crate::metric_space::FiniteMetricSpace;
use crate::nets::scale;
use crate::rho_metric::{representative, tail_bound, SourceDistances};
use crate::sampling::{self, Stream};
use crate::weights::WeightAssignment;

/// Bisection bracket for the critical exponent.
pub const P_BRACKET: (f64, f64) = (1e-3, 64.0);
/// Default cap on the number of (vertex, level) cells.
pub const DEFAULT_CELL_CAP: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H1Report {
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub holds: bool,
    pub saturated_levels: Vec<usize>,
    /// Vertices left out: the root plus everything on saturated levels.
    pub excluded: usize,
    /// Vertex with the largest `rho` when the bound fails.
    pub witness: Option<Vertex>,
}

pub fn check_h1(g: &FillingGraph, w: &WeightAssignment) -> H1Report {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut arg = None;
    let mut excluded = 0;
    for v in 0..g.num_vertices() {
        if v == g.root() || w.is_saturated(g.vertex(v).level) {
            excluded += 1;
            continue;
        }
        lo = lo.min(w.rho[v]);
        if w.rho[v] > hi {
            hi = w.rho[v];
            arg = Some(v);
        }
    }
    let holds = hi < 1.0 && lo > 0.0;
    H1Report {
        eta_minus: lo,
        eta_plus: hi,
        holds,
        saturated_levels: w.saturated_levels.clone(),
        excluded,
        witness: if holds { None } else { arg.map(|v| g.vertex(v)) },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H2Report {
    #[serde(rename = "K0")]
    pub k0: f64,
    pub witness: Option<(Vertex, Vertex)>,
    pub edges_checked: usize,
    /// Edges with both ends on saturated levels.
    pub edges_excluded: usize,
}

/// Largest `pi` ratio across an edge.
pub fn check_h2(g: &FillingGraph, w: &WeightAssignment) -> H2Report {
    let mut k0 = 1.0;
    let mut witness = None;
    let mut checked = 0;
    let mut excluded = 0;
    for (a, b) in g.edges() {
        if w.is_saturated(g.vertex(a).level) && w.is_saturated(g.vertex(b).level) {
            excluded += 1;
            continue;
        }
        checked += 1;
        let r = (w.pi[a] / w.pi[b]).max(w.pi[b] / w.pi[a]);
        if r > k0 {
            k0 = r;
            witness = Some((g.vertex(a), g.vertex(b)));
        }
    }
    H2Report { k0, witness, edges_checked: checked, edges_excluded: excluded }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H3Report {
    #[serde(rename = "K1")]
    pub k1: f64,
    /// Point pair attaining `K1`.
    pub witness: Option<(usize, usize)>,
    pub pairs_used: usize,
    pub skipped_equal: usize,
    pub ratio_min: f64,
    pub ratio_median: f64,
    pub ratio_max: f64,
    pub rep_level: usize,
    pub tail_bound: f64,
}

/// `K1` = max over point pairs of `pi(v_xy) / (d_rho + tail)`, where `v_xy`
/// is the meet of the tree branches of the two representatives.
pub fn check_h3(
    g: &FillingGraph,
    space: &FiniteMetricSpace,
    w: &WeightAssignment,
    pairs: &[(usize, usize)],
    rep_level: usize,
) -> Result<H3Report> {
    let tail = tail_bound(g, w, rep_level)?;
    let mut points: Vec<usize> = pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
    points.sort_unstable();
    points.dedup();
    let reps: Vec<usize> = points.iter().map(|&x| representative(g, space, x, rep_level)).collect();
    let rep_of = |x: usize| reps[points.binary_search(&x).expect("collected above")];
    let dists = SourceDistances::new(g, w, &reps);

    let mut ratios = Vec::with_capacity(pairs.len());
    let mut skipped = 0;
    let mut k1 = 0.0;
    let mut witness = None;
    for &(x, y) in pairs {
        if x == y {
            skipped += 1;
            continue;
        }
        let (rx, ry) = (rep_of(x), rep_of(y));
        let meet = g.meet_vertex(&g.tree_branch(rx), &g.tree_branch(ry));
        let d = if rx == ry { 0.0 } else { dists.get(rx, ry) };
        let ratio = w.pi[meet] / (d + tail);
        if ratio > k1 {
            k1 = ratio;
            witness = Some((x, y));
        }
        ratios.push(ratio);
    }
    let (lo, med, hi) = summary(&mut ratios);
    Ok(H3Report {
        k1,
        witness,
        pairs_used: ratios.len(),
        skipped_equal: skipped,
        ratio_min: lo,
        ratio_median: med,
        ratio_max: hi,
        rep_level,
        tail_bound: tail,
    })
}

/// (min, median, max); NaN for an empty slice. Sorts in place.
pub fn summary(values: &mut [f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    values.sort_by(f64::total_cmp);
    (values[0], median_sorted(values), values[values.len() - 1])
}

pub fn median_sorted(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        (sorted[k / 2 - 1] + sorted[k / 2]) / 2.0
    }
}

/// A vertex `(x,m)` together with a deeper level `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Cell {
    pub vertex: usize,
    pub n: usize,
}

/// Vertices at levels `1..=depth-2`, each paired with `n = m+2` and
/// `n = depth`, uniformly subsampled down to `cap` cells.
pub fn sample_cells(g: &FillingGraph, cap: usize, seed: u64) -> Vec<Cell> {
    let mut cells = Vec::new();
    for m in 1..=g.depth.saturating_sub(2) {
        for vertex in g.level_range(m) {
            cells.push(Cell { vertex, n: m + 2 });
            if m + 2 != g.depth {
                cells.push(Cell { vertex, n: g.depth });
            }
        }
    }
    if cells.len() > cap {
        let keep = sampling::subset(cells.len(), cap, seed, Stream::Cells);
        cells = keep.into_iter().map(|i| cells[i]).collect();
    }
    cells
}

/// Descendant sets of a list of cells, stored as `ln(pi(v)/pi(x,m))` so that
/// `S(p) = sum exp(p * ln ratio)` is cheap to evaluate.
#[derive(Debug, Clone)]
pub struct CellSums {
    pub cells: Vec<Cell>,
    pub sizes: Vec<usize>,
    log_ratios: Vec<Vec<f64>>,
}

impl CellSums {
    pub fn new(g: &FillingGraph, w: &WeightAssignment, cells: &[Cell]) -> Result<Self> {
        let per: Vec<Result<Vec<f64>>> = cells
            .par_iter()
            .map(|c| {
                let top = w.pi[c.vertex];
                Ok(g.descendants(c.vertex, c.n)?
                    .into_iter()
                    .map(|v| (w.pi[v] / top).ln())
                    .collect())
            })
            .collect();
        let log_ratios = per.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(CellSums {
            cells: cells.to_vec(),
            sizes: log_ratios.iter().map(Vec::len).collect(),
            log_ratios,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `S(p) = sum over D_n(x,m) of (pi(v)/pi(x,m))^p` for cell `i`.
    pub fn s(&self, i: usize, p: f64) -> f64 {
        self.log_ratios[i].iter().map(|l| (p * l).exp()).sum()
    }

    /// `K2(p) = max over cells of max(S, 1/S)`.
    pub fn k2(&self, p: f64) -> f64 {
        (0..self.len())
            .map(|i| {
                let s = self.s(i, p);
                s.max(1.0 / s)
            })
            .fold(1.0, f64::max)
    }

    /// Root of `S(p) = 1` on the bisection bracket, or `None` when `S - 1`
    /// does not change sign there.
    pub fn p_star(&self, i: usize) -> Option<f64> {
        let (mut lo, mut hi) = P_BRACKET;
        if self.s(i, lo) <= 1.0 || self.s(i, hi) >= 1.0 {
            return None;
        }
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if self.s(i, mid) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

pub fn check_h4(sums: &CellSums, p: f64) -> f64 {
    sums.k2(p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PStarReport {
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub cells: usize,
    pub no_root: usize,
    #[serde(skip)]
    pub per_cell: Vec<Option<f64>>,
}

pub fn critical_exponent(sums: &CellSums) -> PStarReport {
    let per_cell: Vec<Option<f64>> = (0..sums.len()).into_par_iter().map(|i| sums.p_star(i)).collect();
    let mut roots: Vec<f64> = per_cell.iter().flatten().copied().collect();
    let no_root = per_cell.len() - roots.len();
    let (min, median, max) = summary(&mut roots);
    PStarReport { median, min, max, cells: sums.len(), no_root, per_cell }
}

/// Smallest integer strictly above `(1/p) ln(K2) / ln(1/eta_plus)`.
pub fn perfectness_gap(k2: f64, eta_plus: f64, p: f64) -> u32 {
    let x = k2.ln() / (p * (1.0 / eta_plus).ln());
    x.floor() as u32 + 1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapAnnuli {
    pub gap: u32,
    pub checked: usize,
    pub empty: usize,
    /// First `(point, n)` whose annulus was empty.
    pub witness: Option<(usize, usize)>,
}

/// Checks that `B(x, alpha^-n) \ B(x, alpha^-(n+N))` holds a point, for every
/// given center and every `n` with outer radius below `diam/2` and inner
/// radius above the resolution cutoff of the sample.
pub fn check_gap_annuli(space: &FiniteMetricSpace, alpha: f64, gap: u32, centers: &[usize]) -> GapAnnuli {
    let cutoff = space.max_nearest_neighbor();
    let mut out = GapAnnuli { gap, checked: 0, empty: 0, witness: None };
    for &x in centers {
        let row = space.row(x);
        let mut n = 0;
        loop {
            let outer = scale(alpha, n);
            let inner = scale(alpha, n + gap as usize);
            if inner <= cutoff {
                break;
            }
            if outer < space.diameter() / 2.0 {
                out.checked += 1;
                if !row.iter().any(|&d| d >= inner && d < outer) {
                    out.empty += 1;
                    out.witness.get_or_insert((x, n));
                }
            }
            n += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub delta: f64,
    pub vertices: usize,
    pub exhaustive: bool,
}

/// Unweighted hop distances from `source`.
pub fn hop_distances(g: &FillingGraph, source: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; g.num_vertices()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbors(u) {
            if dist[w] == u32::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Four-point `delta` of the hop metric over all quadruples of a vertex
/// sample (every vertex when the graph has at most `sample` of them).
pub fn delta_hyperbolicity(g: &FillingGraph, sample: usize, seed: u64) -> DeltaReport {
    let verts = sampling::subset(g.num_vertices(), sample, seed, Stream::Delta);
    let k = verts.len();
    let rows: Vec<Vec<u32>> = verts.par_iter().map(|&s| hop_distances(g, s)).collect();
    let d: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| verts.iter().map(|&v| r[v] as i64).collect())
        .collect();
    let twice = (0..k)
        .into_par_iter()
        .map(|i| {
            let mut best = 0i64;
            for j in i + 1..k {
                for l in j + 1..k {
                    for m in l + 1..k {
                        let mut s = [d[i][j] + d[l][m], d[i][l] + d[j][m], d[i][m] + d[j][l]];
                        s.sort_unstable();
                        best = best.max(s[2] - s[1]);
                    }
                }
            }
            best
        })
        .max()
        .unwrap_or(0);
    DeltaReport {
        delta: twice as f64 / 2.0,
        vertices: k,
        exhaustive: k == g.num_vertices(),
    }
}
