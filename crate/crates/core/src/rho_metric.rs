//! The path metric `d_rho`: shortest paths where each edge costs the
//! integral of the linearly interpolated `pi` along it.
//!
//! Dijkstra always runs from the smaller vertex id of a pair and breaks cost
//! ties by vertex id, so every value is bit-identical however the work is
//! split across threads.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filling::FillingGraph;
use crate::metric_space::FiniteMetricSpace;
use crate::weights::{edge_cost, WeightAssignment};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoDistanceResult {
    pub value: f64,
    /// Vertex ids from the first endpoint to the second.
    pub path: Vec<usize>,
    pub tail_bound: f64,
}

#[derive(Clone, Copy, PartialEq)]
struct State {
    cost: f64,
    vid: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (cost, vid)
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.vid.cmp(&self.vid))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths. Returns distances and predecessors
/// (`usize::MAX` for the source and unreachable vertices). Stops early once
/// `target` is settled.
pub fn dijkstra(
    g: &FillingGraph,
    pi: &[f64],
    source: usize,
    target: Option<usize>,
) -> (Vec<f64>, Vec<usize>) {
    let n = g.num_vertices();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(State { cost: 0.0, vid: source });
    while let Some(State { cost, vid }) = heap.pop() {
        if done[vid] {
            continue;
        }
        done[vid] = true;
        if Some(vid) == target {
            break;
        }
        for &w in g.neighbors(vid) {
            if done[w] {
                continue;
            }
            let c = cost + edge_cost(pi, vid, w);
            if c < dist[w] {
                dist[w] = c;
                pred[w] = vid;
                heap.push(State { cost: c, vid: w });
            }
        }
    }
    (dist, pred)
}

/// `d_rho` between two vertices, with a realizing path.
pub fn drho(g: &FillingGraph, w: &WeightAssignment, u: usize, v: usize) -> RhoDistanceResult {
    if u == v {
        return RhoDistanceResult { value: 0.0, path: Vec::new(), tail_bound: 0.0 };
    }
    let (s, t) = (u.min(v), u.max(v));
    let (dist, pred) = dijkstra(g, &w.pi, s, Some(t));
    let mut path = vec![t];
    let mut cur = t;
    while pred[cur] != usize::MAX {
        cur = pred[cur];
        path.push(cur);
    }
    // path runs t..s; orient it u..v
    if u == s {
        path.reverse();
    }
    RhoDistanceResult { value: dist[t], path, tail_bound: 0.0 }
}

/// All-pairs `d_rho` on the vertex set, one Dijkstra per source in parallel.
pub fn drho_all_pairs(g: &FillingGraph, w: &WeightAssignment) -> Vec<Vec<f64>> {
    let n = g.num_vertices();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| dijkstra(g, &w.pi, s, None).0)
        .collect();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = rows[i.min(j)][i.max(j)];
        }
    }
    out
}

/// Nearest level-`level` net point to `x`, ties by point id, as a vertex id.
pub fn representative(g: &FillingGraph, space: &FiniteMetricSpace, x: usize, level: usize) -> usize {
    let row = space.row(x);
    let best = g.nets.levels[level]
        .iter()
        .copied()
        .min_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)))
        .expect("net levels are non-empty");
    g.vid_of(best, level).expect("net point is a vertex")
}

/// `2 max_{level} pi / (1 - eta_plus)`: what the two descending tails below
/// the representatives can add or remove.
pub fn tail_bound(g: &FillingGraph, w: &WeightAssignment, rep_level: usize) -> Result<f64> {
    if !(w.eta_plus < 1.0) {
        return Err(Error::EtaPlusNotBelowOne(w.eta_plus));
    }
    let max_pi = g
        .level_range(rep_level)
        .map(|v| w.pi[v])
        .fold(0.0, f64::max);
    Ok(2.0 * max_pi / (1.0 - w.eta_plus))
}

fn check_level(g: &FillingGraph, rep_level: usize) -> Result<()> {
    if rep_level > g.depth {
        return Err(Error::DepthExceeded { requested: rep_level, from: 0, depth: g.depth });
    }
    Ok(())
}

/// `d_rho` between the level-`rep_level` representatives of two points.
pub fn drho_boundary(
    g: &FillingGraph,
    space: &FiniteMetricSpace,
    w: &WeightAssignment,
    x: usize,
    y: usize,
    rep_level: usize,
) -> Result<RhoDistanceResult> {
    check_level(g, rep_level)?;
    let tail = tail_bound(g, w, rep_level)?;
    let rx = representative(g, space, x, rep_level);
    let ry = representative(g, space, y, rep_level);
    let mut r = drho(g, w, rx, ry);
    r.tail_bound = tail;
    Ok(r)
}

/// Distances from a set of source vertices to every vertex.
#[derive(Debug, Clone)]
pub struct SourceDistances {
    sources: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl SourceDistances {
    pub fn new(g: &FillingGraph, w: &WeightAssignment, sources: &[usize]) -> Self {
        let mut sources = sources.to_vec();
        sources.sort_unstable();
        sources.dedup();
        let rows = sources
            .par_iter()
            .map(|&s| dijkstra(g, &w.pi, s, None).0)
            .collect();
        SourceDistances { sources, rows }
    }

    fn row(&self, s: usize) -> Option<&[f64]> {
        let i = self.sources.binary_search(&s).ok()?;
        Some(&self.rows[i])
    }

    /// `d_rho(a, b)` where at least one endpoint is a source. When both are,
    /// the run from the smaller id is used.
    pub fn get(&self, a: usize, b: usize) -> f64 {
        let (lo, hi) = (a.min(b), a.max(b));
        match self.row(lo) {
            Some(r) => r[hi],
            None => self.row(hi).expect("one endpoint must be a source")[lo],
        }
    }

    /// Distances from source `s` to every vertex.
    pub fn from_source(&self, s: usize) -> &[f64] {
        self.row(s).expect("not a source")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoMatrix {
    pub points: Vec<usize>,
    pub reps: Vec<usize>,
    pub values: Vec<Vec<f64>>,
    pub rep_level: usize,
    pub tail_bound: f64,
    pub eta_plus: f64,
}

pub fn drho_matrix(
    g: &FillingGraph,
    space: &FiniteMetricSpace,
    w: &WeightAssignment,
    points: &[usize],
    rep_level: usize,
) -> Result<RhoMatrix> {
    check_level(g, rep_level)?;
    let tail = tail_bound(g, w, rep_level)?;
    let reps: Vec<usize> = points
        .iter()
        .map(|&x| representative(g, space, x, rep_level))
        .collect();
    let dists = SourceDistances::new(g, w, &reps);
    let k = points.len();
    let mut values = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if reps[i] != reps[j] {
                values[i][j] = dists.get(reps[i], reps[j]);
            }
        }
    }
    Ok(RhoMatrix {
        points: points.to_vec(),
        reps,
        values,
        rep_level,
        tail_bound: tail,
        eta_plus: w.eta_plus,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoSidecar {
    pub rep_level: usize,
    pub tail_bound: f64,
    pub eta_plus: f64,
    pub points: Vec<usize>,
}

impl RhoMatrix {
    pub fn sidecar(&self) -> RhoSidecar {
        RhoSidecar {
            rep_level: self.rep_level,
            tail_bound: self.tail_bound,
            eta_plus: self.eta_plus,
            points: self.points.clone(),
        }
    }
}
