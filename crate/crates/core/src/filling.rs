//! The hyperbolic filling graph over a net hierarchy.
//!
//! Vertices are `(point, level)` pairs, stored level by level in net order so
//! that a vertex id is `level_start[level] + position in A_level`. Edges are
//! kept as sorted adjacency lists.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric_space::FiniteMetricSpace;
use crate::nets::{build_nested_nets, scale, NetHierarchy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Vertex {
    pub point: usize,
    pub level: usize,
}

impl std::fmt::Display for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.point, self.level)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Horizontal,
    Vertical,
}

/// Parameter constraints. The flags are computed on demand from the values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRegime {
    pub alpha: f64,
    pub tau: f64,
    /// Uniform perfectness constant, when known.
    pub c_u: Option<f64>,
}

impl ParamRegime {
    pub fn new(alpha: f64, tau: f64) -> Self {
        ParamRegime { alpha, tau, c_u: None }
    }

    /// `alpha >= 2` and `tau >= 2 alpha^2 + 1`.
    pub fn basic(&self) -> bool {
        self.alpha >= 2.0 && self.tau >= 2.0 * self.alpha * self.alpha + 1.0
    }

    /// `C_U > 2`, `alpha > C_U^3`, `tau >= max{alpha^2 + 1, 2 C_U^3 / (C_U^2 - 4)}`.
    /// `None` without a uniform perfectness constant.
    pub fn part_ii(&self) -> Option<bool> {
        let c = self.c_u?;
        if c <= 2.0 {
            return Some(false);
        }
        let tau_min = (self.alpha * self.alpha + 1.0).max(2.0 * c.powi(3) / (c * c - 4.0));
        Some(self.alpha > c.powi(3) && self.tau >= tau_min)
    }

    /// The integer `j0` with `alpha^-j0 < tau - 1 <= alpha^(1-j0)`.
    pub fn j0(&self) -> i64 {
        scale_index(self.alpha, self.tau - 1.0)
    }
}

/// `alpha^-k` for any integer `k`.
pub fn scale_signed(alpha: f64, k: i64) -> f64 {
    if k >= 0 {
        scale(alpha, k as usize)
    } else {
        alpha.powi((-k) as i32)
    }
}

/// The integer `n` with `alpha^-n < t <= alpha^(1-n)`.
pub fn scale_index(alpha: f64, t: f64) -> i64 {
    assert!(t > 0.0, "scale index of a non-positive value");
    let mut n = (-t.ln() / alpha.ln()).floor() as i64 + 1;
    // the logarithm can land an ulp off at exact powers of alpha
    while scale_signed(alpha, n) >= t {
        n += 1;
    }
    while t > scale_signed(alpha, n - 1) {
        n -= 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub struct FillingGraph {
    pub alpha: f64,
    pub tau: f64,
    pub depth: usize,
    pub nets: NetHierarchy,
    vertices: Vec<Vertex>,
    level_start: Vec<usize>,
    /// `index[level][point]` is the vertex id, or `usize::MAX`.
    index: Vec<Vec<usize>>,
    adj: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    pub warnings: Vec<String>,
}

const NONE: usize = usize::MAX;

impl FillingGraph {
    /// Builds nets and graph in one go.
    pub fn build(space: &FiniteMetricSpace, alpha: f64, tau: f64, depth: usize) -> Result<Self> {
        let nets = build_nested_nets(space, alpha, depth)?;
        Self::from_nets(space, nets, tau)
    }

    /// Edges come from an exhaustive scan of every level pair `(n,n)` and
    /// `(n,n+1)`; tree parents are the closest valid parent, ties by point id.
    pub fn from_nets(space: &FiniteMetricSpace, nets: NetHierarchy, tau: f64) -> Result<Self> {
        let alpha = nets.alpha;
        if !(tau > 1.0) {
            return Err(Error::InvalidParameter(format!("tau = {tau} must exceed 1")));
        }
        let mut warnings = nets.warnings.clone();
        let regime = ParamRegime::new(alpha, tau);
        if !regime.basic() {
            warnings.push(format!(
                "parameters outside the basic regime: need alpha >= 2 and tau >= 2 alpha^2 + 1 = {}",
                2.0 * alpha * alpha + 1.0
            ));
        }
        let mut g = Self::skeleton(nets, tau, warnings, space.len())?;

        let depth = g.depth;
        let per_vertex: Vec<(Vec<usize>, Option<usize>)> = (0..g.vertices.len())
            .into_par_iter()
            .map(|vid| {
                let v = g.vertices[vid];
                let row = space.row(v.point);
                let mut nbrs = Vec::new();
                if v.level > 0 {
                    let up = v.level - 1;
                    let r = scale(alpha, up) + scale(alpha, v.level);
                    for (k, &p) in g.nets.levels[up].iter().enumerate() {
                        if row[p] < r {
                            nbrs.push(g.level_start[up] + k);
                        }
                    }
                }
                let r = 2.0 * tau * scale(alpha, v.level);
                for (k, &p) in g.nets.levels[v.level].iter().enumerate() {
                    if p != v.point && row[p] < r {
                        nbrs.push(g.level_start[v.level] + k);
                    }
                }
                if v.level < depth {
                    let down = v.level + 1;
                    let r = scale(alpha, v.level) + scale(alpha, down);
                    for (k, &p) in g.nets.levels[down].iter().enumerate() {
                        if row[p] < r {
                            nbrs.push(g.level_start[down] + k);
                        }
                    }
                }
                nbrs.sort_unstable();
                let parent = (v.level > 0).then(|| {
                    let up = v.level - 1;
                    let r = scale(alpha, up);
                    g.nets.levels[up]
                        .iter()
                        .enumerate()
                        .filter(|&(_, &p)| row[p] < r)
                        .min_by(|a, b| row[*a.1].total_cmp(&row[*b.1]).then(a.1.cmp(b.1)))
                        .map(|(k, _)| g.level_start[up] + k)
                });
                (nbrs, parent.flatten())
            })
            .collect();
        for (vid, (nbrs, parent)) in per_vertex.into_iter().enumerate() {
            if g.vertices[vid].level > 0 && parent.is_none() {
                // covering of A_{n-1} guarantees a parent
                return Err(Error::EmptyLevel(g.vertices[vid].level - 1));
            }
            g.adj[vid] = nbrs;
            g.parent[vid] = parent;
        }
        Ok(g)
    }

    fn skeleton(nets: NetHierarchy, tau: f64, warnings: Vec<String>, n_points: usize) -> Result<Self> {
        let depth = nets.depth;
        let mut vertices = Vec::new();
        let mut level_start = Vec::with_capacity(depth + 2);
        let mut index = Vec::with_capacity(depth + 1);
        for (level, pts) in nets.levels.iter().enumerate() {
            if pts.is_empty() {
                return Err(Error::EmptyLevel(level));
            }
            level_start.push(vertices.len());
            let mut idx = vec![NONE; n_points];
            for &p in pts {
                if p >= n_points {
                    return Err(Error::Parse(format!("point id {p} out of range")));
                }
                idx[p] = vertices.len();
                vertices.push(Vertex { point: p, level });
            }
            index.push(idx);
        }
        level_start.push(vertices.len());
        let nv = vertices.len();
        Ok(FillingGraph {
            alpha: nets.alpha,
            tau,
            depth,
            nets,
            vertices,
            level_start,
            index,
            adj: vec![Vec::new(); nv],
            parent: vec![None; nv],
            warnings,
        })
    }

    pub fn regime(&self) -> ParamRegime {
        ParamRegime::new(self.alpha, self.tau)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_points(&self) -> usize {
        self.index.first().map_or(0, |i| i.len())
    }

    pub fn vertex(&self, vid: usize) -> Vertex {
        self.vertices[vid]
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vid(&self, v: Vertex) -> Option<usize> {
        let id = *self.index.get(v.level)?.get(v.point)?;
        (id != NONE).then_some(id)
    }

    pub fn vid_of(&self, point: usize, level: usize) -> Result<usize> {
        self.vid(Vertex { point, level })
            .ok_or(Error::UnknownVertex { point, level })
    }

    pub fn root(&self) -> usize {
        0
    }

    /// Vertex ids of level `n`, in net order.
    pub fn level_range(&self, n: usize) -> std::ops::Range<usize> {
        self.level_start[n]..self.level_start[n + 1]
    }

    pub fn neighbors(&self, vid: usize) -> &[usize] {
        &self.adj[vid]
    }

    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    pub fn edge_kind(&self, a: usize, b: usize) -> Option<EdgeKind> {
        if !self.is_edge(a, b) {
            return None;
        }
        Some(if self.vertices[a].level == self.vertices[b].level {
            EdgeKind::Horizontal
        } else {
            EdgeKind::Vertical
        })
    }

    pub fn parent(&self, vid: usize) -> Option<usize> {
        self.parent[vid]
    }

    /// Every edge once, as `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, nb)| nb.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn edge_counts(&self) -> (usize, usize) {
        let mut h = 0;
        let mut v = 0;
        for (a, b) in self.edges() {
            if self.vertices[a].level == self.vertices[b].level {
                h += 1;
            } else {
                v += 1;
            }
        }
        (h, v)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Vertices of level `n` reachable from `vid` by downward vertical steps:
    /// the set `D_n(v)`, as sorted vertex ids.
    pub fn descendants(&self, vid: usize, n: usize) -> Result<Vec<usize>> {
        let v = self.vertices[vid];
        if n <= v.level || n > self.depth {
            return Err(Error::DepthExceeded { requested: n, from: v.level, depth: self.depth });
        }
        let mut frontier = vec![vid];
        for level in v.level + 1..=n {
            let range = self.level_range(level);
            let mut next: Vec<usize> = frontier
                .iter()
                .flat_map(|&u| self.adj[u].iter().copied().filter(|w| range.contains(w)))
                .collect();
            next.sort_unstable();
            next.dedup();
            frontier = next;
        }
        Ok(frontier)
    }

    /// `[w0, ..., v]` following tree parents.
    pub fn tree_branch(&self, vid: usize) -> Vec<usize> {
        let mut out = vec![vid];
        let mut cur = vid;
        while let Some(p) = self.parent[cur] {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// The vertex on `b1` at the deepest level where the branches coincide or
    /// are neighbors. Both branches must start at the root.
    pub fn meet_vertex(&self, b1: &[usize], b2: &[usize]) -> usize {
        let common = b1.len().min(b2.len());
        (0..common)
            .rev()
            .find(|&l| b1[l] == b2[l] || self.is_edge(b1[l], b2[l]))
            .map_or(b1[0], |l| b1[l])
    }

    // ---------- structural checks ----------

    /// Exhaustive rescan of the edge rules against the stored edge set.
    /// Returns the number of disagreeing vertex pairs.
    pub fn rescan_mismatches(&self, space: &FiniteMetricSpace) -> usize {
        let a = self.alpha;
        let tau = self.tau;
        (0..self.vertices.len())
            .into_par_iter()
            .map(|x| {
                let vx = self.vertices[x];
                let lo = self.level_start[vx.level.saturating_sub(1)];
                let hi = self.level_start[(vx.level + 2).min(self.depth + 1)];
                (lo..hi)
                    .filter(|&y| y != x)
                    .filter(|&y| {
                        let vy = self.vertices[y];
                        let d = space.dist(vx.point, vy.point);
                        let rule = if vx.level == vy.level {
                            d < 2.0 * tau * scale(a, vx.level)
                        } else {
                            d < scale(a, vx.level) + scale(a, vy.level)
                        };
                        rule != self.is_edge(x, y)
                    })
                    .count()
            })
            .sum()
    }

    /// Triples violating "two vertical up-neighbors of a vertex are neighbors".
    pub fn clause8_violations(&self) -> usize {
        (0..self.vertices.len())
            .into_par_iter()
            .map(|z| {
                let level = self.vertices[z].level;
                if level == 0 {
                    return 0;
                }
                let ups: Vec<usize> = self.adj[z]
                    .iter()
                    .copied()
                    .filter(|&u| self.vertices[u].level + 1 == level)
                    .collect();
                let mut bad = 0;
                for (i, &a) in ups.iter().enumerate() {
                    for &b in &ups[i + 1..] {
                        if !self.is_edge(a, b) {
                            bad += 1;
                        }
                    }
                }
                bad
            })
            .sum()
    }

    /// Every vertex reaches the root through tree parents, each step a
    /// vertical edge.
    pub fn tree_is_total(&self) -> bool {
        (0..self.vertices.len()).all(|v| {
            let b = self.tree_branch(v);
            b[0] == self.root()
                && b.len() == self.vertices[v].level + 1
                && b.windows(2).all(|w| self.is_edge(w[0], w[1]))
        })
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([self.root()]);
        seen[self.root()] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    queue.push_back(w);
                }
            }
        }
        count == self.vertices.len()
    }

    /// Per level: the largest number of balls `B(a, tau alpha^-n)`, `a` in
    /// `A_n`, containing a single point of the space.
    pub fn overlap_by_level(&self, space: &FiniteMetricSpace) -> Vec<usize> {
        (0..=self.depth)
            .map(|n| {
                let r = self.tau * scale(self.alpha, n);
                let centers = &self.nets.levels[n];
                (0..space.len())
                    .into_par_iter()
                    .map(|z| centers.iter().filter(|&&a| space.dist(z, a) < r).count())
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    }

    // ---------- export ----------

    pub fn export(&self, format: &str) -> Result<Vec<u8>> {
        match format {
            "json" => Ok(serde_json::to_vec_pretty(&self.to_json())?),
            "dot" => Ok(self.to_dot().into_bytes()),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }

    pub fn to_json(&self) -> GraphJson {
        let edges = self
            .edges()
            .map(|(a, b)| {
                let (va, vb) = (self.vertices[a], self.vertices[b]);
                let kind = self.edge_kind(a, b).expect("stored edge");
                (va.point, va.level, vb.point, vb.level, kind)
            })
            .collect();
        let tree = (0..self.vertices.len())
            .filter_map(|v| {
                let p = self.parent[v]?;
                let vv = self.vertices[v];
                Some((vv.point, vv.level, self.vertices[p].point))
            })
            .collect();
        GraphJson {
            params: GraphParams { alpha: self.alpha, tau: self.tau, depth: self.depth },
            n_points: self.num_points(),
            levels: self.nets.levels.clone(),
            edges,
            tree,
            warnings: self.warnings.clone(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        let p = &json.params;
        if json.levels.len() != p.depth + 1 {
            return Err(Error::Parse(format!(
                "depth {} but {} levels",
                p.depth,
                json.levels.len()
            )));
        }
        let nets = NetHierarchy {
            alpha: p.alpha,
            depth: p.depth,
            levels: json.levels.clone(),
            warnings: Vec::new(),
        };
        let mut g = Self::skeleton(nets, p.tau, json.warnings.clone(), json.n_points)?;
        g.nets.warnings = json
            .warnings
            .iter()
            .filter(|w| w.starts_with("ResolutionExceeded"))
            .cloned()
            .collect();
        for &(p1, l1, p2, l2, kind) in &json.edges {
            let a = g.vid_of(p1, l1)?;
            let b = g.vid_of(p2, l2)?;
            let same = l1 == l2;
            if same != (kind == EdgeKind::Horizontal) || (!same && l1.abs_diff(l2) != 1) {
                return Err(Error::Parse(format!("edge ({p1},{l1})-({p2},{l2}) is not {kind:?}")));
            }
            g.adj[a].push(b);
            g.adj[b].push(a);
        }
        for nb in &mut g.adj {
            nb.sort_unstable();
            nb.dedup();
        }
        for &(pt, l, pp) in &json.tree {
            if l == 0 {
                return Err(Error::Parse("the root has no parent".into()));
            }
            let v = g.vid_of(pt, l)?;
            g.parent[v] = Some(g.vid_of(pp, l - 1)?);
        }
        if let Some(v) = (1..g.vertices.len()).find(|&v| g.parent[v].is_none()) {
            let vv = g.vertices[v];
            return Err(Error::Parse(format!("vertex {vv} has no tree parent")));
        }
        Ok(g)
    }

    /// Graphviz rendering: one rank per level, horizontal edges dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph filling {\n  node [shape=point];\n");
        for n in 0..=self.depth {
            out.push_str("  { rank=same;");
            for vid in self.level_range(n) {
                let _ = write!(out, " \"{}\";", self.vertices[vid]);
            }
            out.push_str(" }\n");
        }
        for (a, b) in self.edges() {
            let style = match self.edge_kind(a, b) {
                Some(EdgeKind::Horizontal) => " [style=dashed]",
                _ => "",
            };
            let _ = writeln!(out, "  \"{}\" -- \"{}\"{style};", self.vertices[a], self.vertices[b]);
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphParams {
    pub alpha: f64,
    pub tau: f64,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub params: GraphParams,
    pub n_points: usize,
    pub levels: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize, usize, usize, EdgeKind)>,
    pub tree: Vec<(usize, usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}
