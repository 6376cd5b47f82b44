//! Seeded subsampling. Every random choice in the crate comes from a
//! ChaCha8 generator seeded with the run seed, with one stream per purpose,
//! so adding a sample of one kind never shifts the samples of another.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Cells = 1,
    BoundaryPoints = 2,
    Pairs = 3,
    Triples = 4,
    Delta = 5,
    Centers = 6,
    DiamVertices = 7,
}

pub fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream as u64);
    r
}

/// `k` distinct indices from `0..n` in ascending order; everything when `k >= n`.
pub fn subset(n: usize, k: usize, seed: u64, stream: Stream) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    let mut out = index::sample(&mut rng(seed, stream), n, k).into_vec();
    out.sort_unstable();
    out
}

/// Up to `cap` unordered pairs `i < j` of `0..n`: all of them when they fit,
/// otherwise a uniform subset, in lexicographic order.
pub fn pairs(n: usize, cap: usize, seed: u64, stream: Stream) -> Vec<(usize, usize)> {
    let total = n * n.saturating_sub(1) / 2;
    let all = || (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)));
    if total <= cap {
        return all().collect();
    }
    let chosen = subset(total, cap, seed, stream);
    let mut it = chosen.into_iter().peekable();
    all()
        .enumerate()
        .filter_map(|(k, p)| {
            if it.peek() == Some(&k) {
                it.next();
                Some(p)
            } else {
                None
            }
        })
        .collect()
}

/// `count` triples of pairwise distinct indices drawn with replacement.
pub fn triples(n: usize, count: usize, seed: u64, stream: Stream) -> Vec<(usize, usize, usize)> {
    if n < 3 {
        return Vec::new();
    }
    let mut r = rng(seed, stream);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let a = r.gen_range(0..n);
        let b = r.gen_range(0..n);
        let c = r.gen_range(0..n);
        if a != b && b != c && a != c {
            out.push((a, b, c));
        }
    }
    out
}
