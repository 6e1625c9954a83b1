//! Shared fixtures for the criterion benches in `benches/`.

use rand::Rng;

use lodense::rng::{stream, stream_rng};
use lodense::{generate, EmbeddedGraph, GraphKind};

/// `k x k` grid.
pub fn grid(k: usize) -> EmbeddedGraph {
    generate(&GraphKind::Grid { k }).expect("grid")
}

/// `count` random ordered pairs of distinct vertices.
pub fn query_pairs(n: usize, count: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = stream_rng(seed, stream::QUERIES);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            out.push((u, v));
        }
    }
    out
}
