//! Graph families used in tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::graph::EmbeddedGraph;
use crate::rng::{stream, stream_rng};

/// Probability that a non-tree candidate edge is kept in a short-edged lattice graph.
pub const SELG_EXTRA_EDGE_PROB: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphKind {
    /// `k x k` unit lattice with 4-neighbor edges.
    Grid { k: usize },
    /// Spine of `k` vertices, each with a tooth of `k - 1` unit edges.
    Comb { k: usize },
    /// `n` collinear vertices at unit spacing.
    Path { n: usize },
    /// Lattice points of a `k x k` grid, edges of length at most `ell`:
    /// a random spanning tree plus a random subset of the remaining candidates.
    Selg { k: usize, ell: f64, seed: u64 },
    /// Grid with every vertex displaced uniformly in `[-noise, noise]^2`, `noise < 0.5`.
    PerturbedGrid { k: usize, noise: f64, seed: u64 },
}

impl GraphKind {
    /// Short instance name, e.g. `grid16`.
    pub fn name(&self) -> String {
        match self {
            GraphKind::Grid { k } => format!("grid{k}"),
            GraphKind::Comb { k } => format!("comb{k}"),
            GraphKind::Path { n } => format!("path{n}"),
            GraphKind::Selg { k, ell, seed } => format!("selg{k}_l{ell}_s{seed}"),
            GraphKind::PerturbedGrid { k, noise, seed } => format!("pgrid{k}_e{noise}_s{seed}"),
        }
    }
}

fn lattice(k: usize) -> Vec<Point2> {
    (0..k)
        .flat_map(|y| (0..k).map(move |x| Point2::new(x as f64, y as f64)))
        .collect()
}

fn grid_edges(k: usize) -> Vec<(usize, usize)> {
    let mut e = Vec::with_capacity(2 * k * k.saturating_sub(1));
    for y in 0..k {
        for x in 0..k {
            let v = y * k + x;
            if x + 1 < k {
                e.push((v, v + 1));
            }
            if y + 1 < k {
                e.push((v, v + k));
            }
        }
    }
    e
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Builds a graph of the given family. Deterministic for a fixed seed.
pub fn generate(kind: &GraphKind) -> Result<EmbeddedGraph> {
    let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
    match *kind {
        GraphKind::Grid { k } => {
            if k == 0 {
                return bad("grid needs k >= 1");
            }
            EmbeddedGraph::new(lattice(k), grid_edges(k))
        }
        GraphKind::Comb { k } => {
            if k == 0 {
                return bad("comb needs k >= 1");
            }
            let mut pts = Vec::with_capacity(k * k);
            let mut edges = Vec::with_capacity(k * k);
            for x in 0..k {
                pts.push(Point2::new(x as f64, 0.0));
                if x > 0 {
                    edges.push((x - 1, x));
                }
            }
            for x in 0..k {
                let mut prev = x;
                for y in 1..k {
                    pts.push(Point2::new(x as f64, y as f64));
                    let v = pts.len() - 1;
                    edges.push((prev, v));
                    prev = v;
                }
            }
            EmbeddedGraph::new(pts, edges)
        }
        GraphKind::Path { n } => {
            if n == 0 {
                return bad("path needs n >= 1");
            }
            let pts = (0..n).map(|i| Point2::new(i as f64, 0.0)).collect();
            EmbeddedGraph::new(pts, (1..n).map(|i| (i - 1, i)).collect())
        }
        GraphKind::Selg { k, ell, seed } => {
            if k == 0 || !(ell >= 1.0) || !ell.is_finite() {
                return bad("selg needs k >= 1 and finite ell >= 1");
            }
            let mut rng = stream_rng(seed, stream::GENERATOR);
            let r = ell.floor() as i64;
            let mut offsets = Vec::new();
            for dy in 0..=r {
                for dx in -r..=r {
                    if (dy == 0 && dx <= 0) || ((dx * dx + dy * dy) as f64) > ell * ell {
                        continue;
                    }
                    offsets.push((dx, dy));
                }
            }
            let ki = k as i64;
            let mut cand = Vec::new();
            for y in 0..ki {
                for x in 0..ki {
                    for &(dx, dy) in &offsets {
                        let (nx, ny) = (x + dx, y + dy);
                        if nx >= 0 && nx < ki && ny < ki {
                            cand.push(((y * ki + x) as usize, (ny * ki + nx) as usize));
                        }
                    }
                }
            }
            cand.shuffle(&mut rng);
            let mut parent: Vec<usize> = (0..k * k).collect();
            let mut edges = Vec::new();
            for (u, v) in cand {
                let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                if ru != rv {
                    parent[ru] = rv;
                    edges.push((u, v));
                } else if rng.gen_bool(SELG_EXTRA_EDGE_PROB) {
                    edges.push((u, v));
                }
            }
            EmbeddedGraph::new(lattice(k), edges)
        }
        GraphKind::PerturbedGrid { k, noise, seed } => {
            if k == 0 || !(0.0..0.5).contains(&noise) {
                return bad("perturbed grid needs k >= 1 and noise in [0, 0.5)");
            }
            let mut rng = stream_rng(seed, stream::GENERATOR);
            let pts = lattice(k)
                .into_iter()
                .map(|p| {
                    if noise == 0.0 {
                        p
                    } else {
                        Point2::new(p.x + rng.gen_range(-noise..noise), p.y + rng.gen_range(-noise..noise))
                    }
                })
                .collect();
            EmbeddedGraph::new(pts, grid_edges(k))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let g = generate(&GraphKind::Grid { k: 1 }).unwrap();
        assert_eq!((g.n(), g.m()), (1, 0));
        let g = generate(&GraphKind::Grid { k: 3 }).unwrap();
        assert_eq!((g.n(), g.m()), (9, 12));
        let g = generate(&GraphKind::Comb { k: 3 }).unwrap();
        assert_eq!((g.n(), g.m()), (9, 8));
        assert!(g.is_connected());
        let g = generate(&GraphKind::Path { n: 5 }).unwrap();
        assert_eq!((g.n(), g.m()), (5, 4));
        assert!(generate(&GraphKind::Grid { k: 0 }).is_err());
        assert!(generate(&GraphKind::Selg { k: 3, ell: 0.5, seed: 1 }).is_err());
    }

    #[test]
    fn comb_shape() {
        // hand enumeration for k = 3: spine (0,0),(1,0),(2,0), teeth of length 2
        let g = generate(&GraphKind::Comb { k: 3 }).unwrap();
        let expect = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0), (0.0, 2.0), (1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (2.0, 2.0)];
        for (i, &(x, y)) in expect.iter().enumerate() {
            assert_eq!(g.point(i), Point2::new(x, y));
        }
        assert!(g.weights().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn selg_is_connected_and_short() {
        for seed in 0..5 {
            let g = generate(&GraphKind::Selg { k: 10, ell: 2.5, seed }).unwrap();
            assert!(g.is_connected());
            assert!(g.weights().iter().all(|&w| w <= 2.5 + 1e-12));
            let h = generate(&GraphKind::Selg { k: 10, ell: 2.5, seed }).unwrap();
            assert_eq!(g, h);
        }
    }

    #[test]
    fn perturbed_weights_match_coordinates() {
        let g = generate(&GraphKind::PerturbedGrid { k: 6, noise: 0.3, seed: 4 }).unwrap();
        for (k, &(u, v)) in g.edges().iter().enumerate() {
            let d = crate::geometry::euclidean_distance(g.point(u), g.point(v));
            assert!((g.weights()[k] - d).abs() <= 1e-9 * d);
        }
    }
}
