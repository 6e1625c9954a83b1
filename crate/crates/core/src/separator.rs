//! Balanced vertex separators for regions of an embedded graph: a randomized geometric
//! ball cut with verification and retry, falling back to axis-median and breadth-first cuts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::constants::C_SEP;
use crate::error::{Error, Result};
use crate::geometry::euclidean_distance;
use crate::graph::EmbeddedGraph;

/// Ball attempts before the deterministic fallbacks.
pub const SEPARATOR_RETRIES: usize = 16;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparatorMethod {
    Ball,
    AxisMedian,
    BreadthFirst,
    /// Region already disconnected; `S` is empty and each component is a part.
    Components,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Separator {
    /// Sorted separator vertices.
    pub vertices: Vec<usize>,
    /// Sorted vertex lists of the remaining parts.
    pub parts: Vec<Vec<usize>>,
    pub method: SeparatorMethod,
}

impl Separator {
    /// Largest part as a fraction of the region.
    pub fn balance(&self) -> f64 {
        let total = self.vertices.len() + self.parts.iter().map(Vec::len).sum::<usize>();
        self.parts.iter().map(Vec::len).max().unwrap_or(0) as f64 / total as f64
    }
}

/// Scratch map from global vertex ids to region positions.
#[derive(Debug, Clone)]
pub struct RegionMap {
    local: Vec<u32>,
}

impl RegionMap {
    pub fn new(n: usize) -> Self {
        RegionMap { local: vec![NONE; n] }
    }

    pub fn set(&mut self, region: &[usize]) {
        for (i, &v) in region.iter().enumerate() {
            self.local[v] = i as u32;
        }
    }

    pub fn clear(&mut self, region: &[usize]) {
        for &v in region {
            self.local[v] = NONE;
        }
    }

    pub fn get(&self, v: usize) -> Option<usize> {
        let l = self.local[v];
        (l != NONE).then_some(l as usize)
    }
}

/// Connected components of the subgraph induced by `region` (map must be set), as lists
/// of region positions.
pub fn region_components(g: &EmbeddedGraph, region: &[usize], map: &RegionMap) -> Vec<Vec<usize>> {
    let mut comp = vec![NONE; region.len()];
    let mut out = Vec::new();
    for s in 0..region.len() {
        if comp[s] != NONE {
            continue;
        }
        let id = out.len() as u32;
        comp[s] = id;
        let mut members = vec![s];
        let mut h = 0;
        while h < members.len() {
            let u = region[members[h]];
            h += 1;
            for &(w, _) in g.neighbors(u) {
                if let Some(lw) = map.get(w) {
                    if comp[lw] == NONE {
                        comp[lw] = id;
                        members.push(lw);
                    }
                }
            }
        }
        out.push(members);
    }
    out
}

// Cuts `region` between the first `k` entries of `order` (region positions) and the rest.
fn prefix_cut(g: &EmbeddedGraph, region: &[usize], map: &RegionMap, order: &[usize], k: usize, method: SeparatorMethod) -> Separator {
    let mut side = vec![1u8; region.len()];
    for &p in &order[..k] {
        side[p] = 0;
    }
    let mut touch = [vec![false; region.len()], vec![false; region.len()]];
    for &p in &order[..k] {
        for &(w, _) in g.neighbors(region[p]) {
            if let Some(lw) = map.get(w) {
                if side[lw] == 1 {
                    touch[0][p] = true;
                    touch[1][lw] = true;
                }
            }
        }
    }
    let count = |t: &Vec<bool>| t.iter().filter(|&&b| b).count();
    let cut = if count(&touch[0]) <= count(&touch[1]) { 0 } else { 1 };
    let mut vertices = Vec::new();
    let mut parts = vec![Vec::new(), Vec::new()];
    for p in 0..region.len() {
        if touch[cut][p] {
            vertices.push(region[p]);
        } else {
            parts[side[p] as usize].push(region[p]);
        }
    }
    parts.retain(|p| !p.is_empty());
    Separator { vertices, parts, method }
}

/// Separator size bound for a region of `size` vertices.
pub fn size_bound(lambda: f64, size: usize) -> f64 {
    C_SEP * lambda * (size as f64).sqrt()
}

/// Finds a separator of the subgraph induced by `region` (sorted, at least 2 vertices).
/// Disconnected regions split along their components. Otherwise every part has at most
/// two thirds of the region, and the first cut with `|S| <= C_SEP * lambda * sqrt(n)` is
/// returned, or the smallest one found if none qualifies.
pub fn find_separator(g: &EmbeddedGraph, region: &[usize], lambda: f64, rng: &mut ChaCha8Rng, map: &mut RegionMap) -> Result<Separator> {
    let n = region.len();
    if n < 2 {
        return Err(Error::TooFewPoints(2));
    }
    if region.iter().any(|&v| v >= g.n()) {
        return Err(Error::InvalidParameter("region vertex out of range".into()));
    }
    map.set(region);
    let result = separate(g, region, lambda, rng, map);
    map.clear(region);
    Ok(result)
}

fn separate(g: &EmbeddedGraph, region: &[usize], lambda: f64, rng: &mut ChaCha8Rng, map: &RegionMap) -> Separator {
    let n = region.len();
    let comps = region_components(g, region, map);
    if comps.len() > 1 {
        let parts = comps
            .into_iter()
            .map(|c| {
                let mut vs: Vec<usize> = c.into_iter().map(|p| region[p]).collect();
                vs.sort_unstable();
                vs
            })
            .collect();
        return Separator { vertices: vec![], parts, method: SeparatorMethod::Components };
    }
    let bound = size_bound(lambda, n);
    let (klo, khi) = (n.div_ceil(3), 2 * n / 3);
    let mut best: Option<Separator> = None;
    let consider = |s: Separator, best: &mut Option<Separator>| -> bool {
        let ok = s.vertices.len() as f64 <= bound;
        if best.as_ref().map_or(true, |b| s.vertices.len() < b.vertices.len()) {
            *best = Some(s);
        }
        ok
    };
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..SEPARATOR_RETRIES {
        let c = g.point(region[rng.gen_range(0..n)]);
        let k = rng.gen_range(klo..=khi);
        let dist: Vec<f64> = region.iter().map(|&v| euclidean_distance(g.point(v), c)).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        if consider(prefix_cut(g, region, map, &order, k, SeparatorMethod::Ball), &mut best) {
            return best.expect("just set");
        }
    }
    for axis in 0..2 {
        let key = |p: usize| {
            let q = g.point(region[p]);
            if axis == 0 { q.x } else { q.y }
        };
        order.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        if consider(prefix_cut(g, region, map, &order, n / 2, SeparatorMethod::AxisMedian), &mut best) {
            return best.expect("just set");
        }
    }
    // breadth-first order from the region's first vertex
    let mut seen = vec![false; n];
    let mut bfs = vec![0];
    seen[0] = true;
    let mut h = 0;
    while h < bfs.len() {
        let u = region[bfs[h]];
        h += 1;
        for &(w, _) in g.neighbors(u) {
            if let Some(lw) = map.get(w) {
                if !seen[lw] {
                    seen[lw] = true;
                    bfs.push(lw);
                }
            }
        }
    }
    consider(prefix_cut(g, region, map, &bfs, n / 2, SeparatorMethod::BreadthFirst), &mut best);
    best.expect("at least one cut")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::BALANCE;
    use crate::generate::{generate, GraphKind};
    use crate::rng::{stream, stream_rng};

    // removing S leaves no edge between different parts, and the parts partition the rest
    fn check(g: &EmbeddedGraph, region: &[usize], s: &Separator) {
        let mut part = vec![usize::MAX; g.n()];
        for (i, p) in s.parts.iter().enumerate() {
            for &v in p {
                assert_eq!(part[v], usize::MAX);
                part[v] = i;
            }
        }
        for &v in &s.vertices {
            assert_eq!(part[v], usize::MAX);
            part[v] = usize::MAX - 1;
        }
        for &v in region {
            assert_ne!(part[v], usize::MAX, "vertex {v} lost");
        }
        for &(u, v) in g.edges() {
            let (a, b) = (part[u], part[v]);
            if a < s.parts.len() && b < s.parts.len() {
                assert_eq!(a, b, "edge {u}-{v} crosses parts");
            }
        }
        if s.method != SeparatorMethod::Components {
            assert!(s.balance() <= BALANCE + 1e-12, "{}", s.balance());
        }
    }

    #[test]
    fn two_vertices() {
        let g = generate(&GraphKind::Path { n: 2 }).unwrap();
        let mut rng = stream_rng(1, stream::SEPARATOR);
        let s = find_separator(&g, &[0, 1], 1.0, &mut rng, &mut RegionMap::new(2)).unwrap();
        assert_eq!(s.vertices.len(), 1);
        assert_eq!(s.parts.iter().map(Vec::len).sum::<usize>(), 1);
        check(&g, &[0, 1], &s);
    }

    #[test]
    fn grid_and_comb() {
        for (kind, lambda) in [(GraphKind::Grid { k: 8 }, 4.0), (GraphKind::Comb { k: 6 }, 4.0), (GraphKind::PerturbedGrid { k: 12, noise: 0.3, seed: 2 }, 4.0)] {
            let g = generate(&kind).unwrap();
            let region: Vec<usize> = (0..g.n()).collect();
            let mut map = RegionMap::new(g.n());
            for seed in 0..5 {
                let mut rng = stream_rng(seed, stream::SEPARATOR);
                let s = find_separator(&g, &region, lambda, &mut rng, &mut map).unwrap();
                check(&g, &region, &s);
                assert!(s.vertices.len() as f64 <= size_bound(lambda, g.n()), "{:?} {}", kind, s.vertices.len());
            }
        }
    }

    #[test]
    fn disconnected_region() {
        let g = generate(&GraphKind::Path { n: 6 }).unwrap();
        let region = vec![0, 1, 3, 4, 5];
        let mut rng = stream_rng(1, stream::SEPARATOR);
        let s = find_separator(&g, &region, 1.0, &mut rng, &mut RegionMap::new(6)).unwrap();
        assert_eq!(s.method, SeparatorMethod::Components);
        assert_eq!(s.parts, vec![vec![0, 1], vec![3, 4, 5]]);
        check(&g, &region, &s);
    }
}
