//! Exact distances through a separator hierarchy: every hierarchy node keeps, for each
//! separator vertex, its shortest-path distances inside the node's region; small regions
//! keep their full distance matrix.

use std::collections::BinaryHeap;

use rand_chacha::ChaCha8Rng;

use crate::constants::LEAF_REGION;
use crate::error::{Error, Result};
use crate::graph::{EmbeddedGraph, HeapItem};
use crate::rng::{stream, stream_rng};
use crate::separator::{find_separator, RegionMap, SeparatorMethod};

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Sorted region vertices.
    pub region: Vec<usize>,
    /// Separator vertices; empty for leaves and component splits.
    pub separator: Vec<usize>,
    /// `None` for leaves.
    pub method: Option<SeparatorMethod>,
    /// Row-major `|separator| x |region|` distances, or `|region|^2` for a leaf.
    dist: Vec<f64>,
}

impl HierarchyNode {
    pub fn is_leaf(&self) -> bool {
        self.method.is_none()
    }

    /// Largest remaining part as a fraction of the region (0 for leaves).
    pub fn balance(&self, nodes: &[HierarchyNode]) -> f64 {
        let big = self.children.iter().map(|&c| nodes[c].region.len()).max().unwrap_or(0);
        big as f64 / self.region.len() as f64
    }
}

/// Build summary.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExactStats {
    pub nodes: usize,
    pub leaves: usize,
    pub depth: usize,
    /// Largest `|S| / (lambda * sqrt(region))` over separator nodes.
    pub max_separator_ratio: f64,
    /// Largest part fraction over separator nodes (not counting component splits).
    pub max_balance: f64,
    /// Nodes cut by a fallback instead of a ball.
    pub fallbacks: usize,
    /// Stored distances.
    pub entries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOracle {
    lambda: f64,
    nodes: Vec<HierarchyNode>,
    /// Per vertex, `(node, position in node region)` from the root down to its home node,
    /// the node where it is a separator vertex or the leaf holding it.
    chain: Vec<Vec<(u32, u32)>>,
}

// Dijkstra from `s` inside the region (map set to region positions).
fn region_dijkstra(g: &EmbeddedGraph, region: &[usize], map: &RegionMap, s: usize, out: &mut [f64], heap: &mut BinaryHeap<HeapItem>) {
    out.fill(f64::INFINITY);
    let ls = map.get(s).expect("source in region");
    out[ls] = 0.0;
    heap.clear();
    heap.push(HeapItem { dist: 0.0, node: ls });
    while let Some(HeapItem { dist, node }) = heap.pop() {
        if dist > out[node] {
            continue;
        }
        for &(w, len) in g.neighbors(region[node]) {
            if let Some(lw) = map.get(w) {
                let nd = dist + len;
                if nd < out[lw] {
                    out[lw] = nd;
                    heap.push(HeapItem { dist: nd, node: lw });
                }
            }
        }
    }
}

impl ExactOracle {
    /// Builds the hierarchy; `lambda` sets the separator size target.
    pub fn build(g: &EmbeddedGraph, lambda: f64, seed: u64) -> Result<ExactOracle> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        let mut rng: ChaCha8Rng = stream_rng(seed, stream::SEPARATOR);
        let n = g.n();
        let mut map = RegionMap::new(n);
        let mut heap = BinaryHeap::new();
        let mut nodes: Vec<HierarchyNode> = Vec::new();
        let mut home = vec![u32::MAX; n];
        let mut work: Vec<(Vec<usize>, Option<usize>)> = vec![((0..n).collect(), None)];
        // nodes are created in depth-first order from a stack
        while let Some((region, parent)) = work.pop() {
            let id = nodes.len();
            if let Some(p) = parent {
                nodes[p].children.push(id);
            }
            let m = region.len();
            if m <= LEAF_REGION {
                map.set(&region);
                let mut dist = vec![0.0; m * m];
                for (i, &s) in region.iter().enumerate() {
                    region_dijkstra(g, &region, &map, s, &mut dist[i * m..(i + 1) * m], &mut heap);
                    home[s] = id as u32;
                }
                map.clear(&region);
                nodes.push(HierarchyNode { parent, children: vec![], region, separator: vec![], method: None, dist });
                continue;
            }
            let sep = find_separator(g, &region, lambda, &mut rng, &mut map)?;
            map.set(&region);
            let mut dist = vec![0.0; sep.vertices.len() * m];
            for (i, &s) in sep.vertices.iter().enumerate() {
                region_dijkstra(g, &region, &map, s, &mut dist[i * m..(i + 1) * m], &mut heap);
                home[s] = id as u32;
            }
            map.clear(&region);
            for part in sep.parts.into_iter().rev() {
                work.push((part, Some(id)));
            }
            nodes.push(HierarchyNode { parent, children: vec![], region, separator: sep.vertices, method: Some(sep.method), dist });
        }
        let mut chain = vec![Vec::new(); n];
        for v in 0..n {
            let mut x = home[v] as usize;
            loop {
                let pos = nodes[x].region.binary_search(&v).expect("vertex in ancestor regions");
                chain[v].push((x as u32, pos as u32));
                match nodes[x].parent {
                    Some(p) => x = p,
                    None => break,
                }
            }
            chain[v].reverse();
        }
        Ok(ExactOracle { lambda, nodes, chain })
    }

    pub fn n(&self) -> usize {
        self.chain.len()
    }

    pub fn nodes(&self) -> &[HierarchyNode] {
        &self.nodes
    }

    /// Exact `d_G(u, v)`; `Err(CrossComponent)` when no path exists.
    pub fn query(&self, u: usize, v: usize) -> Result<f64> {
        self.query_counted(u, v, &mut 0)
    }

    /// As [`ExactOracle::query`], adding the number of separator vertices scanned to
    /// `scanned`.
    pub fn query_counted(&self, u: usize, v: usize, scanned: &mut u64) -> Result<f64> {
        for x in [u, v] {
            if x >= self.n() {
                return Err(Error::InvalidVertex(x));
            }
        }
        if u == v {
            return Ok(0.0);
        }
        let (cu, cv) = (&self.chain[u], &self.chain[v]);
        let mut best = f64::INFINITY;
        for (&(x, lu), &(y, lv)) in cu.iter().zip(cv) {
            if x != y {
                break;
            }
            let nd = &self.nodes[x as usize];
            let m = nd.region.len();
            let (lu, lv) = (lu as usize, lv as usize);
            if nd.is_leaf() {
                best = best.min(nd.dist[lu * m + lv]);
            } else {
                for row in nd.dist.chunks_exact(m) {
                    best = best.min(row[lu] + row[lv]);
                }
                *scanned += nd.separator.len() as u64;
            }
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::CrossComponent(u, v))
        }
    }

    pub fn stats(&self) -> ExactStats {
        let mut s = ExactStats { nodes: self.nodes.len(), ..Default::default() };
        for nd in &self.nodes {
            s.entries += nd.dist.len();
            match nd.method {
                None => s.leaves += 1,
                Some(SeparatorMethod::Components) => {}
                Some(method) => {
                    if method != SeparatorMethod::Ball {
                        s.fallbacks += 1;
                    }
                    let r = nd.separator.len() as f64 / (self.lambda * (nd.region.len() as f64).sqrt());
                    s.max_separator_ratio = s.max_separator_ratio.max(r);
                    s.max_balance = s.max_balance.max(nd.balance(&self.nodes));
                }
            }
        }
        s.depth = self.chain.iter().map(Vec::len).max().unwrap_or(0);
        s
    }
}
