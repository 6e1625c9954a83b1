//! Straight-line embedded graphs with Euclidean edge weights.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{euclidean_distance, Point2};

/// Default vertex cap for [`all_pairs_shortest_paths`].
pub const APSP_CAP: usize = 5000;

/// Undirected plane-embedded graph. Edge weights are segment lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedGraph {
    points: Vec<Point2>,
    edges: Vec<(usize, usize)>,
    weights: Vec<f64>,
    adj_start: Vec<usize>,
    adj: Vec<(usize, f64)>,
}

impl EmbeddedGraph {
    /// Validates and builds the graph. Edges are stored with `u < v`.
    pub fn new(points: Vec<Point2>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = points.len();
        let mut seen = std::collections::HashMap::with_capacity(n);
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite(i));
            }
            // -0.0 and 0.0 are the same location
            let key = ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits());
            if let Some(&j) = seen.get(&key) {
                return Err(Error::DuplicatePoint(j, i));
            }
            seen.insert(key, i);
        }
        let mut set = HashSet::with_capacity(edges.len());
        let mut norm = Vec::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= n {
                return Err(Error::InvalidVertex(u));
            }
            if v >= n {
                return Err(Error::InvalidVertex(v));
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            let e = (u.min(v), u.max(v));
            if !set.insert(e) {
                return Err(Error::DuplicateEdge(e.0, e.1));
            }
            norm.push(e);
        }
        let weights: Vec<f64> = norm
            .iter()
            .map(|&(u, v)| euclidean_distance(points[u], points[v]))
            .collect();
        let mut deg = vec![0usize; n + 1];
        for &(u, v) in &norm {
            deg[u] += 1;
            deg[v] += 1;
        }
        let mut adj_start = vec![0usize; n + 1];
        for i in 0..n {
            adj_start[i + 1] = adj_start[i] + deg[i];
        }
        let mut fill = adj_start.clone();
        let mut adj = vec![(0usize, 0.0f64); 2 * norm.len()];
        for (k, &(u, v)) in norm.iter().enumerate() {
            adj[fill[u]] = (v, weights[k]);
            fill[u] += 1;
            adj[fill[v]] = (u, weights[k]);
            fill[v] += 1;
        }
        Ok(EmbeddedGraph { points, edges: norm, weights, adj_start, adj })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn point(&self, v: usize) -> Point2 {
        self.points[v]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Neighbors of `v` with edge weights.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adj[self.adj_start[v]..self.adj_start[v + 1]]
    }

    fn check(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            Err(Error::InvalidVertex(v))
        } else {
            Ok(())
        }
    }

    /// Component label per vertex, labels numbered by smallest member.
    pub fn components(&self) -> Vec<usize> {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(w, _) in self.neighbors(u) {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.n() <= 1 || self.components().iter().all(|&c| c == 0)
    }

    /// Induced subgraph on `vertices` (in the given order, which becomes the new indexing).
    pub fn induced(&self, vertices: &[usize]) -> Result<EmbeddedGraph> {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            self.check(v)?;
            local[v] = i;
        }
        let pts = vertices.iter().map(|&v| self.points[v]).collect();
        let edges = self
            .edges
            .iter()
            .filter(|&&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|&(u, v)| (local[u], local[v]))
            .collect();
        EmbeddedGraph::new(pts, edges)
    }

    /// Total edge length.
    pub fn total_length(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[derive(Copy, Clone, PartialEq)]
pub(crate) struct HeapItem {
    pub dist: f64,
    pub node: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, o: &Self) -> Ordering {
        o.dist.total_cmp(&self.dist).then_with(|| o.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Single-source shortest paths; unreachable vertices get `f64::INFINITY`.
pub fn dijkstra(g: &EmbeddedGraph, source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; g.n()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem { dist: 0.0, node: source });
    while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(w, wt) in g.neighbors(u) {
            let nd = d + wt;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(HeapItem { dist: nd, node: w });
            }
        }
    }
    dist
}

/// Shortest-path distance, `None` when `u` and `v` are in different components.
pub fn graph_distance(g: &EmbeddedGraph, u: usize, v: usize) -> Result<Option<f64>> {
    g.check(u)?;
    g.check(v)?;
    if u == v {
        return Ok(Some(0.0));
    }
    let d = dijkstra(g, u)[v];
    Ok(d.is_finite().then_some(d))
}

/// Dense distance matrix (row-major, `INFINITY` for unreachable).
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.data[u * self.n..(u + 1) * self.n]
    }
}

/// All-pairs shortest paths with the default cap.
pub fn all_pairs_shortest_paths(g: &EmbeddedGraph) -> Result<DistanceMatrix> {
    all_pairs_shortest_paths_capped(g, APSP_CAP)
}

/// All-pairs shortest paths; one Dijkstra per source, run in parallel.
pub fn all_pairs_shortest_paths_capped(g: &EmbeddedGraph, cap: usize) -> Result<DistanceMatrix> {
    let n = g.n();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| dijkstra(g, s)).collect();
    let mut data = Vec::with_capacity(n * n);
    for r in rows {
        data.extend_from_slice(&r);
    }
    Ok(DistanceMatrix { n, data })
}

/// Parses the text format: `graph <n> <m>`, `v <id> <x> <y>`, `e <u> <v>`; `#` starts a comment.
pub fn parse_graph(text: &str) -> Result<EmbeddedGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut points: Vec<Option<Point2>> = Vec::new();
    let mut edges = Vec::new();
    let perr = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| perr(line_no, "bad integer"));
        match toks[0] {
            "graph" => {
                if header.is_some() || toks.len() != 3 {
                    return Err(perr(line_no, "malformed header"));
                }
                let n = num(toks[1])?;
                header = Some((n, num(toks[2])?));
                points = vec![None; n];
            }
            "v" => {
                let (n, _) = header.ok_or_else(|| perr(line_no, "vertex before header"))?;
                if toks.len() != 4 {
                    return Err(perr(line_no, "malformed vertex line"));
                }
                let id = num(toks[1])?;
                if id >= n {
                    return Err(perr(line_no, "vertex id out of range"));
                }
                let x: f64 = toks[2].parse().map_err(|_| perr(line_no, "bad coordinate"))?;
                let y: f64 = toks[3].parse().map_err(|_| perr(line_no, "bad coordinate"))?;
                if points[id].is_some() {
                    return Err(perr(line_no, "vertex id repeated"));
                }
                points[id] = Some(Point2::new(x, y));
            }
            "e" => {
                if header.is_none() {
                    return Err(perr(line_no, "edge before header"));
                }
                if toks.len() != 3 {
                    return Err(perr(line_no, "malformed edge line"));
                }
                edges.push((num(toks[1])?, num(toks[2])?));
            }
            _ => return Err(perr(line_no, "unknown record")),
        }
    }
    let (_, m) = header.ok_or_else(|| perr(0, "missing header"))?;
    if edges.len() != m {
        return Err(perr(0, "edge count does not match header"));
    }
    let pts = points
        .into_iter()
        .enumerate()
        .map(|(i, p)| p.ok_or_else(|| perr(0, &format!("vertex {i} missing"))))
        .collect::<Result<Vec<_>>>()?;
    EmbeddedGraph::new(pts, edges)
}

/// Emits the text format with shortest round-trip float formatting.
pub fn format_graph(g: &EmbeddedGraph) -> String {
    use std::fmt::Write;
    let mut s = String::with_capacity(32 * (g.n() + g.m()) + 32);
    let _ = writeln!(s, "graph {} {}", g.n(), g.m());
    for (i, p) in g.points().iter().enumerate() {
        let _ = writeln!(s, "v {} {:?} {:?}", i, p.x, p.y);
    }
    for &(u, v) in g.edges() {
        let _ = writeln!(s, "e {u} {v}");
    }
    s
}
