//! Graph WSPD: every Euclidean pair `(A, B)` is refined by the net-tree clusters of level
//! `i(A)` that meet `A`, giving implicit pairs `((s, A), (t, B))`.

use std::collections::{BTreeMap, HashMap};

use crate::constants::CLUSTER_COUNT_C;
use crate::error::{Error, Result};
use crate::graph::{DistanceMatrix, EmbeddedGraph};
use crate::net_tree::{build_cluster_levels, radius, NetTree};
use crate::quadtree::{build_semi_compressed, semi_size_of_points, Cell, EuclideanWspd, Quadtree};
use crate::range_tree::{RangeEntry, RangeIndex};

/// Net-tree level paired with a quadtree depth: `i(A) = log2(Delta / l(A)) + 3`, so that
/// `r_{i(A)} = l(A) / 4`.
pub const LEVEL_OFFSET: i32 = 3;

/// Level of a quadtree depth on the shared resolution ladder.
pub fn depth_level(depth: u8) -> i32 {
    depth as i32 + LEVEL_OFFSET
}

/// `i(A)` from a cell side; the side must be `delta / 2^k`.
pub fn cell_level(side: f64, delta: f64) -> Result<i32> {
    let ratio = delta / side;
    let k = ratio.log2().round();
    if !(k >= 0.0) || k.exp2() != ratio {
        return Err(Error::MisalignedCell);
    }
    Ok(k as i32 + LEVEL_OFFSET)
}

/// Implicit cluster: members of `center`'s level-`i(cell)` cluster lying in `cell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClusterHandle {
    /// Center vertex.
    pub center: usize,
    /// Quadtree node.
    pub cell: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GraphPair {
    pub c: ClusterHandle,
    pub d: ClusterHandle,
}

/// Graph WSPD with the structures it was built from. Pairs are stored implicitly: the
/// graph pairs of Euclidean pair `e = (A, B)` are all `(s, t)` with `s` a cluster of `A` and
/// `t` a cluster of `B`, numbered from `pair_offset[e]` in row-major order.
#[derive(Debug, Clone)]
pub struct GraphWspd {
    pub eps: f64,
    pub quadtree: Quadtree,
    pub euclidean: EuclideanWspd,
    /// Compressed net-tree.
    pub net: NetTree,
    cluster_start: Vec<u32>,
    cluster_centers: Vec<u32>,
    cluster_sizes: Vec<u32>,
    pair_offset: Vec<u64>,
}

impl GraphWspd {
    /// Assembles the implicit pair structure from per-node cluster lists
    /// (`(center, member count)`, ascending centers).
    pub fn from_parts(eps: f64, quadtree: Quadtree, euclidean: EuclideanWspd, net: NetTree, clusters: &HashMap<usize, Vec<(usize, usize)>>) -> GraphWspd {
        let nodes = quadtree.node_count();
        let mut cluster_start = vec![0u32; nodes + 1];
        let mut cluster_centers = Vec::new();
        let mut cluster_sizes = Vec::new();
        for u in 0..nodes {
            if let Some(list) = clusters.get(&u) {
                for &(c, k) in list {
                    cluster_centers.push(c as u32);
                    cluster_sizes.push(k as u32);
                }
            }
            cluster_start[u + 1] = cluster_centers.len() as u32;
        }
        let mut w = GraphWspd { eps, quadtree, euclidean, net, cluster_start, cluster_centers, cluster_sizes, pair_offset: vec![0] };
        let mut acc = 0u64;
        let mut offs = Vec::with_capacity(w.euclidean.pairs.len() + 1);
        offs.push(0);
        for &(a, b) in &w.euclidean.pairs {
            acc += (w.clusters(a).len() * w.clusters(b).len()) as u64;
            offs.push(acc);
        }
        w.pair_offset = offs;
        w
    }

    pub fn delta(&self) -> f64 {
        self.quadtree.frame.side
    }

    /// `i(A)` of a quadtree node.
    pub fn level_of_cell(&self, node: usize) -> i32 {
        depth_level(self.quadtree.node(node).cell.depth)
    }

    /// Cluster centers of a node, ascending (empty for nodes in no pair).
    pub fn clusters(&self, node: usize) -> &[u32] {
        &self.cluster_centers[self.cluster_start[node] as usize..self.cluster_start[node + 1] as usize]
    }

    /// Member counts aligned with [`GraphWspd::clusters`].
    pub fn cluster_sizes(&self, node: usize) -> &[u32] {
        &self.cluster_sizes[self.cluster_start[node] as usize..self.cluster_start[node + 1] as usize]
    }

    pub fn max_clusters_per_cell(&self) -> usize {
        (0..self.quadtree.node_count()).map(|u| self.clusters(u).len()).max().unwrap_or(0)
    }

    pub fn pair_count(&self) -> u64 {
        *self.pair_offset.last().expect("nonempty")
    }

    /// First pair id of Euclidean pair `e`.
    pub fn pair_offset(&self, e: usize) -> u64 {
        self.pair_offset[e]
    }

    /// Pair id of `(clusters(A)[si], clusters(B)[ti])` within Euclidean pair `e`.
    pub fn pair_id(&self, e: usize, si: usize, ti: usize) -> u64 {
        let b = self.euclidean.pairs[e].1;
        self.pair_offset[e] + (si * self.clusters(b).len() + ti) as u64
    }

    /// Decodes a pair id.
    pub fn pair(&self, id: u64) -> GraphPair {
        let e = self.pair_offset.partition_point(|&o| o <= id) - 1;
        let (a, b) = self.euclidean.pairs[e];
        let nb = self.clusters(b).len() as u64;
        let r = id - self.pair_offset[e];
        let (si, ti) = ((r / nb) as usize, (r % nb) as usize);
        GraphPair {
            c: ClusterHandle { center: self.clusters(a)[si] as usize, cell: a },
            d: ClusterHandle { center: self.clusters(b)[ti] as usize, cell: b },
        }
    }

    /// All pairs in id order.
    pub fn pairs(&self) -> impl Iterator<Item = GraphPair> + '_ {
        self.euclidean.pairs.iter().flat_map(move |&(a, b)| {
            self.clusters(a).iter().flat_map(move |&s| {
                self.clusters(b).iter().map(move |&t| GraphPair {
                    c: ClusterHandle { center: s as usize, cell: a },
                    d: ClusterHandle { center: t as usize, cell: b },
                })
            })
        })
    }

    /// Members of a handle by a net-tree walk below the center, filtered by the cell.
    pub fn materialize(&self, h: &ClusterHandle) -> Vec<usize> {
        materialize(&self.net, &self.quadtree, h)
    }
}

/// Walks the subtree below `h.center`, not entering nodes of level `<= i(cell)`, keeping
/// vertices inside the cell.
pub fn materialize(net: &NetTree, qt: &Quadtree, h: &ClusterHandle) -> Vec<usize> {
    let cell = qt.node(h.cell).cell;
    let i = depth_level(cell.depth);
    let start = net.base_node(h.center);
    let mut out = Vec::new();
    let mut stack = vec![start];
    while let Some(u) = stack.pop() {
        let nd = net.node(u);
        if qt.cell_contains(&cell, nd.vertex) {
            out.push(nd.vertex);
        }
        for &c in &nd.children {
            if net.node(c).level > i {
                stack.push(c);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// The closed box `2A` slightly widened, in real coordinates.
fn doubled_box(qt: &Quadtree, cell: Cell) -> crate::geometry::Rect {
    let r = qt.frame.cell_rect(cell).scaled(2.0);
    r.expanded(1e-9 * qt.frame.cell_side(cell))
}

/// Centers of level `<= i` inside `2 * cell`, ascending.
pub fn cluster_centers_in(index: &RangeIndex, qt: &Quadtree, cell: Cell, i: i32) -> Vec<usize> {
    index.query(&doubled_box(qt, cell), i)
}

/// Range index over `(x(v), y(v), first level of v)`.
pub fn build_range_index(g: &EmbeddedGraph, net: &NetTree) -> RangeIndex {
    let entries: Vec<RangeEntry> = (0..g.n())
        .map(|v| {
            let p = g.point(v);
            RangeEntry { x: p.x, y: p.y, level: net.first_level(v), id: v }
        })
        .collect();
    RangeIndex::new(&entries)
}

/// Builds the graph WSPD with separation `1/eps`.
pub fn build_graph_wspd(g: &EmbeddedGraph, eps: f64) -> Result<GraphWspd> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let (qt, euclidean) = build_semi_compressed(g.points(), eps)?;
    let levels = build_cluster_levels(g, qt.frame.side)?;
    let net = NetTree::compressed(&levels);
    let index = build_range_index(g, &net);
    let mut cell_clusters: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for &(a, b) in &euclidean.pairs {
        for x in [a, b] {
            if cell_clusters.contains_key(&x) {
                continue;
            }
            let cell = qt.node(x).cell;
            let i = depth_level(cell.depth);
            let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
            for &p in qt.points_of(x) {
                let c = net.center_of(p, i).expect("top level <= i");
                *counts.entry(c).or_default() += 1;
            }
            let cand = cluster_centers_in(&index, &qt, cell, i);
            for c in counts.keys() {
                if cand.binary_search(c).is_err() {
                    return Err(Error::Internal(format!("cluster center {c} of node {x} outside its doubled cell")));
                }
            }
            let list: Vec<(usize, usize)> = cand
                .into_iter()
                .filter_map(|c| counts.get(&c).map(|&k| (c, k)))
                .collect();
            cell_clusters.insert(x, list);
        }
    }
    Ok(GraphWspd::from_parts(eps, qt, euclidean, net, &cell_clusters))
}

/// Violation counts from [`verify_graph_wspd`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GraphWspdReport {
    pub pairs: usize,
    pub missing: usize,
    pub duplicated: usize,
    pub empty_handles: usize,
    pub separation: usize,
    pub diameter: usize,
    pub packing: usize,
    pub cluster_count: usize,
    /// Largest `clusters / (lambda * sqrt(semi-size of 6A))` seen.
    pub max_cluster_ratio: f64,
    pub messages: Vec<String>,
}

impl GraphWspdReport {
    pub fn violations(&self) -> usize {
        self.missing + self.duplicated + self.empty_handles + self.separation + self.diameter + self.packing + self.cluster_count
    }

    fn note(&mut self, msg: String) {
        if self.messages.len() < 20 {
            self.messages.push(msg);
        }
    }
}

/// Checks a graph WSPD against exact distances: exactly-once coverage, separation
/// `s * max(diam C, diam D) <= d(C, D)`, cluster diameters at most `l(A)`, center packing
/// `>= l(A)/4`, and per-cell cluster counts against `lambda`.
pub fn verify_graph_wspd(g: &EmbeddedGraph, w: &GraphWspd, d: &DistanceMatrix, separation: f64, lambda: f64) -> GraphWspdReport {
    let pairs: Vec<GraphPair> = w.pairs().collect();
    verify_pairs(g, &w.quadtree, &w.net, &pairs, d, separation, lambda)
}

/// [`verify_graph_wspd`] on an explicit pair list; per-cell center lists are read off the pairs.
pub fn verify_pairs(g: &EmbeddedGraph, qt: &Quadtree, net: &NetTree, pairs: &[GraphPair], d: &DistanceMatrix, separation: f64, lambda: f64) -> GraphWspdReport {
    const TOL: f64 = 1e-9;
    let n = g.n();
    let mut rep = GraphWspdReport { pairs: pairs.len(), ..Default::default() };
    let mut members: HashMap<ClusterHandle, Vec<usize>> = HashMap::new();
    let mut cell_centers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for p in pairs {
        for h in [p.c, p.d] {
            members.entry(h).or_insert_with(|| {
                cell_centers.entry(h.cell).or_default().push(h.center);
                materialize(net, qt, &h)
            });
        }
    }
    let diam_of = |m: &[usize]| {
        let mut best = 0.0f64;
        for (k, &a) in m.iter().enumerate() {
            for &b in &m[k + 1..] {
                best = best.max(d.get(a, b));
            }
        }
        best
    };
    let mut diam: HashMap<ClusterHandle, f64> = HashMap::new();
    for (h, m) in &members {
        if m.is_empty() {
            rep.empty_handles += 1;
            rep.note(format!("empty cluster center {} cell {}", h.center, h.cell));
        }
        let dm = diam_of(m);
        if dm > qt.side(h.cell) * (1.0 + TOL) {
            rep.diameter += 1;
            rep.note(format!("cluster center {} cell {} diameter {dm}", h.center, h.cell));
        }
        diam.insert(*h, dm);
    }
    let mut cover = vec![0u8; n * n];
    for p in pairs {
        let (mc, md) = (&members[&p.c], &members[&p.d]);
        let mut gap = f64::INFINITY;
        for &a in mc {
            for &b in md {
                let (x, y) = (a.min(b), a.max(b));
                cover[x * n + y] = cover[x * n + y].saturating_add(1);
                gap = gap.min(d.get(a, b));
            }
        }
        let dm = diam[&p.c].max(diam[&p.d]);
        if separation * dm > gap * (1.0 + TOL) {
            rep.separation += 1;
            rep.note(format!("pair ({},{})-({},{}) not separated: diam {dm}, gap {gap}", p.c.center, p.c.cell, p.d.center, p.d.cell));
        }
    }
    for x in 0..n {
        for y in x + 1..n {
            match cover[x * n + y] {
                0 => {
                    rep.missing += 1;
                    rep.note(format!("vertex pair ({x},{y}) not covered"));
                }
                1 => {}
                _ => {
                    rep.duplicated += 1;
                    rep.note(format!("vertex pair ({x},{y}) covered more than once"));
                }
            }
        }
    }
    let lam = lambda.max(1.0);
    for (&cell, list) in &cell_centers {
        let r = radius(qt.frame.side, depth_level(qt.node(cell).cell.depth));
        for a in 0..list.len() {
            for b in a + 1..list.len() {
                if d.get(list[a], list[b]) < r * (1.0 - TOL) {
                    rep.packing += 1;
                    rep.note(format!("centers {} and {} of cell {cell} closer than {r}", list[a], list[b]));
                }
            }
        }
        let six = qt.cell_rect(cell).scaled(6.0);
        let inside: Vec<crate::geometry::Point2> = g.points().iter().copied().filter(|p| six.contains(*p)).collect();
        let semi = semi_size_of_points(&inside).max(1) as f64;
        let ratio = list.len() as f64 / (lam * semi.sqrt());
        rep.max_cluster_ratio = rep.max_cluster_ratio.max(ratio);
        if ratio > CLUSTER_COUNT_C {
            rep.cluster_count += 1;
            rep.note(format!("cell {cell} has {} clusters", list.len()));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GraphKind};
    use crate::geometry::Point2;
    use crate::graph::all_pairs_shortest_paths;

    #[test]
    fn levels() {
        assert_eq!(cell_level(4.0, 16.0).unwrap(), 2 + LEVEL_OFFSET);
        assert_eq!(cell_level(2.0, 16.0).unwrap(), 3 + LEVEL_OFFSET);
        assert!(cell_level(3.0, 16.0).is_err());
        for k in 0..20u8 {
            let side = 16.0 * (-(k as f64)).exp2();
            let i = cell_level(side, 16.0).unwrap();
            assert_eq!(i, depth_level(k));
            assert_eq!(radius(16.0, i), side / 4.0);
        }
    }

    #[test]
    fn two_vertices() {
        let g = generate(&GraphKind::Path { n: 2 }).unwrap();
        let w = build_graph_wspd(&g, 0.5).unwrap();
        assert_eq!(w.pair_count(), 1);
        let p = w.pair(0);
        let mut both = [w.materialize(&p.c), w.materialize(&p.d)];
        both.sort();
        assert_eq!(both, [vec![0], vec![1]]);
    }

    #[test]
    fn rejects() {
        let g = EmbeddedGraph::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)], vec![]).unwrap();
        assert_eq!(build_graph_wspd(&g, 0.5).unwrap_err(), Error::Disconnected);
        let g = generate(&GraphKind::Path { n: 2 }).unwrap();
        assert!(build_graph_wspd(&g, 1.0).is_err());
    }

    #[test]
    fn range_query_matches_scan() {
        let g = generate(&GraphKind::Grid { k: 6 }).unwrap();
        let w = build_graph_wspd(&g, 0.5).unwrap();
        let idx = build_range_index(&g, &w.net);
        for node in 0..w.quadtree.node_count() {
            let cell = w.quadtree.node(node).cell;
            for i in [w.net.top_level(), depth_level(cell.depth), depth_level(cell.depth) + 2] {
                let got = cluster_centers_in(&idx, &w.quadtree, cell, i);
                let bx = doubled_box(&w.quadtree, cell);
                let expect: Vec<usize> = (0..g.n()).filter(|&v| bx.contains(g.point(v)) && w.net.first_level(v) <= i).collect();
                assert_eq!(got, expect);
            }
        }
        // a box far from every vertex
        let far = crate::geometry::Rect::square(Point2::new(100.0, 100.0), 1.0);
        assert!(idx.query(&far, 100).is_empty());
    }

    #[test]
    fn grid5_verified() {
        let g = generate(&GraphKind::Grid { k: 5 }).unwrap();
        let w = build_graph_wspd(&g, 0.5).unwrap();
        let d = all_pairs_shortest_paths(&g).unwrap();
        let rep = verify_graph_wspd(&g, &w, &d, 2.0, 4.0);
        assert_eq!(rep.violations(), 0, "{:?}", rep.messages);
        // per-cell partition: clusters of a cell cover its points exactly
        for &(a, b) in &w.euclidean.pairs {
          for cell in [a, b] {
            let sizes = w.cluster_sizes(cell);
            let mut all = Vec::new();
            for (k, &c) in w.clusters(cell).iter().enumerate() {
                let m = w.materialize(&ClusterHandle { center: c as usize, cell });
                assert_eq!(m.len(), sizes[k] as usize);
                all.extend(m);
            }
            all.sort();
            let mut pts = w.quadtree.points_of(cell).to_vec();
            pts.sort();
            assert_eq!(all, pts);
          }
        }
        let ids: Vec<GraphPair> = (0..w.pair_count()).map(|i| w.pair(i)).collect();
        assert_eq!(ids, w.pairs().collect::<Vec<_>>());
    }

    #[test]
    fn forced_failures() {
        let g = generate(&GraphKind::Grid { k: 4 }).unwrap();
        let w = build_graph_wspd(&g, 0.5).unwrap();
        let d = all_pairs_shortest_paths(&g).unwrap();
        assert_eq!(verify_graph_wspd(&g, &w, &d, 2.0, 4.0).violations(), 0);
        let mut pairs: Vec<GraphPair> = w.pairs().collect();
        pairs.remove(pairs.len() / 2);
        assert!(verify_pairs(&g, &w.quadtree, &w.net, &pairs, &d, 2.0, 4.0).missing > 0);
        // cell diagonals and the l/4 cluster radius leave about 2.8x slack, so the
        // re-check tightens eps fourfold to break some pair
        let g = generate(&GraphKind::PerturbedGrid { k: 22, noise: 0.45, seed: 1 }).unwrap();
        let w = build_graph_wspd(&g, 0.5).unwrap();
        let d = all_pairs_shortest_paths(&g).unwrap();
        assert_eq!(verify_graph_wspd(&g, &w, &d, 2.0, 4.0).separation, 0);
        assert!(verify_graph_wspd(&g, &w, &d, 8.0, 4.0).separation > 0);
    }

    #[test]
    fn singleton_and_outside_handles() {
        let g = generate(&GraphKind::Grid { k: 4 }).unwrap();
        let w = build_graph_wspd(&g, 0.5).unwrap();
        let leaf = w.quadtree.leaf_of(5);
        assert_eq!(w.materialize(&ClusterHandle { center: 5, cell: leaf }), vec![5]);
        // vertex 15's cluster at the leaf level of vertex 0 is empty there
        let leaf0 = w.quadtree.leaf_of(0);
        assert!(w.materialize(&ClusterHandle { center: 15, cell: leaf0 }).is_empty());
    }
}
