//! Hierarchies of graph-metric nets: cluster levels `N_i` with radii `r_i = Delta / 2^(i-1)`,
//! the compressed net-tree, induced clusterings and semi-compression.

use std::collections::BinaryHeap;
use std::fmt::Write;

use crate::error::{Error, Result};
use crate::graph::{dijkstra, EmbeddedGraph, HeapItem};

/// `r_i = delta / 2^(i-1)`.
pub fn radius(delta: f64, i: i32) -> f64 {
    delta * (1.0 - i as f64).exp2()
}

/// One produced resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLevel {
    pub index: i32,
    pub radius: f64,
    /// Sorted center set `N_i`.
    pub centers: Vec<usize>,
}

/// Output of [`build_cluster_levels`]. Levels where nothing changes are elided.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterLevels {
    pub delta: f64,
    pub levels: Vec<ClusterLevel>,
    /// Smallest `i` with `v` in `N_i`.
    pub first_level: Vec<i32>,
    /// Nearest center of `N_{first_level(v) - 1}` (ties to the lower index); `None` for the root.
    pub parent: Vec<Option<usize>>,
}

impl ClusterLevels {
    pub fn top_level(&self) -> i32 {
        self.levels[0].index
    }

    pub fn bottom_level(&self) -> i32 {
        self.levels.last().expect("at least one level").index
    }

    /// `N_i` (empty above the top level).
    pub fn centers_at(&self, i: i32) -> &[usize] {
        match self.levels.partition_point(|l| l.index <= i) {
            0 => &[],
            k => &self.levels[k - 1].centers,
        }
    }
}

// Multi-source shortest paths, recording the nearest source (ties to the lower index).
fn nearest_centers(g: &EmbeddedGraph, centers: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let n = g.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut label = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for &c in centers {
        dist[c] = 0.0;
        label[c] = c;
        heap.push(HeapItem { dist: 0.0, node: c });
    }
    while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(w, wt) in g.neighbors(u) {
            let nd = d + wt;
            if nd < dist[w] || (nd == dist[w] && label[u] < label[w]) {
                dist[w] = nd;
                label[w] = label[u];
                heap.push(HeapItem { dist: nd, node: w });
            }
        }
    }
    (dist, label)
}

/// Deterministic greedy net hierarchy. The top level holds vertex 0 alone: its index is the
/// largest `i <= 1` whose radius covers the eccentricity of vertex 0.
pub fn build_cluster_levels(g: &EmbeddedGraph, delta: f64) -> Result<ClusterLevels> {
    let n = g.n();
    if n == 0 {
        return Err(Error::TooFewPoints(1));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta {delta}")));
    }
    let mut dist = dijkstra(g, 0);
    let ecc = dist.iter().copied().fold(0.0, f64::max);
    let mut i = 1;
    while radius(delta, i) < ecc {
        i -= 1;
    }
    let mut is_center = vec![false; n];
    let mut first_level = vec![i32::MAX; n];
    let mut parent = vec![None; n];
    is_center[0] = true;
    first_level[0] = i;
    let mut count = 1;
    let mut levels = vec![ClusterLevel { index: i, radius: radius(delta, i), centers: vec![0] }];
    let mut heap = BinaryHeap::new();
    while count < n {
        i += 1;
        let r = radius(delta, i);
        if r == 0.0 {
            return Err(Error::Resolution);
        }
        let prev: Vec<usize> = levels.last().expect("nonempty").centers.clone();
        let mut added = Vec::new();
        for v in 0..n {
            if is_center[v] || dist[v] < r {
                continue;
            }
            is_center[v] = true;
            first_level[v] = i;
            added.push(v);
            dist[v] = 0.0;
            heap.push(HeapItem { dist: 0.0, node: v });
            while let Some(HeapItem { dist: d, node: u }) = heap.pop() {
                if d > dist[u] {
                    continue;
                }
                for &(w, wt) in g.neighbors(u) {
                    let nd = d + wt;
                    if nd < dist[w] && nd < r {
                        dist[w] = nd;
                        heap.push(HeapItem { dist: nd, node: w });
                    }
                }
            }
        }
        if added.is_empty() {
            continue;
        }
        let (_, label) = nearest_centers(g, &prev);
        for &v in &added {
            parent[v] = Some(label[v]);
        }
        count += added.len();
        let mut centers = prev;
        centers.extend(added);
        centers.sort_unstable();
        levels.push(ClusterLevel { index: i, radius: r, centers });
    }
    Ok(ClusterLevels { delta, levels, first_level, parent })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeMode {
    Compressed,
    SemiCompressed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetNode {
    pub vertex: usize,
    pub level: i32,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Net-tree over the vertices; every parent has a strictly smaller level than its children.
#[derive(Debug, Clone, PartialEq)]
pub struct NetTree {
    pub delta: f64,
    pub mode: TreeMode,
    nodes: Vec<NetNode>,
    /// Per vertex, its copies sorted by level (one in compressed mode).
    copies: Vec<Vec<usize>>,
    root: usize,
    /// `(vertex, level)` of every copy beyond a vertex's first, by vertex then level.
    pub augmentation: Vec<(usize, i32)>,
}

impl NetTree {
    /// One node per vertex at its first level; node id = vertex id.
    pub fn compressed(levels: &ClusterLevels) -> NetTree {
        let n = levels.first_level.len();
        let mut nodes: Vec<NetNode> = (0..n)
            .map(|v| NetNode { vertex: v, level: levels.first_level[v], parent: levels.parent[v], children: vec![] })
            .collect();
        for v in 0..n {
            if let Some(p) = nodes[v].parent {
                nodes[p].children.push(v);
            }
        }
        NetTree {
            delta: levels.delta,
            mode: TreeMode::Compressed,
            nodes,
            copies: (0..n).map(|v| vec![v]).collect(),
            root: 0,
            augmentation: vec![],
        }
    }

    /// Rebuilds a tree from raw node records (as produced by [`NetTree::nodes`]).
    pub fn from_nodes(delta: f64, mode: TreeMode, n_vertices: usize, raw: Vec<(usize, i32, Option<usize>)>) -> Result<NetTree> {
        let mut nodes: Vec<NetNode> = raw
            .iter()
            .map(|&(vertex, level, parent)| NetNode { vertex, level, parent, children: vec![] })
            .collect();
        let mut copies = vec![Vec::new(); n_vertices];
        let mut root = None;
        for id in 0..nodes.len() {
            let nd = &nodes[id];
            if nd.vertex >= n_vertices {
                return Err(Error::Format("net node vertex out of range".into()));
            }
            copies[nd.vertex].push(id);
            match nd.parent {
                None if root.is_none() => root = Some(id),
                None => return Err(Error::Format("net tree has two roots".into())),
                Some(p) if p >= nodes.len() || nodes[p].level >= nd.level => {
                    return Err(Error::Format("bad net tree parent".into()))
                }
                Some(_) => {}
            }
        }
        for id in 0..nodes.len() {
            if let Some(p) = nodes[id].parent {
                nodes[p].children.push(id);
            }
        }
        for c in copies.iter_mut() {
            if c.is_empty() {
                return Err(Error::Format("vertex missing from net tree".into()));
            }
            c.sort_by_key(|&id| nodes[id].level);
        }
        let root = root.ok_or_else(|| Error::Format("net tree has no root".into()))?;
        let mut tree = NetTree { delta, mode, nodes, copies, root, augmentation: vec![] };
        if mode == TreeMode::SemiCompressed {
            tree.augmentation = tree.copies.iter().flat_map(|c| c[1..].to_vec()).map(|id| (tree.nodes[id].vertex, tree.nodes[id].level)).collect();
        }
        Ok(tree)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NetNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &NetNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn n_vertices(&self) -> usize {
        self.copies.len()
    }

    /// Node of `v` at its first level.
    pub fn base_node(&self, v: usize) -> usize {
        self.copies[v][0]
    }

    /// Deepest copy of `v`.
    pub fn deepest(&self, v: usize) -> usize {
        *self.copies[v].last().expect("every vertex has a node")
    }

    pub fn copies(&self, v: usize) -> &[usize] {
        &self.copies[v]
    }

    pub fn top_level(&self) -> i32 {
        self.nodes[self.root].level
    }

    pub fn max_level(&self) -> i32 {
        self.nodes.iter().map(|n| n.level).max().unwrap_or(0)
    }

    /// First level of vertex `v` (`v` is in `N_i` iff `i >= first_level(v)`).
    pub fn first_level(&self, v: usize) -> i32 {
        self.nodes[self.base_node(v)].level
    }

    /// Vertex of the first ancestor-or-self of `v`'s deepest copy with level `<= i`.
    pub fn center_of(&self, v: usize, i: i32) -> Option<usize> {
        let mut u = self.deepest(v);
        loop {
            if self.nodes[u].level <= i {
                return Some(self.nodes[u].vertex);
            }
            u = self.nodes[u].parent?;
        }
    }

    /// Text dump: one `netnode <vertex> <level> <parent-node-id>` line per node, `-` for the root.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for nd in &self.nodes {
            match nd.parent {
                Some(p) => writeln!(s, "netnode {} {} {}", nd.vertex, nd.level, p),
                None => writeln!(s, "netnode {} {} -", nd.vertex, nd.level),
            }
            .expect("string write");
        }
        s
    }
}

/// Level-`i` clusters: each center with the vertices whose first `<= i` ancestor it is.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedClustering {
    pub level: i32,
    /// `(center, sorted members including the center)`, sorted by center.
    pub clusters: Vec<(usize, Vec<usize>)>,
}

/// Induced clustering at level `i`; `i` must be at least the top level.
pub fn induced_clustering(tree: &NetTree, i: i32) -> Result<InducedClustering> {
    if i < tree.top_level() {
        return Err(Error::LevelOutOfRange(i as i64));
    }
    let n = tree.n_vertices();
    let mut by_center: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let c = tree.center_of(v, i).expect("root level <= i");
        by_center[c].push(v);
    }
    let clusters = by_center
        .into_iter()
        .enumerate()
        .filter(|(_, m)| !m.is_empty())
        .collect();
    Ok(InducedClustering { level: i, clusters })
}

/// Adds copies so each `(v, i)` in `aug` has a node at level exactly `i`. Each copy hangs
/// below the next-shallower copy of the same vertex; a vertex's first copy hangs below the
/// copy of its cluster center with the largest level under its own.
pub fn semi_compress(tree: &NetTree, aug: &[(usize, i32)]) -> Result<NetTree> {
    let n = tree.n_vertices();
    let mut lv: Vec<Vec<i32>> = (0..n).map(|v| tree.copies(v).iter().map(|&c| tree.node(c).level).collect()).collect();
    for &(v, i) in aug {
        if v >= n {
            return Err(Error::InvalidVertex(v));
        }
        if i < tree.first_level(v) {
            return Err(Error::NotACenter { vertex: v, level: i });
        }
        if let Err(pos) = lv[v].binary_search(&i) {
            lv[v].insert(pos, i);
        }
    }
    // ids: per vertex, copies in level order
    let mut offset = vec![0usize; n + 1];
    for v in 0..n {
        offset[v + 1] = offset[v] + lv[v].len();
    }
    let mut raw = Vec::with_capacity(offset[n]);
    for v in 0..n {
        for (k, &l) in lv[v].iter().enumerate() {
            let parent = if k > 0 {
                Some(offset[v] + k - 1)
            } else {
                match tree.node(tree.base_node(v)).parent {
                    None => None,
                    Some(p) => {
                        let pv = tree.node(p).vertex;
                        let pos = lv[pv].partition_point(|&x| x < l);
                        Some(offset[pv] + pos - 1)
                    }
                }
            };
            raw.push((v, l, parent));
        }
    }
    NetTree::from_nodes(tree.delta, TreeMode::SemiCompressed, n, raw)
}

/// Violations found when checking a level sequence against exact distances.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetCheck {
    pub covering: usize,
    pub packing: usize,
    pub inheritance: usize,
    pub partition: usize,
    pub cluster_radius: usize,
    pub parent_distance: usize,
}

impl NetCheck {
    pub fn total(&self) -> usize {
        self.covering + self.packing + self.inheritance + self.partition + self.cluster_radius + self.parent_distance
    }
}

/// Checks covering/packing/inheritance of every produced level, and for every level in
/// `[top, bottom]` the induced clustering's partition, radius `<= 2 r_i` and center packing.
pub fn check_net(levels: &ClusterLevels, tree: &NetTree, d: &crate::graph::DistanceMatrix) -> NetCheck {
    const TOL: f64 = 1e-9;
    let mut out = NetCheck::default();
    let n = d.n();
    let delta = levels.delta;
    for (k, l) in levels.levels.iter().enumerate() {
        for v in 0..n {
            let near = l.centers.iter().map(|&c| d.get(v, c)).fold(f64::INFINITY, f64::min);
            if near > l.radius * (1.0 + TOL) {
                out.covering += 1;
            }
        }
        for a in 0..l.centers.len() {
            for b in a + 1..l.centers.len() {
                if d.get(l.centers[a], l.centers[b]) < l.radius * (1.0 - TOL) {
                    out.packing += 1;
                }
            }
        }
        if k > 0 {
            let prev = &levels.levels[k - 1].centers;
            if !prev.iter().all(|c| l.centers.binary_search(c).is_ok()) {
                out.inheritance += 1;
            }
        }
    }
    for v in 0..n {
        let nd = tree.node(tree.base_node(v));
        if let Some(p) = nd.parent {
            let pv = tree.node(p).vertex;
            if d.get(v, pv) > radius(delta, nd.level - 1) * (1.0 + TOL) {
                out.parent_distance += 1;
            }
        }
    }
    for i in levels.top_level()..=levels.bottom_level() {
        let ic = induced_clustering(tree, i).expect("level in range");
        let r = radius(delta, i);
        let mut seen = vec![0u32; n];
        for (c, members) in &ic.clusters {
            for &v in members {
                seen[v] += 1;
                if d.get(v, *c) > 2.0 * r * (1.0 + TOL) {
                    out.cluster_radius += 1;
                }
            }
        }
        if seen.iter().any(|&s| s != 1) {
            out.partition += 1;
        }
        for a in 0..ic.clusters.len() {
            for b in a + 1..ic.clusters.len() {
                if d.get(ic.clusters[a].0, ic.clusters[b].0) < r * (1.0 - TOL) {
                    out.packing += 1;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GraphKind};
    use crate::geometry::Point2;
    use crate::graph::all_pairs_shortest_paths;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_vertex() {
        let g = EmbeddedGraph::new(vec![Point2::new(0.0, 0.0)], vec![]).unwrap();
        let l = build_cluster_levels(&g, 1.0).unwrap();
        assert_eq!(l.levels.len(), 1);
        assert_eq!(l.levels[0].index, 1);
        assert_eq!(l.levels[0].centers, vec![0]);
        let t = NetTree::compressed(&l);
        assert_eq!(t.node_count(), 1);
        assert_eq!(t.node(0).parent, None);
    }

    #[test]
    fn two_vertex_path() {
        let g = generate(&GraphKind::Path { n: 2 }).unwrap();
        let l = build_cluster_levels(&g, 1.0).unwrap();
        assert_eq!(l.centers_at(1), &[0]);
        // r_2 = 1/2 < 1 makes vertex 1 a center
        assert_eq!(l.first_level[1], 2);
        assert_eq!(l.centers_at(2), &[0, 1]);
        assert!(build_cluster_levels(&EmbeddedGraph::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)], vec![]).unwrap(), 2.0).is_err());
    }

    #[test]
    fn grid_levels_verified() {
        let g = generate(&GraphKind::Grid { k: 8 }).unwrap();
        let l = build_cluster_levels(&g, 8.0).unwrap();
        let t = NetTree::compressed(&l);
        assert_eq!(t.node_count(), 64);
        let d = all_pairs_shortest_paths(&g).unwrap();
        assert_eq!(check_net(&l, &t, &d).total(), 0);
        let top = induced_clustering(&t, l.top_level()).unwrap();
        assert_eq!(top.clusters.len(), 1);
        let bottom = induced_clustering(&t, l.bottom_level()).unwrap();
        assert_eq!(bottom.clusters.len(), 64);
    }

    #[test]
    fn path13_parents() {
        let g = generate(&GraphKind::Path { n: 13 }).unwrap();
        let l = build_cluster_levels(&g, 16.0).unwrap();
        let t = NetTree::compressed(&l);
        let d = all_pairs_shortest_paths(&g).unwrap();
        for v in 1..13 {
            let nd = t.node(v);
            let p = t.node(nd.parent.unwrap());
            assert!(p.level < nd.level);
            assert!(d.get(v, p.vertex) <= radius(16.0, nd.level - 1));
        }
    }

    #[test]
    fn comb_deeper_than_delta() {
        // graph diameter exceeds the Euclidean extent
        let g = generate(&GraphKind::Comb { k: 10 }).unwrap();
        let l = build_cluster_levels(&g, 16.0).unwrap();
        assert!(l.top_level() <= 0);
        let t = NetTree::compressed(&l);
        let d = all_pairs_shortest_paths(&g).unwrap();
        assert_eq!(check_net(&l, &t, &d).total(), 0);
    }

    #[test]
    fn semi_compress_root_copy() {
        let g = generate(&GraphKind::Grid { k: 6 }).unwrap();
        let l = build_cluster_levels(&g, 8.0).unwrap();
        let t = NetTree::compressed(&l);
        assert_eq!(semi_compress(&t, &[]).unwrap().node_count(), t.node_count());
        let s = semi_compress(&t, &[(0, 3)]).unwrap();
        assert_eq!(s.node_count(), 37);
        let copies = s.copies(0);
        assert_eq!(copies.len(), 2);
        let c3 = copies[1];
        assert_eq!(s.node(c3).level, 3);
        assert_eq!(s.node(c3).parent, Some(copies[0]));
        for v in 1..36 {
            let b = s.node(s.base_node(v));
            let p = s.node(b.parent.unwrap());
            if p.vertex == 0 {
                let expect = if b.level > 3 { c3 } else { copies[0] };
                assert_eq!(b.parent, Some(expect));
            }
        }
        assert!(matches!(semi_compress(&t, &[(35, l.top_level())]), Err(Error::NotACenter { .. })));
    }

    #[test]
    fn semi_compress_preserves_partitions() {
        let g = generate(&GraphKind::Grid { k: 6 }).unwrap();
        let l = build_cluster_levels(&g, 8.0).unwrap();
        let t = NetTree::compressed(&l);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let aug: Vec<(usize, i32)> = (0..15)
                .map(|_| {
                    let v = rng.gen_range(0..36);
                    (v, rng.gen_range(l.first_level[v]..=l.bottom_level() + 1))
                })
                .collect();
            let s = semi_compress(&t, &aug).unwrap();
            let mut distinct = aug.clone();
            distinct.sort();
            distinct.dedup();
            let new = distinct.iter().filter(|&&(v, i)| i != l.first_level[v]).count();
            assert_eq!(s.node_count(), 36 + new);
            for i in l.top_level()..=l.bottom_level() + 1 {
                assert_eq!(induced_clustering(&s, i).unwrap(), induced_clustering(&t, i).unwrap());
            }
        }
    }

    #[test]
    fn dump_format() {
        let g = generate(&GraphKind::Path { n: 3 }).unwrap();
        let l = build_cluster_levels(&g, 4.0).unwrap();
        let t = NetTree::compressed(&l);
        assert_eq!(t.dump(), "netnode 0 1 -\nnetnode 1 3 0\nnetnode 2 2 0\n");
    }
}
