//! Compressed and semi-compressed quadtrees, the Euclidean WSPD built on them,
//! semi-size covers, and an uncompressed reference WSPD for bounded spread.
//!
//! Points are mapped into the root square `[anchor, anchor + side)^2` and then to
//! 62-bit fixed-point coordinates, so a cell at depth `k` is just the top `k` bits
//! of each coordinate. Cell containment and congruent separation are exact.

use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::geometry::{closest_pair_distance, euclidean_distance, Point2, Rect};

/// Depth of leaf cells.
pub const MAX_DEPTH: u8 = 62;
const SCALE: f64 = (1u64 << 62) as f64;

/// Lower end of the maximal-pair side window, as a multiple of `eps * d`.
pub const WINDOW_C1: f64 = 0.117_851_130_197_757_92; // 1/(6*sqrt 2)
/// Upper end of the maximal-pair side window.
pub const WINDOW_C2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// An aligned grid cell: depth `k` and integer coordinates in `[0, 2^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub depth: u8,
    pub ix: u64,
    pub iy: u64,
}

impl Cell {
    pub const ROOT: Cell = Cell { depth: 0, ix: 0, iy: 0 };

    /// The depth-`depth` cell containing fixed-point coordinates `(x, y)`.
    pub fn containing(x: u64, y: u64, depth: u8) -> Cell {
        let sh = (MAX_DEPTH - depth) as u32;
        Cell { depth, ix: x >> sh, iy: y >> sh }
    }

    pub fn contains_fixed(&self, x: u64, y: u64) -> bool {
        Cell::containing(x, y, self.depth) == *self
    }

    /// The enclosing cell at depth `depth <= self.depth`.
    pub fn ancestor(&self, depth: u8) -> Cell {
        debug_assert!(depth <= self.depth);
        let sh = (self.depth - depth) as u32;
        Cell { depth, ix: self.ix >> sh, iy: self.iy >> sh }
    }

    /// The aligned cell one level up (twice the side).
    pub fn double(&self) -> Result<Cell> {
        if self.depth == 0 {
            return Err(Error::RootCell);
        }
        Ok(self.ancestor(self.depth - 1))
    }

    /// Side length relative to the root side.
    pub fn side_norm(&self) -> f64 {
        (-(self.depth as f64)).exp2()
    }

    /// The cell as a rectangle in root-normalized coordinates.
    pub fn rect_norm(&self) -> Rect {
        let s = self.side_norm();
        Rect::square(Point2::new(self.ix as f64 * s, self.iy as f64 * s), s)
    }
}

/// Exact separation test for two congruent cells at the same depth: the cells are
/// `1/eps`-separated with cell diagonals as diameters iff the integer cell gaps satisfy
/// `gx^2 + gy^2 >= 2 / eps^2`.
pub fn congruent_separated(a: Cell, b: Cell, eps: f64) -> bool {
    debug_assert_eq!(a.depth, b.depth);
    let gx = a.ix.abs_diff(b.ix).saturating_sub(1) as f64;
    let gy = a.iy.abs_diff(b.iy).saturating_sub(1) as f64;
    (gx * gx + gy * gy) * eps * eps >= 2.0
}

/// Separation test for arbitrary cells, diameters taken as cell diagonals.
pub fn cells_separated(a: Cell, b: Cell, s: f64) -> bool {
    let ra = a.rect_norm();
    let rb = b.rect_norm();
    let diam = std::f64::consts::SQRT_2 * a.side_norm().max(b.side_norm());
    ra.distance(&rb) >= s * diam
}

/// Root square and the map from real to fixed-point coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadFrame {
    pub anchor: Point2,
    /// Root side length (`Delta`), a power of two.
    pub side: f64,
}

impl QuadFrame {
    /// Anchor at the floor of the minimum coordinates; side is the smallest power of two
    /// at least 1.1 times the extent measured from the anchor.
    pub fn for_points(points: &[Point2]) -> Result<QuadFrame> {
        let bb = Rect::bounding(points).ok_or(Error::TooFewPoints(1))?;
        let anchor = Point2::new(bb.min.x.floor(), bb.min.y.floor());
        let extent = (bb.max.x - anchor.x).max(bb.max.y - anchor.y);
        let mut side = 1.0f64;
        if extent > 0.0 {
            side = (1.1 * extent).log2().ceil().exp2();
            while side < 1.1 * extent {
                side *= 2.0;
            }
            while side / 2.0 >= 1.1 * extent {
                side /= 2.0;
            }
        }
        Ok(QuadFrame { anchor, side })
    }

    pub fn to_fixed(&self, p: Point2) -> (u64, u64) {
        let f = |v: f64, a: f64| {
            let u = ((v - a) / self.side * SCALE).floor();
            (u.max(0.0) as u64).min((1u64 << 62) - 1)
        };
        (f(p.x, self.anchor.x), f(p.y, self.anchor.y))
    }

    /// Real side length of a cell.
    pub fn cell_side(&self, c: Cell) -> f64 {
        self.side * c.side_norm()
    }

    /// Real lower-left corner of a cell.
    pub fn cell_corner(&self, c: Cell) -> Point2 {
        let s = self.cell_side(c);
        Point2::new(self.anchor.x + c.ix as f64 * s, self.anchor.y + c.iy as f64 * s)
    }

    pub fn cell_rect(&self, c: Cell) -> Rect {
        Rect::square(self.cell_corner(c), self.cell_side(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Regular,
    /// Inserted congruent ancestor `A'`.
    Inserted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadNode {
    pub cell: Cell,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Point range `[start, end)` into [`Quadtree::order`].
    pub start: usize,
    pub end: usize,
    pub kind: NodeKind,
}

impl QuadNode {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Compressed quadtree, optionally augmented with inserted congruent ancestors.
#[derive(Debug, Clone)]
pub struct Quadtree {
    pub frame: QuadFrame,
    points: Vec<Point2>,
    fixed: Vec<(u64, u64)>,
    order: Vec<usize>,
    nodes: Vec<QuadNode>,
    leaf_of: Vec<usize>,
    cell_index: FxHashMap<Cell, usize>,
}

fn morton(x: u64, y: u64) -> u128 {
    let spread = |v: u64| {
        let mut r = v as u128 & 0x3fff_ffff_ffff_ffff;
        r = (r | (r << 32)) & 0x0000_0000_ffff_ffff_0000_0000_ffff_ffff;
        r = (r | (r << 16)) & 0x0000_ffff_0000_ffff_0000_ffff_0000_ffff;
        r = (r | (r << 8)) & 0x00ff_00ff_00ff_00ff_00ff_00ff_00ff_00ff;
        r = (r | (r << 4)) & 0x0f0f_0f0f_0f0f_0f0f_0f0f_0f0f_0f0f_0f0f;
        r = (r | (r << 2)) & 0x3333_3333_3333_3333_3333_3333_3333_3333;
        r = (r | (r << 1)) & 0x5555_5555_5555_5555_5555_5555_5555_5555;
        r
    };
    spread(x) | (spread(y) << 1)
}

/// Smallest normalized pair distance that every leaf-level separation test can resolve,
/// for base separation `2/eps`.
fn resolution_ok(min_norm_dist: f64, eps: f64) -> bool {
    let leaf = (-(MAX_DEPTH as f64)).exp2();
    // leaf cells of two points at distance d are (2/eps)-separated once
    // d - 2*sqrt2*leaf >= (2/eps)*sqrt2*leaf; keep a factor 4 margin
    min_norm_dist >= 4.0 * std::f64::consts::SQRT_2 * (2.0 / eps + 2.0) * leaf * 2.0
}

impl Quadtree {
    /// Builds the compressed quadtree. The root is always the depth-0 square.
    pub fn build_compressed(points: &[Point2]) -> Result<Quadtree> {
        Self::build_with_guard(points, 1.0)
    }

    fn build_with_guard(points: &[Point2], eps: f64) -> Result<Quadtree> {
        let n = points.len();
        if n == 0 {
            return Err(Error::TooFewPoints(1));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite(i));
            }
        }
        let frame = QuadFrame::for_points(points)?;
        let fixed: Vec<(u64, u64)> = points.iter().map(|&p| frame.to_fixed(p)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        let keys_unsorted: Vec<u128> = fixed.iter().map(|&(x, y)| morton(x, y)).collect();
        order.sort_by_key(|&i| keys_unsorted[i]);
        let keys: Vec<u128> = order.iter().map(|&i| keys_unsorted[i]).collect();
        for w in 0..n.saturating_sub(1) {
            if keys[w] == keys[w + 1] {
                let (a, b) = (order[w].min(order[w + 1]), order[w].max(order[w + 1]));
                if points[a] == points[b] {
                    return Err(Error::DuplicatePoint(a, b));
                }
                return Err(Error::Resolution);
            }
        }
        if n >= 2 {
            let d = closest_pair_distance(points) / frame.side;
            if !resolution_ok(d, eps) {
                return Err(Error::Resolution);
            }
        }
        let mut qt = Quadtree {
            frame,
            points: points.to_vec(),
            fixed,
            order,
            nodes: Vec::with_capacity(2 * n),
            leaf_of: vec![0; n],
            cell_index: FxHashMap::with_capacity_and_hasher(2 * n, Default::default()),
        };
        if n == 1 {
            qt.push_node(Cell::ROOT, None, 0, 1, NodeKind::Regular);
            qt.leaf_of[0] = 0;
            return Ok(qt);
        }
        let root = qt.push_node(Cell::ROOT, None, 0, n, NodeKind::Regular);
        let lca = Self::lca_depth(keys[0], keys[n - 1]);
        if lca == 0 {
            qt.split(root, &keys);
        } else {
            let (x, y) = qt.fixed[qt.order[0]];
            let c = qt.push_node(Cell::containing(x, y, lca), Some(root), 0, n, NodeKind::Regular);
            qt.nodes[root].children.push(c);
            qt.split(c, &keys);
        }
        Ok(qt)
    }

    /// Reassembles a tree from its frame, points, Morton order and nodes, then checks it.
    pub fn from_parts(frame: QuadFrame, points: Vec<Point2>, order: Vec<usize>, nodes: Vec<QuadNode>) -> Result<Quadtree> {
        let n = points.len();
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if n == 0 || nodes.is_empty() || sorted.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::Format("bad quadtree point order".into()));
        }
        let fixed = points.iter().map(|&p| frame.to_fixed(p)).collect();
        let mut qt = Quadtree {
            frame,
            points,
            fixed,
            order,
            nodes: Vec::with_capacity(nodes.len()),
            leaf_of: vec![0; n],
            cell_index: FxHashMap::with_capacity_and_hasher(nodes.len(), Default::default()),
        };
        for nd in nodes {
            if nd.start >= nd.end || nd.end > n {
                return Err(Error::Format("bad quadtree node".into()));
            }
            if qt.cell_index.insert(nd.cell, qt.nodes.len()).is_some() {
                return Err(Error::Format("duplicate quadtree cell".into()));
            }
            qt.nodes.push(nd);
        }
        let count = qt.nodes.len();
        for id in 0..count {
            let nd = &qt.nodes[id];
            if nd.parent.is_some_and(|p| p >= count) || nd.children.iter().any(|&c| c >= count) || (id == 0) != nd.parent.is_none() {
                return Err(Error::Format("bad quadtree links".into()));
            }
            if nd.is_leaf() {
                if nd.len() != 1 {
                    return Err(Error::Format("quadtree leaf with several points".into()));
                }
                qt.leaf_of[qt.order[nd.start]] = id;
            }
        }
        qt.check_structure().map_err(Error::Format)?;
        Ok(qt)
    }

    fn lca_depth(a: u128, b: u128) -> u8 {
        // keys use the low 124 bits
        let common = (a ^ b).leading_zeros() - 4;
        (common / 2).min(MAX_DEPTH as u32) as u8
    }

    fn push_node(&mut self, cell: Cell, parent: Option<usize>, start: usize, end: usize, kind: NodeKind) -> usize {
        let id = self.nodes.len();
        self.nodes.push(QuadNode { cell, parent, children: Vec::new(), start, end, kind });
        self.cell_index.insert(cell, id);
        id
    }

    // Splits an internal node whose points all share its cell and span >= 2 quadrants.
    fn split(&mut self, node: usize, keys: &[u128]) {
        let mut stack = vec![node];
        while let Some(u) = stack.pop() {
            let (lo, hi, depth) = (self.nodes[u].start, self.nodes[u].end, self.nodes[u].cell.depth);
            let shift = 2 * (MAX_DEPTH - depth - 1) as u32;
            let mut s = lo;
            while s < hi {
                let q = (keys[s] >> shift) & 3;
                let mut e = s + 1;
                while e < hi && (keys[e] >> shift) & 3 == q {
                    e += 1;
                }
                let (x, y) = self.fixed[self.order[s]];
                let child = if e - s == 1 {
                    let c = self.push_node(Cell::containing(x, y, MAX_DEPTH), Some(u), s, e, NodeKind::Regular);
                    self.leaf_of[self.order[s]] = c;
                    c
                } else {
                    let d = Self::lca_depth(keys[s], keys[e - 1]);
                    let c = self.push_node(Cell::containing(x, y, d), Some(u), s, e, NodeKind::Regular);
                    stack.push(c);
                    c
                };
                self.nodes[u].children.push(child);
                s = e;
            }
        }
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn node(&self, id: usize) -> &QuadNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[QuadNode] {
        &self.nodes
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    /// Fixed-point coordinates of point `i`.
    pub fn fixed(&self, i: usize) -> (u64, u64) {
        self.fixed[i]
    }

    /// Point indices (original numbering) represented by node `id`.
    pub fn points_of(&self, id: usize) -> &[usize] {
        let nd = &self.nodes[id];
        &self.order[nd.start..nd.end]
    }

    /// Morton-ordered permutation of the points.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Leaf node holding point `i`.
    pub fn leaf_of(&self, i: usize) -> usize {
        self.leaf_of[i]
    }

    /// Node whose cell is exactly `c`, if any.
    pub fn node_of_cell(&self, c: &Cell) -> Option<usize> {
        self.cell_index.get(c).copied()
    }

    /// Real side length `l(A)` of a node.
    pub fn side(&self, id: usize) -> f64 {
        self.frame.cell_side(self.nodes[id].cell)
    }

    pub fn cell_rect(&self, id: usize) -> Rect {
        self.frame.cell_rect(self.nodes[id].cell)
    }

    /// The aligned cell of twice the side containing the node's cell.
    pub fn double(&self, id: usize) -> Result<Cell> {
        self.nodes[id].cell.double()
    }

    /// Does the cell contain point `i` (lower/left closed, upper/right open)?
    pub fn cell_contains(&self, c: &Cell, i: usize) -> bool {
        let (x, y) = self.fixed[i];
        c.contains_fixed(x, y)
    }

    /// Inserts (or finds) the node for the depth-`depth` ancestor cell of node `below`.
    fn insert_ancestor(&mut self, below: usize, depth: u8) -> usize {
        let cell = self.nodes[below].cell.ancestor(depth);
        if let Some(id) = self.cell_index.get(&cell) {
            return *id;
        }
        let mut c = below;
        while let Some(p) = self.nodes[c].parent {
            if self.nodes[p].cell.depth < depth {
                break;
            }
            c = p;
        }
        let p = self.nodes[c].parent.expect("depth-0 root always exists");
        let (s, e) = (self.nodes[c].start, self.nodes[c].end);
        let id = self.push_node(cell, Some(p), s, e, NodeKind::Inserted);
        self.nodes[id].children.push(c);
        self.nodes[c].parent = Some(id);
        for ch in self.nodes[p].children.iter_mut() {
            if *ch == c {
                *ch = id;
            }
        }
        id
    }

    /// Structural check: containment, ranges, leaves partition, compression.
    pub fn check_structure(&self) -> std::result::Result<(), String> {
        let mut seen = vec![0u32; self.n_points()];
        for (id, nd) in self.nodes.iter().enumerate() {
            for &i in self.points_of(id) {
                if !self.cell_contains(&nd.cell, i) {
                    return Err(format!("node {id} holds point {i} outside its cell"));
                }
            }
            if nd.is_leaf() {
                for &i in self.points_of(id) {
                    seen[i] += 1;
                }
            } else {
                let mut total = 0;
                for &c in &nd.children {
                    let cc = self.nodes[c].cell;
                    if cc.depth <= nd.cell.depth || cc.ancestor(nd.cell.depth) != nd.cell {
                        return Err(format!("child {c} not inside node {id}"));
                    }
                    if self.nodes[c].parent != Some(id) {
                        return Err(format!("parent link of {c} broken"));
                    }
                    total += self.nodes[c].len();
                }
                if total != nd.len() {
                    return Err(format!("children of {id} do not partition its points"));
                }
                if nd.kind == NodeKind::Regular && id != 0 && nd.children.len() < 2 {
                    return Err(format!("regular internal node {id} has one child"));
                }
            }
        }
        if seen.iter().any(|&s| s != 1) {
            return Err("leaves do not partition the points".into());
        }
        Ok(())
    }

    /// Indented text dump: `node <level> <x> <y> <side> <npoints> <kind>`.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(self.root(), 0usize)];
        while let Some((u, indent)) = stack.pop() {
            let nd = &self.nodes[u];
            let c = self.frame.cell_corner(nd.cell);
            let kind = match nd.kind {
                NodeKind::Regular => "regular",
                NodeKind::Inserted => "prime",
            };
            let _ = writeln!(
                out,
                "{:indent$}node {} {} {} {} {} {}",
                "",
                nd.cell.depth,
                c.x,
                c.y,
                self.frame.cell_side(nd.cell),
                nd.len(),
                kind,
                indent = 2 * indent
            );
            for &ch in nd.children.iter().rev() {
                stack.push((ch, indent + 1));
            }
        }
        out
    }
}

/// Counters for the O(1) maximal-pair locator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LocatorStats {
    pub checks: u64,
    pub fallbacks: u64,
}

/// Depth of the unique congruent `1/eps`-maximal cell pair for two fixed-point locations:
/// the smallest depth at which their cells are separated. Scans only the side window
/// `[c1*eps*d, c2*eps*d]` widened by one level on each side.
pub fn maximal_depth(a: (u64, u64), b: (u64, u64), eps: f64, stats: &mut LocatorStats) -> Result<u8> {
    if a == b {
        return Err(Error::InsufficientSeparation("identical locations".into()));
    }
    let dx = (a.0 as f64 - b.0 as f64) / SCALE;
    let dy = (a.1 as f64 - b.1 as f64) / SCALE;
    let d = dx.hypot(dy);
    let kmin = ((-(WINDOW_C2 * eps * d).log2()).floor() as i64 - 1).clamp(0, MAX_DEPTH as i64) as u8;
    let kmax = ((-(WINDOW_C1 * eps * d).log2()).ceil() as i64 + 1).clamp(0, MAX_DEPTH as i64) as u8;
    let sep = |k: u8| congruent_separated(Cell::containing(a.0, a.1, k), Cell::containing(b.0, b.1, k), eps);
    for k in kmin..=kmax {
        stats.checks += 1;
        if sep(k) {
            if k == kmin && k > 0 {
                stats.checks += 1;
                if sep(k - 1) {
                    break;
                }
            }
            return Ok(k);
        }
    }
    stats.fallbacks += 1;
    maximal_depth_scan(a, b, eps)
}

/// Exhaustive version of [`maximal_depth`], scanning every depth from the root.
pub fn maximal_depth_scan(a: (u64, u64), b: (u64, u64), eps: f64) -> Result<u8> {
    (0..=MAX_DEPTH)
        .find(|&k| congruent_separated(Cell::containing(a.0, a.1, k), Cell::containing(b.0, b.1, k), eps))
        .ok_or_else(|| Error::InsufficientSeparation("no separating depth".into()))
}

/// Euclidean WSPD over the nodes of a [`Quadtree`].
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanWspd {
    pub eps: f64,
    /// Canonical node pairs (smaller node id first).
    pub pairs: Vec<(usize, usize)>,
}

impl EuclideanWspd {
    /// Largest number of pairs any single node takes part in.
    pub fn max_node_multiplicity(&self) -> usize {
        let mut count: HashMap<usize, usize> = HashMap::new();
        for &(a, b) in &self.pairs {
            *count.entry(a).or_default() += 1;
            *count.entry(b).or_default() += 1;
        }
        count.values().copied().max().unwrap_or(0)
    }
}

/// The base `s`-WSPD by recursive split-the-larger-node pairing.
pub fn base_wspd(qt: &Quadtree, s: f64) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for u in 0..qt.node_count() {
        let ch = &qt.node(u).children;
        for i in 0..ch.len() {
            for j in i + 1..ch.len() {
                stack.push((ch[i], ch[j]));
                while let Some((a, b)) = stack.pop() {
                    let (ca, cb) = (qt.node(a).cell, qt.node(b).cell);
                    if cells_separated(ca, cb, s) {
                        out.push((a, b));
                    } else if ca.depth <= cb.depth && !qt.node(a).is_leaf() {
                        for &c in qt.node(a).children.iter().rev() {
                            stack.push((c, b));
                        }
                    } else if !qt.node(b).is_leaf() {
                        for &c in qt.node(b).children.iter().rev() {
                            stack.push((a, c));
                        }
                    } else {
                        return Err(Error::Resolution);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Builds the compressed quadtree, a `2/eps`-WSPD on it, and the `1/eps`-WSPD of congruent
/// maximal ancestors `(A', B')`, inserting those ancestors into the tree.
///
/// Every inserted node represents all points of its cell, so base pairs that map to the
/// same `(A', B')` are merged into one pair; each point pair still has exactly one
/// covering pair because its maximal cell pair is unique.
pub fn build_semi_compressed(points: &[Point2], eps: f64) -> Result<(Quadtree, EuclideanWspd)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    let mut qt = Quadtree::build_with_guard(points, eps)?;
    let base = base_wspd(&qt, 2.0 / eps)?;
    let mut stats = LocatorStats::default();
    let mut seen = HashSet::with_capacity(base.len());
    let mut pairs = Vec::with_capacity(base.len());
    for (a, b) in base {
        let pa = qt.fixed(qt.points_of(a)[0]);
        let pb = qt.fixed(qt.points_of(b)[0]);
        let k = maximal_depth(pa, pb, eps, &mut stats)?;
        let (da, db) = (qt.node(a).cell.depth, qt.node(b).cell.depth);
        if k > da.min(db) {
            return Err(Error::Internal(format!("maximal depth {k} below base pair depths {da}/{db}")));
        }
        let a2 = qt.insert_ancestor(a, k);
        let b2 = qt.insert_ancestor(b, k);
        let key = (a2.min(b2), a2.max(b2));
        if seen.insert(key) {
            pairs.push(key);
        }
    }
    Ok((qt, EuclideanWspd { eps, pairs }))
}

/// Cover of a node by descendants of side at most `l(node)/n` (or leaves).
#[derive(Debug, Clone, PartialEq)]
pub struct SemiSizeCover {
    pub node: usize,
    pub cover: Vec<usize>,
    pub bound: usize,
}

/// Semi-size upper bound of a node's point set, using the cell diagonal as its diameter.
pub fn semi_size_upper(qt: &Quadtree, node: usize) -> SemiSizeCover {
    let n = qt.n_points() as u32;
    // side(Q) <= side(A)/n  <=>  depth(Q) >= depth(A) + log2(n)
    let need = qt.node(node).cell.depth as u32 + (32 - n.saturating_sub(1).leading_zeros());
    let mut cover = Vec::new();
    let mut stack = vec![node];
    while let Some(q) = stack.pop() {
        let nd = qt.node(q);
        if nd.is_leaf() || nd.cell.depth as u32 >= need {
            cover.push(q);
        } else {
            stack.extend(nd.children.iter().rev());
        }
    }
    let bound = cover.len();
    SemiSizeCover { node, cover, bound }
}

/// Sum of semi-size bounds over both sides of every pair (each distinct node evaluated once).
pub fn semi_weight(qt: &Quadtree, wspd: &EuclideanWspd) -> u64 {
    let mut memo: HashMap<usize, u64> = HashMap::new();
    let mut total = 0u64;
    for &(a, b) in &wspd.pairs {
        for x in [a, b] {
            total += *memo.entry(x).or_insert_with(|| semi_size_upper(qt, x).bound as u64);
        }
    }
    total
}

/// Upper bound on the semi-size of an arbitrary point set: occupied cells of a grid of
/// side `D/sqrt 2`, `D = diam/n`, each inside a disc of diameter `D`.
pub fn semi_size_of_points(points: &[Point2]) -> usize {
    let n = points.len();
    if n <= 1 {
        return n;
    }
    let diam = crate::geometry::point_set_diameter(points);
    if diam == 0.0 {
        return 1;
    }
    let g = diam / n as f64 / std::f64::consts::SQRT_2;
    let mut cells = HashSet::new();
    for p in points {
        cells.insert(((p.x / g).floor() as i64, (p.y / g).floor() as i64));
    }
    cells.len()
}

/// Uncompressed-quadtree WSPD, the reference path for point sets of bounded spread.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceWspd {
    pub eps: f64,
    pub pairs: Vec<(Vec<usize>, Vec<usize>)>,
    pub levels: usize,
    pub node_count: usize,
}

impl ReferenceWspd {
    /// Sum of `|A| + |B|` over pairs.
    pub fn weight(&self) -> usize {
        self.pairs.iter().map(|(a, b)| a.len() + b.len()).sum()
    }
}

/// Largest spread accepted by [`build_bounded_spread_wspd`].
pub const SPREAD_GUARD: f64 = 1099511627776.0; // 2^40

struct RefNode {
    rect: Rect,
    diam: f64,
    pts: Vec<usize>,
    children: Vec<usize>,
}

/// WSPD on the uncompressed quadtree, separation `1/eps`; single-point leaves have diameter 0.
pub fn build_bounded_spread_wspd(points: &[Point2], eps: f64) -> Result<ReferenceWspd> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    let n = points.len();
    if n < 2 {
        return Ok(ReferenceWspd { eps, pairs: Vec::new(), levels: 1, node_count: n });
    }
    let sp = crate::density::spread(points)?;
    if sp.phi > SPREAD_GUARD {
        return Err(Error::SpreadGuard(sp.phi));
    }
    let frame = QuadFrame::for_points(points)?;
    let mut nodes: Vec<RefNode> = Vec::new();
    let root_rect = Rect::square(frame.anchor, frame.side);
    nodes.push(RefNode { rect: root_rect, diam: root_rect.diagonal(), pts: (0..n).collect(), children: vec![] });
    let mut levels = 1;
    let mut stack = vec![(0usize, 1usize)];
    while let Some((u, lvl)) = stack.pop() {
        levels = levels.max(lvl);
        if nodes[u].pts.len() == 1 {
            let p = points[nodes[u].pts[0]];
            nodes[u].rect = Rect::new(p, p);
            nodes[u].diam = 0.0;
            continue;
        }
        let r = nodes[u].rect;
        let h = 0.5 * r.width();
        let mut quads: [Vec<usize>; 4] = Default::default();
        for &i in &nodes[u].pts {
            let p = points[i];
            let qx = usize::from(p.x >= r.min.x + h);
            let qy = usize::from(p.y >= r.min.y + h);
            quads[qy * 2 + qx].push(i);
        }
        for (q, pts) in quads.into_iter().enumerate() {
            if pts.is_empty() {
                continue;
            }
            let corner = Point2::new(r.min.x + h * (q % 2) as f64, r.min.y + h * (q / 2) as f64);
            let rect = Rect::square(corner, h);
            let id = nodes.len();
            nodes.push(RefNode { rect, diam: rect.diagonal(), pts, children: vec![] });
            nodes[u].children.push(id);
            stack.push((id, lvl + 1));
        }
    }
    let s = 1.0 / eps;
    let mut pairs = Vec::new();
    let mut work = Vec::new();
    for u in 0..nodes.len() {
        let ch = nodes[u].children.clone();
        for i in 0..ch.len() {
            for j in i + 1..ch.len() {
                work.push((ch[i], ch[j]));
                while let Some((a, b)) = work.pop() {
                    let (na, nb) = (&nodes[a], &nodes[b]);
                    if na.rect.distance(&nb.rect) >= s * na.diam.max(nb.diam) {
                        pairs.push((na.pts.clone(), nb.pts.clone()));
                    } else if na.diam >= nb.diam {
                        for &c in &na.children {
                            work.push((c, b));
                        }
                    } else {
                        for &c in &nb.children {
                            work.push((a, c));
                        }
                    }
                }
            }
        }
    }
    Ok(ReferenceWspd { eps, pairs, levels, node_count: nodes.len() })
}

/// Brute-force Euclidean checks on a WSPD given as explicit point sets. Returns
/// (missing point pairs, duplicated point pairs, separation violations).
pub fn check_point_wspd(points: &[Point2], pairs: &[(Vec<usize>, Vec<usize>)], eps: f64) -> (usize, usize, usize) {
    let n = points.len();
    let mut cnt = vec![0u8; n * n];
    let mut bad_sep = 0;
    for (a, b) in pairs {
        for &i in a {
            for &j in b {
                let (x, y) = (i.min(j), i.max(j));
                cnt[x * n + y] = cnt[x * n + y].saturating_add(1);
            }
        }
        let diam = |s: &[usize]| {
            let mut d = 0.0f64;
            for x in 0..s.len() {
                for y in x + 1..s.len() {
                    d = d.max(euclidean_distance(points[s[x]], points[s[y]]));
                }
            }
            d
        };
        let mut gap = f64::INFINITY;
        for &i in a {
            for &j in b {
                gap = gap.min(euclidean_distance(points[i], points[j]));
            }
        }
        if diam(a).max(diam(b)) / eps > gap * (1.0 + 1e-12) {
            bad_sep += 1;
        }
    }
    let (mut missing, mut dup) = (0, 0);
    for x in 0..n {
        for y in x + 1..n {
            match cnt[x * n + y] {
                0 => missing += 1,
                1 => {}
                _ => dup += 1,
            }
        }
    }
    (missing, dup, bad_sep)
}

/// Explicit point sets of a WSPD's pairs.
pub fn materialize_pairs(qt: &Quadtree, wspd: &EuclideanWspd) -> Vec<(Vec<usize>, Vec<usize>)> {
    wspd.pairs
        .iter()
        .map(|&(a, b)| (qt.points_of(a).to_vec(), qt.points_of(b).to_vec()))
        .collect()
}
