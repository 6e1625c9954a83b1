//! Constant-time lookup of the graph WSPD pair that separates two vertices.

use rustc_hash::FxHashMap;

use crate::ancestry::HeavyPathIndex;
use crate::error::{Error, Result};
use crate::graph_wspd::{depth_level, ClusterHandle, GraphPair, GraphWspd};
use crate::net_tree::{semi_compress, NetTree};
use crate::quadtree::{maximal_depth, Cell, LocatorStats};

/// A located pair. `pair.c` holds the first query vertex, `pair.d` the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Membership {
    pub pair_id: u64,
    pub pair: GraphPair,
}

#[derive(Debug, Clone)]
pub struct MembershipOracle {
    pub wspd: GraphWspd,
    /// Net-tree with a node at level exactly `i(A)` for every cluster center of every cell.
    pub semi: NetTree,
    index: HeavyPathIndex,
    euclid_of: FxHashMap<(u32, u32), u32>,
}

impl MembershipOracle {
    pub fn new(wspd: GraphWspd) -> Result<MembershipOracle> {
        let qt = &wspd.quadtree;
        let mut seen = vec![false; qt.node_count()];
        let mut aug = Vec::new();
        for &(a, b) in &wspd.euclidean.pairs {
            for x in [a, b] {
                if !std::mem::replace(&mut seen[x], true) {
                    let i = wspd.level_of_cell(x);
                    aug.extend(wspd.clusters(x).iter().map(|&s| (s as usize, i)));
                }
            }
        }
        let semi = semi_compress(&wspd.net, &aug)?;
        MembershipOracle::from_parts(wspd, semi)
    }

    /// Assembles the oracle from a graph WSPD and its semi-compressed net-tree, checking
    /// that every cluster center has a copy at its cell's level.
    pub fn from_parts(wspd: GraphWspd, semi: NetTree) -> Result<MembershipOracle> {
        if semi.n_vertices() != wspd.net.n_vertices() {
            return Err(Error::Format("net-tree vertex count mismatch".into()));
        }
        for x in 0..wspd.quadtree.node_count() {
            let i = wspd.level_of_cell(x);
            for &s in wspd.clusters(x) {
                if !semi.copies(s as usize).iter().any(|&c| semi.node(c).level == i) {
                    return Err(Error::NotACenter { vertex: s as usize, level: i });
                }
            }
        }
        let parent: Vec<Option<usize>> = semi.nodes().iter().map(|nd| nd.parent).collect();
        let weight: Vec<i32> = semi.nodes().iter().map(|nd| nd.level).collect();
        let index = HeavyPathIndex::new(&parent, &weight)?;
        let mut euclid_of = FxHashMap::with_capacity_and_hasher(wspd.euclidean.pairs.len(), Default::default());
        for (e, &(a, b)) in wspd.euclidean.pairs.iter().enumerate() {
            if euclid_of.insert((a as u32, b as u32), e as u32).is_some() {
                return Err(Error::Internal(format!("duplicate euclidean pair ({a}, {b})")));
            }
        }
        Ok(MembershipOracle { wspd, semi, index, euclid_of })
    }

    pub fn n(&self) -> usize {
        self.semi.n_vertices()
    }

    /// The unique pair with `a` in its first handle and `b` in its second.
    pub fn membership(&self, a: usize, b: usize) -> Result<Membership> {
        self.membership_counted(a, b, &mut 0)
    }

    /// As [`MembershipOracle::membership`], adding primitive steps to `ops`.
    pub fn membership_counted(&self, a: usize, b: usize, ops: &mut u64) -> Result<Membership> {
        let n = self.n();
        for v in [a, b] {
            if v >= n {
                return Err(Error::InvalidVertex(v));
            }
        }
        if a == b {
            return Err(Error::SameVertex);
        }
        let qt = &self.wspd.quadtree;
        let (fa, fb) = (qt.fixed(a), qt.fixed(b));
        let mut stats = LocatorStats::default();
        let k = maximal_depth(fa, fb, self.wspd.eps, &mut stats)?;
        *ops += stats.checks;
        let na = qt.node_of_cell(&Cell::containing(fa.0, fa.1, k));
        let nb = qt.node_of_cell(&Cell::containing(fb.0, fb.1, k));
        let (na, nb) = na.zip(nb).ok_or_else(|| Error::Internal(format!("maximal cells of ({a}, {b}) missing")))?;
        *ops += 2;
        let i = depth_level(k);
        let center = |v: usize, ops: &mut u64| {
            self.index
                .exact_weight_ancestor_counted(self.semi.deepest(v), i, ops)
                .map(|x| self.semi.node(x).vertex)
                .ok_or_else(|| Error::Internal(format!("vertex {v} has no level-{i} ancestor")))
        };
        let s = center(a, ops)?;
        let t = center(b, ops)?;
        let (lo, hi, slo, shi) = if na < nb { (na, nb, s, t) } else { (nb, na, t, s) };
        let e = *self
            .euclid_of
            .get(&(lo as u32, hi as u32))
            .ok_or_else(|| Error::Internal(format!("cells ({lo}, {hi}) are not a pair")))? as usize;
        *ops += 1;
        let find = |cell: usize, c: usize, ops: &mut u64| {
            let cl = self.wspd.clusters(cell);
            *ops += (usize::BITS - cl.len().leading_zeros()) as u64;
            cl.binary_search(&(c as u32)).map_err(|_| Error::Internal(format!("center {c} not listed in node {cell}")))
        };
        let si = find(lo, slo, ops)?;
        let ti = find(hi, shi, ops)?;
        let pair_id = self.wspd.pair_id(e, si, ti);
        let pair = GraphPair { c: ClusterHandle { center: s, cell: na }, d: ClusterHandle { center: t, cell: nb } };
        Ok(Membership { pair_id, pair })
    }

    /// Structure size in stored words: semi-compressed nodes, ancestor index, pair table.
    pub fn size_words(&self) -> usize {
        3 * self.semi.node_count() + self.index.size_words() + 2 * self.euclid_of.len()
    }

    /// First node of the semi-compressed tree at or above `a`'s deepest copy with level
    /// at most `i`, found by walking parent pointers.
    pub fn walk_center(&self, a: usize, i: i32) -> Option<usize> {
        self.semi.center_of(a, i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GraphKind};
    use crate::graph_wspd::build_graph_wspd;

    fn check(kind: GraphKind, eps: f64) {
        let g = generate(&kind).unwrap();
        let w = build_graph_wspd(&g, eps).unwrap();
        let m = MembershipOracle::new(w).unwrap();
        let w = &m.wspd;
        // every (vertex, cell) pair of the augmentation is reachable by the exact ancestor
        for &(a, b) in &w.euclidean.pairs {
            for x in [a, b] {
                let i = w.level_of_cell(x);
                for &p in w.quadtree.points_of(x) {
                    let exact = m.index.exact_weight_ancestor(m.semi.deepest(p), i).map(|u| m.semi.node(u).vertex);
                    assert_eq!(exact, m.walk_center(p, i));
                    assert_eq!(exact, w.net.center_of(p, i));
                }
            }
        }
        // pair id -> members, then membership of each ordered member pair decodes back
        let n = g.n();
        let mut owner = vec![u64::MAX; n * n];
        for id in 0..w.pair_count() {
            let p = w.pair(id);
            let (c, d) = (w.materialize(&p.c), w.materialize(&p.d));
            for &x in &c {
                for &y in &d {
                    assert_eq!(owner[x * n + y], u64::MAX);
                    owner[x * n + y] = id;
                    owner[y * n + x] = id;
                }
            }
        }
        let mut max_ops = 0;
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    assert!(matches!(m.membership(a, b), Err(Error::SameVertex)));
                    continue;
                }
                let mut ops = 0;
                let r = m.membership_counted(a, b, &mut ops).unwrap();
                max_ops = max_ops.max(ops);
                assert_eq!(r.pair_id, owner[a * n + b], "{a} {b}");
                assert!(w.materialize(&r.pair.c).contains(&a));
                assert!(w.materialize(&r.pair.d).contains(&b));
            }
        }
        assert!(max_ops < 80, "{max_ops}");
    }

    #[test]
    fn exhaustive_small() {
        check(GraphKind::Path { n: 60 }, 0.5);
        check(GraphKind::Grid { k: 9 }, 0.5);
        check(GraphKind::Comb { k: 8 }, 0.3);
        check(GraphKind::PerturbedGrid { k: 10, noise: 0.3, seed: 5 }, 0.5);
        check(GraphKind::Selg { k: 10, ell: 2.0, seed: 3 }, 0.25);
    }

    #[test]
    fn rejects() {
        let g = generate(&GraphKind::Path { n: 4 }).unwrap();
        let m = MembershipOracle::new(build_graph_wspd(&g, 0.5).unwrap()).unwrap();
        assert!(matches!(m.membership(0, 9), Err(Error::InvalidVertex(9))));
        assert!(matches!(m.membership(2, 2), Err(Error::SameVertex)));
    }
}
