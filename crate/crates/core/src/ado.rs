//! The `(1 + eps)`-approximate distance oracle: a graph WSPD at separation `4/eps` whose
//! pairs each store the exact distance between their centers, looked up through the
//! membership oracle.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{ExactOracle, ExactStats};
use crate::graph::EmbeddedGraph;
use crate::graph_wspd::{build_graph_wspd, GraphWspd};
use crate::membership::MembershipOracle;

/// Approximate distance oracle for a connected graph.
#[derive(Debug, Clone)]
pub struct Ado {
    pub eps: f64,
    n: usize,
    /// `None` for a single vertex.
    membership: Option<MembershipOracle>,
    /// Center distance per graph pair id.
    table: Vec<f64>,
}

/// Build by-products worth reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdoBuildInfo {
    pub exact: ExactStats,
    /// Largest number of separator vertices scanned by one table query.
    pub max_scanned: u64,
}

/// Separation parameter of the underlying graph WSPD.
pub fn wspd_eps(eps: f64) -> f64 {
    eps / 4.0
}

/// Builds the oracle. `lambda` is the density estimate used as the separator size target.
pub fn build_ado(g: &EmbeddedGraph, eps: f64, lambda: f64, seed: u64) -> Result<(Ado, AdoBuildInfo)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::EpsilonOutOfRange(eps));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let exact = ExactOracle::build(g, lambda, seed)?;
    let mut info = AdoBuildInfo { exact: exact.stats(), max_scanned: 0 };
    if g.n() == 1 {
        return Ok((Ado { eps, n: 1, membership: None, table: vec![] }, info));
    }
    let wspd = build_graph_wspd(g, wspd_eps(eps))?;
    let (table, max_scanned) = fill_table(&wspd, &exact)?;
    info.max_scanned = max_scanned;
    let membership = MembershipOracle::new(wspd)?;
    Ok((Ado { eps, n: g.n(), membership: Some(membership), table }, info))
}

fn fill_table(w: &GraphWspd, exact: &ExactOracle) -> Result<(Vec<f64>, u64)> {
    let rows: Vec<Result<(Vec<f64>, u64)>> = w
        .euclidean
        .pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut out = Vec::with_capacity(w.clusters(a).len() * w.clusters(b).len());
            let mut worst = 0;
            for &s in w.clusters(a) {
                for &t in w.clusters(b) {
                    let mut scanned = 0;
                    out.push(exact.query_counted(s as usize, t as usize, &mut scanned)?);
                    worst = worst.max(scanned);
                }
            }
            Ok((out, worst))
        })
        .collect();
    let mut table = Vec::with_capacity(w.pair_count() as usize);
    let mut worst = 0;
    for r in rows {
        let (row, s) = r?;
        table.extend(row);
        worst = worst.max(s);
    }
    Ok((table, worst))
}

impl Ado {
    /// Reassembles an oracle from its parts; the table must have one entry per pair.
    pub fn from_parts(eps: f64, n: usize, membership: Option<MembershipOracle>, table: Vec<f64>) -> Result<Ado> {
        let pairs = membership.as_ref().map_or(0, |m| m.wspd.pair_count());
        if pairs != table.len() as u64 || (membership.is_none() && n != 1) {
            return Err(Error::Format("table does not match the pair set".into()));
        }
        Ok(Ado { eps, n, membership, table })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn membership(&self) -> Option<&MembershipOracle> {
        self.membership.as_ref()
    }

    pub fn wspd(&self) -> Option<&GraphWspd> {
        self.membership.as_ref().map(|m| &m.wspd)
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// `(1 + eps)`-approximate `d_G(u, v)`; `0` when `u == v`.
    pub fn query(&self, u: usize, v: usize) -> Result<f64> {
        self.query_counted(u, v, &mut 0)
    }

    /// As [`Ado::query`], adding primitive steps to `ops`.
    pub fn query_counted(&self, u: usize, v: usize, ops: &mut u64) -> Result<f64> {
        for x in [u, v] {
            if x >= self.n {
                return Err(Error::InvalidVertex(x));
            }
        }
        if u == v {
            return Ok(0.0);
        }
        let m = self.membership.as_ref().ok_or_else(|| Error::Internal("missing membership oracle".into()))?;
        let r = m.membership_counted(u, v, ops)?;
        *ops += 1;
        Ok(self.table[r.pair_id as usize])
    }

    /// Entries in the table plus the membership structure, in words.
    pub fn size_words(&self) -> usize {
        self.table.len() + self.membership.as_ref().map_or(0, |m| m.size_words())
    }

    /// Upper estimate of the graph diameter: the largest stored distance plus the covering
    /// radius `l/2` of each non-singleton handle.
    pub fn approx_diameter(&self) -> f64 {
        let Some(m) = &self.membership else { return 0.0 };
        let w = &m.wspd;
        let rad = |cell: usize, size: u32| if size <= 1 { 0.0 } else { 0.5 * w.quadtree.side(cell) };
        let mut best = 0.0f64;
        let mut id = 0usize;
        for &(a, b) in &w.euclidean.pairs {
            for &sa in w.cluster_sizes(a) {
                for &sb in w.cluster_sizes(b) {
                    best = best.max(self.table[id] + rad(a, sa) + rad(b, sb));
                    id += 1;
                }
            }
        }
        best
    }
}

/// Oracles for each connected component; cross-component queries answer `None`.
#[derive(Debug, Clone)]
pub struct AdoSet {
    pub eps: f64,
    component: Vec<u32>,
    local: Vec<u32>,
    members: Vec<Vec<usize>>,
    oracles: Vec<Ado>,
}

impl AdoSet {
    pub fn build(g: &EmbeddedGraph, eps: f64, lambda: f64, seed: u64) -> Result<(AdoSet, Vec<AdoBuildInfo>)> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::EpsilonOutOfRange(eps));
        }
        let labels = g.components();
        let k = labels.iter().copied().max().map_or(0, |c| c + 1);
        let mut members = vec![Vec::new(); k];
        for (v, &c) in labels.iter().enumerate() {
            members[c].push(v);
        }
        let mut oracles = Vec::with_capacity(k);
        let mut infos = Vec::with_capacity(k);
        for (c, vs) in members.iter().enumerate() {
            let sub = g.induced(vs)?;
            let (ado, info) = build_ado(&sub, eps, lambda, seed.wrapping_add(c as u64))?;
            oracles.push(ado);
            infos.push(info);
        }
        Ok((AdoSet::from_parts(eps, members, oracles)?, infos))
    }

    /// Reassembles from per-component vertex lists (sorted) and their oracles.
    pub fn from_parts(eps: f64, members: Vec<Vec<usize>>, oracles: Vec<Ado>) -> Result<AdoSet> {
        let n: usize = members.iter().map(Vec::len).sum();
        if members.len() != oracles.len() {
            return Err(Error::Format("component count mismatch".into()));
        }
        let mut component = vec![u32::MAX; n];
        let mut local = vec![0u32; n];
        for (c, vs) in members.iter().enumerate() {
            if oracles[c].n() != vs.len() {
                return Err(Error::Format("component size mismatch".into()));
            }
            for (i, &v) in vs.iter().enumerate() {
                if v >= n || component[v] != u32::MAX {
                    return Err(Error::Format("bad component vertex list".into()));
                }
                component[v] = c as u32;
                local[v] = i as u32;
            }
        }
        Ok(AdoSet { eps, component, local, members, oracles })
    }

    pub fn n(&self) -> usize {
        self.component.len()
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn oracles(&self) -> &[Ado] {
        &self.oracles
    }

    /// `None` when `u` and `v` lie in different components.
    pub fn query(&self, u: usize, v: usize) -> Result<Option<f64>> {
        self.query_counted(u, v, &mut 0)
    }

    pub fn query_counted(&self, u: usize, v: usize, ops: &mut u64) -> Result<Option<f64>> {
        for x in [u, v] {
            if x >= self.n() {
                return Err(Error::InvalidVertex(x));
            }
        }
        let (cu, cv) = (self.component[u], self.component[v]);
        if cu != cv {
            return Ok(None);
        }
        let o = &self.oracles[cu as usize];
        o.query_counted(self.local[u] as usize, self.local[v] as usize, ops).map(Some)
    }

    pub fn size_words(&self) -> usize {
        self.oracles.iter().map(Ado::size_words).sum::<usize>() + 2 * self.n()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GraphKind};
    use crate::geometry::Point2;
    use crate::graph::all_pairs_shortest_paths;

    fn sandwich(kind: GraphKind, eps: f64) -> f64 {
        let g = generate(&kind).unwrap();
        let (ado, _) = build_ado(&g, eps, 4.0, 3).unwrap();
        let d = all_pairs_shortest_paths(&g).unwrap();
        let mut worst = 1.0f64;
        for u in 0..g.n() {
            for v in 0..g.n() {
                let q = ado.query(u, v).unwrap();
                if u == v {
                    assert_eq!(q, 0.0);
                    continue;
                }
                let r = q / d.get(u, v);
                assert!(r <= 1.0 + eps && r >= 1.0 / (1.0 + eps), "{kind:?} {u} {v} {r}");
                worst = worst.max(r).max(1.0 / r);
            }
        }
        let diam = (0..g.n()).flat_map(|u| d.row(u).to_vec()).fold(0.0, f64::max);
        let a = ado.approx_diameter();
        assert!(a >= diam - 1e-9 && a <= (1.0 + eps) * diam, "{kind:?} diameter {a} vs {diam}");
        worst
    }

    #[test]
    fn two_vertices() {
        let g = EmbeddedGraph::new(vec![Point2::new(0.0, 0.0), Point2::new(3.0, 4.0)], vec![(0, 1)]).unwrap();
        let (ado, _) = build_ado(&g, 0.5, 1.0, 1).unwrap();
        assert_eq!(ado.table(), &[5.0]);
        assert_eq!(ado.query(1, 0).unwrap(), 5.0);
        assert_eq!(ado.approx_diameter(), 5.0);
    }

    #[test]
    fn table_matches_centers() {
        let g = generate(&GraphKind::Grid { k: 5 }).unwrap();
        let (ado, _) = build_ado(&g, 0.5, 4.0, 1).unwrap();
        let d = all_pairs_shortest_paths(&g).unwrap();
        let w = ado.wspd().unwrap();
        assert_eq!(ado.table().len() as u64, w.pair_count());
        for (id, p) in w.pairs().enumerate() {
            assert_eq!(ado.table()[id], d.get(p.c.center, p.d.center));
        }
    }

    #[test]
    fn guarantees() {
        sandwich(GraphKind::Grid { k: 7 }, 0.5);
        sandwich(GraphKind::Path { n: 40 }, 0.5);
        sandwich(GraphKind::Grid { k: 6 }, 0.9);
        sandwich(GraphKind::Comb { k: 7 }, 0.25);
        sandwich(GraphKind::PerturbedGrid { k: 12, noise: 0.4, seed: 1 }, 0.5);
        sandwich(GraphKind::Selg { k: 12, ell: 2.0, seed: 4 }, 0.9);
    }

    #[test]
    fn components_and_rejects() {
        let g = generate(&GraphKind::Path { n: 3 }).unwrap();
        assert!(matches!(build_ado(&g, 1.0, 1.0, 1), Err(Error::EpsilonOutOfRange(_))));
        let pts = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(5.0, 5.0), Point2::new(9.0, 9.0), Point2::new(9.0, 10.0)];
        let g = EmbeddedGraph::new(pts, vec![(0, 1), (3, 4)]).unwrap();
        assert!(matches!(build_ado(&g, 0.5, 1.0, 1), Err(Error::Disconnected)));
        let (set, _) = AdoSet::build(&g, 0.5, 1.0, 1).unwrap();
        assert_eq!(set.query(0, 1).unwrap(), Some(1.0));
        assert_eq!(set.query(4, 3).unwrap(), Some(1.0));
        assert_eq!(set.query(2, 2).unwrap(), Some(0.0));
        assert_eq!(set.query(0, 4).unwrap(), None);
        assert!(set.query(0, 5).is_err());
    }
}
