//! Binary files for WSPDs and distance oracles, and atomic file writes.
//!
//! A file is a manifest followed by tagged sections. Every section is an 8-byte tag
//! (ASCII, zero padded), a little-endian `u64` payload length and the payload. Floats are
//! stored as their IEEE bits, so a load reproduces every value exactly.

use std::collections::{BTreeMap, HashMap};
use std::io::{Cursor, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};

use crate::ado::{Ado, AdoSet};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::graph_wspd::{depth_level, ClusterHandle, GraphPair, GraphWspd};
use crate::membership::MembershipOracle;
use crate::net_tree::{NetTree, TreeMode};
use crate::quadtree::{Cell, EuclideanWspd, NodeKind, QuadFrame, QuadNode, Quadtree};

pub const MAGIC: &[u8; 8] = b"LODENSE\0";
pub const FORMAT_VERSION: u32 = 1;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Wspd = 1,
    Oracle = 2,
}

/// File header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manifest {
    pub kind: FileKind,
    pub n: u64,
    pub eps: f64,
    pub lambda_hint: f64,
    pub seed: u64,
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

fn format_err(msg: &str) -> Error {
    Error::Format(msg.to_string())
}

fn tag8(tag: &str) -> [u8; 8] {
    let mut t = [0u8; 8];
    t[..tag.len()].copy_from_slice(tag.as_bytes());
    t
}

fn put_section(out: &mut Vec<u8>, tag: &str, payload: &[u8]) {
    out.extend_from_slice(&tag8(tag));
    out.write_u64::<LE>(payload.len() as u64).expect("vec write");
    out.extend_from_slice(payload);
}

fn take_section<'a>(cur: &mut Cursor<&'a [u8]>, tag: &str) -> Result<Cursor<&'a [u8]>> {
    let mut t = [0u8; 8];
    cur.read_exact(&mut t).map_err(|_| format_err("truncated section header"))?;
    if t != tag8(tag) {
        return Err(Error::Format(format!("expected section {tag}")));
    }
    let len = cur.read_u64::<LE>().map_err(|_| format_err("truncated section header"))? as usize;
    let start = cur.position() as usize;
    let data: &'a [u8] = cur.get_ref();
    let end = start.checked_add(len).filter(|&e| e <= data.len()).ok_or_else(|| format_err("truncated section"))?;
    cur.set_position(end as u64);
    Ok(Cursor::new(&data[start..end]))
}

// Small read helpers mapping I/O errors to format errors.
trait Rd {
    fn u8_(&mut self) -> Result<u8>;
    fn u32_(&mut self) -> Result<u32>;
    fn i32_(&mut self) -> Result<i32>;
    fn u64_(&mut self) -> Result<u64>;
    fn f64_(&mut self) -> Result<f64>;
    fn len_(&mut self, cap: usize) -> Result<usize>;
}

impl Rd for Cursor<&[u8]> {
    fn u8_(&mut self) -> Result<u8> {
        self.read_u8().map_err(|_| format_err("truncated payload"))
    }
    fn u32_(&mut self) -> Result<u32> {
        self.read_u32::<LE>().map_err(|_| format_err("truncated payload"))
    }
    fn i32_(&mut self) -> Result<i32> {
        self.read_i32::<LE>().map_err(|_| format_err("truncated payload"))
    }
    fn u64_(&mut self) -> Result<u64> {
        self.read_u64::<LE>().map_err(|_| format_err("truncated payload"))
    }
    fn f64_(&mut self) -> Result<f64> {
        self.read_u64::<LE>().map(f64::from_bits).map_err(|_| format_err("truncated payload"))
    }
    // a count, rejected when the remaining bytes cannot hold `cap`-byte records
    fn len_(&mut self, cap: usize) -> Result<usize> {
        let k = self.u64_()? as usize;
        let left = self.get_ref().len() - self.position() as usize;
        if k.checked_mul(cap).map_or(true, |b| b > left) {
            return Err(format_err("count exceeds payload"));
        }
        Ok(k)
    }
}

fn w32(out: &mut Vec<u8>, v: u32) {
    out.write_u32::<LE>(v).expect("vec write");
}

fn w64(out: &mut Vec<u8>, v: u64) {
    out.write_u64::<LE>(v).expect("vec write");
}

fn wf(out: &mut Vec<u8>, v: f64) {
    out.write_u64::<LE>(v.to_bits()).expect("vec write");
}

fn write_manifest(out: &mut Vec<u8>, m: &Manifest) {
    out.extend_from_slice(MAGIC);
    w32(out, FORMAT_VERSION);
    w32(out, m.kind as u32);
    w64(out, m.n);
    wf(out, m.eps);
    wf(out, m.lambda_hint);
    w64(out, m.seed);
}

/// Reads and validates the manifest at the start of `bytes`.
pub fn read_manifest(cur: &mut Cursor<&[u8]>) -> Result<Manifest> {
    let mut magic = [0u8; 8];
    cur.read_exact(&mut magic).map_err(|_| format_err("file too short"))?;
    if &magic != MAGIC {
        return Err(format_err("not a lodense file"));
    }
    let version = cur.u32_()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported format version {version}")));
    }
    let kind = match cur.u32_()? {
        1 => FileKind::Wspd,
        2 => FileKind::Oracle,
        k => return Err(Error::Format(format!("unknown file kind {k}"))),
    };
    Ok(Manifest { kind, n: cur.u64_()?, eps: cur.f64_()?, lambda_hint: cur.f64_()?, seed: cur.u64_()? })
}

fn encode_quadtree(qt: &Quadtree) -> Vec<u8> {
    let mut o = Vec::new();
    wf(&mut o, qt.frame.anchor.x);
    wf(&mut o, qt.frame.anchor.y);
    wf(&mut o, qt.frame.side);
    w64(&mut o, qt.n_points() as u64);
    for p in qt.points() {
        wf(&mut o, p.x);
        wf(&mut o, p.y);
    }
    for &i in qt.order() {
        w32(&mut o, i as u32);
    }
    w64(&mut o, qt.node_count() as u64);
    for nd in qt.nodes() {
        o.push(nd.cell.depth);
        w64(&mut o, nd.cell.ix);
        w64(&mut o, nd.cell.iy);
        w32(&mut o, nd.parent.map_or(NONE, |p| p as u32));
        w32(&mut o, nd.start as u32);
        w32(&mut o, nd.end as u32);
        o.push(match nd.kind {
            NodeKind::Regular => 0,
            NodeKind::Inserted => 1,
        });
        w64(&mut o, nd.children.len() as u64);
        for &c in &nd.children {
            w32(&mut o, c as u32);
        }
    }
    o
}

fn decode_quadtree(mut c: Cursor<&[u8]>) -> Result<Quadtree> {
    let anchor = Point2::new(c.f64_()?, c.f64_()?);
    let side = c.f64_()?;
    let n = c.len_(20)?;
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        points.push(Point2::new(c.f64_()?, c.f64_()?));
    }
    let order = (0..n).map(|_| c.u32_().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
    let count = c.len_(38)?;
    let mut nodes = Vec::with_capacity(count);
    for _ in 0..count {
        let depth = c.u8_()?;
        if depth > crate::quadtree::MAX_DEPTH {
            return Err(format_err("cell depth out of range"));
        }
        let cell = Cell { depth, ix: c.u64_()?, iy: c.u64_()? };
        let parent = match c.u32_()? {
            NONE => None,
            p => Some(p as usize),
        };
        let (start, end) = (c.u32_()? as usize, c.u32_()? as usize);
        let kind = match c.u8_()? {
            0 => NodeKind::Regular,
            1 => NodeKind::Inserted,
            _ => return Err(format_err("bad node kind")),
        };
        let k = c.len_(4)?;
        let children = (0..k).map(|_| c.u32_().map(|v| v as usize)).collect::<Result<Vec<_>>>()?;
        nodes.push(QuadNode { cell, parent, children, start, end, kind });
    }
    Quadtree::from_parts(QuadFrame { anchor, side }, points, order, nodes)
}

fn encode_net(t: &NetTree) -> Vec<u8> {
    let mut o = Vec::new();
    wf(&mut o, t.delta);
    o.push(match t.mode {
        TreeMode::Compressed => 0,
        TreeMode::SemiCompressed => 1,
    });
    w64(&mut o, t.n_vertices() as u64);
    w64(&mut o, t.node_count() as u64);
    for nd in t.nodes() {
        w32(&mut o, nd.vertex as u32);
        o.write_i32::<LE>(nd.level).expect("vec write");
        w32(&mut o, nd.parent.map_or(NONE, |p| p as u32));
    }
    o
}

fn decode_net(mut c: Cursor<&[u8]>) -> Result<NetTree> {
    let delta = c.f64_()?;
    let mode = match c.u8_()? {
        0 => TreeMode::Compressed,
        1 => TreeMode::SemiCompressed,
        _ => return Err(format_err("bad net-tree mode")),
    };
    let n = c.u64_()? as usize;
    let count = c.len_(12)?;
    let mut raw = Vec::with_capacity(count);
    for _ in 0..count {
        let v = c.u32_()? as usize;
        let level = c.i32_()?;
        let parent = match c.u32_()? {
            NONE => None,
            p => Some(p as usize),
        };
        raw.push((v, level, parent));
    }
    if mode == TreeMode::Compressed && raw.iter().enumerate().any(|(id, r)| r.0 != id) {
        return Err(format_err("compressed net-tree ids must equal vertices"));
    }
    NetTree::from_nodes(delta, mode, n, raw)
}

fn encode_pairs(eps: f64, delta: f64, euclid: &[(usize, usize)], pairs: &mut dyn Iterator<Item = GraphPair>, count: u64) -> Vec<u8> {
    let mut o = Vec::new();
    wf(&mut o, eps);
    wf(&mut o, delta);
    w64(&mut o, euclid.len() as u64);
    for &(a, b) in euclid {
        w32(&mut o, a as u32);
        w32(&mut o, b as u32);
    }
    w64(&mut o, count);
    for p in pairs {
        for x in [p.c.center, p.c.cell, p.d.center, p.d.cell] {
            w32(&mut o, x as u32);
        }
    }
    o
}

struct PairsSection {
    eps: f64,
    delta: f64,
    euclid: Vec<(usize, usize)>,
    pairs: Vec<GraphPair>,
}

fn decode_pairs(mut c: Cursor<&[u8]>) -> Result<PairsSection> {
    let eps = c.f64_()?;
    let delta = c.f64_()?;
    let k = c.len_(8)?;
    let euclid = (0..k).map(|_| Ok((c.u32_()? as usize, c.u32_()? as usize))).collect::<Result<Vec<_>>>()?;
    let m = c.len_(16)?;
    let mut pairs = Vec::with_capacity(m);
    for _ in 0..m {
        let (s, a, t, b) = (c.u32_()? as usize, c.u32_()? as usize, c.u32_()? as usize, c.u32_()? as usize);
        pairs.push(GraphPair { c: ClusterHandle { center: s, cell: a }, d: ClusterHandle { center: t, cell: b } });
    }
    Ok(PairsSection { eps, delta, euclid, pairs })
}

fn check_handles(qt: &Quadtree, net: &NetTree, pairs: &[GraphPair]) -> Result<()> {
    for p in pairs {
        for h in [p.c, p.d] {
            if h.cell >= qt.node_count() || h.center >= net.n_vertices() {
                return Err(format_err("pair handle out of range"));
            }
        }
    }
    Ok(())
}

/// Rebuilds the implicit pair structure from an explicit pair list, which must list, for
/// each Euclidean pair in order, the full product of its cells' cluster lists.
fn assemble_wspd(eps: f64, qt: Quadtree, net: NetTree, euclid: Vec<(usize, usize)>, pairs: &[GraphPair]) -> Result<GraphWspd> {
    let bad = || format_err("pair list is not a product of cell cluster lists");
    let mut lists: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut k = 0;
    for &(a, b) in &euclid {
        if a >= qt.node_count() || b >= qt.node_count() || a >= b {
            return Err(format_err("bad euclidean pair"));
        }
        let start = k;
        while k < pairs.len() && pairs[k].c.cell == a && pairs[k].d.cell == b {
            k += 1;
        }
        let block = &pairs[start..k];
        let mut ca: Vec<usize> = block.iter().map(|p| p.c.center).collect();
        ca.dedup();
        let cb: Vec<usize> = block.iter().take_while(|p| p.c.center == block[0].c.center).map(|p| p.d.center).collect();
        if block.is_empty() || ca.len() * cb.len() != block.len() || !ca.windows(2).all(|w| w[0] < w[1]) || !cb.windows(2).all(|w| w[0] < w[1]) {
            return Err(bad());
        }
        for (j, p) in block.iter().enumerate() {
            if p.c.center != ca[j / cb.len()] || p.d.center != cb[j % cb.len()] {
                return Err(bad());
            }
        }
        for (cell, list) in [(a, ca), (b, cb)] {
            match lists.get(&cell) {
                Some(old) if *old != list => return Err(bad()),
                Some(_) => {}
                None => {
                    lists.insert(cell, list);
                }
            }
        }
    }
    if k != pairs.len() {
        return Err(bad());
    }
    let mut clusters: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for (cell, list) in lists {
        let i = depth_level(qt.node(cell).cell.depth);
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &p in qt.points_of(cell) {
            let c = net.center_of(p, i).ok_or_else(|| format_err("cell level above the net-tree root"))?;
            *counts.entry(c).or_default() += 1;
        }
        if counts.len() != list.len() || !counts.keys().eq(list.iter()) {
            return Err(format_err("cluster list does not match the net-tree"));
        }
        clusters.insert(cell, counts.into_iter().collect());
    }
    Ok(GraphWspd::from_parts(eps, qt, EuclideanWspd { eps, pairs: euclid }, net, &clusters))
}

/// A graph WSPD with an explicit pair list, as stored by `build-wspd`. The pair list may be
/// edited before saving; [`WspdFile::to_graph_wspd`] checks that it is still well formed.
#[derive(Debug, Clone)]
pub struct WspdFile {
    pub manifest: Manifest,
    pub quadtree: Quadtree,
    pub net: NetTree,
    pub euclidean: Vec<(usize, usize)>,
    pub pairs: Vec<GraphPair>,
}

impl WspdFile {
    pub fn from_wspd(w: &GraphWspd, lambda_hint: f64, seed: u64) -> WspdFile {
        WspdFile {
            manifest: Manifest { kind: FileKind::Wspd, n: w.net.n_vertices() as u64, eps: w.eps, lambda_hint, seed },
            quadtree: w.quadtree.clone(),
            net: w.net.clone(),
            euclidean: w.euclidean.pairs.clone(),
            pairs: w.pairs().collect(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        write_manifest(&mut out, &self.manifest);
        put_section(&mut out, "QTREE1", &encode_quadtree(&self.quadtree));
        put_section(&mut out, "NETT1", &encode_net(&self.net));
        let payload = encode_pairs(self.manifest.eps, self.quadtree.frame.side, &self.euclidean, &mut self.pairs.iter().copied(), self.pairs.len() as u64);
        put_section(&mut out, "GWSPD1", &payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<WspdFile> {
        let mut cur = Cursor::new(bytes);
        let manifest = read_manifest(&mut cur)?;
        if manifest.kind != FileKind::Wspd {
            return Err(format_err("not a WSPD file"));
        }
        let quadtree = decode_quadtree(take_section(&mut cur, "QTREE1")?)?;
        let net = decode_net(take_section(&mut cur, "NETT1")?)?;
        let ps = decode_pairs(take_section(&mut cur, "GWSPD1")?)?;
        if net.n_vertices() != quadtree.n_points() || manifest.n != net.n_vertices() as u64 {
            return Err(format_err("section sizes disagree"));
        }
        check_handles(&quadtree, &net, &ps.pairs)?;
        if ps.eps.to_bits() != manifest.eps.to_bits() || ps.delta.to_bits() != quadtree.frame.side.to_bits() {
            return Err(format_err("section parameters disagree"));
        }
        Ok(WspdFile { manifest, quadtree, net, euclidean: ps.euclid, pairs: ps.pairs })
    }

    pub fn to_graph_wspd(&self) -> Result<GraphWspd> {
        assemble_wspd(self.manifest.eps, self.quadtree.clone(), self.net.clone(), self.euclidean.clone(), &self.pairs)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<WspdFile> {
        WspdFile::from_bytes(&std::fs::read(path)?)
    }
}

fn encode_table(eps: f64, n: usize, table: &[f64]) -> Vec<u8> {
    let mut o = Vec::with_capacity(24 + 8 * table.len());
    wf(&mut o, eps);
    w64(&mut o, n as u64);
    w64(&mut o, table.len() as u64);
    for &x in table {
        wf(&mut o, x);
    }
    o
}

/// Serializes an oracle set. `lambda_hint` and `seed` go to the manifest.
pub fn oracle_to_bytes(set: &AdoSet, lambda_hint: f64, seed: u64) -> Vec<u8> {
    let mut out = Vec::new();
    write_manifest(&mut out, &Manifest { kind: FileKind::Oracle, n: set.n() as u64, eps: set.eps, lambda_hint, seed });
    let mut comp = Vec::new();
    w64(&mut comp, set.n() as u64);
    w64(&mut comp, set.components().len() as u64);
    for (vs, o) in set.components().iter().zip(set.oracles()) {
        w64(&mut comp, vs.len() as u64);
        for &v in vs {
            w32(&mut comp, v as u32);
        }
        comp.push(o.membership().is_some() as u8);
    }
    put_section(&mut out, "COMP1", &comp);
    for o in set.oracles() {
        if let Some(m) = o.membership() {
            let w = &m.wspd;
            put_section(&mut out, "QTREE1", &encode_quadtree(&w.quadtree));
            put_section(&mut out, "NETT1", &encode_net(&w.net));
            put_section(&mut out, "GWSPD1", &encode_pairs(w.eps, w.delta(), &w.euclidean.pairs, &mut w.pairs(), w.pair_count()));
            put_section(&mut out, "MEMB1", &encode_net(&m.semi));
        }
        put_section(&mut out, "ADOT1", &encode_table(o.eps, o.n(), o.table()));
    }
    out
}

/// Loads an oracle set and its manifest.
pub fn oracle_from_bytes(bytes: &[u8]) -> Result<(AdoSet, Manifest)> {
    let mut cur = Cursor::new(bytes);
    let manifest = read_manifest(&mut cur)?;
    if manifest.kind != FileKind::Oracle {
        return Err(format_err("not an oracle file"));
    }
    let mut c = take_section(&mut cur, "COMP1")?;
    let n = c.u64_()? as usize;
    let k = c.len_(9)?;
    let mut members = Vec::with_capacity(k);
    let mut has = Vec::with_capacity(k);
    for _ in 0..k {
        let m = c.len_(4)?;
        members.push((0..m).map(|_| c.u32_().map(|v| v as usize)).collect::<Result<Vec<_>>>()?);
        has.push(c.u8_()? != 0);
    }
    if n as u64 != manifest.n || members.iter().map(Vec::len).sum::<usize>() != n {
        return Err(format_err("component lists do not cover the vertices"));
    }
    let mut oracles = Vec::with_capacity(k);
    for (vs, has) in members.iter().zip(has) {
        let membership = if has {
            let qt = decode_quadtree(take_section(&mut cur, "QTREE1")?)?;
            let net = decode_net(take_section(&mut cur, "NETT1")?)?;
            let ps = decode_pairs(take_section(&mut cur, "GWSPD1")?)?;
            let semi = decode_net(take_section(&mut cur, "MEMB1")?)?;
            if net.n_vertices() != vs.len() || qt.n_points() != vs.len() || ps.delta.to_bits() != qt.frame.side.to_bits() {
                return Err(format_err("section sizes disagree"));
            }
            check_handles(&qt, &net, &ps.pairs)?;
            let w = assemble_wspd(ps.eps, qt, net, ps.euclid, &ps.pairs)?;
            Some(MembershipOracle::from_parts(w, semi)?)
        } else {
            None
        };
        let mut t = take_section(&mut cur, "ADOT1")?;
        let eps = t.f64_()?;
        let on = t.u64_()? as usize;
        let len = t.len_(8)?;
        let table = (0..len).map(|_| t.f64_()).collect::<Result<Vec<_>>>()?;
        if on != vs.len() {
            return Err(format_err("table size disagrees with component"));
        }
        oracles.push(Ado::from_parts(eps, on, membership, table)?);
    }
    if cur.position() as usize != bytes.len() {
        return Err(format_err("trailing bytes"));
    }
    Ok((AdoSet::from_parts(manifest.eps, members, oracles)?, manifest))
}

pub fn save_oracle(path: &Path, set: &AdoSet, lambda_hint: f64, seed: u64) -> Result<()> {
    write_atomic(path, &oracle_to_bytes(set, lambda_hint, seed))
}

pub fn load_oracle(path: &Path) -> Result<(AdoSet, Manifest)> {
    oracle_from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GraphKind};
    use crate::graph::EmbeddedGraph;
    use crate::graph_wspd::build_graph_wspd;
    use crate::rng::{stream, stream_rng};
    use rand::Rng;

    #[test]
    fn wspd_round_trip() {
        let g = generate(&GraphKind::PerturbedGrid { k: 9, noise: 0.3, seed: 2 }).unwrap();
        let w = build_graph_wspd(&g, 0.5).unwrap();
        let f = WspdFile::from_wspd(&w, 4.0, 7);
        let bytes = f.to_bytes();
        let back = WspdFile::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        assert_eq!(back.quadtree.debug_dump(), w.quadtree.debug_dump());
        assert_eq!(back.net, w.net);
        let w2 = back.to_graph_wspd().unwrap();
        assert!(w2.pairs().eq(w.pairs()));
        for u in 0..w.quadtree.node_count() {
            assert_eq!(w2.cluster_sizes(u), w.cluster_sizes(u));
        }
        let mut edited = back.clone();
        edited.pairs.remove(3);
        let reread = WspdFile::from_bytes(&edited.to_bytes()).unwrap();
        assert_eq!(reread.pairs.len(), w.pair_count() as usize - 1);
        assert!(reread.to_graph_wspd().is_err());
    }

    #[test]
    fn oracle_round_trip() {
        let pts: Vec<Point2> = (0..30).map(|i| Point2::new((i % 10) as f64, (i / 10) as f64 * 3.0)).chain([Point2::new(50.0, 50.0)]).collect();
        let edges = (0..30).filter(|i| i % 10 != 9).map(|i| (i, i + 1)).collect();
        let g = EmbeddedGraph::new(pts, edges).unwrap();
        let (set, _) = AdoSet::build(&g, 0.5, 2.0, 3).unwrap();
        let bytes = oracle_to_bytes(&set, 2.0, 3);
        let (back, m) = oracle_from_bytes(&bytes).unwrap();
        assert_eq!(m.seed, 3);
        assert_eq!(oracle_to_bytes(&back, 2.0, 3), bytes);
        let mut rng = stream_rng(1, stream::QUERIES);
        for _ in 0..1000 {
            let (u, v) = (rng.gen_range(0..g.n()), rng.gen_range(0..g.n()));
            let (a, b) = (set.query(u, v).unwrap(), back.query(u, v).unwrap());
            assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
        }
    }

    #[test]
    fn corrupt_inputs() {
        let g = generate(&GraphKind::Grid { k: 4 }).unwrap();
        let (set, _) = AdoSet::build(&g, 0.5, 2.0, 3).unwrap();
        let bytes = oracle_to_bytes(&set, 2.0, 3);
        assert!(oracle_from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(oracle_from_bytes(b"garbage").is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(oracle_from_bytes(&bad).is_err());
        let w = WspdFile::from_wspd(set.oracles()[0].wspd().unwrap(), 2.0, 3);
        assert!(oracle_from_bytes(&w.to_bytes()).is_err());
        assert!(WspdFile::from_bytes(&bytes).is_err());
        for cut in (40..bytes.len()).step_by(97) {
            let _ = oracle_from_bytes(&bytes[..cut]);
        }
    }

    #[test]
    fn atomic_write() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        write_atomic(&p, b"abc").unwrap();
        write_atomic(&p, b"de").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"de");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
