//! Exact-weight ancestor queries over trees whose node weights strictly increase from the
//! root downward. Heavy-path decomposition, per-path bit masks ranked by popcount, and a
//! level-ancestor structure over the tree of heavy paths.

use crate::error::{Error, Result};
use crate::level_ancestor::LevelAncestor;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct HeavyPathIndex {
    parent: Vec<u32>,
    weight: Vec<i32>,
    wmin: i32,
    /// Words per mask.
    words: usize,
    path_of: Vec<u32>,
    pos: Vec<u32>,
    tin: Vec<u32>,
    tout: Vec<u32>,
    path_nodes: Vec<Vec<u32>>,
    /// Per path, the weights of its nodes as a bitset relative to `wmin`.
    path_mask: Vec<u64>,
    /// Per path, the head weights of all paths from the root path down to it.
    chain_mask: Vec<u64>,
    path_depth: Vec<u32>,
    path_la: LevelAncestor,
}

impl HeavyPathIndex {
    /// `parent` must describe a single rooted tree and `weight[v] > weight[parent[v]]`.
    pub fn new(parent: &[Option<usize>], weight: &[i32]) -> Result<HeavyPathIndex> {
        let n = parent.len();
        if weight.len() != n || n == 0 {
            return Err(Error::InvalidParameter("weight array does not match tree".into()));
        }
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut root = None;
        for (v, p) in parent.iter().enumerate() {
            match *p {
                Some(p) if p < n => {
                    if weight[v] <= weight[p] {
                        return Err(Error::InvalidParameter(format!("weight of node {v} not above its parent")));
                    }
                    children[p].push(v as u32)
                }
                Some(_) => return Err(Error::InvalidVertex(v)),
                None if root.is_none() => root = Some(v),
                None => return Err(Error::InvalidParameter("tree has more than one root".into())),
            }
        }
        let root = root.ok_or_else(|| Error::InvalidParameter("tree has no root".into()))?;
        let wmin = weight[root];
        let span = (*weight.iter().max().expect("nonempty") - wmin) as usize + 1;
        let words = span.div_ceil(64);

        // preorder with heavy child first; sizes from the reverse of a BFS order
        let mut bfs = vec![root as u32];
        let mut h = 0;
        while h < bfs.len() {
            let u = bfs[h] as usize;
            h += 1;
            bfs.extend_from_slice(&children[u]);
        }
        if bfs.len() != n {
            return Err(Error::InvalidParameter("parent array has a cycle".into()));
        }
        let mut size = vec![1u32; n];
        for &u in bfs.iter().rev() {
            if let Some(p) = parent[u as usize] {
                size[p] += size[u as usize];
            }
        }
        let heavy: Vec<u32> = (0..n)
            .map(|u| children[u].iter().copied().find(|&c| 2 * size[c as usize] > size[u]).unwrap_or(NONE))
            .collect();

        // heavy child first so that paths stay contiguous in time
        for u in 0..n {
            if let Some(k) = children[u].iter().position(|&c| c == heavy[u]) {
                children[u].swap(0, k);
            }
        }
        let mut path_of = vec![NONE; n];
        let mut pos = vec![0u32; n];
        let mut tin = vec![0u32; n];
        let mut tout = vec![0u32; n];
        let mut path_nodes: Vec<Vec<u32>> = Vec::new();
        let mut path_parent: Vec<Option<usize>> = Vec::new();
        let mut clock = 0u32;
        // (node, next child index)
        let mut stack: Vec<(u32, usize)> = vec![(root as u32, 0)];
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            let ui = u as usize;
            if *next == 0 {
                tin[ui] = clock;
                clock += 1;
                let p = parent[ui];
                if p.is_some_and(|p| heavy[p] == u) {
                    let pid = path_of[p.expect("checked")];
                    path_of[ui] = pid;
                    pos[ui] = path_nodes[pid as usize].len() as u32;
                    path_nodes[pid as usize].push(u);
                } else {
                    path_of[ui] = path_nodes.len() as u32;
                    path_parent.push(p.map(|p| path_of[p] as usize));
                    path_nodes.push(vec![u]);
                }
            }
            let child = children[ui].get(*next).copied();
            *next += 1;
            match child {
                Some(c) => stack.push((c, 0)),
                None => {
                    tout[ui] = clock;
                    stack.pop();
                }
            }
        }
        let np = path_nodes.len();
        let mut path_mask = vec![0u64; np * words];
        let mut chain_mask = vec![0u64; np * words];
        let mut path_depth = vec![0u32; np];
        let set = |m: &mut [u64], b: usize| m[b / 64] |= 1u64 << (b % 64);
        for p in 0..np {
            for &v in &path_nodes[p] {
                set(&mut path_mask[p * words..(p + 1) * words], (weight[v as usize] - wmin) as usize);
            }
            // paths are created in preorder, so the parent path is already done
            if let Some(q) = path_parent[p] {
                path_depth[p] = path_depth[q] + 1;
                let (lo, hi) = chain_mask.split_at_mut(p * words);
                hi[..words].copy_from_slice(&lo[q * words..(q + 1) * words]);
            }
            let head = path_nodes[p][0] as usize;
            set(&mut chain_mask[p * words..(p + 1) * words], (weight[head] - wmin) as usize);
        }
        let path_la = LevelAncestor::new(&path_parent)?;
        Ok(HeavyPathIndex {
            parent: parent.iter().map(|p| p.map_or(NONE, |p| p as u32)).collect(),
            weight: weight.to_vec(),
            wmin,
            words,
            path_of,
            pos,
            tin,
            tout,
            path_nodes,
            path_mask,
            chain_mask,
            path_depth,
            path_la,
        })
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    pub fn weight(&self, v: usize) -> i32 {
        self.weight[v]
    }

    pub fn path_count(&self) -> usize {
        self.path_nodes.len()
    }

    /// Is `a` an ancestor of (or equal to) `b`?
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        self.tin[a] <= self.tin[b] && self.tout[b] <= self.tout[a]
    }

    // Number of set bits of `mask` at positions `<= b`.
    fn rank(&self, mask: &[u64], b: usize, ops: &mut u64) -> u32 {
        let w = b / 64;
        let mut r = 0;
        for word in &mask[..w] {
            r += word.count_ones();
        }
        let low = mask[w] & (u64::MAX >> (63 - b % 64));
        *ops += w as u64 + 1;
        r + low.count_ones()
    }

    /// Ancestor-or-self of `u` with weight exactly `w`, if any.
    pub fn exact_weight_ancestor(&self, u: usize, w: i32) -> Option<usize> {
        self.exact_weight_ancestor_counted(u, w, &mut 0)
    }

    /// As [`HeavyPathIndex::exact_weight_ancestor`], adding primitive steps to `ops`.
    pub fn exact_weight_ancestor_counted(&self, u: usize, w: i32, ops: &mut u64) -> Option<usize> {
        *ops += 2;
        if w < self.wmin || w > self.weight[u] {
            return None;
        }
        let b = (w - self.wmin) as usize;
        let pu = self.path_of[u] as usize;
        let words = self.words;
        // index on the root-to-u chain of the path holding weight w
        let j = self.rank(&self.chain_mask[pu * words..(pu + 1) * words], b, ops) - 1;
        let k = self.path_depth[pu];
        let (pj, exit) = if j == k {
            (pu, self.pos[u])
        } else {
            let below = self.path_la.ancestor_unchecked(pu, j + 1);
            let head = self.path_nodes[below][0] as usize;
            let e = self.parent[head] as usize;
            (self.path_of[e] as usize, self.pos[e])
        };
        *ops += 4;
        let mask = &self.path_mask[pj * words..(pj + 1) * words];
        if mask[b / 64] >> (b % 64) & 1 == 0 {
            return None;
        }
        let p = self.rank(mask, b, ops) - 1;
        *ops += 1;
        (p <= exit).then(|| self.path_nodes[pj][p as usize] as usize)
    }

    /// Stored words, for size accounting.
    pub fn size_words(&self) -> usize {
        6 * self.len() + 2 * self.path_mask.len() + self.path_la.size_words()
    }
}
