//! Constant-time level-ancestor queries by long-path ladders plus jump pointers stored at
//! leaves.

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelAncestor {
    parent: Vec<u32>,
    depth: Vec<u32>,
    ladder_of: Vec<u32>,
    ladder_pos: Vec<u32>,
    ladders: Vec<Vec<u32>>,
    leaf_below: Vec<u32>,
    jump_start: Vec<u32>,
    jumps: Vec<u32>,
    root: usize,
}

impl LevelAncestor {
    /// Builds from a parent array with exactly one root.
    pub fn new(parent: &[Option<usize>]) -> Result<LevelAncestor> {
        let n = parent.len();
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut root = None;
        for (v, p) in parent.iter().enumerate() {
            match p {
                Some(p) if *p < n => children[*p].push(v as u32),
                Some(_) => return Err(Error::InvalidVertex(v)),
                None if root.is_none() => root = Some(v),
                None => return Err(Error::InvalidParameter("tree has more than one root".into())),
            }
        }
        let root = root.ok_or_else(|| Error::InvalidParameter("tree has no root".into()))?;
        let mut order = Vec::with_capacity(n);
        let mut depth = vec![0u32; n];
        order.push(root as u32);
        let mut h = 0;
        while h < order.len() {
            let u = order[h] as usize;
            h += 1;
            for &c in &children[u] {
                depth[c as usize] = depth[u] + 1;
                order.push(c);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidParameter("parent array has a cycle".into()));
        }
        let mut height = vec![0u32; n];
        let mut long_child = vec![NONE; n];
        for &u in order.iter().rev() {
            let u = u as usize;
            for &c in &children[u] {
                if long_child[u] == NONE || height[c as usize] + 1 > height[u] {
                    height[u] = height[c as usize] + 1;
                    long_child[u] = c;
                }
            }
        }
        let par: Vec<u32> = parent.iter().map(|p| p.map_or(NONE, |p| p as u32)).collect();
        let mut ladder_of = vec![NONE; n];
        let mut ladder_pos = vec![0u32; n];
        let mut leaf_below = vec![NONE; n];
        let mut ladders = Vec::new();
        for &top in &order {
            let top = top as usize;
            if top != root && long_child[par[top] as usize] == top as u32 {
                continue;
            }
            let mut path = vec![top as u32];
            while long_child[*path.last().expect("nonempty") as usize] != NONE {
                path.push(long_child[*path.last().expect("nonempty") as usize]);
            }
            let leaf = *path.last().expect("nonempty");
            let mut up = Vec::new();
            let mut x = par[top];
            while x != NONE && up.len() < path.len() {
                up.push(x);
                x = par[x as usize];
            }
            up.reverse();
            let ext = up.len();
            let id = ladders.len() as u32;
            for (k, &v) in path.iter().enumerate() {
                ladder_of[v as usize] = id;
                ladder_pos[v as usize] = (ext + k) as u32;
                leaf_below[v as usize] = leaf;
            }
            up.extend(path);
            ladders.push(up);
        }
        let mut la = LevelAncestor {
            parent: par,
            depth,
            ladder_of,
            ladder_pos,
            ladders,
            leaf_below,
            jump_start: vec![0; n + 1],
            jumps: Vec::new(),
            root,
        };
        for v in 0..n {
            if children[v].is_empty() {
                let mut k = 0;
                while (1u32 << k) <= la.depth[v] {
                    let a = if k == 0 {
                        la.parent[v]
                    } else {
                        let x = *la.jumps.last().expect("previous jump");
                        la.climb(x as usize, 1 << (k - 1)) as u32
                    };
                    la.jumps.push(a);
                    k += 1;
                }
            }
            la.jump_start[v + 1] = la.jumps.len() as u32;
        }
        Ok(la)
    }

    // Ancestor `up` levels above `x`, valid when `x` has a descendant `up` levels below it.
    fn climb(&self, x: usize, up: u32) -> usize {
        let lad = &self.ladders[self.ladder_of[x] as usize];
        lad[(self.ladder_pos[x] - up) as usize] as usize
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v] as usize
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (self.parent[v] != NONE).then_some(self.parent[v] as usize)
    }

    /// Ancestor of `v` at depth `d` (`0` is the root).
    pub fn ancestor_at_depth(&self, v: usize, d: usize) -> Result<usize> {
        if v >= self.len() {
            return Err(Error::InvalidVertex(v));
        }
        if d > self.depth(v) {
            return Err(Error::DepthOutOfRange(d));
        }
        Ok(self.ancestor_unchecked(v, d as u32))
    }

    /// Same as [`LevelAncestor::ancestor_at_depth`] without range checks.
    pub fn ancestor_unchecked(&self, v: usize, d: u32) -> usize {
        if d == self.depth[v] {
            return v;
        }
        let leaf = self.leaf_below[v] as usize;
        let up = self.depth[leaf] - d;
        let k = 31 - up.leading_zeros();
        let x = self.jumps[(self.jump_start[leaf] + k) as usize] as usize;
        self.climb(x, self.depth[x] - d)
    }

    /// Memory footprint in stored words.
    pub fn size_words(&self) -> usize {
        5 * self.len() + self.jumps.len() + self.ladders.iter().map(Vec::len).sum::<usize>()
    }
}
