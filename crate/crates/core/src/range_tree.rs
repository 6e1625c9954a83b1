//! Layered range tree over `(x, y, level)` answering boxes `[x1,x2] x [y1,y2] x (-inf, L]`.
//!
//! The primary tree splits on `x`; every node keeps its entries sorted by `y` with a sparse
//! table of level minima, so the one-sided level condition is reported by recursive
//! range-minimum splitting in time proportional to the output.

use crate::geometry::Rect;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeEntry {
    pub x: f64,
    pub y: f64,
    pub level: i32,
    pub id: usize,
}

#[derive(Debug, Clone)]
struct Layer {
    ys: Vec<f64>,
    levels: Vec<i32>,
    ids: Vec<usize>,
    // sparse[k][i] = index of min level in [i, i + 2^k)
    sparse: Vec<Vec<u32>>,
}

impl Layer {
    fn new(mut items: Vec<(f64, i32, usize)>) -> Layer {
        items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        let levels: Vec<i32> = items.iter().map(|t| t.1).collect();
        let n = items.len();
        let mut sparse = vec![(0..n as u32).collect::<Vec<u32>>()];
        let mut k = 1;
        while (1 << k) <= n {
            let prev = &sparse[k - 1];
            let half = 1 << (k - 1);
            let row: Vec<u32> = (0..=n - (1 << k))
                .map(|i| {
                    let (a, b) = (prev[i], prev[i + half]);
                    if levels[b as usize] < levels[a as usize] { b } else { a }
                })
                .collect();
            sparse.push(row);
            k += 1;
        }
        Layer {
            ys: items.iter().map(|t| t.0).collect(),
            ids: items.iter().map(|t| t.2).collect(),
            levels,
            sparse,
        }
    }

    fn argmin(&self, lo: usize, hi: usize) -> usize {
        let k = (usize::BITS - 1 - (hi - lo).leading_zeros()) as usize;
        let (a, b) = (self.sparse[k][lo], self.sparse[k][hi - (1 << k)]);
        if self.levels[b as usize] < self.levels[a as usize] { b as usize } else { a as usize }
    }

    fn report(&self, y1: f64, y2: f64, max_level: i32, out: &mut Vec<usize>) {
        let lo = self.ys.partition_point(|&y| y < y1);
        let hi = self.ys.partition_point(|&y| y <= y2);
        let mut stack = vec![(lo, hi)];
        while let Some((a, b)) = stack.pop() {
            if a >= b {
                continue;
            }
            let m = self.argmin(a, b);
            if self.levels[m] > max_level {
                continue;
            }
            out.push(self.ids[m]);
            stack.push((a, m));
            stack.push((m + 1, b));
        }
    }
}

/// Static 3-D orthogonal range reporting structure.
#[derive(Debug, Clone)]
pub struct RangeIndex {
    xs: Vec<f64>,
    layers: Vec<Option<Layer>>,
    n: usize,
}

impl RangeIndex {
    pub fn new(entries: &[RangeEntry]) -> RangeIndex {
        let mut e = entries.to_vec();
        e.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.id.cmp(&b.id)));
        let n = e.len();
        let mut layers = vec![None; 4 * n.max(1)];
        if n > 0 {
            Self::build(&e, 1, 0, n, &mut layers);
        }
        RangeIndex { xs: e.iter().map(|t| t.x).collect(), layers, n }
    }

    fn build(e: &[RangeEntry], node: usize, lo: usize, hi: usize, layers: &mut [Option<Layer>]) {
        layers[node] = Some(Layer::new(e[lo..hi].iter().map(|t| (t.y, t.level, t.id)).collect()));
        if hi - lo > 1 {
            let mid = (lo + hi) / 2;
            Self::build(e, 2 * node, lo, mid, layers);
            Self::build(e, 2 * node + 1, mid, hi, layers);
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Ids of entries in the closed box with `level <= max_level`, ascending.
    pub fn query(&self, rect: &Rect, max_level: i32) -> Vec<usize> {
        let mut out = Vec::new();
        if self.n == 0 {
            return out;
        }
        let lo = self.xs.partition_point(|&x| x < rect.min.x);
        let hi = self.xs.partition_point(|&x| x <= rect.max.x);
        if lo < hi {
            self.collect(1, 0, self.n, lo, hi, rect, max_level, &mut out);
        }
        out.sort_unstable();
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn collect(&self, node: usize, nlo: usize, nhi: usize, lo: usize, hi: usize, rect: &Rect, lvl: i32, out: &mut Vec<usize>) {
        if hi <= nlo || nhi <= lo {
            return;
        }
        if lo <= nlo && nhi <= hi {
            self.layers[node].as_ref().expect("built").report(rect.min.y, rect.max.y, lvl, out);
            return;
        }
        let mid = (nlo + nhi) / 2;
        self.collect(2 * node, nlo, mid, lo, hi, rect, lvl, out);
        self.collect(2 * node + 1, mid, nhi, lo, hi, rect, lvl, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use proptest::prelude::*;

    fn brute(e: &[RangeEntry], r: &Rect, l: i32) -> Vec<usize> {
        let mut v: Vec<usize> = e
            .iter()
            .filter(|t| r.contains(Point2::new(t.x, t.y)) && t.level <= l)
            .map(|t| t.id)
            .collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn empty_and_full() {
        let idx = RangeIndex::new(&[]);
        assert!(idx.query(&Rect::square(Point2::new(0.0, 0.0), 1.0), 5).is_empty());
        let e: Vec<RangeEntry> = (0..10).map(|i| RangeEntry { x: i as f64, y: (i % 3) as f64, level: i as i32 % 4, id: i }).collect();
        let idx = RangeIndex::new(&e);
        let all = Rect::square(Point2::new(-1.0, -1.0), 20.0);
        assert_eq!(idx.query(&all, 10), (0..10).collect::<Vec<_>>());
        assert_eq!(idx.query(&all, 0), vec![0, 4, 8]);
    }

    proptest! {
        #[test]
        fn matches_linear_scan(
            pts in prop::collection::vec((0i32..30, 0i32..30, -3i32..6), 0..80),
            x1 in -2i32..32, w in 0i32..30, y1 in -2i32..32, h in 0i32..30, l in -4i32..7
        ) {
            let e: Vec<RangeEntry> = pts.iter().enumerate()
                .map(|(i, &(x, y, lv))| RangeEntry { x: x as f64, y: y as f64, level: lv, id: i })
                .collect();
            let idx = RangeIndex::new(&e);
            let r = Rect::new(Point2::new(x1 as f64, y1 as f64), Point2::new((x1 + w) as f64, (y1 + h) as f64));
            prop_assert_eq!(idx.query(&r, l), brute(&e, &r, l));
        }
    }
}
