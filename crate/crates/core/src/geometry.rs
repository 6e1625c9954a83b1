//! Planar primitives: points, rectangles, segment/disc predicates.

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn midpoint(&self, o: &Point2) -> Point2 {
        Point2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

/// L2 distance.
pub fn euclidean_distance(p: Point2, q: Point2) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

/// Distance from `p` to the closed segment `ab`.
pub fn segment_point_distance(a: Point2, b: Point2, p: Point2) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return euclidean_distance(a, p);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    euclidean_distance(Point2::new(a.x + t * dx, a.y + t * dy), p)
}

/// Closed-disc test: does segment `ab` meet the disc of radius `r` about `c`?
/// Tangency counts; `tol` is an absolute slack.
pub fn segment_meets_disc(a: Point2, b: Point2, c: Point2, r: f64, tol: f64) -> bool {
    segment_point_distance(a, b, c) <= r + tol
}

/// Axis-aligned rectangle `[min.x, max.x] x [min.y, max.y]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn new(min: Point2, max: Point2) -> Self {
        Rect { min, max }
    }

    /// Square with lower-left corner `corner` and side `side`.
    pub fn square(corner: Point2, side: f64) -> Self {
        Rect::new(corner, Point2::new(corner.x + side, corner.y + side))
    }

    pub fn bounding(points: &[Point2]) -> Option<Rect> {
        let first = points.first()?;
        let mut r = Rect::new(*first, *first);
        for p in points {
            r.min.x = r.min.x.min(p.x);
            r.min.y = r.min.y.min(p.y);
            r.max.x = r.max.x.max(p.x);
            r.max.y = r.max.y.max(p.y);
        }
        Some(r)
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point2 {
        self.min.midpoint(&self.max)
    }

    /// Closed containment.
    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Scale about the center by `f`.
    pub fn scaled(&self, f: f64) -> Rect {
        let c = self.center();
        let (hw, hh) = (0.5 * f * self.width(), 0.5 * f * self.height());
        Rect::new(Point2::new(c.x - hw, c.y - hh), Point2::new(c.x + hw, c.y + hh))
    }

    pub fn expanded(&self, d: f64) -> Rect {
        Rect::new(
            Point2::new(self.min.x - d, self.min.y - d),
            Point2::new(self.max.x + d, self.max.y + d),
        )
    }

    /// Euclidean distance between two rectangles (0 when they overlap).
    pub fn distance(&self, o: &Rect) -> f64 {
        let gx = (o.min.x - self.max.x).max(self.min.x - o.max.x).max(0.0);
        let gy = (o.min.y - self.max.y).max(self.min.y - o.max.y).max(0.0);
        gx.hypot(gy)
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }
}

/// Length of the part of segment `ab` inside the closed rectangle (Liang-Barsky).
pub fn clipped_segment_length(a: Point2, b: Point2, rect: &Rect) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    let checks = [
        (-dx, a.x - rect.min.x),
        (dx, rect.max.x - a.x),
        (-dy, a.y - rect.min.y),
        (dy, rect.max.y - a.y),
    ];
    for (p, q) in checks {
        if p == 0.0 {
            if q < 0.0 {
                return 0.0;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
            if t0 > t1 {
                return 0.0;
            }
        }
    }
    (t1 - t0) * dx.hypot(dy)
}

/// Convex hull by monotone chain; returns hull vertices counter-clockwise.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: Point2, a: Point2, b: Point2| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Euclidean diameter of a point set (hull vertices, quadratic over the hull).
pub fn point_set_diameter(points: &[Point2]) -> f64 {
    let hull = convex_hull(points);
    let mut best = 0.0f64;
    for i in 0..hull.len() {
        for j in i + 1..hull.len() {
            best = best.max(euclidean_distance(hull[i], hull[j]));
        }
    }
    best
}

/// Closest pair distance by divide and conquer. Requires at least 2 points.
pub fn closest_pair_distance(points: &[Point2]) -> f64 {
    let mut px: Vec<Point2> = points.to_vec();
    px.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut scratch = Vec::with_capacity(px.len());
    closest_rec(&mut px, &mut scratch)
}

// Sorts `pts` by y on return.
fn closest_rec(pts: &mut [Point2], scratch: &mut Vec<Point2>) -> f64 {
    let n = pts.len();
    if n <= 3 {
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                best = best.min(euclidean_distance(pts[i], pts[j]));
            }
        }
        pts.sort_by(|a, b| a.y.total_cmp(&b.y));
        return best;
    }
    let mid = n / 2;
    let mx = pts[mid].x;
    let (l, r) = pts.split_at_mut(mid);
    let mut best = closest_rec(l, scratch).min(closest_rec(r, scratch));
    // merge by y
    scratch.clear();
    let (mut i, mut j) = (0, mid);
    while i < mid || j < n {
        if j >= n || (i < mid && pts[i].y <= pts[j].y) {
            scratch.push(pts[i]);
            i += 1;
        } else {
            scratch.push(pts[j]);
            j += 1;
        }
    }
    pts.copy_from_slice(scratch);
    let strip: Vec<Point2> = pts.iter().copied().filter(|p| (p.x - mx).abs() < best).collect();
    for i in 0..strip.len() {
        for j in i + 1..strip.len() {
            if strip[j].y - strip[i].y >= best {
                break;
            }
            best = best.min(euclidean_distance(strip[i], strip[j]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        let o = Point2::new(0.0, 0.0);
        assert_eq!(euclidean_distance(o, o), 0.0);
        assert_eq!(euclidean_distance(o, Point2::new(3.0, 4.0)), 5.0);
        let d = euclidean_distance(Point2::new(1.0, 1.0), Point2::new(2.0, 2.0));
        assert!((d - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn segment_disc() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(1.0, 0.0);
        assert!(segment_meets_disc(a, b, Point2::new(0.5, 0.0), 0.5, 0.0));
        // tangent from above
        assert!(segment_meets_disc(a, b, Point2::new(0.5, 1.0), 1.0, 0.0));
        assert!(!segment_meets_disc(a, b, Point2::new(0.5, 1.0), 0.99, 0.0));
        assert!(!segment_meets_disc(a, b, Point2::new(3.0, 0.0), 1.5, 0.0));
    }

    #[test]
    fn clip() {
        let r = Rect::square(Point2::new(0.0, 0.0), 1.0);
        let l = clipped_segment_length(Point2::new(-1.0, 0.5), Point2::new(2.0, 0.5), &r);
        assert!((l - 1.0).abs() < 1e-12);
        let l = clipped_segment_length(Point2::new(-1.0, -1.0), Point2::new(2.0, 2.0), &r);
        assert!((l - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(clipped_segment_length(Point2::new(2.0, 2.0), Point2::new(3.0, 3.0), &r), 0.0);
    }

    #[test]
    fn hull_and_pairs() {
        let pts: Vec<Point2> = (0..5)
            .flat_map(|i| (0..5).map(move |j| Point2::new(i as f64, j as f64)))
            .collect();
        assert_eq!(convex_hull(&pts).len(), 4);
        assert!((point_set_diameter(&pts) - 32f64.sqrt()).abs() < 1e-12);
        assert_eq!(closest_pair_distance(&pts), 1.0);
    }
}
