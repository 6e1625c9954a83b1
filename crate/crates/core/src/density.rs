//! Certified lower bounds on density and lankiness, and the spread of a vertex set.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{closest_pair_distance, euclidean_distance, point_set_diameter, segment_meets_disc, Point2, Rect};
use crate::graph::EmbeddedGraph;
use crate::rng::{stream, stream_rng};

/// Which count a witness disc certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    /// Edges of length at least `r` meeting the closed disc.
    Low,
    /// Edges of length at least `r` with one endpoint inside the closed disc and one outside.
    Lanky,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessDisc {
    pub kind: WitnessKind,
    pub center: Point2,
    pub radius: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub lambda_lower_bound: usize,
    pub tau_lower_bound: usize,
    pub witness_discs: Vec<WitnessDisc>,
}

/// Candidate-disc strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensitySampler {
    /// Maximum number of discs evaluated.
    pub budget: usize,
    /// Number of sampled vertex pairs (for midpoints and radii).
    pub pair_samples: usize,
    pub seed: u64,
}

impl DensitySampler {
    pub fn new(seed: u64) -> Self {
        DensitySampler { budget: 20_000, pair_samples: 64, seed }
    }
}

/// Absolute predicate slack: 1e-12 of the bounding-box side.
pub fn tolerance(g: &EmbeddedGraph) -> f64 {
    match Rect::bounding(g.points()) {
        Some(r) => 1e-12 * r.width().max(r.height()).max(f64::MIN_POSITIVE),
        None => 0.0,
    }
}

/// Brute-force low-density count for one closed disc.
pub fn count_low(g: &EmbeddedGraph, center: Point2, r: f64, tol: f64) -> usize {
    g.edges()
        .iter()
        .zip(g.weights())
        .filter(|(&(u, v), &w)| w >= r - tol && segment_meets_disc(g.point(u), g.point(v), center, r, tol))
        .count()
}

/// Brute-force lankiness count for one closed disc.
pub fn count_lanky(g: &EmbeddedGraph, center: Point2, r: f64, tol: f64) -> usize {
    g.edges()
        .iter()
        .zip(g.weights())
        .filter(|(&(u, v), &w)| {
            let iu = euclidean_distance(g.point(u), center) <= r + tol;
            let iv = euclidean_distance(g.point(v), center) <= r + tol;
            w >= r - tol && iu != iv
        })
        .count()
}

/// Evaluates a finite family of candidate discs and reports the best counts found.
pub fn density_lower_bound(g: &EmbeddedGraph, sampler: &DensitySampler) -> DensityReport {
    let n = g.n();
    let tol = tolerance(g);
    let mut rng = stream_rng(sampler.seed, stream::DENSITY);
    // centers: vertices first (these also carry the lanky check), then edge and pair midpoints
    let mut centers: Vec<Point2> = g.points().to_vec();
    centers.extend(g.edges().iter().map(|&(u, v)| g.point(u).midpoint(&g.point(v))));
    let mut radii: Vec<f64> = g.weights().to_vec();
    if n >= 2 {
        for _ in 0..sampler.pair_samples {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                centers.push(g.point(a).midpoint(&g.point(b)));
                radii.push(euclidean_distance(g.point(a), g.point(b)));
            }
        }
    }
    radii.sort_by(|a, b| a.total_cmp(b));
    radii.dedup_by(|a, b| (*a - *b).abs() <= tol);
    let max_w = g.weights().iter().copied().fold(0.0, f64::max);
    // a disc with r above every edge length counts nothing
    radii.retain(|&r| r > 0.0 && r <= max_w + tol);
    let total = centers.len() * radii.len();
    let discs: Vec<(usize, usize)> = if total <= sampler.budget {
        (0..centers.len()).flat_map(|c| (0..radii.len()).map(move |r| (c, r))).collect()
    } else {
        (0..sampler.budget)
            .map(|_| (rng.gen_range(0..centers.len()), rng.gen_range(0..radii.len())))
            .collect()
    };
    let counts: Vec<(usize, usize)> = discs
        .par_iter()
        .map(|&(c, r)| {
            let low = count_low(g, centers[c], radii[r], tol);
            let lanky = if c < n { count_lanky(g, centers[c], radii[r], tol) } else { 0 };
            (low, lanky)
        })
        .collect();
    let mut best_low: Option<WitnessDisc> = None;
    let mut best_lanky: Option<WitnessDisc> = None;
    for (&(c, r), &(low, lanky)) in discs.iter().zip(&counts) {
        if best_low.map_or(true, |w| low > w.count) {
            best_low = Some(WitnessDisc { kind: WitnessKind::Low, center: centers[c], radius: radii[r], count: low });
        }
        if c < n && best_lanky.map_or(true, |w| lanky > w.count) {
            best_lanky = Some(WitnessDisc { kind: WitnessKind::Lanky, center: centers[c], radius: radii[r], count: lanky });
        }
    }
    let witness_discs: Vec<WitnessDisc> = best_low.into_iter().chain(best_lanky).collect();
    DensityReport {
        lambda_lower_bound: best_low.map_or(0, |w| w.count),
        tau_lower_bound: best_lanky.map_or(0, |w| w.count),
        witness_discs,
    }
}

/// Recounts a witness by brute force.
pub fn recount(g: &EmbeddedGraph, w: &WitnessDisc) -> usize {
    let tol = tolerance(g);
    match w.kind {
        WitnessKind::Low => count_low(g, w.center, w.radius, tol),
        WitnessKind::Lanky => count_lanky(g, w.center, w.radius, tol),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpreadReport {
    pub phi: f64,
    pub min_pair_dist: f64,
    pub max_pair_dist: f64,
}

/// Exact pairwise scan up to this many points.
pub const SPREAD_EXACT_CAP: usize = 5000;

/// Ratio of largest to smallest pairwise distance.
pub fn spread(points: &[Point2]) -> Result<SpreadReport> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewPoints(2));
    }
    let (lo, hi) = if n <= SPREAD_EXACT_CAP {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut lo = f64::INFINITY;
                let mut hi = 0.0f64;
                for j in i + 1..n {
                    let d = euclidean_distance(points[i], points[j]);
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
                (lo, hi)
            })
            .reduce(|| (f64::INFINITY, 0.0), |a, b| (a.0.min(b.0), a.1.max(b.1)))
    } else {
        (closest_pair_distance(points), point_set_diameter(points))
    };
    Ok(SpreadReport { phi: hi / lo, min_pair_dist: lo, max_pair_dist: hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, GraphKind};

    #[test]
    fn empty_edges() {
        let g = EmbeddedGraph::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)], vec![]).unwrap();
        let r = density_lower_bound(&g, &DensitySampler::new(1));
        assert_eq!(r.lambda_lower_bound, 0);
        assert_eq!(r.tau_lower_bound, 0);
    }

    #[test]
    fn single_edge_midpoint_disc() {
        let g = EmbeddedGraph::new(vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)], vec![(0, 1)]).unwrap();
        assert_eq!(count_low(&g, Point2::new(0.5, 0.0), 0.5, 0.0), 1);
        let r = density_lower_bound(&g, &DensitySampler::new(1));
        assert_eq!(r.lambda_lower_bound, 1);
    }

    #[test]
    fn grid_witnesses_replay() {
        let g = generate(&GraphKind::Grid { k: 4 }).unwrap();
        let r = density_lower_bound(&g, &DensitySampler::new(3));
        assert!(r.lambda_lower_bound >= 4 && r.lambda_lower_bound <= 24);
        assert!(r.tau_lower_bound <= r.lambda_lower_bound);
        for w in &r.witness_discs {
            assert_eq!(recount(&g, w), w.count);
        }
    }

    #[test]
    fn spread_values() {
        let p = |x| Point2::new(x, 0.0);
        assert_eq!(spread(&[p(0.0), p(1.0)]).unwrap().phi, 1.0);
        assert_eq!(spread(&[p(0.0), p(1.0), p(10.0)]).unwrap().phi, 10.0);
        let g = generate(&GraphKind::Grid { k: 3 }).unwrap();
        assert!((spread(g.points()).unwrap().phi - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(spread(&[p(0.0)]).is_err());
    }
}
