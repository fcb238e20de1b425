//! Convex hulls of speed/cost pairs and the outgoing action sets at the vertex.

use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain. Returns the extreme points counterclockwise,
/// starting from the lexicographically smallest, with collinear points dropped.
/// A single point or a segment comes back as one or two points.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.pop();
    }
    lower
}

/// Clips a convex polygon (as returned by [`convex_hull`]) to the half-plane
/// `x >= 0`, inserting the crossings of its edges with `x = 0`.
pub fn clip_nonnegative_x(hull: &[Point]) -> Vec<Point> {
    let n = hull.len();
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let a = hull[i];
        let b = hull[(i + 1) % n];
        let a_in = a[0] >= 0.0;
        let b_in = b[0] >= 0.0;
        if a_in {
            out.push(a);
        }
        if a_in != b_in {
            let t = a[0] / (a[0] - b[0]);
            out.push([0.0, a[1] + t * (b[1] - a[1])]);
        }
    }
    convex_hull(&out)
}

/// Boundary segments of a hull, each listed once (a segment hull has one).
pub fn hull_segments(hull: &[Point]) -> Vec<(Point, Point)> {
    match hull.len() {
        0 | 1 => Vec::new(),
        2 => vec![(hull[0], hull[1])],
        n => (0..n).map(|i| (hull[i], hull[(i + 1) % n])).collect(),
    }
}

/// Extreme points plus `samples` evenly spaced interior points on every boundary segment.
pub fn sampled_boundary(hull: &[Point], samples: usize) -> Vec<Point> {
    let mut out = hull.to_vec();
    for (a, b) in hull_segments(hull) {
        for k in 1..=samples {
            let t = k as f64 / (samples + 1) as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// `slope * speed` with the convention `(+-inf) * 0 = 0`.
#[inline]
pub(crate) fn slope_times_speed(slope: f64, speed: f64) -> f64 {
    if speed == 0.0 {
        0.0
    } else {
        slope * speed
    }
}

/// Closed convex hull of the vertex (speed, cost) pairs of one edge,
/// restricted to outgoing speeds `zeta >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlSet {
    pub edge: usize,
    /// Counterclockwise `(zeta, xi)` extreme points.
    pub extreme_points: Vec<Point>,
}

impl FlSet {
    pub fn from_pairs(edge: usize, pairs: &[Point]) -> Self {
        let hull = convex_hull(pairs);
        Self {
            edge,
            extreme_points: clip_nonnegative_x(&hull),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.extreme_points.is_empty()
    }

    /// `sup { -slope * zeta - xi : (zeta, xi) in FL }`, attained at an extreme
    /// point since the objective is linear. Empty sets give `-inf`.
    pub fn support(&self, slope: f64) -> f64 {
        self.extreme_points
            .iter()
            .map(|&[zeta, xi]| -slope_times_speed(slope, zeta) - xi)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hull_of_square_with_interior_and_collinear_points() {
        let pts = [
            [0.0, 0.0],
            [1.0, 0.0],
            [0.5, 0.0],
            [1.0, 1.0],
            [0.0, 1.0],
            [0.5, 0.5],
        ];
        assert_eq!(
            convex_hull(&pts),
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
        );
    }

    #[test]
    fn degenerate_hulls() {
        assert_eq!(convex_hull(&[[1.0, 2.0], [1.0, 2.0]]), vec![[1.0, 2.0]]);
        assert_eq!(
            convex_hull(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]]),
            vec![[-1.0, 0.0], [1.0, 0.0]]
        );
    }

    #[test]
    fn fl_examples() {
        let seg = FlSet::from_pairs(0, &[[1.0, 0.0], [-1.0, 0.0]]);
        assert_eq!(seg.extreme_points, vec![[0.0, 0.0], [1.0, 0.0]]);
        let single = FlSet::from_pairs(0, &[[1.0, 0.0]]);
        assert_eq!(single.extreme_points, vec![[1.0, 0.0]]);
        let empty = FlSet::from_pairs(0, &[[-2.0, 1.0], [-1.0, 0.0]]);
        assert!(empty.is_empty());
        assert_eq!(empty.support(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn clip_triangle_across_axis() {
        let fl = FlSet::from_pairs(0, &[[-1.0, 0.0], [1.0, 0.0], [0.0, 2.0], [-1.0, 2.0]]);
        // hull: (-1,0) (1,0) (0,2) (-1,2); clipped at x = 0
        assert_eq!(fl.extreme_points, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]);
    }

    #[test]
    fn support_examples() {
        // brute-force values over a 1e-3 sampling of the segment (0,0)-(1,0)
        let seg = FlSet {
            edge: 0,
            extreme_points: vec![[0.0, 0.0], [1.0, 0.0]],
        };
        let brute = |q: f64| {
            (0..=1000)
                .map(|k| -q * (k as f64 * 1e-3))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        assert_eq!(brute(2.0), 0.0);
        assert!((brute(-3.0) - 3.0).abs() < 1e-12);
        assert_eq!(seg.support(2.0), 0.0);
        assert_eq!(seg.support(-3.0), 3.0);
        let point = FlSet {
            edge: 0,
            extreme_points: vec![[1.0, 1.0]],
        };
        assert_eq!(point.support(0.0), -1.0);
    }

    #[test]
    fn support_at_infinite_slopes() {
        let fl = FlSet::from_pairs(0, &[[1.0, 1.0], [-1.0, 1.0]]);
        assert_eq!(fl.support(f64::INFINITY), -1.0);
        assert_eq!(fl.support(f64::NEG_INFINITY), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn support_matches_dense_boundary_sampling(
            pts in prop::collection::vec((-3.0f64..3.0, -2.0f64..2.0), 1..8),
            q in -5.0f64..5.0,
        ) {
            let pairs: Vec<Point> = pts.iter().map(|&(a, b)| [a, b]).collect();
            let fl = FlSet::from_pairs(0, &pairs);
            prop_assume!(!fl.is_empty());
            let dense = sampled_boundary(&fl.extreme_points, 400);
            let brute = dense.iter().map(|&[z, x]| -q * z - x).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((fl.support(q) - brute).abs() <= 1e-9);
            for p in &fl.extreme_points {
                prop_assert!(p[0] >= 0.0);
            }
        }

        #[test]
        fn hull_contains_inputs(pts in prop::collection::vec((-3.0f64..3.0, -2.0f64..2.0), 3..12)) {
            let pairs: Vec<Point> = pts.iter().map(|&(a, b)| [a, b]).collect();
            let hull = convex_hull(&pairs);
            if hull.len() >= 3 {
                for p in &pairs {
                    for (a, b) in hull_segments(&hull) {
                        prop_assert!(cross(a, b, *p) >= -1e-9);
                    }
                }
            }
        }
    }
}
