//! Float geometry written independently of the library, for cross-checks.
#![allow(dead_code)]

use planloop::geometry::{ConvexPolygon, PathCandidate, Point};
use planloop::number::{int, ratio};
use planloop::problems::Problem;

pub type V = (f64, f64);

pub fn verts(poly: &ConvexPolygon) -> Vec<V> {
    poly.vertices().iter().map(Point::to_f64).collect()
}

/// Signed distance-like test: positive margin means strictly inside every edge.
pub fn inside_margin(poly: &[V], p: V) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            let len = (b.0 - a.0).hypot(b.1 - a.1);
            ((b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)) / len
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn point_segment_distance(p: V, a: V, b: V) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Euclidean distance from `p` to the closed polygon (0 inside).
pub fn point_polygon_distance(poly: &[V], p: V) -> f64 {
    if inside_margin(poly, p) >= 0.0 {
        return 0.0;
    }
    let n = poly.len();
    (0..n)
        .map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

fn segments_cross(a: V, b: V, c: V, d: V) -> bool {
    let orient = |p: V, q: V, r: V| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Distance between segment `ab` and the closed polygon.
pub fn segment_polygon_distance(poly: &[V], a: V, b: V) -> f64 {
    if inside_margin(poly, a) >= 0.0 || inside_margin(poly, b) >= 0.0 {
        return 0.0;
    }
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (c, d) = (poly[i], poly[(i + 1) % n]);
        if segments_cross(a, b, c, d) {
            return 0.0;
        }
        best = best
            .min(point_segment_distance(c, a, b))
            .min(point_segment_distance(d, a, b))
            .min(point_segment_distance(a, c, d))
            .min(point_segment_distance(b, c, d));
    }
    best
}

pub fn rect(x0: i64, y0: i64, x1: i64, y1: i64) -> ConvexPolygon {
    ConvexPolygon::rectangle(int(x0), int(y0), int(x1), int(y1)).unwrap()
}

/// `[0,10]²` with I and G in opposite corners.
pub fn square_problem(obstacles: Vec<ConvexPolygon>) -> Problem {
    let i = ConvexPolygon::rectangle(ratio(1, 2), ratio(1, 2), ratio(3, 2), ratio(3, 2)).unwrap();
    let g = ConvexPolygon::rectangle(ratio(17, 2), ratio(17, 2), ratio(19, 2), ratio(19, 2)).unwrap();
    Problem::new("test", rect(0, 0, 10, 10), i, g, obstacles, vec![]).unwrap()
}

/// Point with coordinates given in hundredths.
pub fn hp(x: i64, y: i64) -> Point {
    Point::new(ratio(x, 100), ratio(y, 100))
}

pub fn path_f64(path: &PathCandidate) -> Vec<V> {
    path.waypoints().iter().map(Point::to_f64).collect()
}
