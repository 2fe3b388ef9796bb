//! Exact 2D predicates over convex polygons and segments.
//!
//! Every predicate is decided over arbitrary-precision rationals. Polygons are
//! closed sets: touching a boundary counts as containment or intersection.

use std::fmt;

use num::{Signed, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::number::{self, format_decimal, parse_decimal, DecimalError, Scalar, GRID_DIGITS};
use crate::problems::Problem;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: Scalar,
    pub y: Scalar,
}

impl Point {
    pub fn new(x: Scalar, y: Scalar) -> Self {
        Self { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        Self::new(number::int(x), number::int(y))
    }

    pub fn parse(x: &str, y: &str) -> Result<Self, DecimalError> {
        Ok(Self::new(parse_decimal(x)?, parse_decimal(y)?))
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (number::to_f64(&self.x), number::to_f64(&self.y))
    }

    pub fn translate(&self, dx: &Scalar, dy: &Scalar) -> Self {
        Self::new(&self.x + dx, &self.y + dy)
    }

    pub fn squared_distance(&self, other: &Point) -> Scalar {
        let dx = &self.x - &other.x;
        let dy = &self.y - &other.y;
        &dx * &dx + &dy * &dy
    }

    /// `[x, y]` in canonical response syntax.
    pub fn to_pair_string(&self) -> String {
        format!("[{}, {}]", format_decimal(&self.x), format_decimal(&self.y))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", format_decimal(&self.x), format_decimal(&self.y))
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut tup = serializer.serialize_tuple(2)?;
        tup.serialize_element(&format_decimal(&self.x))?;
        tup.serialize_element(&format_decimal(&self.y))?;
        tup.end()
    }
}

/// A coordinate in a problem file: a decimal string, or a JSON number (read
/// through its shortest round-trip representation).
#[derive(Deserialize)]
#[serde(untagged)]
enum Coordinate {
    Text(String),
    Integer(i64),
    Float(f64),
}

impl Coordinate {
    fn into_scalar<E: de::Error>(self) -> Result<Scalar, E> {
        let text = match self {
            Coordinate::Text(s) => s,
            Coordinate::Integer(i) => i.to_string(),
            Coordinate::Float(f) if f.is_finite() => format!("{f}"),
            Coordinate::Float(f) => return Err(E::custom(format!("non-finite coordinate {f}"))),
        };
        parse_decimal(&text).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PairVisitor;
        impl<'de> Visitor<'de> for PairVisitor {
            type Value = Point;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an [x, y] pair of decimal coordinates")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Point, A::Error> {
                let x: Coordinate = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let y: Coordinate = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(Point::new(x.into_scalar()?, y.into_scalar()?))
            }
        }
        deserializer.deserialize_seq(PairVisitor)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.b.clone(), self.a.clone())
    }
}

/// `normal · p <= offset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfPlane {
    pub normal: (Scalar, Scalar),
    pub offset: Scalar,
}

impl HalfPlane {
    fn eval(&self, p: &Point) -> Scalar {
        &self.normal.0 * &p.x + &self.normal.1 * &p.y
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.eval(p) <= self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolygonError {
    #[error("polygon needs at least 3 non-collinear vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not convex")]
    NotConvex,
}

fn cross(o: &Point, a: &Point, b: &Point) -> Scalar {
    (&a.x - &o.x) * (&b.y - &o.y) - (&a.y - &o.y) * (&b.x - &o.x)
}

/// A closed convex region: CCW vertices plus the equivalent half-plane form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
    halfplanes: Vec<HalfPlane>,
    min: Point,
    max: Point,
}

impl ConvexPolygon {
    /// Validates and normalizes a vertex ring: duplicate and collinear
    /// vertices are dropped and clockwise input is reversed.
    pub fn new(vertices: Vec<Point>) -> Result<Self, PolygonError> {
        let mut ring: Vec<Point> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if ring.last() != Some(&v) {
                ring.push(v);
            }
        }
        while ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        // Drop collinear vertices until every turn is a real one.
        loop {
            let n = ring.len();
            if n < 3 {
                return Err(PolygonError::TooFewVertices(n));
            }
            let collinear = (0..n).find(|&i| {
                cross(&ring[(i + n - 1) % n], &ring[i], &ring[(i + 1) % n]).is_zero()
            });
            match collinear {
                Some(i) => {
                    ring.remove(i);
                }
                None => break,
            }
        }
        let n = ring.len();
        let area2: Scalar = (0..n)
            .map(|i| {
                let (p, q) = (&ring[i], &ring[(i + 1) % n]);
                &p.x * &q.y - &q.x * &p.y
            })
            .sum();
        if area2.is_negative() {
            ring.reverse();
        }
        // Strict convexity and simplicity: every other vertex lies strictly left of each edge.
        for i in 0..n {
            let (a, b) = (&ring[i], &ring[(i + 1) % n]);
            for (j, v) in ring.iter().enumerate() {
                if j == i || j == (i + 1) % n {
                    continue;
                }
                if !cross(a, b, v).is_positive() {
                    return Err(PolygonError::NotConvex);
                }
            }
        }
        let halfplanes = (0..n)
            .map(|i| {
                let (a, b) = (&ring[i], &ring[(i + 1) % n]);
                let normal = (&b.y - &a.y, &a.x - &b.x);
                let offset = &normal.0 * &a.x + &normal.1 * &a.y;
                HalfPlane { normal, offset }
            })
            .collect();
        let min_x = ring.iter().map(|p| &p.x).min().cloned().unwrap();
        let min_y = ring.iter().map(|p| &p.y).min().cloned().unwrap();
        let max_x = ring.iter().map(|p| &p.x).max().cloned().unwrap();
        let max_y = ring.iter().map(|p| &p.y).max().cloned().unwrap();
        Ok(Self {
            vertices: ring,
            halfplanes,
            min: Point::new(min_x, min_y),
            max: Point::new(max_x, max_y),
        })
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: Scalar, y0: Scalar, x1: Scalar, y1: Scalar) -> Result<Self, PolygonError> {
        Self::new(vec![
            Point::new(x0.clone(), y0.clone()),
            Point::new(x1.clone(), y0),
            Point::new(x1, y1.clone()),
            Point::new(x0, y1),
        ])
    }

    /// Convex hull of a point set (collinear points excluded).
    pub fn hull(points: &[Point]) -> Result<Self, PolygonError> {
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup();
        if pts.len() < 3 {
            return Err(PolygonError::TooFewVertices(pts.len()));
        }
        let mut lower: Vec<Point> = Vec::new();
        for p in &pts {
            while lower.len() >= 2
                && !cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p).is_positive()
            {
                lower.pop();
            }
            lower.push(p.clone());
        }
        let mut upper: Vec<Point> = Vec::new();
        for p in pts.iter().rev() {
            while upper.len() >= 2
                && !cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p).is_positive()
            {
                upper.pop();
            }
            upper.push(p.clone());
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self::new(lower)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn halfplanes(&self) -> &[HalfPlane] {
        &self.halfplanes
    }

    /// Lower-left and upper-right corners of the bounding box.
    pub fn bounds(&self) -> (&Point, &Point) {
        (&self.min, &self.max)
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i].clone(), self.vertices[(i + 1) % n].clone()))
    }

    pub fn contains(&self, p: &Point) -> bool {
        contains(self, p)
    }

    /// Vertex average snapped to the 10^-9 grid so it serializes exactly.
    /// Falls back to the exact average if snapping would leave the polygon.
    pub fn center(&self) -> Point {
        let n = number::int(self.vertices.len() as i64);
        let sx: Scalar = self.vertices.iter().map(|p| p.x.clone()).sum();
        let sy: Scalar = self.vertices.iter().map(|p| p.y.clone()).sum();
        let exact = Point::new(sx / &n, sy / &n);
        let snapped = Point::new(
            number::round_to_digits(&exact.x, GRID_DIGITS),
            number::round_to_digits(&exact.y, GRID_DIGITS),
        );
        if self.contains(&snapped) {
            snapped
        } else {
            exact
        }
    }

    pub fn translate(&self, dx: &Scalar, dy: &Scalar) -> Self {
        Self::new(self.vertices.iter().map(|p| p.translate(dx, dy)).collect())
            .expect("translation preserves convexity")
    }

    /// Whether two closed convex polygons share at least one point.
    pub fn intersects(&self, other: &ConvexPolygon) -> bool {
        if !boxes_overlap(self.bounds(), other.bounds()) {
            return false;
        }
        self.edges().any(|e| segment_intersects(&e, other))
            || other.vertices.first().is_some_and(|v| self.contains(v))
    }

    /// Squared Euclidean distance from `p` to the closed polygon (zero inside).
    pub fn squared_distance(&self, p: &Point) -> Scalar {
        if self.contains(p) {
            return Scalar::zero();
        }
        self.edges()
            .map(|e| squared_distance_to_segment(p, &e))
            .min()
            .unwrap()
    }

    /// Intersection with a half-plane, or `None` if fewer than three
    /// non-collinear vertices remain.
    pub fn clip(&self, h: &HalfPlane) -> Option<ConvexPolygon> {
        let n = self.vertices.len();
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..n {
            let cur = &self.vertices[i];
            let next = &self.vertices[(i + 1) % n];
            let s_cur = &h.offset - h.eval(cur);
            let s_next = &h.offset - h.eval(next);
            if !s_cur.is_negative() {
                out.push(cur.clone());
            }
            if (s_cur.is_positive() && s_next.is_negative()) || (s_cur.is_negative() && s_next.is_positive()) {
                let t = &s_cur / (&s_cur - &s_next);
                out.push(Point::new(
                    &cur.x + &t * (&next.x - &cur.x),
                    &cur.y + &t * (&next.y - &cur.y),
                ));
            }
        }
        ConvexPolygon::new(out).ok()
    }

    pub fn signed_area(&self) -> Scalar {
        let n = self.vertices.len();
        let twice: Scalar = (0..n)
            .map(|i| {
                let (p, q) = (&self.vertices[i], &self.vertices[(i + 1) % n]);
                &p.x * &q.y - &q.x * &p.y
            })
            .sum();
        twice / number::int(2)
    }
}

impl Serialize for ConvexPolygon {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.vertices.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConvexPolygon {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let vertices = Vec::<Point>::deserialize(deserializer)?;
        ConvexPolygon::new(vertices).map_err(de::Error::custom)
    }
}

fn boxes_overlap(a: (&Point, &Point), b: (&Point, &Point)) -> bool {
    a.0.x <= b.1.x && b.0.x <= a.1.x && a.0.y <= b.1.y && b.0.y <= a.1.y
}

pub fn squared_distance_to_segment(p: &Point, seg: &Segment) -> Scalar {
    let dx = &seg.b.x - &seg.a.x;
    let dy = &seg.b.y - &seg.a.y;
    let len2 = &dx * &dx + &dy * &dy;
    if len2.is_zero() {
        return p.squared_distance(&seg.a);
    }
    let t = ((&p.x - &seg.a.x) * &dx + (&p.y - &seg.a.y) * &dy) / &len2;
    let one = number::int(1);
    let t = if t.is_negative() {
        Scalar::zero()
    } else if t > one {
        one
    } else {
        t
    };
    let q = Point::new(&seg.a.x + &t * &dx, &seg.a.y + &t * &dy);
    p.squared_distance(&q)
}

/// Closed containment: boundary points are inside.
pub fn contains(poly: &ConvexPolygon, p: &Point) -> bool {
    poly.halfplanes.iter().all(|h| h.contains(p))
}

/// Whether some point `a + t(b - a)`, `t ∈ [0, 1]`, lies in the closed polygon.
///
/// Each half-plane restricts `t` to an interval; the segment hits the polygon
/// iff the intersection of those intervals with `[0, 1]` is non-empty.
pub fn segment_intersects(seg: &Segment, poly: &ConvexPolygon) -> bool {
    let seg_min = Point::new(
        (&seg.a.x).min(&seg.b.x).clone(),
        (&seg.a.y).min(&seg.b.y).clone(),
    );
    let seg_max = Point::new(
        (&seg.a.x).max(&seg.b.x).clone(),
        (&seg.a.y).max(&seg.b.y).clone(),
    );
    if !boxes_overlap((&seg_min, &seg_max), poly.bounds()) {
        return false;
    }
    let dx = &seg.b.x - &seg.a.x;
    let dy = &seg.b.y - &seg.a.y;
    let mut lo = Scalar::zero();
    let mut hi = number::int(1);
    for h in &poly.halfplanes {
        // (n·d) t <= offset - n·a
        let slope = &h.normal.0 * &dx + &h.normal.1 * &dy;
        let slack = &h.offset - h.eval(&seg.a);
        if slope.is_zero() {
            if slack.is_negative() {
                return false;
            }
            continue;
        }
        let bound = slack / &slope;
        if slope.is_positive() {
            if bound < hi {
                hi = bound;
            }
        } else if bound > lo {
            lo = bound;
        }
        if lo > hi {
            return false;
        }
    }
    lo <= hi
}

/// An ordered waypoint sequence proposed by an agent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PathCandidate(pub Vec<Point>);

impl PathCandidate {
    pub fn new(waypoints: Vec<Point>) -> Self {
        Self(waypoints)
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.0
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.0.windows(2).map(|w| Segment::new(w[0].clone(), w[1].clone()))
    }

    /// `[[x1, y1], [x2, y2], ...]` in canonical response syntax.
    pub fn to_array_string(&self) -> String {
        let pairs: Vec<String> = self.0.iter().map(Point::to_pair_string).collect();
        format!("[{}]", pairs.join(", "))
    }

    pub fn translate(&self, dx: &Scalar, dy: &Scalar) -> Self {
        Self(self.0.iter().map(|p| p.translate(dx, dy)).collect())
    }
}

/// Number of segments: waypoint count minus one.
pub fn path_length(path: &PathCandidate) -> usize {
    path.0.len().saturating_sub(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("path has no waypoints")]
    EmptyPath,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentCollision {
    pub segment_index: usize,
    pub obstacle_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub starts_in_initial: bool,
    pub ends_in_goal: bool,
    /// Every intersecting (segment, obstacle) pair, lexicographically sorted.
    pub segment_collisions: Vec<SegmentCollision>,
    pub is_correct: bool,
}

/// Indices of obstacles intersected by `seg`, ascending.
pub fn colliding_obstacles(problem: &Problem, seg: &Segment) -> Vec<usize> {
    problem
        .obstacles
        .iter()
        .enumerate()
        .filter(|(_, o)| segment_intersects(seg, o))
        .map(|(j, _)| j)
        .collect()
}

pub fn segment_is_free(problem: &Problem, seg: &Segment) -> bool {
    problem.obstacles.iter().all(|o| !segment_intersects(seg, o))
}

pub fn verify_path(problem: &Problem, path: &PathCandidate) -> Result<VerificationReport, VerifyError> {
    let (first, last) = match (path.0.first(), path.0.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(VerifyError::EmptyPath),
    };
    let starts_in_initial = problem.initial.contains(first);
    let ends_in_goal = problem.goal.contains(last);
    let segment_collisions: Vec<SegmentCollision> = path
        .segments()
        .enumerate()
        .flat_map(|(i, seg)| {
            colliding_obstacles(problem, &seg)
                .into_iter()
                .map(move |j| SegmentCollision { segment_index: i, obstacle_index: j })
        })
        .collect();
    let is_correct = starts_in_initial && ends_in_goal && segment_collisions.is_empty();
    Ok(VerificationReport {
        starts_in_initial,
        ends_in_goal,
        segment_collisions,
        is_correct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::{int, ratio};

    fn p(x: &str, y: &str) -> Point {
        Point::parse(x, y).unwrap()
    }

    fn square(x0: i64, y0: i64, x1: i64, y1: i64) -> ConvexPolygon {
        ConvexPolygon::rectangle(int(x0), int(y0), int(x1), int(y1)).unwrap()
    }

    #[test]
    fn containment_is_closed() {
        let unit = square(0, 0, 1, 1);
        assert!(contains(&unit, &p("0.5", "0.5")));
        assert!(contains(&unit, &p("1", "1")));
        assert!(!contains(&unit, &p("1.000001", "0.5")));
        for v in unit.vertices() {
            assert!(contains(&unit, v));
        }
    }

    #[test]
    fn segment_examples() {
        let sq = square(2, 2, 4, 4);
        let seg = |a: (i64, i64), b: (i64, i64)| {
            Segment::new(Point::from_ints(a.0, a.1), Point::from_ints(b.0, b.1))
        };
        assert!(segment_intersects(&seg((0, 3), (6, 3)), &sq));
        assert!(!segment_intersects(&seg((0, 5), (6, 5)), &sq));
        assert!(segment_intersects(&seg((0, 4), (6, 4)), &sq));
        // Corner graze.
        assert!(segment_intersects(&seg((0, 6), (6, 0)), &sq));
        assert!(segment_intersects(&seg((0, 7), (7, 0)), &sq));
        assert!(!segment_intersects(&seg((0, 9), (9, 0)), &sq));
        // Ends just short of the polygon.
        assert!(!segment_intersects(&seg((0, 3), (1, 3)), &sq));
    }

    #[test]
    fn degenerate_segment_is_a_point_test() {
        let sq = square(2, 2, 4, 4);
        let inside = Point::from_ints(3, 3);
        let outside = Point::from_ints(5, 5);
        assert!(segment_intersects(&Segment::new(inside.clone(), inside), &sq));
        assert!(!segment_intersects(&Segment::new(outside.clone(), outside), &sq));
    }

    #[test]
    fn normalization_drops_collinear_and_reorients() {
        let quad = ConvexPolygon::new(vec![
            Point::from_ints(0, 0),
            Point::from_ints(0, 2),
            Point::from_ints(2, 2),
            Point::from_ints(2, 1),
            Point::from_ints(2, 0),
        ])
        .unwrap();
        assert_eq!(quad.vertices().len(), 4);
        assert!(quad.signed_area().is_positive());
        for (i, v) in quad.vertices().iter().enumerate() {
            let tight = quad.halfplanes().iter().filter(|h| h.eval(v) == h.offset).count();
            assert_eq!(tight, 2, "vertex {i} should be tight on exactly its two edges");
        }
    }

    #[test]
    fn rejects_bad_polygons() {
        assert_eq!(
            ConvexPolygon::new(vec![Point::from_ints(0, 0), Point::from_ints(1, 1), Point::from_ints(2, 2)]),
            Err(PolygonError::TooFewVertices(2))
        );
        let bowtie = vec![
            Point::from_ints(0, 0),
            Point::from_ints(2, 2),
            Point::from_ints(2, 0),
            Point::from_ints(0, 2),
        ];
        assert_eq!(ConvexPolygon::new(bowtie), Err(PolygonError::NotConvex));
        let dart = vec![
            Point::from_ints(0, 0),
            Point::from_ints(4, 0),
            Point::from_ints(1, 1),
            Point::from_ints(0, 4),
        ];
        assert_eq!(ConvexPolygon::new(dart), Err(PolygonError::NotConvex));
    }

    #[test]
    fn hull_of_four_points() {
        let tri = ConvexPolygon::hull(&[
            Point::from_ints(0, 0),
            Point::from_ints(4, 0),
            Point::from_ints(1, 1),
            Point::from_ints(0, 4),
        ])
        .unwrap();
        assert_eq!(tri.vertices().len(), 3);
        let quad = ConvexPolygon::hull(&[
            Point::from_ints(0, 0),
            Point::from_ints(4, 0),
            Point::from_ints(4, 4),
            Point::from_ints(0, 4),
        ])
        .unwrap();
        assert_eq!(quad.vertices().len(), 4);
        assert!(ConvexPolygon::hull(&[
            Point::from_ints(0, 0),
            Point::from_ints(1, 1),
            Point::from_ints(2, 2),
            Point::from_ints(3, 3),
        ])
        .is_err());
    }

    #[test]
    fn polygon_intersection_cases() {
        let a = square(0, 0, 2, 2);
        assert!(a.intersects(&square(1, 1, 3, 3)));
        assert!(a.intersects(&square(2, 0, 3, 1)), "shared edge");
        assert!(!a.intersects(&square(3, 3, 4, 4)));
        assert!(square(0, 0, 10, 10).intersects(&square(4, 4, 5, 5)), "containment");
        assert!(square(4, 4, 5, 5).intersects(&square(0, 0, 10, 10)), "contained");
    }

    #[test]
    fn distances() {
        let sq = square(0, 0, 2, 2);
        assert_eq!(sq.squared_distance(&Point::from_ints(1, 1)), int(0));
        assert_eq!(sq.squared_distance(&Point::from_ints(3, 1)), int(1));
        assert_eq!(sq.squared_distance(&Point::from_ints(3, 3)), int(2));
        assert_eq!(
            squared_distance_to_segment(&Point::from_ints(1, 1), &Segment::new(Point::from_ints(0, 0), Point::from_ints(2, 0))),
            int(1)
        );
    }

    #[test]
    fn center_is_inside_and_exact() {
        let sq = square(0, 0, 1, 1);
        assert_eq!(sq.center(), Point::new(ratio(1, 2), ratio(1, 2)));
        let tri = ConvexPolygon::new(vec![Point::from_ints(0, 0), Point::from_ints(1, 0), Point::from_ints(0, 1)]).unwrap();
        let c = tri.center();
        assert!(tri.contains(&c));
        assert!(crate::number::terminating_digits(&c.x).is_some());
    }

    #[test]
    fn path_length_counts_segments() {
        let pt = Point::from_ints(0, 0);
        assert_eq!(path_length(&PathCandidate::new(vec![pt.clone()])), 0);
        assert_eq!(path_length(&PathCandidate::new(vec![pt.clone(); 2])), 1);
        assert_eq!(path_length(&PathCandidate::new(vec![pt; 6])), 5);
    }

    #[test]
    fn point_serde_accepts_strings_and_numbers() {
        let a: Point = serde_json::from_str(r#"["0.1", "2"]"#).unwrap();
        let b: Point = serde_json::from_str("[0.1, 2]").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.x, ratio(1, 10));
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"["0.1","2"]"#);
        assert!(serde_json::from_str::<Point>("[1, 2, 3]").is_err());
        assert!(serde_json::from_str::<Point>(r#"["0.1234567890123", "0"]"#).is_err());
    }
}
