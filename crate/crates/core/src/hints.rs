//! The four hint artifacts computed from a problem and the latest candidate.

use num::Signed;
use serde::{Deserialize, Serialize};

use crate::geometry::{segment_is_free, verify_path, PathCandidate, Point, VerifyError};
use crate::number::{self, int, Scalar, GRID_DIGITS};
use crate::oracle::OracleConfig;
use crate::problems::Problem;

pub use crate::render::{render_image, ImageHint, RenderSettings};

pub const DEFAULT_SLICE_COUNT: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentHit {
    pub segment_index: usize,
    pub obstacle_index: usize,
    pub from: Point,
    pub to: Point,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionHint {
    pub starts_in_initial: bool,
    pub ends_in_goal: bool,
    pub colliding_segments: Vec<SegmentHit>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    pub x: Scalar,
    pub safe_points: Vec<Point>,
}

// Scalar has no serde impl of its own; slices go through the decimal form.
mod slice_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Raw {
        x: String,
        safe_points: Vec<Point>,
    }

    pub fn serialize<S: Serializer>(slices: &[Slice], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Raw> = slices
            .iter()
            .map(|sl| Raw {
                x: number::format_decimal(&sl.x),
                safe_points: sl.safe_points.clone(),
            })
            .collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Slice>, D::Error> {
        let raw = Vec::<Raw>::deserialize(d)?;
        raw.into_iter()
            .map(|r| {
                Ok(Slice {
                    x: number::parse_decimal(&r.x).map_err(serde::de::Error::custom)?,
                    safe_points: r.safe_points,
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeSpaceHint {
    #[serde(with = "slice_serde")]
    pub slices: Vec<Slice>,
}

impl FreeSpaceHint {
    pub fn points(&self) -> impl Iterator<Item = &Point> {
        self.slices.iter().flat_map(|s| s.safe_points.iter())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixHint {
    pub prefix: Vec<Point>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintBundle {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub collision: Option<CollisionHint>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub free_space: Option<FreeSpaceHint>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub prefix: Option<PrefixHint>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub image: Option<ImageHint>,
}

impl HintBundle {
    pub fn is_empty(&self) -> bool {
        self.collision.is_none() && self.free_space.is_none() && self.prefix.is_none() && self.image.is_none()
    }
}

pub fn collision_hint(problem: &Problem, path: &PathCandidate) -> Result<CollisionHint, VerifyError> {
    let report = verify_path(problem, path)?;
    let pts = path.waypoints();
    let colliding_segments = report
        .segment_collisions
        .iter()
        .map(|c| SegmentHit {
            segment_index: c.segment_index,
            obstacle_index: c.obstacle_index,
            from: pts[c.segment_index].clone(),
            to: pts[c.segment_index + 1].clone(),
        })
        .collect();
    Ok(CollisionHint {
        starts_in_initial: report.starts_in_initial,
        ends_in_goal: report.ends_in_goal,
        colliding_segments,
    })
}

/// Longest prefix that starts in the initial set and has only collision-free
/// segments. Empty when the first waypoint is outside the initial set.
pub fn prefix_hint(problem: &Problem, path: &PathCandidate) -> Result<PrefixHint, VerifyError> {
    let pts = path.waypoints();
    let first = pts.first().ok_or(VerifyError::EmptyPath)?;
    if !problem.initial.contains(first) {
        return Ok(PrefixHint { prefix: Vec::new() });
    }
    let good_segments = path
        .segments()
        .take_while(|seg| segment_is_free(problem, seg))
        .count();
    Ok(PrefixHint {
        prefix: pts[..=good_segments].to_vec(),
    })
}

/// Closed `y`-interval where the vertical line `x` meets each obstacle.
fn obstacle_cross_sections(problem: &Problem, x: &Scalar) -> Vec<(Scalar, Scalar)> {
    let mut out = Vec::new();
    for obstacle in &problem.obstacles {
        let (lo, hi) = obstacle.bounds();
        if x < &lo.x || x > &hi.x {
            continue;
        }
        let mut ys: Vec<Scalar> = Vec::new();
        for edge in obstacle.edges() {
            let (a, b) = (&edge.a, &edge.b);
            if a.x == b.x {
                if &a.x == x {
                    ys.push(a.y.clone());
                    ys.push(b.y.clone());
                }
                continue;
            }
            let (l, r) = if a.x < b.x { (a, b) } else { (b, a) };
            if x < &l.x || x > &r.x {
                continue;
            }
            let t = (x - &l.x) / (&r.x - &l.x);
            ys.push(&l.y + t * (&r.y - &l.y));
        }
        if let (Some(min), Some(max)) = (ys.iter().min(), ys.iter().max()) {
            out.push((min.clone(), max.clone()));
        }
    }
    out
}

fn has_clearance(problem: &Problem, p: &Point, eps_sq: &Scalar) -> bool {
    problem.workspace.contains(p) && problem.obstacles.iter().all(|o| &o.squared_distance(p) >= eps_sq)
}

/// Safe waypoints on `slice_count` evenly spaced vertical lines, using the
/// oracle's default clearance.
pub fn free_space_hint(problem: &Problem, slice_count: usize) -> FreeSpaceHint {
    let eps = OracleConfig::default().clearance(problem);
    free_space_hint_with_clearance(problem, slice_count, &eps)
}

/// For each slice-center line, every maximal obstacle-free interval longer
/// than `2·eps` contributes its midpoint. A midpoint that comes closer than
/// `eps` to an obstacle is replaced by the nearest evenly spaced point of the
/// shrunk interval that keeps the clearance; if none does, the interval is
/// skipped.
pub fn free_space_hint_with_clearance(problem: &Problem, slice_count: usize, eps: &Scalar) -> FreeSpaceHint {
    assert!(slice_count >= 1, "slice_count must be positive");
    let (lo, hi) = problem.workspace.bounds();
    let width = &hi.x - &lo.x;
    let eps_sq = eps * eps;
    let two = int(2);
    let slices = (0..slice_count)
        .map(|i| {
            let x = &lo.x + &width * int(2 * i as i64 + 1) / int(2 * slice_count as i64);
            let x = number::round_to_digits(&x, GRID_DIGITS);
            let mut blocked = obstacle_cross_sections(problem, &x);
            blocked.sort();
            // Sweep the sorted blocked intervals to produce the free gaps.
            let mut free: Vec<(Scalar, Scalar)> = Vec::new();
            let mut cursor = lo.y.clone();
            for (b_lo, b_hi) in blocked {
                if b_lo > cursor {
                    free.push((cursor.clone(), b_lo));
                }
                if b_hi > cursor {
                    cursor = b_hi;
                }
            }
            if hi.y > cursor {
                free.push((cursor, hi.y.clone()));
            }
            let safe_points = free
                .into_iter()
                .filter_map(|(a, b)| {
                    let inner_lo = &a + eps;
                    let inner_hi = &b - eps;
                    let span = &inner_hi - &inner_lo;
                    if !span.is_positive() {
                        return None;
                    }
                    const STEPS: i64 = 16;
                    let mut offsets: Vec<i64> = (0..=STEPS).collect();
                    offsets.sort_by_key(|j| ((2 * j - STEPS).abs(), *j));
                    offsets.into_iter().find_map(|j| {
                        let y = if j * 2 == STEPS {
                            (&a + &b) / &two
                        } else {
                            &inner_lo + &span * int(j) / int(STEPS)
                        };
                        let p = Point::new(x.clone(), number::round_to_digits(&y, GRID_DIGITS));
                        has_clearance(problem, &p, &eps_sq).then_some(p)
                    })
                })
                .collect();
            Slice { x, safe_points }
        })
        .collect();
    FreeSpaceHint { slices }
}

/// Which hints a strategy asks for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintStrategy {
    pub collision: bool,
    pub free_space: bool,
    pub prefix: bool,
    pub image: bool,
    pub slice_count: usize,
}

impl HintStrategy {
    fn preset(collision: bool, free_space: bool, prefix: bool, image: bool) -> Self {
        Self {
            collision,
            free_space,
            prefix,
            image,
            slice_count: DEFAULT_SLICE_COUNT,
        }
    }

    pub fn none() -> Self {
        Self::preset(false, false, false, false)
    }

    pub fn collision_only() -> Self {
        Self::preset(true, false, false, false)
    }

    pub fn cfp() -> Self {
        Self::preset(true, true, true, false)
    }

    pub fn cfpi() -> Self {
        Self::preset(true, true, true, true)
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name.to_ascii_uppercase().as_str() {
            "NONE" => Some(Self::none()),
            "C" => Some(Self::collision_only()),
            "CFP" => Some(Self::cfp()),
            "CFPI" => Some(Self::cfpi()),
            _ => None,
        }
    }

    pub fn name(&self) -> String {
        let mut s = String::new();
        for (on, c) in [(self.collision, 'C'), (self.free_space, 'F'), (self.prefix, 'P'), (self.image, 'I')] {
            if on {
                s.push(c);
            }
        }
        if s.is_empty() {
            "none".into()
        } else {
            s
        }
    }

    pub fn any(&self) -> bool {
        self.collision || self.free_space || self.prefix || self.image
    }
}

/// Computes every hint the strategy enables for the latest candidate.
pub fn compute_hints(
    problem: &Problem,
    path: &PathCandidate,
    strategy: &HintStrategy,
    render: &RenderSettings,
) -> Result<HintBundle, VerifyError> {
    Ok(HintBundle {
        collision: strategy.collision.then(|| collision_hint(problem, path)).transpose()?,
        free_space: strategy.free_space.then(|| free_space_hint(problem, strategy.slice_count)),
        prefix: strategy.prefix.then(|| prefix_hint(problem, path)).transpose()?,
        image: strategy.image.then(|| render_image(problem, Some(path), render)),
    })
}
