//! Deterministic reference planner: a visibility graph over obstacle corners
//! pushed outward by a small clearance.
//!
//! The planner is sound (every returned path passes [`verify_path`]) and
//! complete up to the clearance: a corridor narrower than about twice the
//! clearance may be reported as blocked.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{segment_is_free, verify_path, PathCandidate, Point, Segment};
use crate::llm::prompt;
use crate::number::{self, ratio, Scalar, GRID_DIGITS};
use crate::problems::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Fewest segments; ties broken by Euclidean length.
    MinSegments,
    #[default]
    MinEuclideanLength,
}

impl std::str::FromStr for Objective {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min-segments" | "min_segments" => Ok(Objective::MinSegments),
            "min-length" | "min_euclidean_length" | "min-euclidean-length" => {
                Ok(Objective::MinEuclideanLength)
            }
            other => Err(format!("unknown objective `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Clearance as a fraction of the workspace diagonal.
    pub epsilon_fraction: Scalar,
    pub objective: Objective,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            epsilon_fraction: ratio(1, 1000),
            objective: Objective::default(),
        }
    }
}

impl OracleConfig {
    pub fn with_objective(objective: Objective) -> Self {
        Self { objective, ..Self::default() }
    }

    /// Absolute clearance for `problem`, snapped to the 10^-9 grid.
    pub fn clearance(&self, problem: &Problem) -> Scalar {
        clearance_for(problem, &self.epsilon_fraction)
    }
}

pub fn clearance_for(problem: &Problem, fraction: &Scalar) -> Scalar {
    let (lo, hi) = problem.workspace.bounds();
    let (w, h) = (number::to_f64(&(&hi.x - &lo.x)), number::to_f64(&(&hi.y - &lo.y)));
    let eps = number::to_f64(fraction) * w.hypot(h);
    number::from_f64_rounded(eps, GRID_DIGITS).max(ratio(1, 1_000_000_000))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub solvable: bool,
    pub path: Option<PathCandidate>,
    /// Euclidean length or segment count, per the objective.
    pub cost: Option<f64>,
}

/// Obstacle corners pushed outward along the angle bisector by `eps`.
fn inflated_corners(problem: &Problem, eps: f64) -> Vec<Point> {
    let mut out = Vec::new();
    for obstacle in &problem.obstacles {
        let verts: Vec<(f64, f64)> = obstacle.vertices().iter().map(Point::to_f64).collect();
        let n = verts.len();
        for i in 0..n {
            let prev = verts[(i + n - 1) % n];
            let cur = verts[i];
            let next = verts[(i + 1) % n];
            let outward = |a: (f64, f64), b: (f64, f64)| {
                let (dx, dy) = (b.0 - a.0, b.1 - a.1);
                let len = dx.hypot(dy);
                (dy / len, -dx / len)
            };
            let n1 = outward(prev, cur);
            let n2 = outward(cur, next);
            let (bx, by) = (n1.0 + n2.0, n1.1 + n2.1);
            let blen = bx.hypot(by);
            if blen == 0.0 {
                continue;
            }
            let x = cur.0 + eps * bx / blen;
            let y = cur.1 + eps * by / blen;
            out.push(Point::new(
                number::from_f64_rounded(x, GRID_DIGITS),
                number::from_f64_rounded(y, GRID_DIGITS),
            ));
        }
    }
    out
}

#[derive(PartialEq)]
struct Entry {
    key: (f64, f64),
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (key, node).
        other
            .key
            .0
            .total_cmp(&self.key.0)
            .then_with(|| other.key.1.total_cmp(&self.key.1))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn plan(problem: &Problem, config: &OracleConfig) -> OracleResult {
    let eps = number::to_f64(&config.clearance(problem));
    let start = problem.initial.center();
    let goal = problem.goal.center();

    let mut corners: Vec<Point> = inflated_corners(problem, eps)
        .into_iter()
        .filter(|p| problem.workspace.contains(p))
        .filter(|p| problem.obstacles.iter().all(|o| !o.contains(p)))
        .collect();
    corners.sort();
    corners.dedup();
    corners.retain(|p| *p != start && *p != goal);
    let mut nodes = vec![start, goal];
    nodes.extend(corners);
    let coords: Vec<(f64, f64)> = nodes.iter().map(Point::to_f64).collect();
    let dist = |a: usize, b: usize| {
        let (pa, pb) = (coords[a], coords[b]);
        (pa.0 - pb.0).hypot(pa.1 - pb.1)
    };

    let n = nodes.len();
    let mut best: Vec<Option<(f64, f64)>> = vec![None; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[0] = Some((0.0, 0.0));
    heap.push(Entry { key: (0.0, 0.0), node: 0 });
    while let Some(Entry { key, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if node == 1 {
            break;
        }
        for next in 0..n {
            if done[next] {
                continue;
            }
            let step = dist(node, next);
            let candidate = match config.objective {
                Objective::MinEuclideanLength => (key.0 + step, key.1 + 1.0),
                Objective::MinSegments => (key.0 + 1.0, key.1 + step),
            };
            let improves = match best[next] {
                None => true,
                Some(b) => candidate.0 < b.0 || (candidate.0 == b.0 && candidate.1 < b.1),
            };
            if !improves {
                continue;
            }
            if !segment_is_free(problem, &Segment::new(nodes[node].clone(), nodes[next].clone())) {
                continue;
            }
            best[next] = Some(candidate);
            pred[next] = Some(node);
            heap.push(Entry { key: candidate, node: next });
        }
    }

    let Some(cost) = best[1].filter(|_| done[1]) else {
        return OracleResult { solvable: false, path: None, cost: None };
    };
    let mut order = vec![1];
    while let Some(p) = pred[*order.last().unwrap()] {
        order.push(p);
    }
    order.reverse();
    let path = PathCandidate::new(order.into_iter().map(|i| nodes[i].clone()).collect());
    let report = verify_path(problem, &path).expect("oracle path is non-empty");
    assert!(report.is_correct, "oracle produced an incorrect path for {}", problem.name);
    OracleResult {
        solvable: true,
        path: Some(path),
        cost: Some(cost.0),
    }
}

pub fn solvable(problem: &Problem, config: &OracleConfig) -> bool {
    plan(problem, config).solvable
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("unsolvable problems in batch: {}", .0.join(", "))]
    UnsolvableInBatch(Vec<String>),
}

/// One supervised example: the initial prompt and the bare solution array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinetuneRecord {
    pub problem_name: String,
    pub system: String,
    pub user: String,
    pub completion: String,
}

impl FinetuneRecord {
    pub fn prompt(&self) -> String {
        format!("{}\n\n{}", self.system, self.user)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Envelope {
    /// `{"prompt": ..., "completion": ...}`
    #[default]
    PromptCompletion,
    /// `{"messages": [system, user, assistant]}`
    Chat,
}

pub fn export_finetune_dataset(
    problems: &[Problem],
    config: &OracleConfig,
) -> Result<Vec<FinetuneRecord>, ExportError> {
    let mut records = Vec::with_capacity(problems.len());
    let mut unsolvable = Vec::new();
    for problem in problems {
        match plan(problem, config).path {
            Some(path) => {
                let (system, user) = prompt::initial_prompt_text(problem);
                records.push(FinetuneRecord {
                    problem_name: problem.name.clone(),
                    system,
                    user,
                    completion: path.to_array_string(),
                });
            }
            None => unsolvable.push(problem.name.clone()),
        }
    }
    if unsolvable.is_empty() {
        Ok(records)
    } else {
        Err(ExportError::UnsolvableInBatch(unsolvable))
    }
}

pub fn dataset_to_jsonl(records: &[FinetuneRecord], envelope: Envelope) -> String {
    let mut out = String::new();
    for r in records {
        let value = match envelope {
            Envelope::PromptCompletion => serde_json::json!({
                "prompt": r.prompt(),
                "completion": r.completion,
            }),
            Envelope::Chat => serde_json::json!({
                "messages": [
                    {"role": "system", "content": r.system},
                    {"role": "user", "content": r.user},
                    {"role": "assistant", "content": r.completion},
                ]
            }),
        };
        out.push_str(&value.to_string());
        out.push('\n');
    }
    out
}
