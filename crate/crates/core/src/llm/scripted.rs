//! Deterministic offline agents. They read the same prompt text a model
//! would and answer in the canonical syntax, so the whole loop (prompting,
//! parsing, verification, hints) runs without a provider.

use std::collections::{BTreeSet, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::parse::{find_arrays, find_pairs};
use super::prompt::problem_from_description;
use super::{Agent, AgentSummary, ChatMessage, LlmError, Provider, Role};
use crate::geometry::{PathCandidate, Point};
use crate::number;
use crate::oracle::{self, OracleConfig};
use crate::problems::Problem;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScriptPolicy {
    /// Always answers the given path, or the straight I-center to G-center
    /// segment when none is given.
    EchoFixedPath(Option<PathCandidate>),
    /// Plans over the free-space points it has been told about, avoiding
    /// segments reported as colliding and continuing from the correct prefix.
    FollowFreeSpace,
    /// Random waypoints between the I and G centers, reproducible per seed.
    RandomWalk(u64),
    /// Answers with the reference planner's path.
    Oracle,
    /// Replays fixed replies in order; errors once they run out.
    Queued(Vec<String>),
}

impl ScriptPolicy {
    pub fn parse(spec: &str) -> Result<Self, String> {
        let spec = spec.trim();
        if let Some(rest) = spec.strip_prefix("random-walk") {
            let seed = rest.trim_matches(|c| matches!(c, '(' | ')' | ':' | '-'));
            let seed = if seed.is_empty() { 0 } else { seed.parse().map_err(|_| format!("bad seed in `{spec}`"))? };
            return Ok(ScriptPolicy::RandomWalk(seed));
        }
        match spec {
            "follow-free-space" => Ok(ScriptPolicy::FollowFreeSpace),
            "echo-fixed-path" => Ok(ScriptPolicy::EchoFixedPath(None)),
            "oracle" => Ok(ScriptPolicy::Oracle),
            other => Err(format!("unknown scripted policy `{other}`")),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ScriptPolicy::EchoFixedPath(_) => "echo-fixed-path".into(),
            ScriptPolicy::FollowFreeSpace => "follow-free-space".into(),
            ScriptPolicy::RandomWalk(seed) => format!("random-walk({seed})"),
            ScriptPolicy::Oracle => "oracle".into(),
            ScriptPolicy::Queued(_) => "queued".into(),
        }
    }
}

pub struct ScriptedAgent {
    policy: ScriptPolicy,
    rng: ChaCha8Rng,
    replies: std::collections::VecDeque<String>,
}

impl ScriptedAgent {
    pub fn new(policy: ScriptPolicy) -> Self {
        let seed = match policy {
            ScriptPolicy::RandomWalk(s) => s,
            _ => 0,
        };
        let replies = match &policy {
            ScriptPolicy::Queued(r) => r.iter().cloned().collect(),
            _ => Default::default(),
        };
        Self { policy, rng: ChaCha8Rng::seed_from_u64(seed), replies }
    }
}

fn answer(reasoning: &str, path: &PathCandidate) -> String {
    format!("{reasoning}\n{}", path.to_array_string())
}

fn problem_in(messages: &[ChatMessage]) -> Option<Problem> {
    messages
        .iter()
        .filter(|m| m.role == Role::User)
        .find_map(|m| problem_from_description(&m.text))
}

fn feedback(messages: &[ChatMessage]) -> impl Iterator<Item = &str> {
    messages
        .iter()
        .filter(|m| m.role == Role::User)
        .skip(1)
        .map(|m| m.text.as_str())
}

/// What the feedback so far says: colliding segments, the latest free-space
/// points and the latest correct prefix.
#[derive(Default)]
struct Knowledge {
    blocked: BTreeSet<(Point, Point)>,
    free_points: Vec<Point>,
    prefix: Vec<Point>,
}

fn edge_key(a: &Point, b: &Point) -> (Point, Point) {
    if a <= b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

fn gather(messages: &[ChatMessage]) -> Knowledge {
    let mut k = Knowledge::default();
    for text in feedback(messages) {
        let mut in_free = false;
        let mut free_here = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.starts_with("Segment ") && line.contains("intersects obstacle") {
                if let [a, b, ..] = find_pairs(line).as_slice() {
                    k.blocked.insert(edge_key(a, b));
                }
                in_free = false;
            } else if line.starts_with("These points are in free space") {
                in_free = true;
            } else if in_free && line.starts_with("x = ") {
                if let Some((_, rest)) = line.split_once(':') {
                    if let Some((_, _, pts)) = find_arrays(rest).pop() {
                        free_here.extend(pts);
                    }
                }
            } else if line.starts_with("Your path is correct up to and including waypoint") {
                if let Some((_, _, pts)) = find_arrays(line).pop() {
                    k.prefix = pts;
                }
                in_free = false;
            } else if line.starts_with("No part of your path is correct") {
                k.prefix.clear();
            } else {
                in_free = false;
            }
        }
        if !free_here.is_empty() {
            k.free_points = free_here;
        }
    }
    k
}

/// Dijkstra over `nodes` (complete graph minus blocked edges); `None` when
/// `to` is unreachable.
fn shortest(nodes: &[Point], from: usize, to: usize, blocked: &BTreeSet<(Point, Point)>) -> Option<Vec<usize>> {
    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    let coords: Vec<(f64, f64)> = nodes.iter().map(Point::to_f64).collect();
    let n = nodes.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[from] = 0.0;
    heap.push(Item(0.0, from));
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if u == to {
            break;
        }
        for v in 0..n {
            if v == u || blocked.contains(&edge_key(&nodes[u], &nodes[v])) {
                continue;
            }
            let nd = d + (coords[u].0 - coords[v].0).hypot(coords[u].1 - coords[v].1);
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(Item(nd, v));
            }
        }
    }
    if dist[to].is_infinite() {
        return None;
    }
    let mut order = vec![to];
    while *order.last().unwrap() != from {
        order.push(pred[*order.last().unwrap()]);
    }
    order.reverse();
    Some(order)
}

fn follow_free_space(problem: &Problem, messages: &[ChatMessage]) -> String {
    let start = problem.initial.center();
    let goal = problem.goal.center();
    let k = gather(messages);
    let mut nodes = vec![start.clone(), goal.clone()];
    for p in k.free_points.iter().chain(k.prefix.iter()) {
        if !nodes.contains(p) {
            nodes.push(p.clone());
        }
    }
    // Continue from the end of the correct prefix when that still leads
    // somewhere; otherwise plan from the I-center again.
    if let Some(end) = k.prefix.last() {
        let from = nodes.iter().position(|p| p == end).unwrap();
        if let Some(order) = shortest(&nodes, from, 1, &k.blocked) {
            let mut path = k.prefix.clone();
            path.extend(order.into_iter().skip(1).map(|i| nodes[i].clone()));
            return answer("Keeping the correct part of the previous path and continuing through free space.", &PathCandidate::new(path));
        }
    }
    let path = match shortest(&nodes, 0, 1, &k.blocked) {
        Some(order) => order.into_iter().map(|i| nodes[i].clone()).collect(),
        None => vec![start, goal],
    };
    answer("Connecting the initial set to the goal through known free points.", &PathCandidate::new(path))
}

fn random_walk(problem: &Problem, rng: &mut ChaCha8Rng) -> String {
    let (lo, hi) = problem.workspace.bounds();
    let ((x0, y0), (x1, y1)) = (lo.to_f64(), hi.to_f64());
    let mut path = vec![problem.initial.center()];
    for _ in 0..rng.gen_range(1..=3) {
        let x = rng.gen_range(x0..=x1);
        let y = rng.gen_range(y0..=y1);
        path.push(Point::new(number::from_f64_rounded(x, 3), number::from_f64_rounded(y, 3)));
    }
    path.push(problem.goal.center());
    answer("Trying a few intermediate points.", &PathCandidate::new(path))
}

impl Agent for ScriptedAgent {
    fn respond(&mut self, messages: &[ChatMessage]) -> Result<String, LlmError> {
        if let ScriptPolicy::Queued(_) = self.policy {
            return self
                .replies
                .pop_front()
                .ok_or_else(|| LlmError::Script("reply queue exhausted".into()));
        }
        if let ScriptPolicy::EchoFixedPath(Some(path)) = &self.policy {
            return Ok(answer("Here is my path.", path));
        }
        let Some(problem) = problem_in(messages) else {
            return Ok("I could not read the problem description.".into());
        };
        Ok(match &self.policy {
            ScriptPolicy::EchoFixedPath(_) => answer(
                "Going straight from the initial set to the goal.",
                &PathCandidate::new(vec![problem.initial.center(), problem.goal.center()]),
            ),
            ScriptPolicy::FollowFreeSpace => follow_free_space(&problem, messages),
            ScriptPolicy::RandomWalk(_) => random_walk(&problem, &mut self.rng),
            ScriptPolicy::Oracle => match oracle::plan(&problem, &OracleConfig::default()).path {
                Some(path) => answer("Following the visibility graph.", &path),
                None => "There is no collision-free path for this problem.".into(),
            },
            ScriptPolicy::Queued(_) => unreachable!(),
        })
    }

    fn summary(&self) -> AgentSummary {
        AgentSummary {
            provider: Provider::Scripted,
            model_id: self.policy.name(),
            temperature: None,
        }
    }
}
