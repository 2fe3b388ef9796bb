//! Problem model, the JSON problem-file format, the handcrafted suite and the
//! seeded random generator.

use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{ConvexPolygon, HalfPlane, Point};
use crate::number::{self, int, ratio, Scalar, GRID_DIGITS};
use crate::oracle::{self, OracleConfig};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub name: String,
    pub workspace: ConvexPolygon,
    pub initial: ConvexPolygon,
    pub goal: ConvexPolygon,
    pub obstacles: Vec<ConvexPolygon>,
    #[serde(default)]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidProblem {
    #[error("workspace must be an axis-aligned rectangle")]
    WorkspaceNotRectangle,
    #[error("initial set is not inside the workspace")]
    InitialOutsideWorkspace,
    #[error("goal set is not inside the workspace")]
    GoalOutsideWorkspace,
    #[error("obstacle {0} is not inside the workspace")]
    ObstacleOutsideWorkspace(usize),
    #[error("initial set intersects obstacle {0}")]
    InitialHitsObstacle(usize),
    #[error("goal set intersects obstacle {0}")]
    GoalHitsObstacle(usize),
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("malformed problem file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid problem: {0}")]
    Invalid(#[from] InvalidProblem),
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        workspace: ConvexPolygon,
        initial: ConvexPolygon,
        goal: ConvexPolygon,
        obstacles: Vec<ConvexPolygon>,
        tags: Vec<String>,
    ) -> Result<Self, InvalidProblem> {
        let problem = Self {
            name: name.into(),
            workspace,
            initial,
            goal,
            obstacles,
            tags,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<(), InvalidProblem> {
        let ws = self.workspace.vertices();
        let axis_aligned = ws.len() == 4
            && (0..4).all(|i| {
                let (a, b) = (&ws[i], &ws[(i + 1) % 4]);
                a.x == b.x || a.y == b.y
            });
        if !axis_aligned {
            return Err(InvalidProblem::WorkspaceNotRectangle);
        }
        let inside = |poly: &ConvexPolygon| poly.vertices().iter().all(|v| self.workspace.contains(v));
        if !inside(&self.initial) {
            return Err(InvalidProblem::InitialOutsideWorkspace);
        }
        if !inside(&self.goal) {
            return Err(InvalidProblem::GoalOutsideWorkspace);
        }
        for (j, o) in self.obstacles.iter().enumerate() {
            if !inside(o) {
                return Err(InvalidProblem::ObstacleOutsideWorkspace(j));
            }
        }
        for (j, o) in self.obstacles.iter().enumerate() {
            if self.initial.intersects(o) {
                return Err(InvalidProblem::InitialHitsObstacle(j));
            }
            if self.goal.intersects(o) {
                return Err(InvalidProblem::GoalHitsObstacle(j));
            }
        }
        Ok(())
    }

    pub fn translate(&self, dx: &Scalar, dy: &Scalar) -> Self {
        Self {
            name: self.name.clone(),
            workspace: self.workspace.translate(dx, dy),
            initial: self.initial.translate(dx, dy),
            goal: self.goal.translate(dx, dy),
            obstacles: self.obstacles.iter().map(|o| o.translate(dx, dy)).collect(),
            tags: self.tags.clone(),
        }
    }

    /// Pretty JSON followed by a newline; byte-stable for equal problems.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("problem serializes");
        text.push('\n');
        text
    }
}

pub fn load_problem(document: &str) -> Result<Problem, ProblemError> {
    let problem: Problem = serde_json::from_str(document)?;
    problem.validate()?;
    Ok(problem)
}

/// Handcrafted suite names, easiest first.
pub const SUITE_NAMES: [&str; 10] = [
    "Box Boundary",
    "Easy",
    "Wall",
    "Box",
    "Canyon",
    "Diagonal Wall",
    "Curve",
    "Spiral",
    "Maze",
    "Scots",
];

const SUITE_FILES: [&str; 10] = [
    include_str!("../data/suite/01_box_boundary.json"),
    include_str!("../data/suite/02_easy.json"),
    include_str!("../data/suite/03_wall.json"),
    include_str!("../data/suite/04_box.json"),
    include_str!("../data/suite/05_canyon.json"),
    include_str!("../data/suite/06_diagonal_wall.json"),
    include_str!("../data/suite/07_curve.json"),
    include_str!("../data/suite/08_spiral.json"),
    include_str!("../data/suite/09_maze.json"),
    include_str!("../data/suite/10_scots.json"),
];

/// The ten handcrafted problems in increasing order of difficulty.
pub fn handcrafted_suite() -> Vec<Problem> {
    SUITE_FILES
        .iter()
        .map(|doc| load_problem(doc).expect("bundled suite problem is valid"))
        .collect()
}

pub fn suite_problem(name: &str) -> Option<Problem> {
    let wanted = name.trim().to_ascii_lowercase().replace(['_', '-'], " ");
    handcrafted_suite()
        .into_iter()
        .find(|p| p.name.to_ascii_lowercase() == wanted)
}

pub fn suite_index(name: &str) -> Option<usize> {
    SUITE_NAMES.iter().position(|n| *n == name)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub obstacle_count: usize,
    pub grid_tiles: usize,
    /// Fraction in `[0, 1]` by which each tile grows about its center.
    pub overlap: f64,
    pub seed: u64,
    pub require_solvable: bool,
    pub max_regeneration_attempts: usize,
}

impl GeneratorConfig {
    pub fn new(obstacle_count: usize, seed: u64) -> Self {
        Self {
            obstacle_count,
            grid_tiles: 9,
            overlap: 0.2,
            seed,
            require_solvable: false,
            max_regeneration_attempts: 100,
        }
    }

    pub fn solvable(mut self) -> Self {
        self.require_solvable = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerationError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error("no solvable instance after {0} attempts")]
    GenerationExhausted(usize),
}

/// Side length of the canonical random workspace `[0, 10] × [0, 10]`.
const RANDOM_WORKSPACE: i64 = 10;
/// Sampled obstacle corners live on a 10^-3 grid.
const SAMPLE_DIGITS: u32 = 3;
const MAX_HULL_RESAMPLES: usize = 1000;

fn rect(x0: Scalar, y0: Scalar, x1: Scalar, y1: Scalar) -> ConvexPolygon {
    ConvexPolygon::rectangle(x0, y0, x1, y1).expect("non-degenerate rectangle")
}

/// Rows × columns for `n` tiles: the most square exact factorization.
fn grid_shape(n: usize) -> (usize, usize) {
    let root = (n as f64).sqrt().ceil() as usize;
    let cols = (root..=n).find(|c| n % c == 0).unwrap_or(n);
    (n / cols, cols)
}

fn sample_coordinate(rng: &mut ChaCha8Rng, lo: &Scalar, hi: &Scalar) -> Scalar {
    let scale = number::int(10i64.pow(SAMPLE_DIGITS));
    let lo_i = (lo * &scale).ceil().to_integer();
    let hi_i = (hi * &scale).floor().to_integer();
    let lo_i: i64 = num::ToPrimitive::to_i64(&lo_i).expect("small coordinate");
    let hi_i: i64 = num::ToPrimitive::to_i64(&hi_i).expect("small coordinate");
    number::ratio(rng.gen_range(lo_i..=hi_i), 10i64.pow(SAMPLE_DIGITS))
}

/// Random problem: `k` obstacles, each the hull of four points drawn in a
/// distinct (overlap-expanded) grid tile. Deterministic in `config`.
pub fn generate_random(config: &GeneratorConfig) -> Result<Problem, GenerationError> {
    let k = config.obstacle_count;
    let n = config.grid_tiles;
    if k == 0 {
        return Err(GenerationError::InvalidConfig("obstacle count must be positive".into()));
    }
    if n <= k {
        return Err(GenerationError::InvalidConfig(format!(
            "grid tiles ({n}) must exceed obstacle count ({k})"
        )));
    }
    if !(0.0..=1.0).contains(&config.overlap) {
        return Err(GenerationError::InvalidConfig("overlap must lie in [0, 1]".into()));
    }
    if config.max_regeneration_attempts == 0 {
        return Err(GenerationError::InvalidConfig("max_regeneration_attempts must be positive".into()));
    }
    let size = int(RANDOM_WORKSPACE);
    let workspace = rect(int(0), int(0), size.clone(), size.clone());
    let initial = rect(ratio(1, 2), ratio(1, 2), ratio(3, 2), ratio(3, 2));
    let goal = rect(ratio(17, 2), ratio(17, 2), ratio(19, 2), ratio(19, 2));

    let (rows, cols) = grid_shape(n);
    let cell_w = &size / int(cols as i64);
    let cell_h = &size / int(rows as i64);
    let grow = number::from_f64_rounded(1.0 + config.overlap, 6);
    let half = ratio(1, 2);
    let tiles: Vec<(Scalar, Scalar, Scalar, Scalar)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .filter_map(|(r, c)| {
            let x0 = &cell_w * int(c as i64);
            let y0 = &cell_h * int(r as i64);
            let cell = rect(x0.clone(), y0.clone(), &x0 + &cell_w, &y0 + &cell_h);
            if cell.intersects(&initial) || cell.intersects(&goal) {
                return None;
            }
            let cx = &x0 + &cell_w * &half;
            let cy = &y0 + &cell_h * &half;
            let hw = &cell_w * &half * &grow;
            let hh = &cell_h * &half * &grow;
            let clamp = |v: Scalar| v.max(int(0)).min(size.clone());
            Some((clamp(&cx - &hw), clamp(&cy - &hh), clamp(&cx + &hw), clamp(&cy + &hh)))
        })
        .collect();
    if tiles.len() < k {
        return Err(GenerationError::InvalidConfig(format!(
            "only {} tiles avoid the initial and goal sets, need {k}",
            tiles.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.max_regeneration_attempts {
        // Partial Fisher-Yates: the first k entries become the chosen tiles.
        let mut order: Vec<usize> = (0..tiles.len()).collect();
        for i in 0..k {
            let j = rng.gen_range(i..order.len());
            order.swap(i, j);
        }
        let mut obstacles = Vec::with_capacity(k);
        for &t in &order[..k] {
            let (x0, y0, x1, y1) = &tiles[t];
            let mut hull = None;
            for _ in 0..MAX_HULL_RESAMPLES {
                let corners: Vec<Point> = (0..4)
                    .map(|_| {
                        let x = sample_coordinate(&mut rng, x0, x1);
                        let y = sample_coordinate(&mut rng, y0, y1);
                        Point::new(x, y)
                    })
                    .collect();
                if let Ok(h) = ConvexPolygon::hull(&corners) {
                    if !h.intersects(&initial) && !h.intersects(&goal) {
                        hull = Some(h);
                        break;
                    }
                }
            }
            obstacles.push(hull.ok_or_else(|| {
                GenerationError::InvalidConfig("tile too small to sample a convex obstacle".into())
            })?);
        }
        let problem = Problem::new(
            format!("random-k{k}-seed{}", config.seed),
            workspace.clone(),
            initial.clone(),
            goal.clone(),
            obstacles,
            vec!["random".into(), format!("k={k}"), format!("seed={}", config.seed)],
        )
        .map_err(|e| GenerationError::InvalidConfig(e.to_string()))?;
        if !config.require_solvable || oracle::solvable(&problem, &OracleConfig::default()) {
            return Ok(problem);
        }
    }
    Err(GenerationError::GenerationExhausted(config.max_regeneration_attempts))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VariantError {
    #[error("problem is already unsolvable")]
    AlreadyUnsolvable,
    #[error("no full-width slab separates the initial set from the goal")]
    CannotBlock,
}

/// Adds a full-width slab between the initial and goal sets so that no path
/// exists. The slab spans the whole workspace; `seed` picks its position in
/// the separating gap.
pub fn make_unsolvable_variant(problem: &Problem, seed: u64) -> Result<Problem, VariantError> {
    let config = OracleConfig::default();
    if !oracle::solvable(problem, &config) {
        return Err(VariantError::AlreadyUnsolvable);
    }
    if problem.initial.intersects(&problem.goal) {
        return Err(VariantError::CannotBlock);
    }
    let mut normals: Vec<(Scalar, Scalar)> = vec![(int(1), int(0)), (int(0), int(1))];
    for poly in [&problem.initial, &problem.goal] {
        normals.extend(poly.halfplanes().iter().map(|h| h.normal.clone()));
    }
    let positions = [ratio(3, 8), ratio(1, 2), ratio(5, 8)];
    let centre = &positions[(seed % positions.len() as u64) as usize];
    let thickness = ratio(1, 4);

    for normal in normals {
        let project = |poly: &ConvexPolygon| {
            let values: Vec<Scalar> = poly
                .vertices()
                .iter()
                .map(|v| &normal.0 * &v.x + &normal.1 * &v.y)
                .collect();
            (
                values.iter().min().cloned().unwrap(),
                values.iter().max().cloned().unwrap(),
            )
        };
        let (i_lo, i_hi) = project(&problem.initial);
        let (g_lo, g_hi) = project(&problem.goal);
        let (lo, hi) = if i_hi < g_lo {
            (i_hi, g_lo)
        } else if g_hi < i_lo {
            (g_hi, i_lo)
        } else {
            continue;
        };
        let gap = &hi - &lo;
        let mid = &lo + &gap * centre;
        let c0 = &mid - &gap * &thickness / int(2);
        let c1 = &mid + &gap * &thickness / int(2);
        let upper = HalfPlane { normal: normal.clone(), offset: c1 };
        let lower = HalfPlane {
            normal: (-normal.0.clone(), -normal.1.clone()),
            offset: -c0,
        };
        let Some(strip) = problem
            .workspace
            .clip(&upper)
            .and_then(|p| p.clip(&lower))
        else {
            continue;
        };
        let snapped: Vec<Point> = strip
            .vertices()
            .iter()
            .map(|v| {
                Point::new(
                    number::round_to_digits(&v.x, GRID_DIGITS),
                    number::round_to_digits(&v.y, GRID_DIGITS),
                )
            })
            .collect();
        let Ok(slab) = ConvexPolygon::new(snapped) else {
            continue;
        };
        if slab.signed_area().is_zero() || !slab.signed_area().is_positive() {
            continue;
        }
        let mut obstacles = problem.obstacles.clone();
        obstacles.push(slab);
        let mut tags = problem.tags.clone();
        tags.push("unsolvable".into());
        let Ok(variant) = Problem::new(
            format!("{} (unsolvable)", problem.name),
            problem.workspace.clone(),
            problem.initial.clone(),
            problem.goal.clone(),
            obstacles,
            tags,
        ) else {
            continue;
        };
        if !oracle::solvable(&variant, &config) {
            return Ok(variant);
        }
    }
    Err(VariantError::CannotBlock)
}
