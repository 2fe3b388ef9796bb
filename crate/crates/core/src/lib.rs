//! Closed-loop path planning with language-model agents.
//!
//! A 2D planning problem (rectangular workspace, convex initial and goal
//! sets, convex obstacles) is posed to an agent as text. Each proposed
//! waypoint path is checked with exact rational geometry, and the loop feeds
//! back collision, free-space, correct-prefix and image hints until the path
//! is correct or the iteration budget runs out. A visibility-graph planner
//! supplies ground truth and fine-tuning pairs.

pub mod closed_loop;
pub mod geometry;
pub mod hints;
pub mod llm;
pub mod metrics;
pub mod number;
pub mod oracle;
pub mod problems;
pub mod render;

pub use closed_loop::{run_experiment, run_single, ExperimentConfig, RunRecord};
pub use geometry::{verify_path, ConvexPolygon, PathCandidate, Point, VerificationReport};
pub use hints::{HintBundle, HintStrategy};
pub use problems::Problem;
