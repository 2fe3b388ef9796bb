//! Prompt text: the initial task description and the feedback messages.
//!
//! Wording lives in `data/prompts` and is versioned with [`PROMPT_VERSION`]
//! so transcripts from different releases can be compared.

use std::sync::OnceLock;

use serde::Deserialize;
use thiserror::Error;

use super::parse::find_arrays;
use super::ChatMessage;
use crate::geometry::{ConvexPolygon, PathCandidate, Point};
use crate::hints::{HintBundle, HintStrategy};
use crate::problems::Problem;
use crate::render::{render_image, RenderSettings};

pub const PROMPT_VERSION: &str = "1";

const SYSTEM_TEMPLATE: &str = include_str!("../../data/prompts/system.txt");
const WORKED_EXAMPLE: &str = include_str!("../../data/prompts/worked_example.json");

pub const PARSE_FAILURE_MESSAGE: &str = "I could not find a path in your answer. Please answer in the required syntax: \
the final line must contain only the waypoint array [[x1, y1], [x2, y2], ..., [xn, yn]].";

pub const NO_HINT_MESSAGE: &str = "Your path is incorrect. Please try again, ending your answer with the waypoint array on the final line.";

const CLOSING_LINE: &str = "Please give a corrected path, ending your answer with the waypoint array on the final line.";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("feedback bundle contains no hints")]
    EmptyBundle,
}

#[derive(Deserialize)]
pub struct WorkedExample {
    pub problem: Problem,
    pub reasoning: String,
    pub solution: PathCandidate,
}

pub fn worked_example() -> &'static WorkedExample {
    static EXAMPLE: OnceLock<WorkedExample> = OnceLock::new();
    EXAMPLE.get_or_init(|| serde_json::from_str(WORKED_EXAMPLE).expect("bundled worked example parses"))
}

fn polygon_text(poly: &ConvexPolygon) -> String {
    PathCandidate::new(poly.vertices().to_vec()).to_array_string()
}

/// Labeled lines listing the workspace, I, G and each obstacle in order.
pub fn describe_problem(problem: &Problem) -> String {
    let mut lines = vec![
        format!("Workspace: {}", polygon_text(&problem.workspace)),
        format!("Initial set I: {}", polygon_text(&problem.initial)),
        format!("Goal set G: {}", polygon_text(&problem.goal)),
        format!("Obstacles ({}):", problem.obstacles.len()),
    ];
    for (j, o) in problem.obstacles.iter().enumerate() {
        lines.push(format!("Obstacle {j}: {}", polygon_text(o)));
    }
    lines.join("\n")
}

/// Inverse of [`describe_problem`], used by scripted agents that only see text.
pub fn problem_from_description(text: &str) -> Option<Problem> {
    let polygon = |line: &str| {
        let (_, _, pts) = find_arrays(line).pop()?;
        ConvexPolygon::new(pts).ok()
    };
    let (mut workspace, mut initial, mut goal) = (None, None, None);
    let mut obstacles = Vec::new();
    for line in text.lines().map(str::trim) {
        if let Some(rest) = line.strip_prefix("Workspace:") {
            workspace = polygon(rest);
        } else if let Some(rest) = line.strip_prefix("Initial set I:") {
            initial = polygon(rest);
        } else if let Some(rest) = line.strip_prefix("Goal set G:") {
            goal = polygon(rest);
        } else if let Some(rest) = line.strip_prefix("Obstacle ") {
            if let Some((_, body)) = rest.split_once(':') {
                obstacles.push(polygon(body)?);
            }
        }
    }
    Problem::new("from prompt", workspace?, initial?, goal?, obstacles, vec![]).ok()
}

fn system_text() -> String {
    let ex = worked_example();
    SYSTEM_TEMPLATE
        .replace("{example_problem}", &describe_problem(&ex.problem))
        .replace("{example_reasoning}", &ex.reasoning)
        .replace("{example_solution}", &ex.solution.to_array_string())
        .trim_end()
        .to_string()
}

fn user_text(problem: &Problem) -> String {
    format!("Solve this problem.\n\n{}", describe_problem(problem))
}

/// System and user text of the first prompt, without image attachments.
pub fn initial_prompt_text(problem: &Problem) -> (String, String) {
    (system_text(), user_text(problem))
}

pub fn initial_prompt(problem: &Problem, strategy: &HintStrategy, render: &RenderSettings) -> Vec<ChatMessage> {
    let (system, mut user) = initial_prompt_text(problem);
    let mut user_msg = if strategy.image {
        user.push_str("\n\nAn image of the problem is attached: obstacles are red, the initial set is blue and the goal set is green.");
        ChatMessage::user(user).with_image(render_image(problem, None, render))
    } else {
        ChatMessage::user(user)
    };
    user_msg.text = user_msg.text.trim_end().to_string();
    vec![ChatMessage::system(system), user_msg]
}

fn point_list(points: &[Point]) -> String {
    PathCandidate::new(points.to_vec()).to_array_string()
}

/// Verbalizes each hint present in the bundle with fixed templates.
pub fn feedback_prompt(bundle: &HintBundle) -> Result<ChatMessage, PromptError> {
    if bundle.is_empty() {
        return Err(PromptError::EmptyBundle);
    }
    let mut parts = vec!["Your path is incorrect.".to_string()];
    if let Some(c) = &bundle.collision {
        let mut lines = Vec::new();
        if !c.starts_in_initial {
            lines.push("The first waypoint is not inside the initial set I.".to_string());
        }
        if !c.ends_in_goal {
            lines.push("The last waypoint is not inside the goal set G.".to_string());
        }
        for hit in &c.colliding_segments {
            lines.push(format!(
                "Segment {} from {} to {} intersects obstacle {}.",
                hit.segment_index, hit.from, hit.to, hit.obstacle_index
            ));
        }
        if !lines.is_empty() {
            parts.push(lines.join("\n"));
        }
    }
    if let Some(f) = &bundle.free_space {
        let mut lines = vec!["These points are in free space:".to_string()];
        for slice in &f.slices {
            let pts = if slice.safe_points.is_empty() {
                "none".to_string()
            } else {
                point_list(&slice.safe_points)
            };
            lines.push(format!("x = {}: {pts}", crate::number::format_decimal(&slice.x)));
        }
        parts.push(lines.join("\n"));
    }
    if let Some(p) = &bundle.prefix {
        parts.push(if p.prefix.is_empty() {
            "No part of your path is correct: it does not start inside the initial set I.".to_string()
        } else {
            format!(
                "Your path is correct up to and including waypoint {}: {}",
                p.prefix.len(),
                point_list(&p.prefix)
            )
        });
    }
    if bundle.image.is_some() {
        parts.push("An image of the problem with your latest path drawn in black is attached.".to_string());
    }
    parts.push(CLOSING_LINE.to_string());
    let msg = ChatMessage::user(parts.join("\n\n"));
    Ok(match &bundle.image {
        Some(img) => msg.with_image(img.clone()),
        None => msg,
    })
}
