//! Browser bindings for the planloop demo page.
//!
//! Problems cross the boundary as problem-file JSON and paths as
//! `[[x, y], ...]` text. The plain functions return `Result<_, String>` so
//! they can be tested natively; the `#[wasm_bindgen]` wrappers turn errors
//! into JS exceptions.

use planloop::geometry::verify_path;
use planloop::hints::{compute_hints, HintStrategy};
use planloop::llm::parse::parse_response;
use planloop::llm::prompt::{feedback_prompt, NO_HINT_MESSAGE};
use planloop::oracle::{self, OracleConfig};
use planloop::problems::{self, GeneratorConfig, Problem};
use planloop::render::{render_image, RenderSettings};
use planloop::PathCandidate;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn problem(json: &str) -> Result<Problem, String> {
    problems::load_problem(json).map_err(|e| e.to_string())
}

fn path(text: &str) -> Result<PathCandidate, String> {
    parse_response(text).map(|p| p.path()).map_err(|e| e.to_string())
}

pub fn suite_names() -> String {
    serde_json::to_string(&problems::SUITE_NAMES).expect("names serialize")
}

pub fn suite_problem(name: &str) -> Result<String, String> {
    problems::suite_problem(name)
        .map(|p| p.to_json())
        .ok_or_else(|| format!("no suite problem named `{name}`"))
}

pub fn random_problem(k: u32, seed: u32) -> Result<String, String> {
    let config = GeneratorConfig::new(k as usize, seed as u64).solvable();
    problems::generate_random(&config).map(|p| p.to_json()).map_err(|e| e.to_string())
}

/// PNG of the problem, with the path drawn when `path_text` is non-empty.
pub fn render(problem_json: &str, path_text: &str, size: u32) -> Result<Vec<u8>, String> {
    let problem = problem(problem_json)?;
    let path = if path_text.trim().is_empty() { None } else { Some(path(path_text)?) };
    let settings = RenderSettings { width: size, height: size, ..RenderSettings::default() };
    Ok(render_image(&problem, path.as_ref(), &settings).pixels)
}

/// `{"solvable": bool, "path": "[[..]]" | null, "cost": number | null}`
pub fn plan(problem_json: &str) -> Result<String, String> {
    let result = oracle::plan(&problem(problem_json)?, &OracleConfig::default());
    Ok(json!({
        "solvable": result.solvable,
        "path": result.path.map(|p| p.to_array_string()),
        "cost": result.cost,
    })
    .to_string())
}

/// `{"correct": bool, "report": {..}, "feedback": "..."}` where feedback is
/// the message the loop would send back under `strategy`.
pub fn check(problem_json: &str, path_text: &str, strategy: &str) -> Result<String, String> {
    let problem = problem(problem_json)?;
    let path = path(path_text)?;
    let mut strategy = HintStrategy::from_name(strategy).ok_or_else(|| format!("unknown strategy `{strategy}`"))?;
    // The page draws its own picture; skip the image hint.
    strategy.image = false;
    let report = verify_path(&problem, &path).map_err(|e| e.to_string())?;
    let feedback = if report.is_correct {
        "Your path is correct.".to_string()
    } else {
        let bundle = compute_hints(&problem, &path, &strategy, &RenderSettings::default()).map_err(|e| e.to_string())?;
        feedback_prompt(&bundle).map_or_else(|_| NO_HINT_MESSAGE.to_string(), |m| m.text)
    };
    Ok(json!({"correct": report.is_correct, "report": report, "feedback": feedback}).to_string())
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen(js_name = suiteNames)]
pub fn suite_names_js() -> String {
    suite_names()
}

#[wasm_bindgen(js_name = suiteProblem)]
pub fn suite_problem_js(name: &str) -> Result<String, JsError> {
    suite_problem(name).map_err(js)
}

#[wasm_bindgen(js_name = randomProblem)]
pub fn random_problem_js(k: u32, seed: u32) -> Result<String, JsError> {
    random_problem(k, seed).map_err(js)
}

#[wasm_bindgen(js_name = renderPng)]
pub fn render_js(problem_json: &str, path_text: &str, size: u32) -> Result<Vec<u8>, JsError> {
    render(problem_json, path_text, size).map_err(js)
}

#[wasm_bindgen(js_name = planPath)]
pub fn plan_js(problem_json: &str) -> Result<String, JsError> {
    plan(problem_json).map_err(js)
}

#[wasm_bindgen(js_name = checkPath)]
pub fn check_js(problem_json: &str, path_text: &str, strategy: &str) -> Result<String, JsError> {
    check(problem_json, path_text, strategy).map_err(js)
}
