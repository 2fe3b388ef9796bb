//! The propose, verify, hint, re-prompt controller and the experiment runner.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{path_length, verify_path, PathCandidate, VerificationReport};
use crate::hints::{compute_hints, HintBundle, HintStrategy};
use crate::llm::prompt::{self, NO_HINT_MESSAGE, PARSE_FAILURE_MESSAGE};
use crate::llm::{parse_response, Agent, AgentConfig, AgentSummary, ChatMessage, LlmError};
use crate::problems::Problem;
use crate::render::RenderSettings;

/// One model response and everything derived from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptStep {
    /// 1-based.
    pub iteration: usize,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<PathCandidate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<VerificationReport>,
    /// Hints sent back after this step; absent on success, on the last
    /// iteration and under the `none` strategy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hints: Option<HintBundle>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub problem_name: String,
    pub repeat: usize,
    pub strategy: HintStrategy,
    pub agent: AgentSummary,
    pub max_iterations: usize,
    pub iterations_used: usize,
    pub success: bool,
    pub final_path: Option<PathCandidate>,
    /// Segment count of `final_path`.
    pub final_path_length: Option<usize>,
    pub parse_failures: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub transcript: Vec<TranscriptStep>,
    /// Embedded so the record can be re-verified on its own.
    pub problem: Problem,
    /// Kept out of the JSONL so records are byte-reproducible; the sidecar
    /// metadata carries it.
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Error)]
#[error("agent failed after {} iterations: {error}", .partial.iterations_used)]
pub struct RunError {
    pub error: LlmError,
    pub partial: Box<RunRecord>,
}

pub fn run_single(
    problem: &Problem,
    strategy: &HintStrategy,
    agent: &mut dyn Agent,
    max_iterations: usize,
) -> Result<RunRecord, RunError> {
    run_single_with(problem, strategy, agent, max_iterations, &RenderSettings::default(), 0)
}

pub fn run_single_with(
    problem: &Problem,
    strategy: &HintStrategy,
    agent: &mut dyn Agent,
    max_iterations: usize,
    render: &RenderSettings,
    repeat: usize,
) -> Result<RunRecord, RunError> {
    assert!(max_iterations >= 1, "max_iterations must be at least 1");
    let started = Instant::now();
    let mut record = RunRecord {
        problem_name: problem.name.clone(),
        repeat,
        strategy: strategy.clone(),
        agent: agent.summary(),
        max_iterations,
        iterations_used: 0,
        success: false,
        final_path: None,
        final_path_length: None,
        parse_failures: 0,
        error: None,
        transcript: Vec::new(),
        problem: problem.clone(),
        wall_time: Duration::ZERO,
    };
    let mut messages = prompt::initial_prompt(problem, strategy, render);
    for iteration in 1..=max_iterations {
        let response = match agent.respond(&messages) {
            Ok(r) => r,
            Err(error) => {
                record.error = Some(error.to_string());
                record.wall_time = started.elapsed();
                return Err(RunError { error, partial: Box::new(record) });
            }
        };
        record.iterations_used = iteration;
        messages.push(ChatMessage::assistant(response.clone()));
        let more = iteration < max_iterations;
        let mut step = TranscriptStep {
            iteration,
            response,
            candidate: None,
            parse_error: None,
            report: None,
            hints: None,
        };
        let parsed = match parse_response(&step.response) {
            Ok(p) => p,
            Err(e) => {
                record.parse_failures += 1;
                step.parse_error = Some(e.to_string());
                record.transcript.push(step);
                if more {
                    messages.push(ChatMessage::user(PARSE_FAILURE_MESSAGE));
                }
                continue;
            }
        };
        let path = parsed.path();
        let report = verify_path(problem, &path).expect("parsed paths are non-empty");
        step.candidate = Some(path.clone());
        step.report = Some(report.clone());
        if report.is_correct {
            record.success = true;
            record.final_path_length = Some(path_length(&path));
            record.final_path = Some(path);
            record.transcript.push(step);
            break;
        }
        if more {
            if strategy.any() {
                let bundle = compute_hints(problem, &path, strategy, render).expect("non-empty path");
                let msg = prompt::feedback_prompt(&bundle).expect("strategy enables at least one hint");
                messages.push(msg);
                step.hints = Some(bundle);
            } else {
                messages.push(ChatMessage::user(NO_HINT_MESSAGE));
            }
        }
        record.transcript.push(step);
    }
    record.wall_time = started.elapsed();
    Ok(record)
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problems: Vec<Problem>,
    pub strategy: HintStrategy,
    pub agent: AgentConfig,
    pub repeats_per_problem: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub workers: usize,
    pub render: RenderSettings,
}

impl ExperimentConfig {
    /// Handcrafted-suite defaults: 10 repeats, 20 iterations.
    pub fn handcrafted(problems: Vec<Problem>, strategy: HintStrategy, agent: AgentConfig) -> Self {
        Self {
            problems,
            strategy,
            agent,
            repeats_per_problem: 10,
            max_iterations: 20,
            seed: 0,
            workers: 1,
            render: RenderSettings::default(),
        }
    }

    /// Random-instance defaults: 1 repeat, 5 iterations.
    pub fn random(problems: Vec<Problem>, strategy: HintStrategy, agent: AgentConfig) -> Self {
        Self { repeats_per_problem: 1, max_iterations: 5, ..Self::handcrafted(problems, strategy, agent) }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_iterations == 0 {
            return Err("max_iterations must be at least 1".into());
        }
        if self.repeats_per_problem == 0 {
            return Err("repeats must be at least 1".into());
        }
        self.agent.validate()
    }

    pub fn run_count(&self) -> usize {
        self.problems.len() * self.repeats_per_problem
    }
}

/// Identifies one run for the agent factory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunSpec {
    pub problem_index: usize,
    pub repeat: usize,
    /// `config.seed + run index`.
    pub seed: u64,
}

pub type AgentFactory<'a> = dyn Fn(&Problem, RunSpec) -> Result<Box<dyn Agent>, LlmError> + Sync + 'a;

#[derive(Debug)]
pub struct ExperimentOutcome {
    /// Completed runs in (problem, repeat) order.
    pub records: Vec<RunRecord>,
    pub aborted: bool,
    pub sink_error: Option<std::io::Error>,
}

struct OrderedSink<'w> {
    writer: Option<&'w mut (dyn Write + Send)>,
    next: usize,
    pending: BTreeMap<usize, String>,
    error: Option<std::io::Error>,
}

impl OrderedSink<'_> {
    /// Buffers `line` and writes every line whose predecessors are written.
    fn push(&mut self, index: usize, line: String) {
        self.pending.insert(index, line);
        while let Some(line) = self.pending.remove(&self.next) {
            self.write(&line);
            self.next += 1;
        }
    }

    /// After an abort, completed runs are written even across gaps.
    fn drain(&mut self) {
        for line in std::mem::take(&mut self.pending).into_values() {
            self.write(&line);
        }
    }

    fn write(&mut self, line: &str) {
        if self.error.is_some() {
            return;
        }
        if let Some(w) = self.writer.as_mut() {
            let result = w.write_all(line.as_bytes()).and_then(|_| w.write_all(b"\n")).and_then(|_| w.flush());
            if let Err(e) = result {
                self.error = Some(e);
            }
        }
    }
}

/// Runs every (problem, repeat) pair on a pool of `config.workers` threads.
///
/// JSONL lines reach `sink` in (problem, repeat) order as soon as all earlier
/// runs are done, so the file is identical across executions. Setting
/// `cancel` stops new runs from starting; finished runs are kept.
pub fn run_experiment(
    config: &ExperimentConfig,
    factory: &AgentFactory<'_>,
    sink: Option<&mut (dyn Write + Send)>,
    cancel: &AtomicBool,
) -> ExperimentOutcome {
    let total = config.run_count();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<RunRecord>>> = Mutex::new(vec![None; total]);
    let sink = Mutex::new(OrderedSink { writer: sink, next: 0, pending: BTreeMap::new(), error: None });
    let workers = config.workers.clamp(1, total.max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if cancel.load(Ordering::SeqCst) {
                    break;
                }
                let index = next.fetch_add(1, Ordering::SeqCst);
                if index >= total {
                    break;
                }
                let spec = RunSpec {
                    problem_index: index / config.repeats_per_problem,
                    repeat: index % config.repeats_per_problem,
                    seed: config.seed.wrapping_add(index as u64),
                };
                let problem = &config.problems[spec.problem_index];
                let record = run_one(config, factory, problem, spec, cancel);
                let line = serde_json::to_string(&record).expect("records serialize");
                results.lock().unwrap()[index] = Some(record);
                sink.lock().unwrap().push(index, line);
            });
        }
    });

    let mut sink = sink.into_inner().unwrap();
    let records: Vec<RunRecord> = results.into_inner().unwrap().into_iter().flatten().collect();
    let aborted = records.len() < total;
    if aborted {
        sink.drain();
    }
    ExperimentOutcome { records, aborted, sink_error: sink.error }
}

fn run_one(
    config: &ExperimentConfig,
    factory: &AgentFactory<'_>,
    problem: &Problem,
    spec: RunSpec,
    cancel: &AtomicBool,
) -> RunRecord {
    let started = Instant::now();
    let failed = |error: LlmError, summary: AgentSummary| RunRecord {
        problem_name: problem.name.clone(),
        repeat: spec.repeat,
        strategy: config.strategy.clone(),
        agent: summary,
        max_iterations: config.max_iterations,
        iterations_used: 0,
        success: false,
        final_path: None,
        final_path_length: None,
        parse_failures: 0,
        error: Some(error.to_string()),
        transcript: Vec::new(),
        problem: problem.clone(),
        wall_time: started.elapsed(),
    };
    let mut agent = match factory(problem, spec) {
        Ok(a) => a,
        Err(e) => {
            if matches!(e, LlmError::AuthError(_)) {
                cancel.store(true, Ordering::SeqCst);
            }
            return failed(e, config.agent.summary());
        }
    };
    match run_single_with(problem, &config.strategy, agent.as_mut(), config.max_iterations, &config.render, spec.repeat) {
        Ok(r) => r,
        Err(RunError { error, partial }) => {
            if matches!(error, LlmError::AuthError(_)) {
                cancel.store(true, Ordering::SeqCst);
            }
            log::warn!("run {} #{} failed: {error}", problem.name, spec.repeat);
            *partial
        }
    }
}

/// Contents of the metadata file written next to a results JSONL.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentMetadata {
    pub code_version: String,
    pub prompt_version: String,
    pub problems: Vec<String>,
    pub strategy: HintStrategy,
    pub agent: AgentSummary,
    pub repeats_per_problem: usize,
    pub max_iterations: usize,
    pub seed: u64,
    pub workers: usize,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub aborted: bool,
    /// Seconds per completed record, in record order.
    pub wall_times: Vec<f64>,
}

impl ExperimentMetadata {
    pub fn new(config: &ExperimentConfig, outcome: &ExperimentOutcome, started_unix: f64, finished_unix: f64) -> Self {
        Self {
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            prompt_version: prompt::PROMPT_VERSION.to_string(),
            problems: config.problems.iter().map(|p| p.name.clone()).collect(),
            strategy: config.strategy.clone(),
            agent: config.agent.summary(),
            repeats_per_problem: config.repeats_per_problem,
            max_iterations: config.max_iterations,
            seed: config.seed,
            workers: config.workers,
            started_unix,
            finished_unix,
            aborted: outcome.aborted,
            wall_times: outcome.records.iter().map(|r| r.wall_time.as_secs_f64()).collect(),
        }
    }
}

/// Seconds since the Unix epoch.
pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Parses a results JSONL document; blank lines are skipped.
pub fn read_records(jsonl: &str) -> Result<Vec<RunRecord>, serde_json::Error> {
    jsonl
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
