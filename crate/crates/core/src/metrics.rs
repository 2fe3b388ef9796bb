//! S%, N and PL aggregation over run records, and table rendering.

use std::collections::BTreeMap;

use num::rational::Ratio;
use num::{ToPrimitive, Zero};
use thiserror::Error;

use crate::closed_loop::RunRecord;
use crate::geometry::{path_length, verify_path};
use crate::problems::suite_index;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Grouping {
    ByProblem,
    ByObstacleCount,
}

impl std::str::FromStr for Grouping {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "by_problem" | "by-problem" | "problem" => Ok(Grouping::ByProblem),
            "by_obstacle_count" | "by-obstacle-count" | "obstacles" => Ok(Grouping::ByObstacleCount),
            other => Err(format!("unknown grouping `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl std::str::FromStr for TableFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricsRow {
    /// Problem name or `"k Obs"`.
    pub group: String,
    /// `provider:model` plus the hint strategy.
    pub agent: String,
    /// Percentage in `[0, 100]`.
    pub success_rate: Ratio<i64>,
    /// Mean iterations over successful runs.
    pub mean_iterations_success: Option<Ratio<i64>>,
    /// Mean segment count over successful runs.
    pub mean_path_length_success: Option<Ratio<i64>>,
    pub run_count: usize,
    /// Records claiming success whose path does not re-verify.
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no records to aggregate")]
    EmptyInput,
}

/// A claimed success counts only if the stored path re-verifies against the
/// embedded problem and its stored length matches.
pub fn reverified_success(record: &RunRecord) -> bool {
    let Some(path) = record.final_path.as_ref().filter(|_| record.success) else {
        return false;
    };
    record.final_path_length == Some(path_length(path))
        && verify_path(&record.problem, path).map(|r| r.is_correct).unwrap_or(false)
}

fn group_key(record: &RunRecord, grouping: Grouping) -> ((usize, String), String) {
    match grouping {
        Grouping::ByProblem => {
            let order = suite_index(&record.problem_name).unwrap_or(usize::MAX);
            ((order, record.problem_name.clone()), record.problem_name.clone())
        }
        Grouping::ByObstacleCount => {
            let k = record.problem.obstacles.len();
            ((k, String::new()), format!("{k} Obs"))
        }
    }
}

#[derive(Default)]
struct Tally {
    runs: i64,
    successes: i64,
    iterations: i64,
    lengths: i64,
    flagged: usize,
}

/// Rows ordered by suite position (other names alphabetically after) or by
/// ascending obstacle count, then by agent label.
pub fn aggregate(records: &[RunRecord], grouping: Grouping) -> Result<Vec<MetricsRow>, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut tallies: BTreeMap<((usize, String), String, String), Tally> = BTreeMap::new();
    for r in records {
        let (order, group) = group_key(r, grouping);
        let agent = format!("{} {}", r.agent.label(), r.strategy.name());
        let t = tallies.entry((order, group, agent)).or_default();
        t.runs += 1;
        if reverified_success(r) {
            t.successes += 1;
            t.iterations += r.iterations_used as i64;
            t.lengths += r.final_path_length.unwrap_or(0) as i64;
        } else if r.success {
            t.flagged += 1;
        }
    }
    Ok(tallies
        .into_iter()
        .map(|((_, group, agent), t)| {
            let mean = |total: i64| (t.successes > 0).then(|| Ratio::new(total, t.successes));
            MetricsRow {
                group,
                agent,
                success_rate: Ratio::new(100 * t.successes, t.runs),
                mean_iterations_success: mean(t.iterations),
                mean_path_length_success: mean(t.lengths),
                run_count: t.runs as usize,
                flagged: t.flagged,
            }
        })
        .collect())
}

/// Round half up to `digits` decimals (values here are non-negative).
pub fn format_half_up(q: &Ratio<i64>, digits: u32) -> String {
    let scale = 10i64.pow(digits);
    let scaled = (q * scale + Ratio::new(1, 2)).floor().to_integer();
    if digits == 0 {
        return scaled.to_string();
    }
    format!("{}.{:0width$}", scaled / scale, scaled % scale, width = digits as usize)
}

fn cell(q: &Option<Ratio<i64>>) -> String {
    q.as_ref().map_or_else(|| "-".to_string(), |v| format_half_up(v, 1))
}

pub const HEADER: [&str; 6] = ["group", "agent", "S%", "N", "PL", "runs"];

fn row_cells(row: &MetricsRow) -> [String; 6] {
    [
        row.group.clone(),
        row.agent.clone(),
        format_half_up(&row.success_rate, 0),
        cell(&row.mean_iterations_success),
        cell(&row.mean_path_length_success),
        row.run_count.to_string(),
    ]
}

pub fn render_table(rows: &[MetricsRow], format: TableFormat) -> String {
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(HEADER).expect("in-memory csv");
            for row in rows {
                w.write_record(row_cells(row)).expect("in-memory csv");
            }
            String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
        }
        TableFormat::Markdown => {
            let mut out = format!("| {} |\n|{}\n", HEADER.join(" | "), "---|".repeat(HEADER.len()));
            for row in rows {
                let cells = row_cells(row).map(|c| c.replace('|', "\\|"));
                out.push_str(&format!("| {} |\n", cells.join(" | ")));
            }
            out
        }
    }
}

/// Exact success rate as a float, for plots and summaries.
pub fn success_fraction(row: &MetricsRow) -> f64 {
    if row.success_rate.is_zero() {
        0.0
    } else {
        row.success_rate.to_f64().unwrap_or(0.0) / 100.0
    }
}
