mod common;

use common::*;
use num::rational::Ratio;
use planloop::closed_loop::{read_records, run_single, RunRecord};
use planloop::geometry::{PathCandidate, Point};
use planloop::hints::HintStrategy;
use planloop::llm::{ScriptPolicy, ScriptedAgent};
use planloop::metrics::{aggregate, render_table, Grouping, MetricsError, TableFormat};
use proptest::prelude::*;

/// A diagonal path with `segments` equal segments, correct on the empty square.
fn diagonal(segments: i64) -> PathCandidate {
    PathCandidate::new((0..=segments).map(|i| Point::new(
        planloop::number::int(1) + planloop::number::ratio(8 * i, segments),
        planloop::number::int(1) + planloop::number::ratio(8 * i, segments),
    )).collect())
}

fn template() -> RunRecord {
    let problem = square_problem(vec![]);
    let mut agent = ScriptedAgent::new(ScriptPolicy::Oracle);
    run_single(&problem, &HintStrategy::cfp(), &mut agent, 5).unwrap()
}

fn success(iterations: usize, segments: i64) -> RunRecord {
    let mut r = template();
    r.iterations_used = iterations;
    r.final_path = Some(diagonal(segments));
    r.final_path_length = Some(segments as usize);
    r
}

fn failure() -> RunRecord {
    let mut r = template();
    r.success = false;
    r.iterations_used = 5;
    r.final_path = None;
    r.final_path_length = None;
    r
}

#[test]
fn two_of_four_successes() {
    let records = vec![success(2, 3), failure(), success(4, 5), failure()];
    let rows = aggregate(&records, Grouping::ByProblem).unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row.success_rate, Ratio::from_integer(50));
    assert_eq!(row.mean_iterations_success, Some(Ratio::from_integer(3)));
    assert_eq!(row.mean_path_length_success, Some(Ratio::from_integer(4)));
    assert_eq!(row.run_count, 4);
    let csv = render_table(&rows, TableFormat::Csv);
    assert_eq!(csv, "group,agent,S%,N,PL,runs\ntest,scripted:oracle CFP,50,3.0,4.0,4\n");
    let md = render_table(&rows, TableFormat::Markdown);
    assert!(md.contains("| test | scripted:oracle CFP | 50 | 3.0 | 4.0 | 4 |"));
}

#[test]
fn all_failures_show_dashes() {
    let rows = aggregate(&[failure(), failure(), failure()], Grouping::ByProblem).unwrap();
    assert_eq!(rows[0].success_rate, Ratio::from_integer(0));
    assert_eq!(rows[0].mean_iterations_success, None);
    assert!(render_table(&rows, TableFormat::Csv).ends_with(",0,-,-,3\n"));
}

#[test]
fn single_success() {
    let rows = aggregate(&[success(1, 2)], Grouping::ByProblem).unwrap();
    assert_eq!(render_table(&rows, TableFormat::Csv).lines().nth(1).unwrap(), "test,scripted:oracle CFP,100,1.0,2.0,1");
}

#[test]
fn thirds_round_half_up() {
    let records = vec![success(1, 1), success(2, 1), failure()];
    let rows = aggregate(&records, Grouping::ByProblem).unwrap();
    assert_eq!(render_table(&rows, TableFormat::Csv).lines().nth(1).unwrap(), "test,scripted:oracle CFP,67,1.5,1.0,3");
}

#[test]
fn empty_input_is_rejected() {
    assert_eq!(aggregate(&[], Grouping::ByObstacleCount), Err(MetricsError::EmptyInput));
}

#[test]
fn corrupted_successes_are_flagged_not_counted() {
    let mut lying = success(2, 2);
    lying.final_path = Some(PathCandidate::new(vec![Point::from_ints(5, 5), Point::from_ints(9, 9)]));
    lying.final_path_length = Some(1);
    let mut miscounted = success(2, 2);
    miscounted.final_path_length = Some(7);
    let rows = aggregate(&[lying, miscounted, success(3, 3)], Grouping::ByProblem).unwrap();
    assert_eq!(rows[0].flagged, 2);
    assert_eq!(rows[0].success_rate, Ratio::new(100, 3));
    assert_eq!(rows[0].mean_iterations_success, Some(Ratio::from_integer(3)));
}

#[test]
fn grouping_by_obstacle_count() {
    let mut with_box = success(1, 1);
    with_box.problem = square_problem(vec![rect(4, 1, 5, 2), rect(1, 4, 2, 5)]);
    with_box.problem_name = "other".into();
    let rows = aggregate(&[success(1, 1), with_box, failure()], Grouping::ByObstacleCount).unwrap();
    let groups: Vec<(&str, usize)> = rows.iter().map(|r| (r.group.as_str(), r.run_count)).collect();
    assert_eq!(groups, vec![("0 Obs", 2), ("2 Obs", 1)]);
}

#[test]
fn metrics_recompute_from_jsonl() {
    let records = vec![success(2, 3), failure(), success(4, 5)];
    let jsonl: String = records.iter().map(|r| serde_json::to_string(r).unwrap() + "\n").collect();
    let reread = read_records(&jsonl).unwrap();
    assert_eq!(aggregate(&reread, Grouping::ByProblem), aggregate(&records, Grouping::ByProblem));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn order_of_records_does_not_matter(
        runs in prop::collection::vec(prop::option::of((1usize..20, 1i64..6)), 1..12),
        seed in any::<u64>(),
    ) {
        let records: Vec<RunRecord> = runs.iter().map(|r| match r {
            Some((n, pl)) => success(*n, *pl),
            None => failure(),
        }).collect();
        let mut shuffled = records.clone();
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(aggregate(&records, Grouping::ByProblem), aggregate(&shuffled, Grouping::ByProblem));
        let rows = aggregate(&records, Grouping::ByProblem).unwrap();
        let wins = runs.iter().filter(|r| r.is_some()).count() as i64;
        prop_assert_eq!(rows[0].success_rate, Ratio::new(100 * wins, runs.len() as i64));
    }
}
