use planloop::closed_loop::run_single;
use planloop::hints::HintStrategy;
use planloop::llm::{ScriptPolicy, ScriptedAgent};
use planloop::oracle::{plan, OracleConfig};
use planloop::problems::{handcrafted_suite, make_unsolvable_variant, SUITE_NAMES};

#[test]
fn suite_names_match_files() {
    let names: Vec<String> = handcrafted_suite().into_iter().map(|p| p.name).collect();
    assert_eq!(names, SUITE_NAMES);
}

#[test]
fn every_suite_problem_is_solvable_and_blockable() {
    for (i, p) in handcrafted_suite().iter().enumerate() {
        let r = plan(p, &OracleConfig::default());
        assert!(r.solvable, "{} should be solvable", p.name);
        let v = make_unsolvable_variant(p, i as u64).unwrap();
        assert!(!plan(&v, &OracleConfig::default()).solvable, "{} variant", p.name);
    }
}

#[test]
fn follow_free_space_solves_most_of_the_suite() {
    let mut solved = 0;
    for p in handcrafted_suite() {
        let mut agent = ScriptedAgent::new(ScriptPolicy::FollowFreeSpace);
        let r = run_single(&p, &HintStrategy::cfp(), &mut agent, 20).unwrap();
        eprintln!("{:14} success={} iters={} len={:?}", p.name, r.success, r.iterations_used, r.final_path_length);
        solved += r.success as usize;
    }
    assert!(solved >= 7, "solved {solved}/10");
}
