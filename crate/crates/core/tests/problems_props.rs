mod common;

use common::*;
use planloop::oracle::{self, OracleConfig};
use planloop::problems::{
    generate_random, handcrafted_suite, load_problem, make_unsolvable_variant, GenerationError, GeneratorConfig,
};
use proptest::prelude::*;

/// The 3x3 tiling of `[0,10]²`, minus the two corner cells holding I and G,
/// each grown by `1 + overlap` about its center and clamped to the workspace.
fn expected_tiles(overlap: f64) -> Vec<(f64, f64, f64, f64)> {
    let cell = 10.0 / 3.0;
    let mut tiles = Vec::new();
    for r in 0..3 {
        for c in 0..3 {
            if (r, c) == (0, 0) || (r, c) == (2, 2) {
                continue;
            }
            let (cx, cy) = ((c as f64 + 0.5) * cell, (r as f64 + 0.5) * cell);
            let half = cell / 2.0 * (1.0 + overlap);
            tiles.push((
                (cx - half).max(0.0),
                (cy - half).max(0.0),
                (cx + half).min(10.0),
                (cy + half).min(10.0),
            ));
        }
    }
    tiles
}

fn within(tile: &(f64, f64, f64, f64), poly: &[V]) -> bool {
    const TOL: f64 = 1e-9;
    poly.iter()
        .all(|p| p.0 >= tile.0 - TOL && p.1 >= tile.1 - TOL && p.0 <= tile.2 + TOL && p.1 <= tile.3 + TOL)
}

/// Backtracking search for an assignment of obstacles to distinct tiles.
fn assign(fits: &[Vec<usize>], used: &mut Vec<bool>, i: usize) -> bool {
    if i == fits.len() {
        return true;
    }
    for &t in &fits[i] {
        if !used[t] {
            used[t] = true;
            if assign(fits, used, i + 1) {
                return true;
            }
            used[t] = false;
        }
    }
    false
}

/// Separating-axis test: true if some edge normal separates the polygons
/// (touching allowed).
fn interiors_disjoint(p: &[V], q: &[V]) -> bool {
    let axes = |poly: &[V]| -> Vec<V> {
        (0..poly.len())
            .map(|i| {
                let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
                (b.1 - a.1, a.0 - b.0)
            })
            .collect()
    };
    axes(p).into_iter().chain(axes(q)).any(|n| {
        let proj = |poly: &[V]| {
            poly.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                let d = n.0 * v.0 + n.1 * v.1;
                (lo.min(d), hi.max(d))
            })
        };
        let ((plo, phi), (qlo, qhi)) = (proj(p), proj(q));
        phi <= qlo + 1e-9 || qhi <= plo + 1e-9
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generation_is_deterministic(k in 1usize..8, seed in any::<u64>()) {
        let config = GeneratorConfig::new(k, seed);
        let a = generate_random(&config).unwrap();
        let b = generate_random(&config).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert_eq!(a.obstacles.len(), k);
        prop_assert_eq!(a.name, format!("random-k{k}-seed{seed}"));
    }

    #[test]
    fn obstacles_stay_in_distinct_tiles(k in 1usize..8, seed in any::<u64>()) {
        let problem = generate_random(&GeneratorConfig::new(k, seed)).unwrap();
        let tiles = expected_tiles(0.2);
        let fits: Vec<Vec<usize>> = problem
            .obstacles
            .iter()
            .map(|o| {
                let v = verts(o);
                (0..tiles.len()).filter(|&t| within(&tiles[t], &v)).collect()
            })
            .collect();
        prop_assert!(assign(&fits, &mut vec![false; tiles.len()], 0));
        for o in &problem.obstacles {
            prop_assert!(!o.intersects(&problem.initial) && !o.intersects(&problem.goal));
        }
    }

    #[test]
    fn zero_overlap_gives_disjoint_interiors(k in 2usize..8, seed in any::<u64>()) {
        let mut config = GeneratorConfig::new(k, seed);
        config.overlap = 0.0;
        let problem = generate_random(&config).unwrap();
        let polys: Vec<Vec<V>> = problem.obstacles.iter().map(verts).collect();
        for i in 0..polys.len() {
            for j in i + 1..polys.len() {
                prop_assert!(interiors_disjoint(&polys[i], &polys[j]), "obstacles {} and {} overlap", i, j);
            }
        }
    }

    #[test]
    fn generated_problems_round_trip(k in 1usize..8, seed in any::<u64>()) {
        let problem = generate_random(&GeneratorConfig::new(k, seed)).unwrap();
        let reloaded = load_problem(&problem.to_json()).unwrap();
        prop_assert_eq!(&reloaded, &problem);
        prop_assert_eq!(reloaded.to_json(), problem.to_json());
    }
}

#[test]
fn suite_round_trips_through_json() {
    for problem in handcrafted_suite() {
        let reloaded = load_problem(&problem.to_json()).unwrap();
        assert_eq!(reloaded, problem, "{}", problem.name);
    }
}

#[test]
fn solvable_generation_yields_solvable_problems() {
    for seed in 0..10 {
        let problem = generate_random(&GeneratorConfig::new(5, seed).solvable()).unwrap();
        assert!(oracle::solvable(&problem, &OracleConfig::default()));
    }
}

#[test]
fn invalid_generator_configs_are_rejected() {
    assert!(matches!(generate_random(&GeneratorConfig::new(0, 1)), Err(GenerationError::InvalidConfig(_))));
    assert!(matches!(generate_random(&GeneratorConfig::new(9, 1)), Err(GenerationError::InvalidConfig(_))));
    let mut config = GeneratorConfig::new(3, 1);
    config.overlap = 1.5;
    assert!(matches!(generate_random(&config), Err(GenerationError::InvalidConfig(_))));
}

#[test]
fn variants_block_every_path() {
    for seed in 0..5 {
        let problem = generate_random(&GeneratorConfig::new(4, seed).solvable()).unwrap();
        let variant = make_unsolvable_variant(&problem, seed).unwrap();
        assert_eq!(variant.obstacles.len(), problem.obstacles.len() + 1);
        assert!(!oracle::solvable(&variant, &OracleConfig::default()));
        assert!(make_unsolvable_variant(&variant, seed).is_err());
    }
}

#[test]
fn malformed_documents_are_rejected() {
    assert!(load_problem("{").is_err());
    let mut problem = square_problem(vec![rect(2, 2, 4, 4)]);
    problem.obstacles.push(rect(0, 0, 1, 1));
    assert!(load_problem(&problem.to_json()).is_err());
}
