mod common;

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repfam::graph::Graph;
use repfam::kpath::{brute_force_kpath, solve_weighted_kpath, solve_weighted_kpath_checked, PathLength};
use repfam::ktree::{
    brute_force_kiob, brute_force_kt_tree, find_complying_guide_tree, for_each_out_tree, solve_kiob, TreeConfig,
    TreeSolver,
};
use repfam::pcover::{brute_force_pcover, dominating_set_reduce, solve_partial_cover, solve_partial_cover_checked};
use repfam::RepConfig;

use common::*;

fn forced() -> RepConfig {
    RepConfig::default().with_skip_threshold(Some(0))
}

#[test]
fn partial_cover_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..60 {
        let (n, m, k) = (rng.gen_range(1..=9), rng.gen_range(1..=7), rng.gen_range(1..=5));
        let inst = random_pc_instance(&mut rng, n, m, k);
        let want = brute_force_pcover(&inst).unwrap();
        let got = solve_partial_cover(&inst, &forced().with_seed(round)).unwrap();
        assert_eq!(got.answer, want, "round {round}");
    }
}

#[test]
fn checked_partial_cover_stages_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for round in 0..8 {
        let inst = random_pc_instance(&mut rng, 7, 5, 4);
        let sol = solve_partial_cover_checked(&inst, &forced()).unwrap();
        let checks = sol.checks.unwrap();
        assert!(checks.passed(), "round {round}: {:?}", checks.failures);
    }
}

#[test]
fn dominating_set_examples() {
    let single = Graph::new(1);
    assert_eq!(solve_partial_cover(&dominating_set_reduce(&single, 1).unwrap(), &forced()).unwrap().answer, Some(1));
    let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
    assert_eq!(solve_partial_cover(&dominating_set_reduce(&star, 4).unwrap(), &forced()).unwrap().answer, Some(1));
    let p4 = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let inst = dominating_set_reduce(&p4, 4).unwrap();
    assert_eq!(brute_force_pcover(&inst).unwrap(), Some(2));
    assert_eq!(solve_partial_cover(&inst, &forced()).unwrap().answer, Some(2));
}

#[test]
fn kpath_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for round in 0..60 {
        let n = rng.gen_range(1..=9);
        let (density, directed) = (rng.gen_range(0.2..0.8), rng.gen_bool(0.5));
        let g = random_weighted_graph(&mut rng, n, density, directed);
        let k = rng.gen_range(1..=6);
        let length = if rng.gen_bool(0.8) { PathLength::Vertices } else { PathLength::Edges };
        let want = brute_force_kpath(&g, k, length).unwrap();
        let got = solve_weighted_kpath(&g, k, length, &forced().with_seed(round)).unwrap();
        assert_eq!(got.answer, want, "round {round}");
    }
}

#[test]
fn checked_kpath_stages_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..6 {
        let g = random_weighted_graph(&mut rng, 7, 0.5, false);
        let sol = solve_weighted_kpath_checked(&g, 4, PathLength::Vertices, &forced()).unwrap();
        assert_eq!(sol.check_failures.unwrap(), Vec::<String>::new());
    }
}

#[test]
fn tree_solver_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let cfg = TreeConfig::default().with_rep(forced());
    for round in 0..25 {
        let n = rng.gen_range(2..=6);
        let density = rng.gen_range(0.2..0.7);
        let g = random_digraph(&mut rng, n, density);
        for q in 2..=n.min(6) {
            let solver = TreeSolver::new(&g, q, &cfg).unwrap();
            for r in 0..n {
                for k in 1..q {
                    let want = brute_force_kt_tree(&g, r, k, q - k).unwrap();
                    assert_eq!(solver.accepts(r, k, q - k).unwrap(), want, "round {round} r={r} k={k} q={q}");
                }
            }
        }
    }
}

#[test]
fn checked_tree_tables_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let cfg = TreeConfig {
        debug_verify: true,
        ..TreeConfig::default().with_rep(forced())
    };
    for _ in 0..3 {
        let g = random_digraph(&mut rng, 5, 0.45);
        let solver = TreeSolver::new(&g, 4, &cfg).unwrap();
        let checks = solver.checks().unwrap();
        assert!(checks.passed(), "{:?}", checks.failures);
    }
}

#[test]
fn kiob_matches_exhaustive_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let cfg = TreeConfig::default().with_rep(forced());
    for round in 0..30 {
        let n = rng.gen_range(1..=6);
        let density = rng.gen_range(0.2..0.6);
        let g = random_digraph(&mut rng, n, density);
        for k in 1..=4 {
            assert_eq!(solve_kiob(&g, k, &cfg).unwrap().answer, brute_force_kiob(&g, k).unwrap(), "round {round} k={k}");
        }
    }
}

#[test]
fn every_small_out_tree_has_a_guide() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let mut seen = 0;
    for _ in 0..10 {
        let g = random_digraph(&mut rng, 7, 0.35);
        let _ = for_each_out_tree(&g, 0, 7, |t| {
            if t.len() >= 3 && seen < 300 {
                seen += 1;
                let u = t.nodes().iter().find(|&x| t.is_leaf(x)).unwrap();
                let q = t.len();
                assert!(find_complying_guide_tree(t, u, q - t.leaf_count(), t.leaf_count(), 2).is_some());
            }
            ControlFlow::Continue(())
        });
    }
    assert!(seen > 100);
}
