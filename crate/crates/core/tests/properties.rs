mod common;

use std::ops::ControlFlow;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use repfam::kpath::{solve_weighted_kpath, PathLength};
use repfam::ktree::for_each_out_tree;
use repfam::pcover::{solve_partial_cover, PCInstance};
use repfam::separator::BuildOptions;
use repfam::{
    compute_representative, compute_representative_with, enumerate_subsets, verify_representation, RepConfig,
    RepMode, Separator, SeparatorParams, WeightedFamily,
};

use common::*;

fn mode_strategy() -> impl Strategy<Value = RepMode> {
    prop_oneof![Just(RepMode::Max), Just(RepMode::Min), Just(RepMode::Unweighted)]
}

/// `(n, k, p)` with `p ≤ k ≤ n`.
fn shape() -> impl Strategy<Value = (usize, usize, usize)> {
    (3usize..=8).prop_flat_map(|n| (Just(n), 1usize..=n.min(5))).prop_flat_map(|(n, k)| (Just(n), Just(k), 0..=k))
}

fn subfamily(f: &WeightedFamily, mask: u64) -> WeightedFamily {
    let keep: Vec<usize> = (0..f.len()).filter(|i| mask >> (i % 64) & 1 == 1).collect();
    f.select(&keep)
}

fn forced() -> RepConfig {
    RepConfig::default().with_skip_threshold(Some(0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn a_family_represents_itself((n, k, p) in shape(), m in 0usize..12, mode in mode_strategy(), seed: u64) {
        let f = random_family(&mut ChaCha8Rng::seed_from_u64(seed), n, p, m, mode);
        prop_assert!(verify_representation(&f, &f, k, mode).unwrap().holds());
    }

    #[test]
    fn representation_is_transitive(
        (n, k, p) in shape(), m in 1usize..12, mode in mode_strategy(), seed: u64, a: u64, b: u64,
    ) {
        let s = random_family(&mut ChaCha8Rng::seed_from_u64(seed), n, p, m, mode);
        let sa = subfamily(&s, a);
        let sb = subfamily(&sa, b);
        let ab = verify_representation(&s, &sa, k, mode).unwrap().holds();
        let bc = verify_representation(&sa, &sb, k, mode).unwrap().holds();
        if ab && bc {
            prop_assert!(verify_representation(&s, &sb, k, mode).unwrap().holds());
        }
    }

    #[test]
    fn full_rank_needs_only_the_best_weight(n in 2usize..7, m in 1usize..10, seed: u64, mask: u64) {
        let k = n.min(3);
        let s = random_family(&mut ChaCha8Rng::seed_from_u64(seed), n, k, m, RepMode::Max);
        let sub = subfamily(&s, mask);
        let best = |f: &WeightedFamily| f.weights().unwrap().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let expected = !sub.is_empty() && best(&sub) >= best(&s);
        prop_assert_eq!(verify_representation(&s, &sub, k, RepMode::Max).unwrap().holds(), expected);
    }

    #[test]
    fn subset_enumeration_counts(n in 0usize..10, size in 0usize..6, seed: u64) {
        let u = repfam::Universe::new(n);
        let excl = random_set(&mut ChaCha8Rng::seed_from_u64(seed), n, n / 3);
        let free = n - excl.len();
        let all: Vec<_> = enumerate_subsets(u, size, &excl).collect();
        let binom = if size > free { 0 } else { (0..size).fold(1usize, |acc, i| acc * (free - i) / (i + 1)) };
        prop_assert_eq!(all.len(), binom);
        prop_assert!(all.iter().all(|s| s.len() == size && s.is_disjoint(&excl)));
        prop_assert!(all.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn filter_output_is_a_small_representing_subfamily(
        (n, k, p) in shape(), m in 0usize..40, mode in mode_strategy(), seed: u64,
    ) {
        let s = random_family(&mut ChaCha8Rng::seed_from_u64(seed), n, p, m, mode);
        let cfg = forced().with_seed(seed);
        let out = compute_representative(s.universe(), k, &s, mode, &cfg).unwrap();
        for (x, w) in out.iter() {
            prop_assert!(s.iter().any(|(y, v)| y == x && (mode == RepMode::Unweighted || v == w)));
        }
        let sep = Separator::build_verified(
            SeparatorParams::new(n, k, p, cfg.c).unwrap(), seed, cfg.max_attempts, &BuildOptions::default(),
        ).unwrap();
        prop_assert!(out.len() <= sep.len());
        prop_assert!(verify_representation(&s, &out, k, mode).unwrap().holds());
        // filtering the output again still represents the original
        let again = compute_representative_with(&sep, &out, mode).unwrap();
        prop_assert!(verify_representation(&s, &again, k, mode).unwrap().holds());
    }

    #[test]
    fn greedy_keeps_the_heaviest_member_of_each_block(
        (n, k, p) in shape(), m in 1usize..30, seed: u64,
    ) {
        let s = random_family(&mut ChaCha8Rng::seed_from_u64(seed), n, p, m, RepMode::Max);
        let sep = Separator::build_verified(
            SeparatorParams::new(n, k, p, 1.447).unwrap(), seed, 64, &BuildOptions::default(),
        ).unwrap();
        let out = compute_representative_with(&sep, &s, RepMode::Max).unwrap();
        let chis: Vec<Vec<usize>> = s.members().iter().map(|x| sep.chi(x).unwrap()).collect();
        for f in 0..sep.len() {
            let inside: Vec<usize> = (0..s.len()).filter(|&i| chis[i].contains(&f)).collect();
            if inside.is_empty() {
                continue;
            }
            let heaviest = inside.iter().map(|&i| s.weight(i)).fold(f64::NEG_INFINITY, f64::max);
            // some kept member lies in block f and carries the block's top weight
            let kept = out.iter().any(|(x, w)| sep.chi(x).unwrap().contains(&f) && w == heaviest);
            prop_assert!(kept, "block {} lost its heaviest member", f);
        }
    }

    #[test]
    fn separators_do_not_depend_on_thread_count((n, k, p) in shape(), seed: u64) {
        let params = SeparatorParams::new(n, k, p, 1.2).unwrap();
        let build = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                Separator::build_randomized(params, seed, &BuildOptions::default()).unwrap().sets().to_vec()
            })
        };
        prop_assert_eq!(build(1), build(4));
    }

    #[test]
    fn kpath_ignores_edge_order(n in 2usize..8, k in 1usize..6, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_weighted_graph(&mut rng, n, 0.5, false);
        let mut rev = repfam::graph::WeightedGraph::new(n, false);
        for e in g.edges().iter().rev() {
            rev.add_edge(e.u, e.v, e.w).unwrap();
        }
        let cfg = forced();
        let a = solve_weighted_kpath(&g, k, PathLength::Vertices, &cfg).unwrap().answer;
        let b = solve_weighted_kpath(&rev, k, PathLength::Vertices, &cfg).unwrap().answer;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn adding_a_set_never_hurts(n in 2usize..8, m in 1usize..6, k in 1usize..6, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_pc_instance(&mut rng, n, m, k);
        let extra = random_set(&mut rng, n, n / 2);
        let mut sets = inst.sets().to_vec();
        sets.push(extra);
        let bigger = PCInstance::new(inst.universe(), sets, k).unwrap();
        let cost = |a: Option<usize>| a.unwrap_or(usize::MAX);
        let before = solve_partial_cover(&inst, &forced()).unwrap().answer;
        let after = solve_partial_cover(&bigger, &forced()).unwrap().answer;
        prop_assert!(cost(after) <= cost(before));
    }

    #[test]
    fn out_tree_counts_add_up(n in 1usize..6, seed: u64) {
        let g = random_digraph(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.5);
        let mut ok = true;
        let _ = for_each_out_tree(&g, 0, n, |t| {
            ok &= t.internal_count() + t.leaf_count() == t.len();
            ControlFlow::Continue(())
        });
        prop_assert!(ok);
    }
}
