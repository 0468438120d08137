#![allow(dead_code)]

use rand::seq::index::sample;
use rand::Rng;
use repfam::graph::{Digraph, WeightedGraph};
use repfam::pcover::PCInstance;
use repfam::{ElementSet, RepMode, Universe, WeightedFamily};

pub fn random_set(rng: &mut impl Rng, n: usize, p: usize) -> ElementSet {
    ElementSet::from_elements(n, sample(rng, n, p).iter()).unwrap()
}

/// `m` random `p`-sets (repeats allowed); weights drawn from a small grid so
/// ties occur.
pub fn random_family(rng: &mut impl Rng, n: usize, p: usize, m: usize, mode: RepMode) -> WeightedFamily {
    let u = Universe::new(n);
    let members: Vec<ElementSet> = (0..m).map(|_| random_set(rng, n, p)).collect();
    if mode == RepMode::Unweighted {
        WeightedFamily::unweighted(u, p, members).unwrap()
    } else {
        let weights = (0..m).map(|_| f64::from(rng.gen_range(0..20u32)) / 4.0).collect();
        WeightedFamily::weighted(u, p, members, weights).unwrap()
    }
}

pub fn random_digraph(rng: &mut impl Rng, n: usize, density: f64) -> Digraph {
    let mut g = Digraph::new(n);
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(density) {
                g.add_edge(a, b).unwrap();
            }
        }
    }
    g
}

pub fn random_weighted_graph(rng: &mut impl Rng, n: usize, density: f64, directed: bool) -> WeightedGraph {
    let mut g = WeightedGraph::new(n, directed);
    for a in 0..n {
        for b in 0..n {
            if a != b && (directed || a < b) && rng.gen_bool(density) {
                g.add_edge(a, b, f64::from(rng.gen_range(1..30u32)) / 2.0).unwrap();
            }
        }
    }
    g
}

pub fn random_pc_instance(rng: &mut impl Rng, n: usize, m: usize, k: usize) -> PCInstance {
    let u = Universe::new(n);
    let sets = (0..m)
        .map(|_| {
            let size = rng.gen_range(0..=n.min(4));
            random_set(rng, n, size)
        })
        .collect();
    PCInstance::new(u, sets, k).unwrap()
}
