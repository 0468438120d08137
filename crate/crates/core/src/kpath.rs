//! Minimum-weight simple path on exactly `k` vertices.
//!
//! `P[p][v]` holds vertex sets (endpoint `v` excluded) of `p`-vertex paths
//! ending at `v`, weighted by path weight and MIN-filtered at rank `k` after
//! every extension round.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::repfam::{FilterStats, RepConfig, Representer};
use crate::sets::{verify_representation, ElementSet, RepMode, Universe, WeightedFamily};

/// What `k` counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PathLength {
    /// `k` vertices, `k - 1` edges.
    #[default]
    Vertices,
    /// `k` edges, `k + 1` vertices.
    Edges,
}

impl PathLength {
    pub fn vertices(self, k: usize) -> usize {
        match self {
            PathLength::Vertices => k,
            PathLength::Edges => k + 1,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct KPathStats {
    pub max_family: usize,
    pub total_family: usize,
    pub filter: FilterStats,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct KPathSolution {
    pub answer: Option<f64>,
    pub stats: KPathStats,
    /// Failed stage checks, present when run checked.
    pub check_failures: Option<Vec<String>>,
}

pub fn solve_weighted_kpath(g: &WeightedGraph, k: usize, length: PathLength, cfg: &RepConfig) -> Result<KPathSolution> {
    run(g, k, length, cfg, false)
}

/// As [`solve_weighted_kpath`], checking that every stored family
/// MIN-represents the brute-force family of paths it stands for.
pub fn solve_weighted_kpath_checked(
    g: &WeightedGraph,
    k: usize,
    length: PathLength,
    cfg: &RepConfig,
) -> Result<KPathSolution> {
    run(g, k, length, cfg, true)
}

/// Keeps the lightest entry per set, in order of first appearance.
fn lightest_per_set(f: WeightedFamily) -> WeightedFamily {
    let mut best: HashMap<&ElementSet, usize> = HashMap::with_capacity(f.len());
    let mut order = Vec::new();
    for (i, (m, w)) in f.iter().enumerate() {
        match best.get_mut(m) {
            Some(slot) => {
                if w < f.weight(*slot) {
                    *slot = i;
                }
            }
            None => {
                best.insert(m, i);
                order.push(m);
            }
        }
    }
    let keep: Vec<usize> = order.iter().map(|m| best[m]).collect();
    f.select(&keep)
}

fn run(g: &WeightedGraph, k: usize, length: PathLength, cfg: &RepConfig, debug: bool) -> Result<KPathSolution> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    let n = g.node_count();
    let target = length.vertices(k);
    let rep = Representer::new(cfg.clone())?;
    let mut failures = Vec::new();
    let mut stats = KPathStats::default();
    if target > n {
        return Ok(KPathSolution {
            answer: None,
            stats: KPathStats { filter: rep.stats(), ..stats },
            check_failures: debug.then_some(failures),
        });
    }
    let u = Universe::new(n);
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (from, outs) in g.lightest_out().into_iter().enumerate() {
        for (to, w) in outs {
            incoming[to].push((from, w));
        }
    }
    let mut level: Vec<WeightedFamily> = (0..n)
        .map(|_| WeightedFamily::weighted(u, 0, vec![u.empty_set()], vec![0.0]).expect("size 0"))
        .collect();
    for p in 2..=target {
        let next: Vec<Result<WeightedFamily>> = (0..n)
            .into_par_iter()
            .map(|v| {
                let mut cand = WeightedFamily::new_weighted(u, p - 1);
                for &(from, w) in &incoming[v] {
                    for (x, wx) in level[from].iter() {
                        if !x.contains(v) {
                            cand.push_weighted(x.with(from), wx + w);
                        }
                    }
                }
                rep.represent(target, &lightest_per_set(cand), RepMode::Min)
            })
            .collect();
        level = next.into_iter().collect::<Result<_>>()?;
        for (v, fam) in level.iter().enumerate() {
            stats.max_family = stats.max_family.max(fam.len());
            stats.total_family += fam.len();
            if debug {
                let all = paths_ending_at(g, v, p);
                if let Some(c) = verify_representation(&all, fam, target, RepMode::Min)?.counterexample() {
                    failures.push(format!(
                        "p={p} v={v}: path set {} (weight {}) has no stored stand-in avoiding {}",
                        c.x, c.x_weight, c.y
                    ));
                }
            }
        }
    }
    let answer = level
        .iter()
        .filter_map(|f| f.weights().and_then(|w| w.iter().copied().reduce(f64::min)))
        .reduce(f64::min);
    stats.filter = rep.stats();
    Ok(KPathSolution {
        answer,
        stats,
        check_failures: debug.then_some(failures),
    })
}

/// Vertex sets (endpoint excluded) and weights of every simple path on `p`
/// vertices ending at `v`, with parallel arcs collapsed to the lightest.
pub fn paths_ending_at(g: &WeightedGraph, v: usize, p: usize) -> WeightedFamily {
    let n = g.node_count();
    let u = Universe::new(n);
    let out = g.lightest_out();
    let mut fam = WeightedFamily::new_weighted(u, p - 1);
    let mut seen = HashMap::new();
    let mut path = Vec::with_capacity(p);
    for start in 0..n {
        path.push(start);
        walk(&out, &mut path, 0.0, p, &mut |path, w| {
            if *path.last().expect("non-empty") == v {
                let set = ElementSet::from_elements(n, path[..p - 1].iter().copied()).expect("in range");
                if seen.insert((set.clone(), w.to_bits()), ()).is_none() {
                    fam.push_weighted(set, w);
                }
            }
        });
        path.pop();
    }
    fam
}

fn walk(out: &[Vec<(usize, f64)>], path: &mut Vec<usize>, w: f64, p: usize, visit: &mut impl FnMut(&[usize], f64)) {
    if path.len() == p {
        visit(path, w);
        return;
    }
    let last = *path.last().expect("non-empty");
    for &(next, wn) in &out[last] {
        if !path.contains(&next) {
            path.push(next);
            walk(out, path, w + wn, p, visit);
            path.pop();
        }
    }
}

/// Largest graph accepted by [`brute_force_kpath`].
pub const BRUTE_FORCE_MAX_NODES: usize = 14;

/// Exact optimum by enumerating every simple path.
pub fn brute_force_kpath(g: &WeightedGraph, k: usize, length: PathLength) -> Result<Option<f64>> {
    let n = g.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::Budget {
            estimated: n as f64,
            budget: BRUTE_FORCE_MAX_NODES as f64,
        });
    }
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    let target = length.vertices(k);
    if target > n {
        return Ok(None);
    }
    let out = g.lightest_out();
    let mut best: Option<f64> = None;
    let mut path = Vec::with_capacity(target);
    for start in 0..n {
        path.push(start);
        walk(&out, &mut path, 0.0, target, &mut |_, w| {
            best = Some(best.map_or(w, |b| b.min(w)));
        });
        path.pop();
    }
    Ok(best)
}
