//! Exhaustive out-tree enumeration: the reference answers for the tree
//! solvers.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::sets::{ElementSet, Universe, WeightedFamily};

use super::guide::OutTree;

/// Largest graph accepted by the exhaustive routines.
pub const BRUTE_FORCE_MAX_NODES: usize = 9;

fn check_budget(g: &Digraph) -> Result<()> {
    if g.node_count() > BRUTE_FORCE_MAX_NODES {
        return Err(Error::Budget {
            estimated: g.node_count() as f64,
            budget: BRUTE_FORCE_MAX_NODES as f64,
        });
    }
    Ok(())
}

/// Calls `visit` on every out-tree of `g` rooted at `root` whose node set is
/// exactly `nodes`.
pub fn for_each_out_tree_on(
    g: &Digraph,
    root: usize,
    nodes: &ElementSet,
    mut visit: impl FnMut(&OutTree) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if !nodes.contains(root) {
        return ControlFlow::Continue(());
    }
    let rest: Vec<usize> = nodes.iter().filter(|&x| x != root).collect();
    let options: Vec<Vec<usize>> = rest
        .iter()
        .map(|&x| nodes.iter().filter(|&p| p != x && g.has_edge(p, x)).collect())
        .collect();
    if options.iter().any(Vec::is_empty) {
        return ControlFlow::Continue(());
    }
    let n = g.node_count();
    let mut parent = vec![None; n];
    assign(0, &rest, &options, root, nodes, &mut parent, &mut visit)
}

fn assign(
    idx: usize,
    rest: &[usize],
    options: &[Vec<usize>],
    root: usize,
    nodes: &ElementSet,
    parent: &mut Vec<Option<usize>>,
    visit: &mut impl FnMut(&OutTree) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if idx == rest.len() {
        if let Ok(t) = OutTree::from_parents(root, parent.clone(), nodes.clone()) {
            return visit(&t);
        }
        return ControlFlow::Continue(());
    }
    let x = rest[idx];
    for &p in &options[idx] {
        // reject a parent whose own chain (as assigned so far) leads back to x
        let mut cur = Some(p);
        let mut cycle = false;
        while let Some(c) = cur {
            if c == x {
                cycle = true;
                break;
            }
            cur = if c == root { None } else { parent[c] };
        }
        if cycle {
            continue;
        }
        parent[x] = Some(p);
        assign(idx + 1, rest, options, root, nodes, parent, visit)?;
        parent[x] = None;
    }
    ControlFlow::Continue(())
}

/// Calls `visit` on every out-tree of `g` rooted at `root` with at most
/// `max_nodes` nodes.
pub fn for_each_out_tree(
    g: &Digraph,
    root: usize,
    max_nodes: usize,
    mut visit: impl FnMut(&OutTree) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let reach = g.reachable(root);
    let others: Vec<usize> = reach.iter().filter(|&x| x != root).collect();
    let n = g.node_count();
    for size in 0..=others.len().min(max_nodes.saturating_sub(1)) {
        for combo in itertools::Itertools::combinations(others.iter().copied(), size) {
            let mut nodes = ElementSet::empty(n);
            nodes.insert(root);
            for x in combo {
                nodes.insert(x);
            }
            for_each_out_tree_on(g, root, &nodes, &mut visit)?;
        }
    }
    ControlFlow::Continue(())
}

/// All `(internal, leaves)` pairs realised by out-trees rooted at `root`
/// with at most `max_nodes` nodes.
pub fn out_tree_profiles(g: &Digraph, root: usize, max_nodes: usize) -> Result<BTreeSet<(usize, usize)>> {
    check_budget(g)?;
    let mut out = BTreeSet::new();
    let _ = for_each_out_tree(g, root, max_nodes, |t| {
        out.insert((t.internal_count(), t.leaf_count()));
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// Whether `g` has an out-tree rooted at `r` with exactly `k` internal nodes
/// and `t` leaves.
pub fn brute_force_kt_tree(g: &Digraph, r: usize, k: usize, t: usize) -> Result<bool> {
    check_budget(g)?;
    let mut found = false;
    let _ = for_each_out_tree(g, r, k + t, |tree| {
        if tree.internal_count() == k && tree.leaf_count() == t {
            found = true;
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(found)
}

/// Most internal nodes over all spanning out-trees, or `None` when no node
/// reaches every other node.
pub fn max_internal_out_branching(g: &Digraph) -> Result<Option<usize>> {
    check_budget(g)?;
    let n = g.node_count();
    let all = Universe::new(n).full_set();
    let mut best = None;
    for r in 0..n {
        let _ = for_each_out_tree_on(g, r, &all, |t| {
            let c = t.internal_count();
            if best.is_none_or(|b| c > b) {
                best = Some(c);
            }
            ControlFlow::Continue(())
        });
    }
    Ok(best)
}

/// Whether `g` has a spanning out-tree with at least `k` internal nodes.
pub fn brute_force_kiob(g: &Digraph, k: usize) -> Result<bool> {
    Ok(max_internal_out_branching(g)?.is_some_and(|m| m >= k))
}

/// `V_T \ {v, u}` for every out-tree rooted at `v` having `u` as a leaf (or
/// `u = v`) with `i` internal nodes and `l` leaves outside `{v, u}`.
pub fn partial_tree_sets(g: &Digraph, v: usize, u: usize, i: usize, l: usize) -> Result<WeightedFamily> {
    check_budget(g)?;
    let n = g.node_count();
    let extra = usize::from(u != v);
    let mut found = BTreeSet::new();
    let _ = for_each_out_tree(g, v, i + l + 1 + extra, |t| {
        if t.len() != i + l + 1 + extra || (u != v && !(t.nodes().contains(u) && t.is_leaf(u))) {
            return ControlFlow::Continue(());
        }
        let inner = t.nodes().iter().filter(|&x| x != v && x != u);
        let (mut ti, mut tl) = (0, 0);
        for x in inner {
            if t.is_leaf(x) {
                tl += 1;
            } else {
                ti += 1;
            }
        }
        if (ti, tl) == (i, l) {
            let mut s = t.nodes().clone();
            s.remove(v);
            s.remove(u);
            found.insert(s);
        }
        ControlFlow::Continue(())
    });
    Ok(WeightedFamily::unweighted(Universe::new(n), i + l, found.into_iter().collect()).expect("sizes match"))
}
