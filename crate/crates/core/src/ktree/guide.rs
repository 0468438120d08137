//! Out-trees, guide trees and the compliance test between them.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::sets::ElementSet;

/// An out-tree: every node but the root has one parent, and every node
/// reaches the root by following parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutTree {
    root: usize,
    parent: Vec<Option<usize>>,
    nodes: ElementSet,
}

impl OutTree {
    /// Builds a tree over `0..n` from its edges `(parent, child)`.
    pub fn from_edges(n: usize, root: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if root >= n {
            return Err(Error::input(format!("root {root} out of range for {n} nodes")));
        }
        let mut parent = vec![None; n];
        let mut nodes = ElementSet::empty(n);
        nodes.insert(root);
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::input(format!("edge ({a}, {b}) out of range for {n} nodes")));
            }
            if b == root || parent[b].is_some() {
                return Err(Error::input(format!("node {b} has more than one parent")));
            }
            parent[b] = Some(a);
            nodes.insert(a);
            nodes.insert(b);
        }
        Self::from_parents(root, parent, nodes)
    }

    pub(crate) fn from_parents(root: usize, parent: Vec<Option<usize>>, nodes: ElementSet) -> Result<Self> {
        let tree = OutTree { root, parent, nodes };
        for x in tree.nodes.iter() {
            let mut cur = x;
            let mut steps = 0;
            while cur != tree.root {
                match tree.parent[cur] {
                    Some(p) if tree.nodes.contains(p) => cur = p,
                    _ => return Err(Error::input(format!("node {x} does not reach the root"))),
                }
                steps += 1;
                if steps > tree.nodes.len() {
                    return Err(Error::input("parent links contain a cycle"));
                }
            }
        }
        Ok(tree)
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn nodes(&self) -> &ElementSet {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn parent(&self, x: usize) -> Option<usize> {
        if x == self.root {
            None
        } else {
            self.parent[x]
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.iter().filter_map(move |x| self.parent(x).map(|p| (p, x)))
    }

    pub fn is_leaf(&self, x: usize) -> bool {
        self.nodes.iter().all(|y| self.parent(y) != Some(x))
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.iter().filter(|&x| !self.is_leaf(x)).count()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|&x| self.is_leaf(x)).count()
    }

    /// Proper ancestor test.
    pub fn is_ancestor(&self, a: usize, b: usize) -> bool {
        let mut cur = self.parent(b);
        while let Some(p) = cur {
            if p == a {
                return true;
            }
            cur = self.parent(p);
        }
        false
    }

    pub fn is_subgraph_of(&self, g: &Digraph) -> bool {
        self.edges().all(|(a, b)| g.has_edge(a, b))
    }
}

/// A small rooted tree labelled by distinct graph nodes. Nodes are stored in
/// breadth-first order with children sorted by label, so `labels()[0]` is
/// the root and every parent precedes its children.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GuideTree {
    labels: Vec<usize>,
    parent: Vec<Option<usize>>,
    u: usize,
}

impl GuideTree {
    /// `parent[j]` is the position of node `j`'s parent; positions must be
    /// breadth-first.
    pub fn new(labels: Vec<usize>, parent: Vec<Option<usize>>, u: usize) -> Result<Self> {
        if labels.is_empty() || labels.len() != parent.len() || parent[0].is_some() {
            return Err(Error::input("guide tree needs a root at position 0"));
        }
        for (j, p) in parent.iter().enumerate().skip(1) {
            match p {
                Some(p) if *p < j => {}
                _ => return Err(Error::input("guide tree parents must precede their children")),
            }
        }
        let tree = GuideTree { labels, parent, u };
        if u != tree.labels[0] {
            match tree.position(u) {
                Some(pos) if tree.is_leaf_at(pos) => {}
                _ => return Err(Error::input(format!("node {u} must be a leaf of the guide tree"))),
            }
        }
        Ok(tree)
    }

    pub fn root(&self) -> usize {
        self.labels[0]
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn parent_at(&self, j: usize) -> Option<usize> {
        self.parent[j]
    }

    pub fn position(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&x| x == label)
    }

    /// Label of the father of `label`.
    pub fn father(&self, label: usize) -> Option<usize> {
        self.position(label).and_then(|j| self.parent[j]).map(|p| self.labels[p])
    }

    pub fn is_leaf_at(&self, j: usize) -> bool {
        !self.parent.contains(&Some(j))
    }

    pub fn internal_count(&self) -> usize {
        (0..self.len()).filter(|&j| !self.is_leaf_at(j)).count()
    }

    pub fn leaf_count(&self) -> usize {
        (0..self.len()).filter(|&j| self.is_leaf_at(j)).count()
    }

    pub fn node_set(&self, n: usize) -> ElementSet {
        ElementSet::from_elements(n, self.labels.iter().copied()).expect("labels are distinct and in range")
    }

    /// Proper ancestor test by position.
    fn is_ancestor_at(&self, a: usize, b: usize) -> bool {
        let mut cur = self.parent[b];
        while let Some(p) = cur {
            if p == a {
                return true;
            }
            cur = self.parent[p];
        }
        false
    }
}

/// Whether `t` complies with the guide tree restricted to its first `prefix`
/// nodes, with removal components of at most `cap` nodes. Components are
/// maximal connected pieces of `t` minus the prefix nodes, and their
/// neighbours are counted in the underlying undirected tree.
pub(crate) fn complies_prefix(t: &OutTree, c: &GuideTree, prefix: usize, cap: usize) -> bool {
    if t.root() != c.root() {
        return false;
    }
    let labels = &c.labels[..prefix];
    if labels.iter().any(|&x| !t.nodes().contains(x)) {
        return false;
    }
    if c.labels[prefix..].iter().any(|&x| t.nodes().contains(x)) {
        return false;
    }
    for a in 0..prefix {
        for b in 0..prefix {
            if a != b && c.is_ancestor_at(a, b) != t.is_ancestor(labels[a], labels[b]) {
                return false;
            }
        }
    }
    if (0..prefix).any(|j| c.is_leaf_at(j) && !t.is_leaf(labels[j])) {
        return false;
    }
    let n = t.nodes().universe_size();
    let mut in_c = ElementSet::empty(n);
    for &x in labels {
        in_c.insert(x);
    }
    // component of x = its topmost ancestor outside the prefix
    let top = |x: usize| {
        let mut cur = x;
        while let Some(p) = t.parent(cur) {
            if in_c.contains(p) {
                break;
            }
            cur = p;
        }
        cur
    };
    let mut size = vec![0usize; n];
    let mut below = vec![0usize; n];
    for x in t.nodes().iter() {
        if in_c.contains(x) {
            if let Some(p) = t.parent(x).filter(|p| !in_c.contains(*p)) {
                below[top(p)] += 1;
            }
        } else {
            size[top(x)] += 1;
        }
    }
    // every component has its top's parent above it, plus the prefix nodes below
    (0..n).all(|x| size[x] == 0 || (size[x] <= cap && below[x] <= 1))
}

/// Compliance of an out-tree with a guide tree for a `(k, t)` instance with
/// divisor `d`.
pub fn complies(t: &OutTree, c: &GuideTree, k: usize, tl: usize, d: usize) -> Result<bool> {
    if c.labels().iter().any(|&x| !t.nodes().contains(x)) {
        return Err(Error::input("guide tree nodes must lie in the out-tree"));
    }
    if d == 0 {
        return Err(Error::input("d must be positive"));
    }
    Ok(complies_prefix(t, c, c.len(), (k + tl) / d))
}

/// Restricts which guide trees are generated.
pub(crate) trait GuidePruner {
    /// Cost of a guide-tree edge `f -> w`, or `None` to forbid it.
    fn edge_cost(&self, f: usize, w: usize) -> Option<usize>;
    /// Whether a partial tree with `size` nodes, of which `internal` and
    /// `leaves` are settled, and total edge cost `cost` may still lead
    /// somewhere.
    fn allow(&self, size: usize, internal: usize, leaves: usize, cost: usize) -> bool;
}

pub(crate) struct NoPruning;

impl GuidePruner for NoPruning {
    fn edge_cost(&self, _: usize, _: usize) -> Option<usize> {
        Some(0)
    }

    fn allow(&self, _: usize, _: usize, _: usize, _: usize) -> bool {
        true
    }
}

struct Gen<'a, P, F> {
    labels: &'a ElementSet,
    u: usize,
    sizes: (usize, usize),
    pruner: &'a P,
    visit: F,
    order: Vec<usize>,
    parent: Vec<Option<usize>>,
    used: ElementSet,
}

impl<P: GuidePruner, F: FnMut(&GuideTree) -> ControlFlow<()>> Gen<'_, P, F> {
    fn rec(&mut self, head: usize, internal: usize, leaves: usize, cost: usize) -> ControlFlow<()> {
        let root = self.order[0];
        if head == self.order.len() {
            let size = self.order.len();
            if size >= self.sizes.0 && (self.u == root || self.used.contains(self.u)) {
                let tree = GuideTree {
                    labels: self.order.clone(),
                    parent: self.parent.clone(),
                    u: self.u,
                };
                return (self.visit)(&tree);
            }
            return ControlFlow::Continue(());
        }
        let x = self.order[head];
        // leaf here
        if self.pruner.allow(self.order.len(), internal, leaves + 1, cost) {
            self.rec(head + 1, internal, leaves + 1, cost)?;
        }
        if x == self.u && self.u != root {
            return ControlFlow::Continue(());
        }
        let room = self.sizes.1 - self.order.len();
        if room == 0 || !self.pruner.allow(self.order.len() + 1, internal + 1, leaves, cost) {
            return ControlFlow::Continue(());
        }
        let candidates: Vec<(usize, usize)> = self
            .labels
            .iter()
            .filter(|&y| !self.used.contains(y))
            .filter_map(|y| self.pruner.edge_cost(x, y).map(|c| (y, c)))
            .collect();
        let m = candidates.len();
        // non-empty child subsets in increasing bitmask order
        for mask in 1u64..(1u64 << m) {
            if mask.count_ones() as usize > room {
                continue;
            }
            let chosen: Vec<(usize, usize)> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| candidates[b]).collect();
            let extra: usize = chosen.iter().map(|&(_, c)| c).sum();
            if !self.pruner.allow(self.order.len() + chosen.len(), internal + 1, leaves, cost + extra) {
                continue;
            }
            for &(y, _) in &chosen {
                self.order.push(y);
                self.parent.push(Some(head));
                self.used.insert(y);
            }
            let flow = self.rec(head + 1, internal + 1, leaves, cost + extra);
            for &(y, _) in &chosen {
                self.order.pop();
                self.parent.pop();
                self.used.remove(y);
            }
            flow?;
        }
        ControlFlow::Continue(())
    }
}

/// Calls `visit` on every guide tree rooted at `v` whose labels come from
/// `labels`, with `u` at a leaf unless `u == v`, and size in `sizes`.
pub(crate) fn for_each_guide_tree<P: GuidePruner>(
    labels: &ElementSet,
    v: usize,
    u: usize,
    sizes: (usize, usize),
    pruner: &P,
    visit: impl FnMut(&GuideTree) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if !labels.contains(v) || (u != v && !labels.contains(u)) || sizes.1 == 0 || sizes.0 > sizes.1 {
        return ControlFlow::Continue(());
    }
    let mut used = ElementSet::empty(labels.universe_size());
    used.insert(v);
    let mut gen = Gen {
        labels,
        u,
        sizes,
        pruner,
        visit,
        order: vec![v],
        parent: vec![None],
        used,
    };
    gen.rec(0, 0, 0, 0)
}

/// Every guide tree with `3..=4d` nodes over the nodes of an `n`-node
/// graph, rooted at `v`, with `u` a leaf unless `u == v`.
pub fn enumerate_guide_trees(n: usize, v: usize, u: usize, d: usize) -> Vec<GuideTree> {
    let all = ElementSet::from_elements(n, 0..n).expect("in range");
    guide_trees_over(&all, v, u, 3, 4 * d)
}

/// Guide trees with labels from `labels` and between `min` and `max` nodes.
pub fn guide_trees_over(labels: &ElementSet, v: usize, u: usize, min: usize, max: usize) -> Vec<GuideTree> {
    let mut out = Vec::new();
    let _ = for_each_guide_tree(labels, v, u, (min, max), &NoPruning, |c| {
        out.push(c.clone());
        ControlFlow::Continue(())
    });
    out
}

/// The first guide tree, by size and then generation order, with labels in
/// `t`'s node set that `t` complies with.
pub fn find_complying_guide_tree(t: &OutTree, u: usize, k: usize, tl: usize, d: usize) -> Option<GuideTree> {
    let cap = (k + tl) / d.max(1);
    let max = (4 * d).min(t.len());
    for size in 3..=max {
        let mut found = None;
        let _ = for_each_guide_tree(t.nodes(), t.root(), u, (size, size), &NoPruning, |c| {
            if c.len() == size && complies_prefix(t, c, c.len(), cap) {
                found = Some(c.clone());
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> OutTree {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        OutTree::from_edges(n, 0, &edges).unwrap()
    }

    #[test]
    fn out_tree_statistics() {
        let t = OutTree::from_edges(5, 0, &[(0, 1), (0, 2), (2, 3)]).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.internal_count(), 2);
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.internal_count() + t.leaf_count(), t.len());
        assert!(t.is_ancestor(0, 3) && !t.is_ancestor(1, 3));
        assert!(OutTree::from_edges(3, 0, &[(1, 2), (2, 1)]).is_err());
        assert!(OutTree::from_edges(3, 0, &[(0, 1), (2, 1)]).is_err());
    }

    #[test]
    fn two_nodes_admit_no_guide_tree() {
        assert!(enumerate_guide_trees(2, 0, 0, 2).is_empty());
    }

    #[test]
    fn three_nodes_give_three_shapes() {
        let trees = enumerate_guide_trees(3, 0, 0, 2);
        assert_eq!(trees.len(), 3);
        let stars = trees.iter().filter(|c| c.internal_count() == 1).count();
        assert_eq!(stars, 1);
    }

    #[test]
    fn u_is_always_a_leaf() {
        let trees = enumerate_guide_trees(5, 0, 3, 2);
        assert!(!trees.is_empty());
        for c in &trees {
            let pos = c.position(3).unwrap();
            assert!(c.is_leaf_at(pos));
        }
    }

    #[test]
    fn generation_has_no_duplicates() {
        let trees = enumerate_guide_trees(5, 1, 1, 2);
        let distinct: std::collections::HashSet<_> = trees.iter().collect();
        assert_eq!(distinct.len(), trees.len());
        // rooted labelled trees on s nodes with a fixed root: s^(s-2) each
        let expected: usize = (3..=5).map(|s| binom(4, s - 1) * s.pow(s as u32 - 2)).sum();
        assert_eq!(trees.len(), expected);
    }

    fn binom(n: usize, r: usize) -> usize {
        (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn a_tree_complies_with_itself() {
        let t = OutTree::from_edges(6, 0, &[(0, 1), (0, 2), (2, 3), (2, 4), (4, 5)]).unwrap();
        let c = GuideTree::new(vec![0, 1, 2, 3, 4, 5], vec![None, Some(0), Some(0), Some(2), Some(2), Some(4)], 0)
            .unwrap();
        assert!(complies(&t, &c, 3, 3, 2).unwrap());
    }

    #[test]
    fn oversized_component_fails() {
        // path 0..5; C = {0, 1, 5} leaves 2..4 as one component of 3 nodes
        let t = path(6);
        let c = GuideTree::new(vec![0, 1, 5], vec![None, Some(0), Some(1)], 0).unwrap();
        assert!(!complies(&t, &c, 2, 2, 2).unwrap());
        assert!(complies(&t, &c, 3, 3, 2).unwrap());
    }

    #[test]
    fn branching_component_fails() {
        // 0 -> 1 -> {2, 3}; C = {0, 2, 3} leaves component {1} with 3 neighbours
        let t = OutTree::from_edges(4, 0, &[(0, 1), (1, 2), (1, 3)]).unwrap();
        let c = GuideTree::new(vec![0, 2, 3], vec![None, Some(0), Some(0)], 0).unwrap();
        assert!(!complies(&t, &c, 3, 3, 2).unwrap());
        let c = GuideTree::new(vec![0, 1, 2], vec![None, Some(0), Some(1)], 0).unwrap();
        assert!(complies(&t, &c, 3, 3, 2).unwrap());
    }

    #[test]
    fn guide_tree_outside_the_tree_is_an_error() {
        let t = path(3);
        let c = GuideTree::new(vec![0, 1, 2], vec![None, Some(0), Some(1)], 0).unwrap();
        let t2 = OutTree::from_edges(4, 0, &[(0, 1), (1, 3)]).unwrap();
        assert!(complies(&t, &c, 1, 1, 2).unwrap());
        assert!(complies(&t2, &c, 1, 1, 2).is_err());
    }

    #[test]
    fn finds_a_small_guide_tree() {
        let t = path(8);
        let c = find_complying_guide_tree(&t, 0, 4, 4, 2).unwrap();
        assert!(c.len() < 8);
        assert!(complies(&t, &c, 4, 4, 2).unwrap());
    }
}
