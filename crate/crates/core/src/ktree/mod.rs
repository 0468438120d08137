//! `(k, t)`-Tree: does `G` have an out-tree rooted at `r` with exactly `k`
//! internal nodes and `t` leaves? And k-Internal Out-Branching on top of it.
//!
//! The table `M[v][u][i][l]` holds node sets `V_T \ {v, u}` of out-trees
//! rooted at `v` that have `u` as a leaf (or `u = v`), with `i` internal
//! nodes and `l` leaves outside `{v, u}`. A cell is assembled guide tree by
//! guide tree: for a small labelled tree `C`, out-trees that follow the
//! shape of `C` are glued from pieces of at most `⌊(k+t)/d⌋` nodes, one guide
//! node at a time, compressing after every step.

mod brute;
mod guide;

pub use brute::{
    brute_force_kiob, brute_force_kt_tree, for_each_out_tree, for_each_out_tree_on, max_internal_out_branching,
    out_tree_profiles, partial_tree_sets, BRUTE_FORCE_MAX_NODES,
};
pub use guide::{complies, enumerate_guide_trees, find_complying_guide_tree, guide_trees_over, GuideTree, OutTree};

use std::collections::{HashMap, HashSet};
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Digraph;
use crate::repfam::{FilterStats, RepConfig, Representer};
use crate::sets::{verify_representation, ElementSet, RepMode, Universe, WeightedFamily};

use guide::{complies_prefix, for_each_guide_tree, GuidePruner};

/// Largest graph accepted by checked runs.
pub const CHECKED_MAX_NODES: usize = 6;

#[derive(Clone, Debug)]
pub struct TreeConfig {
    /// Piece-size divisor; pieces have at most `⌊(k+t)/d⌋` nodes.
    pub d: usize,
    pub rep: RepConfig,
    /// Fill every cell instead of only those the answer depends on.
    pub full_table: bool,
    /// Check every cell and guide-tree stage against exhaustive enumeration.
    /// Implies `full_table`.
    pub debug_verify: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            d: 2,
            rep: RepConfig::default(),
            full_table: false,
            debug_verify: false,
        }
    }
}

impl TreeConfig {
    pub fn with_rep(mut self, rep: RepConfig) -> Self {
        self.rep = rep;
        self
    }

    pub fn with_d(mut self, d: usize) -> Self {
        self.d = d;
        self
    }
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct TreeStats {
    pub cells: usize,
    pub max_family: usize,
    pub guide_trees: usize,
    pub guide_trees_used: usize,
    pub filter: FilterStats,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct TreeChecks {
    pub cells_checked: usize,
    pub guide_trees_checked: usize,
    pub stages_checked: usize,
    pub failures: Vec<String>,
}

impl TreeChecks {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Full,
    /// Only whether the cell is non-empty.
    Exists,
}

/// The table for one value of `q = k + t`. Cells do not depend on `k` and
/// `t` separately, so one solver answers every root and every split of `q`.
pub struct TreeSolver<'g> {
    g: &'g Digraph,
    n: usize,
    q: usize,
    d: usize,
    cap: usize,
    imax: usize,
    rep: Representer,
    debug: bool,
    cells: Vec<Option<WeightedFamily>>,
    // smallest i + l of a non-empty piece M[f][w] within the cap
    piece_cost: Vec<Option<usize>>,
    finals: Mutex<HashMap<(usize, usize, usize), bool>>,
    guide_trees: AtomicUsize,
    guide_trees_used: AtomicUsize,
    checks: Mutex<TreeChecks>,
}

impl<'g> TreeSolver<'g> {
    pub fn new(g: &'g Digraph, q: usize, cfg: &TreeConfig) -> Result<Self> {
        if q < 2 {
            return Err(Error::input("k + t must be at least 2"));
        }
        if cfg.d < 2 {
            return Err(Error::input("d must be at least 2"));
        }
        let n = g.node_count();
        if cfg.debug_verify && n > CHECKED_MAX_NODES {
            return Err(Error::Budget {
                estimated: n as f64,
                budget: CHECKED_MAX_NODES as f64,
            });
        }
        let imax = q - 2;
        let mut solver = TreeSolver {
            g,
            n,
            q,
            d: cfg.d,
            cap: q / cfg.d,
            imax,
            rep: Representer::new(cfg.rep.clone())?,
            debug: cfg.debug_verify,
            cells: vec![None; n * n * (imax + 1) * q],
            piece_cost: vec![None; n * n],
            finals: Mutex::new(HashMap::new()),
            guide_trees: AtomicUsize::new(0),
            guide_trees_used: AtomicUsize::new(0),
            checks: Mutex::new(TreeChecks::default()),
        };
        let top = if cfg.full_table || cfg.debug_verify {
            q - 1
        } else {
            solver.cap.min(q - 1)
        };
        for s in 0..=top {
            solver.fill_layer(s)?;
        }
        Ok(solver)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    fn idx(&self, v: usize, u: usize, i: usize, l: usize) -> usize {
        ((v * self.n + u) * (self.imax + 1) + i) * self.q + l
    }

    /// A computed cell, if it is in the table.
    pub fn cell(&self, v: usize, u: usize, i: usize, l: usize) -> Option<&WeightedFamily> {
        if i > self.imax || l >= self.q {
            return None;
        }
        self.cells[self.idx(v, u, i, l)].as_ref()
    }

    fn piece(&self, f: usize, w: usize, i: usize, l: usize) -> &WeightedFamily {
        self.cell(f, w, i, l).expect("pieces within the cap are computed first")
    }

    fn fill_layer(&mut self, s: usize) -> Result<()> {
        let n = self.n;
        let mut jobs = Vec::new();
        for v in 0..n {
            for u in 0..n {
                for i in 0..=s.min(self.imax) {
                    let l = s - i;
                    if l < self.q {
                        jobs.push((v, u, i, l));
                    }
                }
            }
        }
        let this = &*self;
        let results: Vec<Result<WeightedFamily>> = jobs
            .par_iter()
            .map(|&(v, u, i, l)| this.compute(v, u, i, l, Mode::Full).map(|o| o.expect("full mode returns a family")))
            .collect();
        for (&(v, u, i, l), res) in jobs.iter().zip(results) {
            let fam = res?;
            if s <= self.cap && !fam.is_empty() && v != u {
                let slot = &mut self.piece_cost[v * n + u];
                *slot = Some(slot.map_or(s, |c| c.min(s)));
            }
            let at = self.idx(v, u, i, l);
            self.cells[at] = Some(fam);
        }
        if self.debug {
            for &(v, u, i, l) in &jobs {
                self.check_cell(v, u, i, l)?;
            }
        }
        Ok(())
    }

    fn filter(&self, f: WeightedFamily) -> Result<WeightedFamily> {
        let mut seen = HashSet::with_capacity(f.len());
        let keep: Vec<usize> = (0..f.len()).filter(|&i| seen.insert(&f.members()[i])).collect();
        let f = if keep.len() == f.len() { f } else { f.select(&keep) };
        self.rep.represent(self.q, &f, RepMode::Unweighted)
    }

    /// Computes `M[v][u][i][l]`. In `Exists` mode returns `Some` with a
    /// non-empty family as soon as one guide tree yields something, and
    /// `None` when none does.
    fn compute(&self, v: usize, u: usize, i: usize, l: usize, mode: Mode) -> Result<Option<WeightedFamily>> {
        let univ = Universe::new(self.n);
        let size = i + l;
        let empty = WeightedFamily::new(univ, size);
        if size == 0 {
            let base = if v == u || self.g.has_edge(v, u) {
                WeightedFamily::unweighted(univ, 0, vec![univ.empty_set()])?
            } else {
                empty
            };
            return Ok(Some(base));
        }
        if v == u && i == 0 && l == 1 {
            // two-node trees v -> x: too small for any guide tree
            let members = self.g.out_neighbors(v).iter().map(|&x| univ.empty_set().with(x)).collect();
            return Ok(Some(WeightedFamily::unweighted(univ, 1, members)?));
        }
        let extra = usize::from(u != v);
        let tree_nodes = size + 1 + extra;
        let max_guide = (4 * self.d).min(tree_nodes);
        let pruner = CellPruner {
            solver: self,
            tree_nodes,
            max_internal: i + 1,
            max_leaves: l + extra,
        };
        let all = univ.full_set();
        let mut union = WeightedFamily::new(univ, size);
        let mut err = None;
        let _ = for_each_guide_tree(&all, v, u, (3, max_guide), &pruner, |c| {
            self.guide_trees.fetch_add(1, Ordering::Relaxed);
            match self.guided(c, v, u, i, l) {
                Ok(part) => {
                    if part.is_empty() {
                        return ControlFlow::Continue(());
                    }
                    self.guide_trees_used.fetch_add(1, Ordering::Relaxed);
                    union.extend_from(&part);
                    if mode == Mode::Exists {
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                }
                Err(e) => {
                    err = Some(e);
                    ControlFlow::Break(())
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        match mode {
            Mode::Exists => Ok((!union.is_empty()).then_some(union)),
            Mode::Full => Ok(Some(self.filter(union)?)),
        }
    }

    /// `N[C]`: node sets of out-trees for this cell that follow `c`.
    fn guided(&self, c: &GuideTree, v: usize, u: usize, i: usize, l: usize) -> Result<WeightedFamily> {
        let univ = Universe::new(self.n);
        let extra = usize::from(u != v);
        let empty = WeightedFamily::new(univ, i + l);
        let (Some(istar), Some(lstar)) = ((i + 1).checked_sub(c.internal_count()), (l + extra).checked_sub(c.leaf_count()))
        else {
            return Ok(empty);
        };
        let vc = c.node_set(self.n);
        let at = |ip: usize, lp: usize| ip * (lstar + 1) + lp;
        let mut prev: Vec<WeightedFamily> = Vec::new();
        for j in 0..c.len() {
            let w = c.labels()[j];
            let leaf = c.is_leaf_at(j);
            let mut cur: Vec<WeightedFamily> = Vec::with_capacity((istar + 1) * (lstar + 1));
            for ip in 0..=istar {
                for lp in 0..=lstar {
                    let mut a = WeightedFamily::new(univ, ip + lp);
                    if j == 0 && ip == 0 && lp == 0 {
                        a.push(univ.empty_set());
                    }
                    for i2 in 0..=ip {
                        for l2 in 0..=lp {
                            if i2 + l2 > self.cap {
                                break;
                            }
                            if let Some(p) = c.parent_at(j) {
                                let f = c.labels()[p];
                                combine(self.piece(f, w, i2, l2), &prev[at(ip - i2, lp - l2)], &vc, &mut a);
                            }
                            if !leaf && l2 >= 1 {
                                combine(self.piece(w, w, i2, l2), &cur[at(ip - i2, lp - l2)], &vc, &mut a);
                            }
                        }
                    }
                    cur.push(self.filter(a)?);
                }
            }
            if self.debug {
                self.check_stage(c, j, &cur, istar, lstar);
            }
            if cur.iter().all(WeightedFamily::is_empty) {
                return Ok(empty);
            }
            prev = cur;
        }
        let mut rest = vc;
        rest.remove(v);
        rest.remove(u);
        let mut out = WeightedFamily::new(univ, i + l);
        for m in prev[at(istar, lstar)].members() {
            out.push(m.union(&rest));
        }
        if self.debug {
            self.check_guided(c, v, u, i, l, &out);
        }
        Ok(out)
    }

    /// Decides `(k, t)` at root `r`; `k + t` must equal this solver's `q`.
    pub fn accepts(&self, r: usize, k: usize, t: usize) -> Result<bool> {
        if r >= self.n {
            return Err(Error::input(format!("root {r} out of range for {} nodes", self.n)));
        }
        if k == 0 || t == 0 || k + t != self.q {
            return Err(Error::input(format!("(k, t) = ({k}, {t}) does not split q = {}", self.q)));
        }
        if let Some(cell) = self.cell(r, r, k - 1, t) {
            return Ok(!cell.is_empty());
        }
        let key = (r, k - 1, t);
        if let Some(&hit) = self.finals.lock().expect("poisoned").get(&key) {
            return Ok(hit);
        }
        let hit = self.compute(r, r, k - 1, t, Mode::Exists)?.is_some();
        self.finals.lock().expect("poisoned").insert(key, hit);
        Ok(hit)
    }

    pub fn stats(&self) -> TreeStats {
        let computed = self.cells.iter().flatten();
        TreeStats {
            cells: self.cells.iter().flatten().count() + self.finals.lock().expect("poisoned").len(),
            max_family: computed.map(WeightedFamily::len).max().unwrap_or(0),
            guide_trees: self.guide_trees.load(Ordering::Relaxed),
            guide_trees_used: self.guide_trees_used.load(Ordering::Relaxed),
            filter: self.rep.stats(),
        }
    }

    pub fn checks(&self) -> Option<TreeChecks> {
        self.debug.then(|| self.checks.lock().expect("poisoned").clone())
    }

    fn fail(&self, msg: String) {
        self.checks.lock().expect("poisoned").failures.push(msg);
    }

    /// Looks for an out-tree on `nodes` rooted at the guide root that
    /// follows the first `prefix` guide nodes and passes `accept`.
    fn witness(&self, c: &GuideTree, prefix: usize, nodes: &ElementSet, accept: impl Fn(&OutTree) -> bool) -> bool {
        for_each_out_tree_on(self.g, c.root(), nodes, |t| {
            if complies_prefix(t, c, prefix, self.cap) && accept(t) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })
        .is_break()
    }

    fn check_stage(&self, c: &GuideTree, j: usize, stage: &[WeightedFamily], istar: usize, lstar: usize) {
        let placed = ElementSet::from_elements(self.n, c.labels()[..=j].iter().copied()).expect("in range");
        for ip in 0..=istar {
            for lp in 0..=lstar {
                for m in stage[ip * (lstar + 1) + lp].members() {
                    let nodes = m.union(&placed);
                    let ok = self.witness(c, j + 1, &nodes, |t| counts_outside(t, &placed) == (ip, lp));
                    if !ok {
                        self.fail(format!("guide {:?} stage {j} ({ip}, {lp}): no forest realises {m}", c.labels()));
                    }
                }
            }
        }
        self.checks.lock().expect("poisoned").stages_checked += 1;
    }

    fn check_guided(&self, c: &GuideTree, v: usize, u: usize, i: usize, l: usize, out: &WeightedFamily) {
        let mut ends = ElementSet::empty(self.n);
        ends.insert(v);
        ends.insert(u);
        for x in out.members() {
            let nodes = x.union(&ends);
            let ok = self.witness(c, c.len(), &nodes, |t| {
                (u == v || t.is_leaf(u)) && counts_outside(t, &ends) == (i, l)
            });
            if !ok {
                self.fail(format!("guide {:?} for ({v}, {u}, {i}, {l}): {x} has no complying tree", c.labels()));
            }
        }
        self.checks.lock().expect("poisoned").guide_trees_checked += 1;
    }

    fn check_cell(&self, v: usize, u: usize, i: usize, l: usize) -> Result<()> {
        let target = partial_tree_sets(self.g, v, u, i, l)?;
        let stored = self.cell(v, u, i, l).expect("filled");
        let lookup: HashSet<&ElementSet> = target.members().iter().collect();
        if let Some(bad) = stored.members().iter().find(|m| !lookup.contains(m)) {
            self.fail(format!("cell ({v}, {u}, {i}, {l}): {bad} is not a partial solution"));
        } else {
            let verdict = verify_representation(&target, stored, self.q, RepMode::Unweighted)?;
            if let Some(ce) = verdict.counterexample() {
                self.fail(format!("cell ({v}, {u}, {i}, {l}): X = {}, Y = {} unrepresented", ce.x, ce.y));
            }
        }
        self.checks.lock().expect("poisoned").cells_checked += 1;
        Ok(())
    }
}

fn counts_outside(t: &OutTree, skip: &ElementSet) -> (usize, usize) {
    let mut internal = 0;
    let mut leaves = 0;
    for x in t.nodes().iter().filter(|&x| !skip.contains(x)) {
        if t.is_leaf(x) {
            leaves += 1;
        } else {
            internal += 1;
        }
    }
    (internal, leaves)
}

/// Appends `U ∪ W` for `U` avoiding the guide nodes and `W`.
fn combine(us: &WeightedFamily, ws: &WeightedFamily, vc: &ElementSet, out: &mut WeightedFamily) {
    if us.is_empty() || ws.is_empty() {
        return;
    }
    for x in us.members() {
        if !x.is_disjoint(vc) {
            continue;
        }
        for w in ws.members() {
            if x.is_disjoint(w) {
                out.push(x.union(w));
            }
        }
    }
}

struct CellPruner<'a, 'g> {
    solver: &'a TreeSolver<'g>,
    tree_nodes: usize,
    max_internal: usize,
    max_leaves: usize,
}

impl GuidePruner for CellPruner<'_, '_> {
    fn edge_cost(&self, f: usize, w: usize) -> Option<usize> {
        self.solver.piece_cost[f * self.solver.n + w]
    }

    fn allow(&self, size: usize, internal: usize, leaves: usize, cost: usize) -> bool {
        internal <= self.max_internal && leaves <= self.max_leaves && size + cost <= self.tree_nodes
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct TreeOutcome {
    pub answer: bool,
    pub stats: TreeStats,
    pub checks: Option<TreeChecks>,
}

/// Decides whether `g` has an out-tree rooted at `r` with exactly `k`
/// internal nodes and `t` leaves.
pub fn solve_kt_tree(g: &Digraph, r: usize, k: usize, t: usize, cfg: &TreeConfig) -> Result<TreeOutcome> {
    if k == 0 || t == 0 {
        return Err(Error::input("k and t must be at least 1"));
    }
    if r >= g.node_count() {
        return Err(Error::input(format!("root {r} out of range for {} nodes", g.node_count())));
    }
    let solver = TreeSolver::new(g, k + t, cfg)?;
    let answer = solver.accepts(r, k, t)?;
    Ok(TreeOutcome {
        answer,
        stats: solver.stats(),
        checks: solver.checks(),
    })
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct KiobOutcome {
    pub answer: bool,
    /// Root and leaf count of the first out-tree found.
    pub root: Option<usize>,
    pub t: Option<usize>,
    pub stats: TreeStats,
}

impl TreeStats {
    fn absorb(&mut self, other: TreeStats) {
        self.cells += other.cells;
        self.max_family = self.max_family.max(other.max_family);
        self.guide_trees += other.guide_trees;
        self.guide_trees_used += other.guide_trees_used;
        let f = &mut self.filter;
        let o = other.filter;
        f.calls += o.calls;
        f.filtered += o.filtered;
        f.max_input = f.max_input.max(o.max_input);
        f.max_output = f.max_output.max(o.max_output);
        f.separators += o.separators;
        f.max_separator = f.max_separator.max(o.max_separator);
    }
}

/// Decides whether `g` has a spanning out-tree with at least `k` internal
/// nodes: some root must reach every node and have an out-tree with exactly
/// `k` internal nodes and between 1 and `k` leaves.
pub fn solve_kiob(g: &Digraph, k: usize, cfg: &TreeConfig) -> Result<KiobOutcome> {
    if k == 0 {
        return Err(Error::input("k must be at least 1"));
    }
    let n = g.node_count();
    let roots: Vec<usize> = (0..n).filter(|&r| g.reachable(r).len() == n).collect();
    let mut stats = TreeStats::default();
    for t in 1..=k {
        if roots.is_empty() || k + t > n {
            break;
        }
        let solver = TreeSolver::new(g, k + t, cfg)?;
        for &r in &roots {
            if solver.accepts(r, k, t)? {
                stats.absorb(solver.stats());
                return Ok(KiobOutcome {
                    answer: true,
                    root: Some(r),
                    t: Some(t),
                    stats,
                });
            }
        }
        stats.absorb(solver.stats());
    }
    Ok(KiobOutcome {
        answer: false,
        root: None,
        t: None,
        stats,
    })
}
