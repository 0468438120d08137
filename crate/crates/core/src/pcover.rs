//! k-Partial Cover: the fewest input sets whose union has at least `k`
//! elements, and k-Dominating Set through the closed-neighbourhood
//! reduction.
//!
//! The solver keeps, for every prefix `S_1..S_i`, size `j` and count `ℓ`, a
//! family `M[i][j][ℓ]` of `j`-subsets reachable as part of the union of `ℓ`
//! sets among the prefix. Elements of `S_i` are added one at a time and the
//! intermediate families are compressed after each addition.

use std::collections::HashSet;
use std::io::BufRead;
use std::time::Duration;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::{content_lines, parse_usize};
use crate::repfam::{FilterStats, RepConfig, Representer};
use crate::sets::{enumerate_subsets, verify_representation, ElementSet, RepMode, Universe, WeightedFamily};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PCInstance {
    universe: Universe,
    sets: Vec<ElementSet>,
    k: usize,
}

impl PCInstance {
    pub fn new(universe: Universe, sets: Vec<ElementSet>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("k must be at least 1"));
        }
        if let Some(s) = sets.iter().find(|s| s.universe_size() != universe.size()) {
            return Err(Error::input(format!(
                "set {s} is over {} elements, universe has {}",
                s.universe_size(),
                universe.size()
            )));
        }
        Ok(PCInstance { universe, sets, k })
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn sets(&self) -> &[ElementSet] {
        &self.sets
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn union(&self) -> ElementSet {
        self.sets
            .iter()
            .fold(self.universe.empty_set(), |acc, s| acc.union(s))
    }
}

/// `U = V`, one set `N[v]` per node, same `k`.
pub fn dominating_set_reduce(g: &Graph, k: usize) -> Result<PCInstance> {
    let n = g.node_count();
    let sets = (0..n).map(|v| g.closed_neighborhood(v)).collect();
    PCInstance::new(Universe::new(n), sets, k)
}

/// Reads a cover instance. The header is `n m k` (sets of any size) or the
/// family-file header `n m k p` (every set has size `p`).
pub fn read_pc_instance<R: BufRead>(reader: R) -> Result<PCInstance> {
    let lines = content_lines(reader, |_, _| Ok(()))?;
    let mut it = lines.into_iter();
    let (hline, header) = it
        .next()
        .ok_or_else(|| Error::parse(1, "missing header `n m k`"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if !(3..=4).contains(&fields.len()) {
        return Err(Error::parse(hline, "header must be `n m k` or `n m k p`"));
    }
    let n = parse_usize(hline, fields[0], "universe size")?;
    let m = parse_usize(hline, fields[1], "set count")?;
    let k = parse_usize(hline, fields[2], "coverage target")?;
    let p = match fields.get(3) {
        Some(tok) => Some(parse_usize(hline, tok, "set size")?),
        None => None,
    };
    if k == 0 {
        return Err(Error::parse(hline, "k must be at least 1"));
    }
    let mut sets = Vec::with_capacity(m);
    for (lineno, line) in it {
        if sets.len() == m {
            return Err(Error::parse(lineno, format!("unexpected line after {m} sets")));
        }
        let mut set = ElementSet::empty(n);
        for tok in line.split_whitespace() {
            let e = parse_usize(lineno, tok, "element id")?;
            if e >= n {
                return Err(Error::parse(lineno, format!("element {e} out of range for universe of size {n}")));
            }
            if set.contains(e) {
                return Err(Error::parse(lineno, format!("duplicate element {e}")));
            }
            set.insert(e);
        }
        if let Some(p) = p {
            if set.len() != p {
                return Err(Error::parse(
                    lineno,
                    format!("set has {} elements, header declares p = {p}", set.len()),
                ));
            }
        }
        sets.push(set);
    }
    if sets.len() != m {
        return Err(Error::parse(hline, format!("header declares {m} sets, found {}", sets.len())));
    }
    PCInstance::new(Universe::new(n), sets, k)
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct PCStats {
    /// Non-empty table cells after the last row.
    pub cells_filled: usize,
    /// Largest family stored in any table cell.
    pub max_cell_size: usize,
    /// Largest intermediate family produced while adding single elements.
    pub max_chain_size: usize,
    pub filter: FilterStats,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct StageChecks {
    pub cells_checked: usize,
    pub chains_checked: usize,
    pub failures: Vec<String>,
}

impl StageChecks {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct PCSolution {
    /// Fewest sets, or `None` when the union of all sets is smaller than `k`.
    pub answer: Option<usize>,
    /// True when some single set already has `k` elements.
    pub shortcut: bool,
    pub stats: PCStats,
    pub checks: Option<StageChecks>,
    /// Time spent filtering; kept out of serialized output.
    #[serde(skip)]
    pub filter_time: Duration,
}

pub fn solve_partial_cover(inst: &PCInstance, cfg: &RepConfig) -> Result<PCSolution> {
    Solver::new(inst, cfg, false)?.run()
}

/// As [`solve_partial_cover`], additionally checking every cell and every
/// intermediate family against brute-force partial-solution families.
/// Desk scale only.
pub fn solve_partial_cover_checked(inst: &PCInstance, cfg: &RepConfig) -> Result<PCSolution> {
    Solver::new(inst, cfg, true)?.run()
}

type Row = Vec<Vec<WeightedFamily>>;

struct Solver<'a> {
    inst: &'a PCInstance,
    rep: Representer,
    debug: bool,
}

fn dedup(f: WeightedFamily) -> WeightedFamily {
    let mut seen = HashSet::with_capacity(f.len());
    let keep: Vec<usize> = (0..f.len()).filter(|&i| seen.insert(&f.members()[i])).collect();
    if keep.len() == f.len() {
        f
    } else {
        f.select(&keep)
    }
}

impl<'a> Solver<'a> {
    fn new(inst: &'a PCInstance, cfg: &RepConfig, debug: bool) -> Result<Self> {
        Ok(Solver {
            inst,
            rep: Representer::new(cfg.clone())?,
            debug,
        })
    }

    fn empty_row(&self) -> Row {
        let u = self.inst.universe;
        (0..=self.inst.k)
            .map(|j| (0..=self.inst.k).map(|_| WeightedFamily::new(u, j)).collect())
            .collect()
    }

    fn filter(&self, f: WeightedFamily) -> Result<WeightedFamily> {
        let f = dedup(f);
        self.rep.represent(self.inst.k, &f, RepMode::Unweighted)
    }

    fn run(self) -> Result<PCSolution> {
        let inst = self.inst;
        let k = inst.k;
        if inst.sets.iter().any(|s| s.len() >= k) {
            return Ok(PCSolution {
                answer: Some(1),
                shortcut: true,
                stats: PCStats::default(),
                checks: self.debug.then(StageChecks::default),
                filter_time: Duration::ZERO,
            });
        }
        let mut checks = StageChecks::default();
        let mut max_chain = 0;
        let mut max_cell = 0;
        // prev[j][ℓ] = M[i-1][j][ℓ]; index j = 0 is unused
        let mut prev = self.empty_row();
        for (idx, set) in inst.sets.iter().enumerate() {
            let i = idx + 1;
            let ells: Vec<usize> = (1..=i.min(k)).collect();
            let chains: Vec<Result<(Vec<WeightedFamily>, usize, StageChecks)>> = ells
                .par_iter()
                .map(|&ell| self.chain(&prev, set, i, ell))
                .collect();
            let mut row = self.empty_row();
            for (ell, chain) in ells.iter().zip(chains) {
                let (last, chain_max, chain_checks) = chain?;
                max_chain = max_chain.max(chain_max);
                checks.chains_checked += chain_checks.chains_checked;
                checks.failures.extend(chain_checks.failures);
                for j in 1..=k {
                    let mut union = prev[j][*ell].clone();
                    union.extend_from(&last[j]);
                    row[j][*ell] = self.filter(union)?;
                }
            }
            if self.debug {
                for (j, cells) in row.iter().enumerate().skip(1) {
                    for (ell, cell) in cells.iter().enumerate() {
                        self.check_cell(cell, i, j, ell, &mut checks)?;
                    }
                }
            }
            max_cell = max_cell.max(row.iter().flatten().map(|f| f.len()).max().unwrap_or(0));
            prev = row;
        }
        let answer = (1..=k.min(inst.sets.len())).find(|&ell| !prev[k][ell].is_empty());
        let cells_filled = prev.iter().skip(1).flatten().filter(|f| !f.is_empty()).count();
        Ok(PCSolution {
            answer,
            shortcut: false,
            stats: PCStats {
                cells_filled,
                max_cell_size: max_cell,
                max_chain_size: max_chain,
                filter: self.rep.stats(),
            },
            checks: self.debug.then_some(checks),
            filter_time: self.rep.filter_time(),
        })
    }

    /// Adds the elements of `S_i` one at a time to `{∅} ∪ M[i-1][·][ℓ-1]`.
    /// Returns the final families `A_{r,j'}` for all `j' ≤ k`; entry `j'`
    /// only ever depends on entries `≤ j'`, so one chain serves every `j`.
    fn chain(
        &self,
        prev: &Row,
        set: &ElementSet,
        i: usize,
        ell: usize,
    ) -> Result<(Vec<WeightedFamily>, usize, StageChecks)> {
        let u = self.inst.universe;
        let k = self.inst.k;
        let mut a: Vec<WeightedFamily> = (0..=k)
            .map(|jp| {
                if jp == 0 {
                    WeightedFamily::unweighted(u, 0, vec![u.empty_set()]).expect("empty set has size 0")
                } else {
                    prev[jp][ell - 1].clone()
                }
            })
            .collect();
        let base: Vec<ElementSet> = a.iter().flat_map(|f| f.members().iter().cloned()).collect();
        let mut checks = StageChecks::default();
        let mut max_size = 0;
        let mut added = u.empty_set();
        for s in set.iter() {
            added.insert(s);
            let mut next = Vec::with_capacity(k + 1);
            for jp in 0..=k {
                let mut cand = a[jp].clone();
                if jp >= 1 {
                    for x in a[jp - 1].members() {
                        if !x.contains(s) {
                            cand.push(x.with(s));
                        }
                    }
                }
                let filtered = self.filter(cand)?;
                max_size = max_size.max(filtered.len());
                next.push(filtered);
            }
            a = next;
            if self.debug {
                for (jp, fam) in a.iter().enumerate() {
                    let target = extensions(u, &base, &added, jp);
                    checks.chains_checked += 1;
                    if let Some(msg) = check_against(&target, fam, k)? {
                        checks
                            .failures
                            .push(format!("chain i={i} ell={ell} element={s} j'={jp}: {msg}"));
                    }
                }
            }
        }
        Ok((a, max_size, checks))
    }

    fn check_cell(
        &self,
        cell: &WeightedFamily,
        i: usize,
        j: usize,
        ell: usize,
        checks: &mut StageChecks,
    ) -> Result<()> {
        let target = partial_solutions(self.inst, i, j, ell);
        checks.cells_checked += 1;
        if let Some(msg) = check_against(&target, cell, self.inst.k)? {
            checks.failures.push(format!("cell i={i} j={j} ell={ell}: {msg}"));
        }
        Ok(())
    }
}

/// `{S ∪ S' : S ∈ base, S' ⊆ added, |S ∪ S'| = j}`, deduplicated.
fn extensions(u: Universe, base: &[ElementSet], added: &ElementSet, j: usize) -> WeightedFamily {
    let mut out = HashSet::new();
    for s in base {
        let free = added.difference(s);
        if s.len() > j || free.len() < j - s.len() {
            continue;
        }
        let complement = u.full_set().difference(&free);
        for extra in enumerate_subsets(u, j - s.len(), &complement) {
            out.insert(s.union(&extra));
        }
    }
    let mut members: Vec<ElementSet> = out.into_iter().collect();
    members.sort();
    WeightedFamily::unweighted(u, j, members).expect("members have size j")
}

/// Every `j`-subset of the union of some `ℓ` sets among the first `i`.
pub fn partial_solutions(inst: &PCInstance, i: usize, j: usize, ell: usize) -> WeightedFamily {
    let u = inst.universe;
    let mut out = HashSet::new();
    if ell <= i {
        for combo in inst.sets[..i].iter().combinations(ell) {
            let cover = combo.into_iter().fold(u.empty_set(), |acc, s| acc.union(s));
            if cover.len() < j {
                continue;
            }
            let complement = u.full_set().difference(&cover);
            out.extend(enumerate_subsets(u, j, &complement));
        }
    }
    let mut members: Vec<ElementSet> = out.into_iter().collect();
    members.sort();
    WeightedFamily::unweighted(u, j, members).expect("members have size j")
}

/// `None` if `stored` is a subfamily of `target` that represents it at
/// rank `k`; otherwise a description of the problem.
fn check_against(target: &WeightedFamily, stored: &WeightedFamily, k: usize) -> Result<Option<String>> {
    let lookup: HashSet<&ElementSet> = target.members().iter().collect();
    if let Some(bad) = stored.members().iter().find(|m| !lookup.contains(m)) {
        return Ok(Some(format!("{bad} is not a partial solution")));
    }
    let stored = dedup(stored.clone());
    let verdict = verify_representation(target, &stored, k, RepMode::Unweighted)?;
    Ok(verdict
        .counterexample()
        .map(|c| format!("does not represent: X = {}, Y = {}", c.x, c.y)))
}

/// Largest number of sets accepted by [`brute_force_pcover`].
pub const BRUTE_FORCE_MAX_SETS: usize = 24;

/// Exact answer by trying subfamilies in order of size.
pub fn brute_force_pcover(inst: &PCInstance) -> Result<Option<usize>> {
    let m = inst.sets.len();
    if m > BRUTE_FORCE_MAX_SETS {
        return Err(Error::Budget {
            estimated: 2f64.powi(m as i32),
            budget: 2f64.powi(BRUTE_FORCE_MAX_SETS as i32),
        });
    }
    if inst.union().len() < inst.k {
        return Ok(None);
    }
    let u = inst.universe;
    Ok((1..=m).find(|&ell| {
        inst.sets
            .iter()
            .combinations(ell)
            .any(|c| c.into_iter().fold(u.empty_set(), |acc, s| acc.union(s)).len() >= inst.k)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn instance(n: usize, sets: &[&[usize]], k: usize) -> PCInstance {
        let u = Universe::new(n);
        PCInstance::new(u, sets.iter().map(|s| u.set(s.iter().copied()).unwrap()).collect(), k).unwrap()
    }

    #[test]
    fn big_set_shortcut() {
        let inst = instance(5, &[&[0], &[1, 2, 3]], 3);
        let sol = solve_partial_cover(&inst, &RepConfig::default()).unwrap();
        assert_eq!(sol.answer, Some(1));
        assert!(sol.shortcut);
    }

    #[test]
    fn needs_three_sets() {
        // {1,2},{2,3},{4},{5} relabelled to 0-based ids
        let inst = instance(5, &[&[0, 1], &[1, 2], &[3], &[4]], 4);
        assert_eq!(brute_force_pcover(&inst).unwrap(), Some(3));
        let sol = solve_partial_cover(&inst, &RepConfig::default()).unwrap();
        assert_eq!(sol.answer, Some(3));
    }

    #[test]
    fn infeasible_when_union_is_small() {
        let inst = instance(2, &[&[0]], 2);
        assert_eq!(brute_force_pcover(&inst).unwrap(), None);
        assert_eq!(solve_partial_cover(&inst, &RepConfig::default()).unwrap().answer, None);
    }

    #[test]
    fn checked_run_passes_every_stage() {
        let inst = instance(6, &[&[0, 1], &[1, 2], &[3], &[2, 4], &[5, 0]], 4);
        let cfg = RepConfig::default().with_skip_threshold(Some(0));
        let sol = solve_partial_cover_checked(&inst, &cfg).unwrap();
        let checks = sol.checks.unwrap();
        assert!(checks.passed(), "{:?}", checks.failures);
        assert!(checks.cells_checked > 0 && checks.chains_checked > 0);
        assert_eq!(sol.answer, brute_force_pcover(&inst).unwrap());
    }

    #[test]
    fn dominating_set_examples() {
        let single = dominating_set_reduce(&Graph::new(1), 1).unwrap();
        assert_eq!(solve_partial_cover(&single, &RepConfig::default()).unwrap().answer, Some(1));
        let star = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let inst = dominating_set_reduce(&star, 4).unwrap();
        assert_eq!(solve_partial_cover(&inst, &RepConfig::default()).unwrap().answer, Some(1));
        let path = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let inst = dominating_set_reduce(&path, 4).unwrap();
        assert_eq!(brute_force_pcover(&inst).unwrap(), Some(2));
        assert_eq!(solve_partial_cover(&inst, &RepConfig::default()).unwrap().answer, Some(2));
    }

    #[test]
    fn reads_both_header_shapes() {
        let inst = read_pc_instance("5 4 4\n0 1\n1 2\n3\n4\n".as_bytes()).unwrap();
        assert_eq!(inst.sets().len(), 4);
        assert_eq!(inst.k(), 4);
        let inst = read_pc_instance("4 2 3 2\n0 1\n2 3\n".as_bytes()).unwrap();
        assert_eq!(inst.sets()[1].to_vec(), vec![2, 3]);
        assert!(matches!(
            read_pc_instance("4 2 3 2\n0 1\n2\n".as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
    }
}
