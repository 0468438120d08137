//! Ground-set primitives: element sets as bit vectors, weighted families of
//! equal-size sets, and the exhaustive representation check that the rest of
//! the crate is tested against.
//!
//! Elements are dense integers `0..n`. A family `Ŝ ⊆ S` of `p`-sets
//! *represents* `S` with respect to rank `k` when every `X ∈ S` that can be
//! extended by some `Y ⊆ E \ X` with `|Y| ≤ k - p` has a stand-in `X̂ ∈ Ŝ`
//! that avoids the same `Y` and is at least as good under the chosen
//! [`RepMode`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// The ground set `E = {0, .., n-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Universe {
    n: usize,
}

impl Universe {
    pub fn new(n: usize) -> Self {
        Universe { n }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn empty_set(&self) -> ElementSet {
        ElementSet::empty(self.n)
    }

    pub fn full_set(&self) -> ElementSet {
        let mut s = ElementSet::empty(self.n);
        for e in 0..self.n {
            s.insert(e);
        }
        s
    }

    /// Builds a set from element ids, rejecting ids outside the universe.
    pub fn set<I: IntoIterator<Item = usize>>(&self, elements: I) -> Result<ElementSet> {
        ElementSet::from_elements(self.n, elements)
    }
}

/// A subset of a universe of `n` elements, stored as a bit vector.
///
/// Sets over different universes never compare equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSet {
    n: u32,
    words: SmallVec<[u64; 2]>,
}

impl ElementSet {
    pub fn empty(n: usize) -> Self {
        ElementSet {
            n: n as u32,
            words: SmallVec::from_elem(0, words_for(n)),
        }
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(n: usize, elements: I) -> Result<Self> {
        let mut s = ElementSet::empty(n);
        for e in elements {
            if e >= n {
                return Err(Error::input(format!(
                    "element {e} outside universe of size {n}"
                )));
            }
            s.insert(e);
        }
        Ok(s)
    }

    pub fn universe_size(&self) -> usize {
        self.n as usize
    }

    pub fn insert(&mut self, e: usize) {
        debug_assert!(e < self.n as usize);
        self.words[e / WORD] |= 1 << (e % WORD);
    }

    pub fn remove(&mut self, e: usize) {
        self.words[e / WORD] &= !(1 << (e % WORD));
    }

    pub fn contains(&self, e: usize) -> bool {
        e < self.n as usize && self.words[e / WORD] & (1 << (e % WORD)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &ElementSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        out
    }

    pub fn difference(&self, other: &ElementSet) -> ElementSet {
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
        out
    }

    pub fn with(&self, e: usize) -> ElementSet {
        let mut out = self.clone();
        out.insert(e);
        out
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.iter().join(","))
    }
}

/// Direction of weight dominance in a representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepMode {
    /// Stand-ins must weigh at least as much.
    Max,
    /// Stand-ins must weigh at most as much.
    Min,
    /// Weights are ignored; behaves as `Max` with all weights equal.
    Unweighted,
}

impl RepMode {
    /// Whether a member of weight `candidate` may stand in for one of weight `original`.
    /// Ties always dominate.
    #[inline]
    pub fn dominates(self, candidate: f64, original: f64) -> bool {
        match self {
            RepMode::Max => candidate >= original,
            RepMode::Min => candidate <= original,
            RepMode::Unweighted => true,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RepMode::Max => "max",
            RepMode::Min => "min",
            RepMode::Unweighted => "unweighted",
        }
    }
}

impl FromStr for RepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "max" => Ok(RepMode::Max),
            "min" => Ok(RepMode::Min),
            "unweighted" => Ok(RepMode::Unweighted),
            other => Err(Error::input(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for RepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An ordered list of `p`-subsets of a universe, optionally weighted.
///
/// Duplicates are allowed. Unweighted families report weight `0.0` for
/// every member.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedFamily {
    universe: Universe,
    p: usize,
    members: Vec<ElementSet>,
    weights: Option<Vec<f64>>,
}

impl WeightedFamily {
    pub fn new(universe: Universe, p: usize) -> Self {
        WeightedFamily {
            universe,
            p,
            members: Vec::new(),
            weights: None,
        }
    }

    pub fn new_weighted(universe: Universe, p: usize) -> Self {
        WeightedFamily {
            universe,
            p,
            members: Vec::new(),
            weights: Some(Vec::new()),
        }
    }

    /// Validating constructor.
    pub fn from_parts(
        universe: Universe,
        p: usize,
        members: Vec<ElementSet>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        for (i, m) in members.iter().enumerate() {
            if m.universe_size() != universe.size() {
                return Err(Error::input(format!(
                    "member {i} lives in a universe of size {}, expected {}",
                    m.universe_size(),
                    universe.size()
                )));
            }
            if m.len() != p {
                return Err(Error::input(format!(
                    "member {i} has {} elements, expected {p}",
                    m.len()
                )));
            }
        }
        if let Some(w) = &weights {
            if w.len() != members.len() {
                return Err(Error::input(format!(
                    "{} weights for {} members",
                    w.len(),
                    members.len()
                )));
            }
            if let Some(bad) = w.iter().position(|x| !x.is_finite()) {
                return Err(Error::input(format!("weight of member {bad} is not finite")));
            }
        }
        Ok(WeightedFamily {
            universe,
            p,
            members,
            weights,
        })
    }

    pub fn unweighted(universe: Universe, p: usize, members: Vec<ElementSet>) -> Result<Self> {
        Self::from_parts(universe, p, members, None)
    }

    pub fn weighted(
        universe: Universe,
        p: usize,
        members: Vec<ElementSet>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        Self::from_parts(universe, p, members, Some(weights))
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn members(&self) -> &[ElementSet] {
        &self.members
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(0.0, |w| w[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ElementSet, f64)> + '_ {
        self.members
            .iter()
            .enumerate()
            .map(move |(i, m)| (m, self.weight(i)))
    }

    /// Appends a member to an unweighted family (or with weight 0 to a
    /// weighted one).
    ///
    /// # Panics
    /// If the set's size differs from `p`.
    pub fn push(&mut self, set: ElementSet) {
        self.push_weighted(set, 0.0)
    }

    pub fn push_weighted(&mut self, set: ElementSet, weight: f64) {
        assert_eq!(set.len(), self.p, "family member of the wrong size");
        self.members.push(set);
        if let Some(w) = &mut self.weights {
            w.push(weight);
        }
    }

    pub fn extend_from(&mut self, other: &WeightedFamily) {
        for (m, w) in other.iter() {
            self.push_weighted(m.clone(), w);
        }
    }

    /// Returns a copy keeping only the members at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> WeightedFamily {
        WeightedFamily {
            universe: self.universe,
            p: self.p,
            members: indices.iter().map(|&i| self.members[i].clone()).collect(),
            weights: self
                .weights
                .as_ref()
                .map(|w| indices.iter().map(|&i| w[i]).collect()),
        }
    }

    pub fn into_members(self) -> Vec<ElementSet> {
        self.members
    }
}

/// Every `size`-subset of `E \ excluding`, each once, in lexicographic order
/// of their sorted element lists. Sizes that do not fit produce nothing.
pub fn enumerate_subsets(
    universe: Universe,
    size: usize,
    excluding: &ElementSet,
) -> impl Iterator<Item = ElementSet> + '_ {
    let n = universe.size();
    let free: Vec<usize> = (0..n).filter(|&e| !excluding.contains(e)).collect();
    free.into_iter().combinations(size).map(move |c| {
        let mut s = ElementSet::empty(n);
        for e in c {
            s.insert(e);
        }
        s
    })
}

/// A pair `(X, Y)` for which no stand-in exists.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub x: ElementSet,
    pub x_weight: f64,
    pub y: ElementSet,
}

/// Outcome of [`verify_representation`].
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Represents,
    Fails(Counterexample),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Represents)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Represents => None,
            Verdict::Fails(c) => Some(c),
        }
    }
}

fn multiset_key(set: &ElementSet, w: f64, mode: RepMode) -> (ElementSet, u64) {
    let bits = if mode == RepMode::Unweighted {
        0
    } else {
        // -0.0 and 0.0 are the same weight
        (w + 0.0).to_bits()
    };
    (set.clone(), bits)
}

/// Exhaustively checks whether `shat` `mode`-represents `s` in the uniform
/// matroid of rank `k`.
///
/// Every `Y` of size `0..=k-p` is tried, not just the largest size. The
/// first failing pair (members in family order, `Y` by size then
/// lexicographically) is returned. Exponential in `k - p`; meant for small
/// universes.
pub fn verify_representation(
    s: &WeightedFamily,
    shat: &WeightedFamily,
    k: usize,
    mode: RepMode,
) -> Result<Verdict> {
    let p = s.p();
    if p > k {
        return Err(Error::input(format!("set size {p} exceeds rank {k}")));
    }
    if s.universe() != shat.universe() {
        return Err(Error::input("families live in different universes"));
    }
    if !shat.is_empty() && shat.p() != p {
        return Err(Error::input(format!(
            "candidate subfamily has set size {}, expected {p}",
            shat.p()
        )));
    }

    let mut available: HashMap<(ElementSet, u64), usize> = HashMap::new();
    for (m, w) in s.iter() {
        *available.entry(multiset_key(m, w, mode)).or_default() += 1;
    }
    for (i, (m, w)) in shat.iter().enumerate() {
        match available.get_mut(&multiset_key(m, w, mode)) {
            Some(c) if *c > 0 => *c -= 1,
            _ => {
                return Err(Error::input(format!(
                    "member {i} ({m}) of the candidate is not a member of the family"
                )))
            }
        }
    }

    let universe = s.universe();
    let max_y = (k - p).min(universe.size().saturating_sub(p));
    let mut checked = std::collections::HashSet::new();
    for (x, wx) in s.iter() {
        if !checked.insert(multiset_key(x, wx, RepMode::Max)) {
            continue;
        }
        let candidates: Vec<&ElementSet> = shat
            .iter()
            .filter(|&(_, w)| mode.dominates(w, wx))
            .map(|(m, _)| m)
            .collect();
        for size in 0..=max_y {
            for y in enumerate_subsets(universe, size, x) {
                if !candidates.iter().any(|c| c.is_disjoint(&y)) {
                    return Ok(Verdict::Fails(Counterexample {
                        x: x.clone(),
                        x_weight: wx,
                        y,
                    }));
                }
            }
        }
    }
    Ok(Verdict::Represents)
}
