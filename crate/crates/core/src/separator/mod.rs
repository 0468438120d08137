//! `(n, k, p)`-separators.
//!
//! A separator is a family `F` of subsets of `E` such that for every
//! `p`-set `X` and every `Y ⊆ E \ X` with `|Y| ≤ k - p` some member
//! contains `X` and misses `Y`. Alongside the family we keep a per-element
//! bitmask index so that `χ(S) = {i : S ⊆ F_i}` is an AND of `p` masks.
//!
//! Members are drawn at random: each element joins each member
//! independently with probability `p / (ck)`, and the family has
//! `⌈(ck)^k / (p^p (ck - p)^(k-p)) · (k + 1) · ln n⌉` members. The tradeoff
//! parameter `c ≥ 1` makes the family larger while shrinking the expected
//! `|χ(S)|`. [`Separator::build_verified`] retries seeds until the
//! exhaustive covering check passes.

mod bounds;

pub use bounds::{bounds, kiob_base, optimize_base, BaseOptimum, BoundReport, ChainEntry, Shape};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sets::{words_for, ElementSet, Universe};

/// Default cap on the number of members of a separator.
pub const DEFAULT_MAX_SETS: usize = 1 << 24;

/// Default cap on the number of `(X, Y)` pairs the exhaustive check visits.
pub const DEFAULT_VERIFY_BUDGET: f64 = 2e8;

/// `x ln y`, with `0 ln 0 = 0`.
#[inline]
pub(crate) fn x_ln_y(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `ln[(ck)^k / (p^p (ck - p)^(k - p))]`, the log of the leading size factor.
pub(crate) fn ln_size_factor(k: f64, p: f64, c: f64) -> f64 {
    let ck = c * k;
    x_ln_y(k, ck) - x_ln_y(p, p) - x_ln_y(k - p, ck - p)
}

/// `ln[(ck / (ck - p))^(k - p)]`, the log of the expected lookup factor.
pub(crate) fn ln_lookup_factor(k: f64, p: f64, c: f64) -> f64 {
    let ck = c * k;
    if k - p == 0.0 {
        0.0
    } else {
        (k - p) * (ck.ln() - (ck - p).ln())
    }
}

/// Parameters of a separator. `k` is clamped to `n` on construction: a
/// rank above the universe size admits no additional extensions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeparatorParams {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub c: f64,
}

impl SeparatorParams {
    pub fn new(n: usize, k: usize, p: usize, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 1.0) {
            return Err(Error::input(format!("tradeoff parameter c = {c} must be >= 1")));
        }
        if p > k {
            return Err(Error::input(format!("p = {p} exceeds k = {k}")));
        }
        if p > n {
            return Err(Error::input(format!("p = {p} exceeds n = {n}")));
        }
        Ok(SeparatorParams {
            n,
            k: k.min(n),
            p,
            c,
        })
    }

    /// Element inclusion probability `p / (ck)`.
    pub fn inclusion_probability(&self) -> f64 {
        if self.p == 0 {
            0.0
        } else {
            self.p as f64 / (self.c * self.k as f64)
        }
    }

    /// The unrounded family size `(ck)^k / (p^p (ck-p)^(k-p)) · (k+1) · ln n`.
    pub fn size_formula(&self) -> f64 {
        let (k, p) = (self.k as f64, self.p as f64);
        ln_size_factor(k, p, self.c).exp() * (k + 1.0) * (self.n as f64).ln()
    }

    /// Number of members actually drawn: the formula rounded up, and never
    /// fewer than one.
    pub fn set_count(&self) -> f64 {
        if self.p == 0 {
            1.0
        } else {
            self.size_formula().ceil().max(1.0)
        }
    }

    /// `E[|χ(S)|] = t (p / ck)^p = (ck / (ck - p))^(k-p) (k+1) ln n`.
    pub fn expected_chi(&self) -> f64 {
        let (k, p) = (self.k as f64, self.p as f64);
        ln_lookup_factor(k, p, self.c).exp() * (k + 1.0) * (self.n as f64).ln()
    }

    /// Number of `(X, Y)` pairs the exhaustive check visits.
    pub fn verification_cost(&self) -> f64 {
        let y = self.k - self.p;
        binomial_f64(self.n, self.p) * binomial_f64(self.n - self.p, y)
    }
}

pub(crate) fn binomial_f64(n: usize, r: usize) -> f64 {
    if r > n {
        return 0.0;
    }
    let r = r.min(n - r);
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub max_sets: usize,
    pub verify_budget: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_sets: DEFAULT_MAX_SETS,
            verify_budget: DEFAULT_VERIFY_BUDGET,
        }
    }
}

/// A pair `(X, Y)` that no member separates.
#[derive(Clone, Debug, PartialEq)]
pub struct Uncovered {
    pub x: ElementSet,
    pub y: ElementSet,
}

/// The family `F` together with its lookup index.
#[derive(Clone, Debug)]
pub struct Separator {
    params: SeparatorParams,
    seed: u64,
    sets: Vec<ElementSet>,
    // index[e] has bit i set iff e ∈ F_i
    index: Vec<Vec<u64>>,
    all: Vec<u64>,
}

impl Separator {
    /// Wraps an explicit family. Members must live in a universe of `params.n`.
    pub fn from_sets(params: SeparatorParams, sets: Vec<ElementSet>) -> Result<Self> {
        if let Some(bad) = sets.iter().position(|s| s.universe_size() != params.n) {
            return Err(Error::input(format!(
                "member {bad} is not a subset of a universe of size {}",
                params.n
            )));
        }
        Ok(Self::assemble(params, 0, sets))
    }

    fn assemble(params: SeparatorParams, seed: u64, sets: Vec<ElementSet>) -> Self {
        let words = words_for(sets.len());
        let mut index = vec![vec![0u64; words]; params.n];
        for (i, s) in sets.iter().enumerate() {
            for e in s.iter() {
                index[e][i / 64] |= 1 << (i % 64);
            }
        }
        let mut all = vec![u64::MAX; words];
        if !sets.len().is_multiple_of(64) {
            all[words - 1] = (1u64 << (sets.len() % 64)) - 1;
        }
        Separator {
            params,
            seed,
            sets,
            index,
            all,
        }
    }

    /// Draws a separator from `seed`. Member `i` is generated from its own
    /// ChaCha stream, so the result does not depend on how the work is
    /// scheduled across threads.
    pub fn build_randomized(params: SeparatorParams, seed: u64, opts: &BuildOptions) -> Result<Self> {
        let n = params.n;
        if params.p == 0 {
            return Ok(Self::assemble(params, seed, vec![ElementSet::empty(n)]));
        }
        let count = params.set_count();
        if count > opts.max_sets as f64 {
            return Err(Error::Resource {
                what: format!(
                    "separator (n={}, k={}, p={}, c={})",
                    params.n, params.k, params.p, params.c
                ),
                required: count,
                cap: opts.max_sets as f64,
            });
        }
        let count = count as usize;
        let q = params.inclusion_probability();
        let key = ChaCha8Rng::seed_from_u64(seed).get_seed();
        let sets: Vec<ElementSet> = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::from_seed(key);
                rng.set_stream(i as u64);
                let mut s = ElementSet::empty(n);
                for e in 0..n {
                    if rng.gen::<f64>() < q {
                        s.insert(e);
                    }
                }
                s
            })
            .collect();
        Ok(Self::assemble(params, seed, sets))
    }

    /// Tries seeds `seed, seed + 1, ..` until a draw passes
    /// [`Separator::verify`].
    pub fn build_verified(
        params: SeparatorParams,
        seed: u64,
        max_attempts: usize,
        opts: &BuildOptions,
    ) -> Result<Self> {
        for attempt in 0..max_attempts as u64 {
            let sep = Self::build_randomized(params, seed.wrapping_add(attempt), opts)?;
            if sep.verify(opts.verify_budget)?.is_none() {
                return Ok(sep);
            }
        }
        Err(Error::Construction(format!(
            "no valid separator (n={}, k={}, p={}, c={}) within {max_attempts} attempts from seed {seed}",
            params.n, params.k, params.p, params.c
        )))
    }

    pub fn params(&self) -> &SeparatorParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn universe(&self) -> Universe {
        Universe::new(self.params.n)
    }

    pub fn sets(&self) -> &[ElementSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Bitmask over members containing `s`. `s` need not have size `p`.
    pub(crate) fn chi_mask(&self, s: &ElementSet) -> Vec<u64> {
        let mut mask = self.all.clone();
        for e in s.iter() {
            for (m, w) in mask.iter_mut().zip(&self.index[e]) {
                *m &= w;
            }
        }
        mask
    }

    /// Indices of the members containing `s`, ascending.
    pub fn chi(&self, s: &ElementSet) -> Result<Vec<usize>> {
        if s.len() != self.params.p {
            return Err(Error::input(format!(
                "lookup set has {} elements, separator serves p = {}",
                s.len(),
                self.params.p
            )));
        }
        if s.universe_size() != self.params.n {
            return Err(Error::input("lookup set from a different universe"));
        }
        Ok(mask_indices(&self.chi_mask(s)).collect())
    }

    /// Exhaustive covering check over every `X` of size `p` and `Y` of size
    /// `k - p` disjoint from it. Returns the first uncovered pair (`X`
    /// lexicographically, then `Y`), or `None` if the family separates all.
    pub fn verify(&self, budget: f64) -> Result<Option<Uncovered>> {
        let cost = self.params.verification_cost();
        if cost > budget {
            return Err(Error::Budget {
                estimated: cost,
                budget,
            });
        }
        let u = self.universe();
        let y_size = self.params.k - self.params.p;
        let xs: Vec<ElementSet> =
            crate::sets::enumerate_subsets(u, self.params.p, &u.empty_set()).collect();
        let found = xs.par_iter().find_map_first(|x| {
            let cx = self.chi_mask(x);
            crate::sets::enumerate_subsets(u, y_size, x).find_map(|y| {
                let mut avail = cx.clone();
                for e in y.iter() {
                    for (a, w) in avail.iter_mut().zip(&self.index[e]) {
                        *a &= !w;
                    }
                }
                avail.iter().all(|&w| w == 0).then(|| Uncovered {
                    x: x.clone(),
                    y,
                })
            })
        });
        Ok(found)
    }

    /// Summary statistics; `|χ(S)|` is measured on `samples` uniformly random
    /// `p`-sets drawn from `sample_seed`.
    pub fn stats(&self, samples: usize, sample_seed: u64, verified: Verification) -> SeparatorStats {
        let n = self.params.n;
        let p = self.params.p;
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        let mut max = 0usize;
        let mut total = 0usize;
        for _ in 0..samples {
            let picks = rand::seq::index::sample(&mut rng, n, p);
            let s = ElementSet::from_elements(n, picks.iter()).expect("sampled in range");
            let size = mask_indices(&self.chi_mask(&s)).count();
            max = max.max(size);
            total += size;
        }
        SeparatorStats {
            size: self.len(),
            size_formula: self.params.size_formula(),
            delta_max_sampled: max,
            delta_mean_sampled: if samples == 0 {
                0.0
            } else {
                total as f64 / samples as f64
            },
            delta_expected: self.params.expected_chi(),
            samples,
            verified,
        }
    }
}

pub(crate) fn mask_indices(mask: &[u64]) -> impl Iterator<Item = usize> + '_ {
    mask.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let b = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(wi * 64 + b)
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verification {
    Yes,
    No,
    Unchecked,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparatorStats {
    /// `|F|`.
    pub size: usize,
    pub size_formula: f64,
    pub delta_max_sampled: usize,
    pub delta_mean_sampled: f64,
    pub delta_expected: f64,
    pub samples: usize,
    pub verified: Verification,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize, p: usize, c: f64) -> SeparatorParams {
        SeparatorParams::new(n, k, p, c).unwrap()
    }

    #[test]
    fn set_counts_match_formula() {
        // 27/4 * 4 * ln 6 = 48.38
        assert_eq!(params(6, 3, 2, 1.0).set_count(), 49.0);
        assert!((params(6, 3, 2, 1.0).size_formula() - 27.0 * 6f64.ln()).abs() < 1e-9);
        // 1 * 2 * ln 4 = 2.77
        assert_eq!(params(4, 1, 1, 1.0).set_count(), 3.0);
    }

    #[test]
    fn inclusion_probability_is_p_over_ck() {
        assert!((params(8, 4, 2, 1.5).inclusion_probability() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn certain_inclusion_gives_full_sets() {
        let sep = Separator::build_randomized(params(4, 1, 1, 1.0), 0, &BuildOptions::default())
            .unwrap();
        assert_eq!(sep.len(), 3);
        let full = Universe::new(4).full_set();
        assert!(sep.sets().iter().all(|s| *s == full));
    }

    #[test]
    fn p_zero_is_single_empty_set() {
        let sep = Separator::build_randomized(params(5, 3, 0, 1.0), 1, &BuildOptions::default())
            .unwrap();
        assert_eq!(sep.sets(), &[ElementSet::empty(5)]);
        assert_eq!(sep.chi(&ElementSet::empty(5)).unwrap(), vec![0]);
        assert!(sep.verify(1e6).unwrap().is_none());
    }

    #[test]
    fn bad_params_rejected() {
        assert!(SeparatorParams::new(5, 2, 3, 1.0).is_err());
        assert!(SeparatorParams::new(5, 2, 1, 0.5).is_err());
        assert!(SeparatorParams::new(2, 3, 3, 1.0).is_err());
        assert_eq!(SeparatorParams::new(3, 5, 2, 1.0).unwrap().k, 3);
    }

    #[test]
    fn cap_is_a_resource_error() {
        let opts = BuildOptions {
            max_sets: 10,
            ..Default::default()
        };
        match Separator::build_randomized(params(6, 3, 2, 1.0), 0, &opts) {
            Err(Error::Resource { required, .. }) => assert_eq!(required, 49.0),
            other => panic!("expected resource error, got {other:?}"),
        }
    }

    #[test]
    fn chi_small_family() {
        let u = Universe::new(3);
        let sep = Separator::from_sets(
            params(3, 2, 1, 1.0),
            vec![u.set([0, 1]).unwrap(), u.set([1, 2]).unwrap()],
        )
        .unwrap();
        assert_eq!(sep.chi(&u.set([1]).unwrap()).unwrap(), vec![0, 1]);
        assert_eq!(sep.chi(&u.set([2]).unwrap()).unwrap(), vec![1]);
        assert!(sep.chi(&u.set([0, 1]).unwrap()).is_err());
    }

    #[test]
    fn trivial_verification_cases() {
        let u = Universe::new(4);
        let whole = Separator::from_sets(params(4, 2, 2, 1.0), vec![u.full_set()]).unwrap();
        assert!(whole.verify(1e6).unwrap().is_none());

        let none = Separator::from_sets(params(4, 2, 1, 1.0), vec![]).unwrap();
        let w = none.verify(1e6).unwrap().unwrap();
        assert_eq!(w.x, u.set([0]).unwrap());
        assert_eq!(w.y, u.set([1]).unwrap());
    }

    #[test]
    fn verification_budget_refuses() {
        let sep = Separator::from_sets(params(20, 10, 5, 1.0), vec![]).unwrap();
        assert!(matches!(sep.verify(100.0), Err(Error::Budget { .. })));
    }

    #[test]
    fn verified_builds() {
        let opts = BuildOptions::default();
        let a = Separator::build_verified(params(5, 2, 1, 1.0), 0, 10, &opts).unwrap();
        assert!(a.verify(1e6).unwrap().is_none());
        let full = Separator::build_verified(params(5, 5, 5, 1.0), 0, 10, &opts).unwrap();
        assert!(full.sets().iter().all(|s| s.len() == 5));
        let c1 = Separator::build_verified(params(6, 3, 2, 1.0), 0, 10, &opts).unwrap();
        let c2 = Separator::build_verified(params(6, 3, 2, 2.0), 0, 10, &opts).unwrap();
        assert!(c2.len() > c1.len());
    }

    #[test]
    fn deterministic_under_thread_count() {
        let p = params(10, 4, 2, 1.447);
        let build = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| Separator::build_randomized(p, 42, &BuildOptions::default()).unwrap())
        };
        assert_eq!(build(1).sets(), build(4).sets());
    }
}
