//! The greedy representative-family filter.
//!
//! Given a separator `F` for `(n, k, p)`, sort the family by weight (best
//! first), then keep a member iff some `F_i ⊇ S` has not yet been claimed by
//! an earlier member; keeping a member claims all of `χ(S)`. The output has
//! at most `|F|` members and represents the input.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::separator::{BuildOptions, Separator, SeparatorParams};
use crate::sets::{RepMode, Universe, WeightedFamily};

/// Default tradeoff parameter for the solvers.
pub const DEFAULT_C: f64 = 1.447;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Use the first random draw; representation holds with high probability.
    Randomized,
    /// Retry draws until the separator passes the exhaustive check.
    Verified,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "randomized" => Ok(Strategy::Randomized),
            "verified" => Ok(Strategy::Verified),
            other => Err(Error::input(format!("unknown strategy `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RepConfig {
    pub c: f64,
    pub strategy: Strategy,
    pub seed: u64,
    /// Families at most this large are returned unchanged. `None` means the
    /// separator's member count.
    pub skip_threshold: Option<usize>,
    pub max_attempts: usize,
    pub build: BuildOptions,
}

impl Default for RepConfig {
    fn default() -> Self {
        RepConfig {
            c: DEFAULT_C,
            strategy: Strategy::Verified,
            seed: 0,
            skip_threshold: None,
            max_attempts: 64,
            build: BuildOptions::default(),
        }
    }
}

impl RepConfig {
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn with_skip_threshold(mut self, threshold: Option<usize>) -> Self {
        self.skip_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c >= 1.0) {
            return Err(Error::input(format!("c = {} must be >= 1", self.c)));
        }
        Ok(())
    }
}

/// Greedy selection against an existing separator.
pub fn compute_representative_with(
    sep: &Separator,
    s: &WeightedFamily,
    mode: RepMode,
) -> Result<WeightedFamily> {
    let params = sep.params();
    if s.is_empty() {
        return Ok(s.clone());
    }
    if s.p() != params.p || s.universe().size() != params.n {
        return Err(Error::input(format!(
            "family of {}-sets over {} elements does not match separator (n={}, p={})",
            s.p(),
            s.universe().size(),
            params.n,
            params.p
        )));
    }
    let order = sorted_order(s, mode);
    let masks: Vec<Vec<u64>> = s.members().par_iter().map(|m| sep.chi_mask(m)).collect();
    let mut claimed = vec![0u64; masks[0].len()];
    let mut keep = Vec::new();
    for i in order {
        let fresh = masks[i].iter().zip(&claimed).any(|(m, c)| m & !c != 0);
        if fresh {
            keep.push(i);
            for (c, m) in claimed.iter_mut().zip(&masks[i]) {
                *c |= m;
            }
        }
    }
    Ok(s.select(&keep))
}

/// Stable order: heaviest first for `Max`, lightest first for `Min`, input
/// order when unweighted.
fn sorted_order(s: &WeightedFamily, mode: RepMode) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    match mode {
        RepMode::Max => order.sort_by(|&a, &b| s.weight(b).total_cmp(&s.weight(a))),
        RepMode::Min => order.sort_by(|&a, &b| s.weight(a).total_cmp(&s.weight(b))),
        RepMode::Unweighted => {}
    }
    order
}

/// Counters reported by solvers.
#[derive(Clone, Debug, Default, Serialize, PartialEq, Eq)]
pub struct FilterStats {
    pub calls: usize,
    /// Calls that ran the greedy selection rather than returning the input.
    pub filtered: usize,
    pub max_input: usize,
    pub max_output: usize,
    pub separators: usize,
    pub max_separator: usize,
}

/// A filter that builds one separator per `(n, k, p)` and reuses it across
/// calls. Separators do not depend on the family being filtered.
#[derive(Debug)]
pub struct Representer {
    cfg: RepConfig,
    cache: Mutex<HashMap<(usize, usize, usize), Arc<Separator>>>,
    calls: AtomicUsize,
    filtered: AtomicUsize,
    max_input: AtomicUsize,
    max_output: AtomicUsize,
    nanos: AtomicU64,
}

impl Representer {
    pub fn new(cfg: RepConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Representer {
            cfg,
            cache: Mutex::new(HashMap::new()),
            calls: AtomicUsize::new(0),
            filtered: AtomicUsize::new(0),
            max_input: AtomicUsize::new(0),
            max_output: AtomicUsize::new(0),
            nanos: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &RepConfig {
        &self.cfg
    }

    pub fn separator(&self, n: usize, k: usize, p: usize) -> Result<Arc<Separator>> {
        let params = SeparatorParams::new(n, k, p, self.cfg.c)?;
        let key = (params.n, params.k, params.p);
        if let Some(sep) = self.cache.lock().expect("separator cache poisoned").get(&key) {
            return Ok(Arc::clone(sep));
        }
        // built without holding the lock: the build runs on the rayon pool, and
        // a worker waiting on it may pick up another job that needs the cache.
        // Concurrent builds of the same key produce identical separators.
        let sep = match self.cfg.strategy {
            Strategy::Randomized => Separator::build_randomized(params, self.cfg.seed, &self.cfg.build)?,
            Strategy::Verified => Separator::build_verified(
                params,
                self.cfg.seed,
                self.cfg.max_attempts,
                &self.cfg.build,
            )?,
        };
        let mut cache = self.cache.lock().expect("separator cache poisoned");
        Ok(Arc::clone(cache.entry(key).or_insert_with(|| Arc::new(sep))))
    }

    fn threshold(&self, n: usize, k: usize, p: usize) -> Result<usize> {
        Ok(match self.cfg.skip_threshold {
            Some(t) => t,
            None => {
                let count = SeparatorParams::new(n, k, p, self.cfg.c)?.set_count();
                count.min(usize::MAX as f64) as usize
            }
        })
    }

    /// Returns a subfamily of `s` that `mode`-represents it at rank `k`.
    pub fn represent(&self, k: usize, s: &WeightedFamily, mode: RepMode) -> Result<WeightedFamily> {
        let p = s.p();
        if p > k {
            return Err(Error::input(format!("set size {p} exceeds rank {k}")));
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.max_input.fetch_max(s.len(), Ordering::Relaxed);
        let n = s.universe().size();
        if s.is_empty() || s.len() <= self.threshold(n, k, p)? {
            self.max_output.fetch_max(s.len(), Ordering::Relaxed);
            return Ok(s.clone());
        }
        self.filtered.fetch_add(1, Ordering::Relaxed);
        let start = Instant::now();
        let sep = self.separator(n, k, p)?;
        let out = compute_representative_with(&sep, s, mode)?;
        self.nanos.fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
        self.max_output.fetch_max(out.len(), Ordering::Relaxed);
        Ok(out)
    }

    /// Wall time spent in calls that filtered, separator construction
    /// included. Summed over threads.
    pub fn filter_time(&self) -> Duration {
        Duration::from_nanos(self.nanos.load(Ordering::Relaxed))
    }

    pub fn stats(&self) -> FilterStats {
        let cache = self.cache.lock().expect("separator cache poisoned");
        FilterStats {
            calls: self.calls.load(Ordering::Relaxed),
            filtered: self.filtered.load(Ordering::Relaxed),
            max_input: self.max_input.load(Ordering::Relaxed),
            max_output: self.max_output.load(Ordering::Relaxed),
            separators: cache.len(),
            max_separator: cache.values().map(|s| s.len()).max().unwrap_or(0),
        }
    }
}

/// One-shot filter: builds the separator for `(|U|, k, p)` and runs the
/// greedy selection.
pub fn compute_representative(
    universe: Universe,
    k: usize,
    s: &WeightedFamily,
    mode: RepMode,
    cfg: &RepConfig,
) -> Result<WeightedFamily> {
    if s.universe() != universe {
        return Err(Error::input("family does not live in the given universe"));
    }
    Representer::new(cfg.clone())?.represent(k, s, mode)
}
