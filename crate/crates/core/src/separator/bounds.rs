//! Closed-form size and time factors, and the base-constant optimizer.
//!
//! Everything here is evaluated in log space. Asymptotic slack terms such as
//! `2^{O(k / log log k)}` are never folded into the numbers; each chain stage
//! carries its slack as a symbolic string plus the evaluated inner
//! expression (hidden constant taken as 1), or `None` where that expression
//! is undefined for the given `k`.

use serde::Serialize;

use super::{ln_lookup_factor, ln_size_factor, x_ln_y};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct ChainEntry {
    pub stage: &'static str,
    /// Leading term, `None` if it overflows an `f64`.
    pub leading: Option<f64>,
    pub log2_leading: f64,
    pub slack: &'static str,
    pub slack_exponent: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub c: f64,
    /// `(ck)^k / (p^p (ck-p)^(k-p)) · (k+1) · ln n`.
    pub t_formula: f64,
    /// `(ck)^k / (p^p (ck-p)^(k-p))`.
    pub size_factor: f64,
    pub log2_size_factor: f64,
    /// `(ck / (ck-p))^(k-p)`.
    pub lookup_factor: f64,
    pub log2_lookup_factor: f64,
    /// Expected `|χ(S)|`: lookup factor times `(k+1) ln n`.
    pub delta_expected: f64,
    /// `(size_factor · lookup_factor)^(1/k)`: the per-unit base of a filter
    /// call on `p`-sets.
    pub base: f64,
    /// `⌊log² k⌋`, at least 1.
    pub s: usize,
    /// `⌈k / s⌉`.
    pub t_blocks: usize,
    pub chain: Vec<ChainEntry>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn ln_binomial_real(n: f64, r: f64) -> f64 {
    libm::lgamma(n + 1.0) - libm::lgamma(r + 1.0) - libm::lgamma(n - r + 1.0)
}

/// Evaluates the size/time factors for `(n, k, p, c)`. `p` may be
/// fractional, which is how base constants at a fixed ratio `p / k` are
/// read off.
pub fn bounds(n: usize, k: usize, p: f64, c: f64) -> Result<BoundReport> {
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::input(format!("c = {c} must be >= 1")));
    }
    if k == 0 {
        return Err(Error::input("k must be positive"));
    }
    let kf = k as f64;
    if !(p.is_finite() && (0.0..=kf).contains(&p)) {
        return Err(Error::input(format!("p = {p} must lie in [0, k]")));
    }
    if n < 2 {
        return Err(Error::input("n must be at least 2"));
    }
    let ln2 = std::f64::consts::LN_2;
    let ln_n = (n as f64).ln();
    let log2_n = (n as f64).log2();

    let ln_size = ln_size_factor(kf, p, c);
    let ln_lookup = ln_lookup_factor(kf, p, c);
    let t_formula = ln_size.exp() * (kf + 1.0) * ln_n;
    let delta_expected = ln_lookup.exp() * (kf + 1.0) * ln_n;
    let base = ((ln_size + ln_lookup) / kf).exp();

    let log2k = kf.log2();
    let s = ((log2k * log2k).floor() as usize).max(1);
    let t_blocks = k.div_ceil(s);
    let loglogk = if log2k > 0.0 { log2k.log2() } else { f64::NAN };
    let per_log_k = (log2k > 0.0).then(|| kf / log2k);
    let per_loglog_k = (loglogk > 0.0).then(|| kf / loglogk);
    let blocks_log_n = t_blocks as f64 * log2_n;

    // binom(ck, p) (1 - p/ck)^((c-1)k)
    let ck = c * kf;
    let ln_binom_form = ln_binomial_real(ck, p) + x_ln_y((c - 1.0) * kf, 1.0 - p / ck);

    let entry = |stage, ln_leading: f64, slack, slack_exponent| ChainEntry {
        stage,
        leading: finite(ln_leading.exp()),
        log2_leading: ln_leading / ln2,
        slack,
        slack_exponent,
    };
    let ln_log_n = log2_n.ln();
    let chain = vec![
        entry("C1", ln_size + (kf + 1.0).ln() + ln_n.ln(), "k^{O(1)}", finite(log2k)),
        entry("C2", ln_binom_form + ln_log_n, "k^{O(1)}", finite(log2k)),
        entry("C3", ln_binom_form, "2^{O(t log n)}", Some(blocks_log_n)),
        entry("C4", ln_binom_form + ln_log_n, "2^{O(k / log k)}", per_log_k),
        entry(
            "C5",
            ln_size,
            "2^{O(t log n + k / log log k)}",
            per_loglog_k.map(|x| x + blocks_log_n),
        ),
        entry("C6", ln_size + ln_log_n, "2^{O(k / log log k)}", per_loglog_k),
    ];

    Ok(BoundReport {
        n,
        k,
        p,
        c,
        t_formula,
        size_factor: ln_size.exp(),
        log2_size_factor: ln_size / ln2,
        lookup_factor: ln_lookup.exp(),
        log2_lookup_factor: ln_lookup / ln2,
        delta_expected,
        base,
        s,
        t_blocks,
        chain,
    })
}

/// Which running-time expression to optimize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `max_t (ck)^k / (t^t (ck-t)^(k-t)) · (ck / (ck-t))^(k-t)`: one filter
    /// call on `t`-sets at rank `k`.
    Pc,
    /// The same with `2k` in place of `k` and `t` ranging over `[0, k]`.
    Cycle,
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pc" => Ok(Shape::Pc),
            "cycle" => Ok(Shape::Cycle),
            other => Err(Error::input(format!("unknown shape `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BaseOptimum {
    /// Maximizing `t / k`.
    pub alpha: f64,
    /// `k`-th root of the maximum.
    pub base: f64,
}

/// Per-unit log of the shape's expression at `t = alpha · k`. Both
/// expressions are homogeneous in `k`, so this is exact for every `k`.
fn ln_unit(shape: Shape, c: f64, alpha: f64) -> f64 {
    let m = match shape {
        Shape::Pc => 1.0,
        Shape::Cycle => 2.0,
    };
    ln_size_factor(m, alpha, c) + ln_lookup_factor(m, alpha, c)
}

/// Maximizes the shape's expression over `t ∈ [0, k]`: a grid scan followed
/// by golden-section refinement around the best grid point.
pub fn optimize_base(c: f64, shape: Shape) -> Result<BaseOptimum> {
    if !(c.is_finite() && c >= 1.0) {
        return Err(Error::input(format!("c = {c} must be >= 1")));
    }
    let f = |a: f64| ln_unit(shape, c, a);
    const GRID: usize = 4000;
    let step = 1.0 / GRID as f64;
    let (best_i, _) = (0..=GRID)
        .map(|i| (i, f(i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });

    let mut lo = (best_i as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best_i as f64 + 1.0) * step).min(1.0);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-12 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let mid = 0.5 * (lo + hi);
    // the optimum may sit on the boundary of [0, 1]
    let alpha = [mid, 0.0, 1.0]
        .into_iter()
        .fold(mid, |best, a| if f(a) > f(best) { a } else { best });
    Ok(BaseOptimum {
        alpha,
        base: f(alpha).exp(),
    })
}

/// Base of the out-branching composite: a tree problem on `k + t ≤ 2k`
/// nodes at the `Pc` base, i.e. the `Pc` base squared.
pub fn kiob_base(c: f64) -> Result<f64> {
    Ok(optimize_base(c, Shape::Pc)?.base.powi(2))
}
