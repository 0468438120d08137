//! Generated benchmark suites.

use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use repfam::pcover::{solve_partial_cover, solve_partial_cover_checked, PCInstance};
use repfam::{ElementSet, Error, RepConfig, Result, SeparatorParams, Universe};
use serde::Serialize;
use serde_json::json;

use crate::report::{round_ms, to_value, Outcome, Report};

pub const SUITES: [&str; 3] = ["c-sweep", "pcover", "empty"];

#[derive(Debug, Serialize)]
struct Row {
    instance: usize,
    c: f64,
    /// Largest separator built during the run.
    separator_size: usize,
    /// Largest separator the formula allows for any set size below k.
    t_formula_max: f64,
    max_cell_size: usize,
    answer: Option<usize>,
    verification: &'static str,
}

/// `count` instances with `m` sets of 1..=4 elements over `n` elements.
pub fn instances(seed: u64, count: usize, n: usize, m: usize, k: usize) -> Vec<PCInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Universe::new(n);
    (0..count)
        .map(|_| {
            let sets = (0..m)
                .map(|_| {
                    let size = rng.gen_range(1..=4);
                    ElementSet::from_elements(n, sample(&mut rng, n, size).iter()).expect("in range")
                })
                .collect();
            PCInstance::new(u, sets, k).expect("valid instance")
        })
        .collect()
}

fn t_formula_max(n: usize, k: usize, c: f64) -> Result<f64> {
    let mut best: f64 = 0.0;
    for p in 1..k {
        best = best.max(SeparatorParams::new(n, k, p, c)?.set_count());
    }
    Ok(best)
}

pub fn run(suite: &str, seed: u64, cs: &[f64], count: usize, budget_ms: Option<u64>, debug: bool) -> Result<Report> {
    let (insts, cs): (Vec<PCInstance>, Vec<f64>) = match suite {
        "c-sweep" => (instances(seed, count, 12, 10, 6), cs.to_vec()),
        "pcover" => (instances(seed, count, 8, 6, 4), vec![repfam::repfam::DEFAULT_C]),
        "empty" => (Vec::new(), Vec::new()),
        other => {
            return Err(Error::Input(format!("unknown suite `{other}`; known: {}", SUITES.join(", "))));
        }
    };
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut times = Vec::new();
    let mut truncated = false;
    'outer: for (idx, inst) in insts.iter().enumerate() {
        for &c in &cs {
            if budget_ms.is_some_and(|b| start.elapsed().as_millis() as u64 >= b) {
                truncated = true;
                break 'outer;
            }
            let cfg = RepConfig::default().with_c(c).with_seed(seed).with_skip_threshold(Some(0));
            let t0 = Instant::now();
            let sol = if debug {
                solve_partial_cover_checked(inst, &cfg)?
            } else {
                solve_partial_cover(inst, &cfg)?
            };
            let solver_ms = t0.elapsed().as_secs_f64() * 1000.0;
            let verification = match &sol.checks {
                None => "skipped",
                Some(ch) if ch.passed() => "pass",
                Some(_) => "fail",
            };
            rows.push(Row {
                instance: idx,
                c,
                separator_size: sol.stats.filter.max_separator,
                t_formula_max: t_formula_max(inst.universe().size(), inst.k(), c)?,
                max_cell_size: sol.stats.max_cell_size,
                answer: sol.answer,
                verification,
            });
            times.push(json!({
                "filter_ms": round_ms(sol.filter_time.as_secs_f64() * 1000.0),
                "solver_ms": round_ms(solver_ms),
            }));
        }
    }

    // per instance: does t grow with c, and do cells shrink?
    let mut trends = Vec::new();
    for idx in 0..insts.len() {
        let mine: Vec<&Row> = rows.iter().filter(|r| r.instance == idx).collect();
        if mine.is_empty() {
            continue;
        }
        trends.push(json!({
            "instance": idx,
            "separator_size_increasing": mine.windows(2).all(|w| w[1].separator_size > w[0].separator_size),
            "max_cell_size_non_increasing": mine.windows(2).all(|w| w[1].max_cell_size <= w[0].max_cell_size),
        }));
    }

    let mut r = Report::new("bench", None);
    r.set("parameters", json!({"suite": suite, "seed": seed, "cs": cs, "instances": count, "debug_verify": debug}))
        .set("rows", &rows)
        .set("trends", trends)
        .set("truncated", truncated)
        .timing("rows", to_value(times))
        .time("total_ms", start.elapsed().as_secs_f64() * 1000.0);
    if rows.iter().any(|row| row.verification == "fail") {
        r.outcome = Outcome::No;
    }
    Ok(r)
}
