use std::fs;
use std::io::Cursor;
use std::path::Path;
use std::time::Instant;

use repfam::graph::{read_digraph, read_graph, read_weighted_graph};
use repfam::io::{read_family, write_family, FamilyFile};
use repfam::kpath::{solve_weighted_kpath, solve_weighted_kpath_checked, PathLength};
use repfam::ktree::{solve_kiob, solve_kt_tree, TreeConfig};
use repfam::pcover::{dominating_set_reduce, read_pc_instance, solve_partial_cover, solve_partial_cover_checked, PCInstance};
use repfam::separator::{bounds, kiob_base, optimize_base, BuildOptions, Shape, Verification};
use repfam::{verify_representation, Error, RepConfig, RepMode, Representer, Result, Separator, SeparatorParams, WeightedFamily};
use serde_json::json;

use crate::report::{digest, Outcome, Report};
use crate::{bench, max_separator_override, Command, SolverArgs};

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

fn parameters(solver: &SolverArgs, extra: serde_json::Value) -> serde_json::Value {
    let mut v = json!({
        "c": solver.c,
        "seed": solver.seed,
        "strategy": solver.strategy,
        "skip_threshold": solver.skip_threshold,
        "debug_verify": solver.debug_verify,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

fn default_mode(f: &WeightedFamily) -> RepMode {
    if f.is_weighted() {
        RepMode::Max
    } else {
        RepMode::Unweighted
    }
}

fn members_json(f: &WeightedFamily) -> serde_json::Value {
    f.iter()
        .map(|(m, w)| {
            if f.is_weighted() {
                json!({"elements": m.to_vec(), "weight": w})
            } else {
                json!({"elements": m.to_vec()})
            }
        })
        .collect()
}

pub fn run(cmd: Command) -> Result<Report> {
    match cmd {
        Command::Repfam {
            input,
            k,
            mode,
            output,
            solver,
        } => repfam_cmd(&input, k, mode, output.as_deref(), &solver),
        Command::Separator {
            n,
            k,
            p,
            c,
            seed,
            verify,
            samples,
            json: _,
        } => separator_cmd(n, k, p, c, seed, verify, samples),
        Command::Pcover { input, solver } => {
            let bytes = read_input(&input)?;
            let inst = read_pc_instance(Cursor::new(&bytes))?;
            let params = json!({"k": inst.k()});
            pcover_report("pcover", &bytes, &inst, &solver, params)
        }
        Command::Kds { input, k, solver } => {
            let bytes = read_input(&input)?;
            let g = read_graph(Cursor::new(&bytes))?;
            let inst = dominating_set_reduce(&g, k)?;
            pcover_report("kds", &bytes, &inst, &solver, json!({"k": k}))
        }
        Command::Kttree {
            input,
            root,
            k,
            t,
            d,
            full_table,
            solver,
        } => {
            let bytes = read_input(&input)?;
            let g = read_digraph(Cursor::new(&bytes))?;
            let cfg = tree_config(&solver, d, full_table)?;
            let start = Instant::now();
            let out = solve_kt_tree(&g, root, k, t, &cfg)?;
            let mut r = Report::new("kttree", Some(digest(&bytes)));
            r.set("parameters", parameters(&solver, json!({"root": root, "k": k, "t": t, "d": d, "full_table": full_table})))
                .set("answer", out.answer)
                .set("cells", out.stats.cells)
                .set("max_family", out.stats.max_family)
                .set("stats", &out.stats);
            if let Some(checks) = &out.checks {
                r.set("verification", checks);
            }
            r.time("ms", ms_since(start));
            r.outcome = if out.answer && out.checks.as_ref().is_none_or(|c| c.passed()) {
                Outcome::Yes
            } else {
                Outcome::No
            };
            Ok(r)
        }
        Command::Kiob { input, k, d, solver } => {
            let bytes = read_input(&input)?;
            let g = read_digraph(Cursor::new(&bytes))?;
            let cfg = tree_config(&solver, d, false)?;
            let start = Instant::now();
            let out = solve_kiob(&g, k, &cfg)?;
            let mut r = Report::new("kiob", Some(digest(&bytes)));
            r.set("parameters", parameters(&solver, json!({"k": k, "d": d})))
                .set("answer", out.answer)
                .set("root", out.root)
                .set("t", out.t)
                .set("cells", out.stats.cells)
                .set("max_family", out.stats.max_family)
                .set("stats", &out.stats)
                .time("ms", ms_since(start));
            r.outcome = if out.answer { Outcome::Yes } else { Outcome::No };
            Ok(r)
        }
        Command::Kpath {
            input,
            k,
            directed,
            edges,
            solver,
        } => {
            let bytes = read_input(&input)?;
            let g = read_weighted_graph(Cursor::new(&bytes), directed)?;
            let cfg = solver.config()?;
            let length = if edges { PathLength::Edges } else { PathLength::Vertices };
            let start = Instant::now();
            let sol = if solver.debug_verify {
                solve_weighted_kpath_checked(&g, k, length, &cfg)?
            } else {
                solve_weighted_kpath(&g, k, length, &cfg)?
            };
            let mut r = Report::new("kpath", Some(digest(&bytes)));
            r.set("parameters", parameters(&solver, json!({"k": k, "directed": directed, "length": length})))
                .set("answer", sol.answer)
                .set("families", sol.stats.total_family)
                .set("max_family", sol.stats.max_family)
                .set("stats", &sol.stats);
            if let Some(f) = &sol.check_failures {
                r.set("verification", json!({"passed": f.is_empty(), "failures": f}));
            }
            r.time("ms", ms_since(start));
            Ok(r)
        }
        Command::Bounds {
            k,
            n,
            p,
            p_frac,
            c,
            shape,
        } => bounds_cmd(k, n, p, p_frac, c, shape),
        Command::Bench {
            suite,
            seed,
            cs,
            instances,
            budget_ms,
            debug_verify,
        } => bench::run(&suite, seed, &cs, instances, budget_ms, debug_verify),
        Command::Verify { family, subset, k, mode } => verify_cmd(&family, &subset, k, mode),
    }
}

fn tree_config(solver: &SolverArgs, d: usize, full_table: bool) -> Result<TreeConfig> {
    Ok(TreeConfig {
        full_table,
        debug_verify: solver.debug_verify,
        ..TreeConfig::default().with_d(d).with_rep(solver.config()?)
    })
}

fn repfam_cmd(input: &Path, k: Option<usize>, mode: Option<RepMode>, output: Option<&Path>, solver: &SolverArgs) -> Result<Report> {
    let bytes = read_input(input)?;
    let file = read_family(Cursor::new(&bytes))?;
    let k = k.unwrap_or(file.k);
    let mode = mode.unwrap_or_else(|| default_mode(&file.family));
    if mode != RepMode::Unweighted && !file.family.is_weighted() && !file.family.is_empty() {
        return Err(Error::Input(format!("mode {mode} needs a weighted family")));
    }
    let cfg = solver.config()?;
    let start = Instant::now();
    let rep = Representer::new(cfg)?;
    let out = rep.represent(k, &file.family, mode)?;
    let elapsed = ms_since(start);
    let stats = rep.stats();

    let mut r = Report::new("repfam", Some(digest(&bytes)));
    r.set("parameters", parameters(solver, json!({"k": k, "mode": mode})))
        .set("input_size", file.family.len())
        .set("output_size", out.len())
        .set("separator_size", stats.max_separator)
        .set("stats", &stats);
    if solver.debug_verify {
        let check = Instant::now();
        let verdict = verify_representation(&file.family, &out, k, mode)?;
        r.set("verification", verdict_json(&verdict));
        r.time("verify_ms", ms_since(check));
        if !verdict.holds() {
            r.outcome = Outcome::No;
        }
    }
    match output {
        Some(path) => {
            let written = FamilyFile {
                labels: file.labels.clone(),
                ..FamilyFile::new(k, out)
            };
            let f = fs::File::create(path).map_err(|e| Error::Input(format!("cannot write {}: {e}", path.display())))?;
            write_family(std::io::BufWriter::new(f), &written)?;
            r.set("output", path.display().to_string());
        }
        None => {
            r.set("family", members_json(&out));
        }
    }
    r.time("filter_ms", elapsed);
    if let Some(path) = output {
        let mut sidecar = path.as_os_str().to_owned();
        sidecar.push(".json");
        let text = serde_json::to_string_pretty(&r.snapshot()).expect("serializable");
        fs::write(&sidecar, text + "\n").map_err(|e| Error::Input(format!("cannot write sidecar: {e}")))?;
    }
    Ok(r)
}

fn verdict_json(v: &repfam::Verdict) -> serde_json::Value {
    match v.counterexample() {
        None => json!({"represents": true}),
        Some(ce) => json!({
            "represents": false,
            "counterexample": {"x": ce.x.to_vec(), "x_weight": ce.x_weight, "y": ce.y.to_vec()},
        }),
    }
}

fn separator_cmd(n: usize, k: usize, p: usize, c: f64, seed: u64, verify: bool, samples: usize) -> Result<Report> {
    let params = SeparatorParams::new(n, k, p, c)?;
    let mut opts = BuildOptions::default();
    if let Some(cap) = max_separator_override()? {
        opts.max_sets = cap;
    }
    let start = Instant::now();
    let sep = Separator::build_randomized(params, seed, &opts)?;
    let build_ms = ms_since(start);
    let mut r = Report::new("separator", None);
    r.time("build_ms", build_ms);
    let (verified, witness) = if verify {
        let check = Instant::now();
        let miss = sep.verify(opts.verify_budget)?;
        r.time("verify_ms", ms_since(check));
        match miss {
            None => (Verification::Yes, None),
            Some(u) => (Verification::No, Some(json!({"x": u.x.to_vec(), "y": u.y.to_vec()}))),
        }
    } else {
        (Verification::Unchecked, None)
    };
    let stats = sep.stats(samples, seed, verified);
    let report = bounds(params.n, params.k, params.p as f64, c)?;
    r.set("params", params)
        .set("t", sep.len())
        .set("t_formula", params.size_formula())
        .set("C", report.size_factor)
        .set("inclusion_probability", params.inclusion_probability())
        .set("delta_expected", stats.delta_expected)
        .set("delta_max_sampled", stats.delta_max_sampled)
        .set("delta_mean_sampled", stats.delta_mean_sampled)
        .set("samples", samples)
        .set("verified", verified);
    if let Some(w) = witness {
        r.set("uncovered", w);
    }
    Ok(r)
}

fn pcover_report(name: &str, bytes: &[u8], inst: &PCInstance, solver: &SolverArgs, extra: serde_json::Value) -> Result<Report> {
    let cfg: RepConfig = solver.config()?;
    let start = Instant::now();
    let sol = if solver.debug_verify {
        solve_partial_cover_checked(inst, &cfg)?
    } else {
        solve_partial_cover(inst, &cfg)?
    };
    let mut r = Report::new(name, Some(digest(bytes)));
    r.set("parameters", parameters(solver, extra))
        .set("answer", sol.answer)
        .set("shortcut", sol.shortcut)
        .set("cells_filled", sol.stats.cells_filled)
        .set("max_cell_size", sol.stats.max_cell_size)
        .set("stats", &sol.stats);
    if let Some(checks) = &sol.checks {
        r.set("verification", checks);
    }
    r.time("ms", ms_since(start)).time("filter_ms", sol.filter_time.as_secs_f64() * 1000.0);
    let passed = sol.checks.as_ref().is_none_or(|c| c.passed());
    r.outcome = if sol.answer.is_some() && passed { Outcome::Yes } else { Outcome::No };
    Ok(r)
}

fn bounds_cmd(k: usize, n: usize, p: Option<f64>, p_frac: Option<f64>, c: f64, shape: Option<Shape>) -> Result<Report> {
    let p = match (p, p_frac) {
        (Some(p), _) => p,
        (None, Some(f)) => f * k as f64,
        (None, None) => return Err(Error::Input("give --p or --p-frac".into())),
    };
    let start = Instant::now();
    let report = bounds(n, k, p, c)?;
    let mut r = Report::new("bounds", None);
    r.set("parameters", json!({"n": n, "k": k, "p": p, "c": c}))
        .set("base", report.base)
        .set("report", &report);
    if let Some(shape) = shape {
        let opt = optimize_base(c, shape)?;
        r.set("optimum", json!({"shape": shape, "alpha": opt.alpha, "base": opt.base}));
        if shape == Shape::Pc {
            r.set("kiob_base", kiob_base(c)?);
        }
    }
    r.time("ms", ms_since(start));
    Ok(r)
}

fn verify_cmd(family: &Path, subset: &Path, k: Option<usize>, mode: Option<RepMode>) -> Result<Report> {
    let a = read_input(family)?;
    let b = read_input(subset)?;
    let s = read_family(Cursor::new(&a))?;
    let shat = read_family(Cursor::new(&b))?;
    let k = k.unwrap_or(s.k);
    let mode = mode.unwrap_or_else(|| default_mode(&s.family));
    let start = Instant::now();
    let verdict = verify_representation(&s.family, &shat.family, k, mode)?;
    let mut both = a.clone();
    both.extend_from_slice(&b);
    let mut r = Report::new("verify", Some(digest(&both)));
    r.set("parameters", json!({"k": k, "mode": mode}))
        .set("answer", verdict.holds())
        .set("verification", verdict_json(&verdict))
        .time("ms", ms_since(start));
    r.outcome = if verdict.holds() { Outcome::Yes } else { Outcome::No };
    Ok(r)
}
