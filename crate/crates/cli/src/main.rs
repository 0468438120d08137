//! `repfam` command-line tool.
//!
//! Exit codes: 0 success, 1 a decision answered "no", 2 bad input, 3 a
//! resource cap or randomized construction gave up.

mod bench;
mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use repfam::repfam::DEFAULT_C;
use repfam::separator::Shape;
use repfam::{Error, RepConfig, RepMode, Strategy};

use report::Outcome;

#[derive(Parser, Debug)]
#[command(name = "repfam", version, about = "Representative families and the solvers built on them")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Flags shared by every command that filters families.
#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Tradeoff parameter, at least 1.
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,

    /// `verified` retries separator seeds until the exhaustive check passes.
    #[arg(long, default_value = "verified")]
    strategy: Strategy,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Filter only families larger than this; defaults to the separator size.
    #[arg(long)]
    skip_threshold: Option<usize>,

    /// Check every intermediate family against brute force.
    #[arg(long)]
    debug_verify: bool,
}

impl SolverArgs {
    fn config(&self) -> Result<RepConfig, Error> {
        let mut cfg = RepConfig::default()
            .with_c(self.c)
            .with_strategy(self.strategy)
            .with_seed(self.seed)
            .with_skip_threshold(self.skip_threshold);
        if let Some(cap) = max_separator_override()? {
            cfg.build.max_sets = cap;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Separator size cap from `REPFAM_MAX_SEPARATOR`.
fn max_separator_override() -> Result<Option<usize>, Error> {
    match std::env::var("REPFAM_MAX_SEPARATOR") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Input(format!("REPFAM_MAX_SEPARATOR must be a count, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Filter a family file down to a representing subfamily.
    Repfam {
        input: PathBuf,
        /// Rank; defaults to the file header.
        #[arg(long)]
        k: Option<usize>,
        /// Defaults to `max` for weighted files and `unweighted` otherwise.
        #[arg(long)]
        mode: Option<RepMode>,
        /// Where to write the subfamily; a JSON sidecar goes next to it.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Build a separator and report its statistics.
    Separator {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = DEFAULT_C)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run the exhaustive covering check on this seed's draw.
        #[arg(long)]
        verify: bool,
        /// Random p-sets used to sample the lookup sizes.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Same as `--format json`.
        #[arg(long)]
        json: bool,
    },
    /// Fewest sets covering at least k elements; k comes from the file header.
    Pcover {
        input: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Fewest nodes whose closed neighbourhoods cover at least k nodes.
    Kds {
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Out-tree with exactly k internal nodes and t leaves at a given root.
    Kttree {
        input: PathBuf,
        #[arg(long)]
        root: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Fill every table layer instead of only those the answer needs.
        #[arg(long)]
        full_table: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Spanning out-tree with at least k internal nodes.
    Kiob {
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Lightest simple path on k vertices.
    Kpath {
        input: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        directed: bool,
        /// Count k in edges instead of vertices.
        #[arg(long)]
        edges: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Evaluate the size and lookup factors, optionally tuning the split.
    Bounds {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Set size; give this or `--p-frac`.
        #[arg(long, conflicts_with = "p_frac")]
        p: Option<f64>,
        /// Set size as a fraction of k.
        #[arg(long)]
        p_frac: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_C)]
        c: f64,
        /// Also maximize the per-unit base over the split for this shape.
        #[arg(long)]
        shape: Option<Shape>,
    },
    /// Run a generated benchmark suite: `c-sweep`, `pcover` or `empty`.
    Bench {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Values of c for the sweep.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.2, 1.447, 2.0])]
        cs: Vec<f64>,
        #[arg(long, default_value_t = 3)]
        instances: usize,
        /// Stop after this much wall time and flag the table as truncated.
        #[arg(long)]
        budget_ms: Option<u64>,
        #[arg(long)]
        debug_verify: bool,
    },
    /// Check whether SUBSET represents FAMILY.
    Verify {
        family: PathBuf,
        subset: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        mode: Option<RepMode>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Parse { .. } | Error::Io(_) => 2,
        Error::Resource { .. } | Error::Budget { .. } | Error::Construction(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut format = cli.format;
    if let Command::Separator { json: true, .. } = cli.command {
        format = Format::Json;
    }
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match commands::run(cli.command) {
        Ok(report) => {
            let outcome = report.outcome;
            let value = report.into_value();
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&value).expect("serializable") + "\n",
                Format::Text => report::to_text(&value),
            };
            // a closed pipe downstream is not our failure
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            match outcome {
                Outcome::Yes => ExitCode::SUCCESS,
                Outcome::No => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
