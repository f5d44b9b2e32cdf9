//! Command-line interface.

use std::path::{Path, PathBuf};
use std::time::Duration;

use abbo_bench::BenchmarkSuite;
use abbo_core::{select_algorithm, SelectionContext};
use clap::{Args, Parser, Subcommand};

use crate::error::HarnessError;
use crate::experiment::{parse_algorithms, run_experiment, Experiment};
use crate::protocol::{run_external, ExternalRun};
use crate::records::load_records;
use crate::report::{curves_csv, emit_reports, heatmap_csv, ranking_text, winning_rates};

#[derive(Debug, Parser)]
#[command(name = "optbench", version, about = "Benchmark black-box optimizers on generated suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run algorithms on a suite and write records and reports.
    Run(RunArgs),
    /// Print tables computed from an existing records file.
    Report(ReportArgs),
    /// Show which selection rule fires for a problem description.
    Explain {
        /// Comma-separated key=value pairs: d, b, w, noisy, discrete,
        /// all_discrete, categorical, arity, unbounded.
        #[arg(long)]
        ctx: String,
    },
    /// Run algorithms against an objective served by a child process.
    EvalServer(EvalServerArgs),
    /// Print the manifest of a shipped suite.
    Manifest {
        #[arg(long)]
        suite: String,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Shipped suite name or path to a manifest file.
    #[arg(long)]
    pub suite: String,
    /// Comma-separated algorithm specs.
    #[arg(long)]
    pub algs: String,
    /// Number of seeds `n` (0..n) or a range `a..b`.
    #[arg(long, default_value = "5")]
    pub seeds: String,
    #[arg(long, env = "OPTBENCH_MASTER_SEED", default_value_t = 0)]
    pub master_seed: u64,
    /// Size of the thread pool running cells.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
    /// Only run these comma-separated problem ids.
    #[arg(long)]
    pub problems: Option<String>,
    /// Store per-cell wall-clock time (makes records machine-dependent).
    #[arg(long)]
    pub record_timing: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory holding records.jsonl, or the file itself.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub curves: bool,
    #[arg(long)]
    pub heatmap: bool,
    #[arg(long)]
    pub ranking: bool,
}

#[derive(Debug, Args)]
pub struct EvalServerArgs {
    /// Shell command starting the evaluator process.
    #[arg(long)]
    pub cmd: String,
    #[arg(long, default_value = "abbo")]
    pub algs: String,
    #[arg(long, default_value_t = 100)]
    pub budget: usize,
    #[arg(long, default_value_t = 1)]
    pub num_workers: usize,
    #[arg(long, default_value = "1")]
    pub seeds: String,
    #[arg(long, env = "OPTBENCH_MASTER_SEED", default_value_t = 0)]
    pub master_seed: u64,
    /// Tell the optimizers that evaluations are noisy.
    #[arg(long)]
    pub noisy: bool,
    #[arg(long, default_value_t = 30_000)]
    pub timeout_ms: u64,
    /// Write records and reports here instead of printing the ranking only.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `n` means `0..n`; `a..b` is half-open and `a..=b` closed.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, HarnessError> {
    let bad = || HarnessError::Usage(format!("cannot parse seeds `{text}`"));
    let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad());
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = text.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        (0..num(text)?).collect()
    };
    if seeds.is_empty() {
        return Err(HarnessError::Usage(format!("seed set `{text}` is empty")));
    }
    Ok(seeds)
}

fn parse_bool(key: &str, v: &str) -> Result<bool, HarnessError> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(HarnessError::Usage(format!("`{key}` expects a boolean, got `{v}`"))),
    }
}

/// Parses `d=10,b=1000,w=1,noisy=false,...` into a selection context.
pub fn parse_context(text: &str) -> Result<SelectionContext, HarnessError> {
    let mut ctx = SelectionContext::continuous(0, 0, 1, false);
    let (mut has_d, mut has_b) = (false, false);
    for pair in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').ok_or_else(|| HarnessError::Usage(format!("expected key=value, got `{pair}`")))?;
        let (k, v) = (k.trim(), v.trim());
        let int = || v.parse::<usize>().map_err(|_| HarnessError::Usage(format!("`{k}` expects an integer, got `{v}`")));
        match k {
            "d" => {
                ctx.d = int()?;
                has_d = true;
            }
            "b" => {
                ctx.budget = int()?;
                has_b = true;
            }
            "w" => ctx.num_workers = int()?,
            "noisy" => ctx.noisy = parse_bool(k, v)?,
            "discrete" => ctx.has_discrete = parse_bool(k, v)?,
            "all_discrete" => ctx.all_discrete = parse_bool(k, v)?,
            "categorical" => ctx.has_categorical = parse_bool(k, v)?,
            "arity" => ctx.max_arity = int()?,
            "unbounded" => ctx.has_unbounded_discrete = parse_bool(k, v)?,
            _ => return Err(HarnessError::Usage(format!("unknown context key `{k}`"))),
        }
    }
    if !(has_d && has_b) {
        return Err(HarnessError::Usage("context needs at least d and b".into()));
    }
    ctx.has_discrete |= ctx.all_discrete || ctx.has_categorical || ctx.has_unbounded_discrete || ctx.max_arity > 0;
    ctx.fully_continuous = !ctx.has_discrete;
    Ok(ctx)
}

/// Shipped suite by name, otherwise a manifest file.
pub fn load_suite(name_or_path: &str) -> Result<BenchmarkSuite, HarnessError> {
    if let Some(suite) = BenchmarkSuite::by_name(name_or_path) {
        return Ok(suite);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(HarnessError::Usage(format!(
            "`{name_or_path}` is neither a suite ({}) nor a manifest file",
            abbo_bench::SUITE_NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(BenchmarkSuite::from_manifest(&text)?)
}

/// Executes a parsed command line. Returns false when some cell failed.
pub fn execute(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::Report(args) => {
            let records = load_records(&args.input)?;
            if records.is_empty() {
                return Err(HarnessError::Empty);
            }
            let all = !(args.curves || args.heatmap || args.ranking);
            let heatmap = winning_rates(&records);
            if all || args.curves {
                print!("{}", curves_csv(&records));
            }
            if all || args.heatmap {
                print!("{}", heatmap_csv(&heatmap));
            }
            if all || args.ranking {
                print!("{}", ranking_text(&heatmap));
            }
            Ok(true)
        }
        Command::Explain { ctx } => {
            let ctx = parse_context(&ctx)?;
            let (rule, spec) = select_algorithm(&ctx);
            println!("rule {rule}: {spec}");
            Ok(true)
        }
        Command::EvalServer(args) => {
            let run = ExternalRun {
                command: args.cmd,
                algorithms: parse_algorithms(&args.algs)?,
                seeds: parse_seeds(&args.seeds)?,
                budget: args.budget,
                num_workers: args.num_workers,
                noisy: args.noisy,
                master_seed: args.master_seed,
                timeout: Duration::from_millis(args.timeout_ms),
            };
            let records = run_external(&run);
            let ok = report_failures(&records);
            match args.out {
                Some(out) => {
                    emit_reports(&records, &out)?;
                }
                None => print!("{}", ranking_text(&winning_rates(&records))),
            }
            Ok(ok)
        }
        Command::Manifest { suite } => {
            println!("{}", load_suite(&suite)?.to_manifest());
            Ok(true)
        }
    }
}

fn report_failures(records: &[crate::records::ExperimentRecord]) -> bool {
    let failed: Vec<_> = records.iter().filter(|r| r.failed()).collect();
    for r in &failed {
        eprintln!(
            "failed: {} b={} w={} {} seed {}: {}",
            r.problem,
            r.budget,
            r.num_workers,
            r.algorithm,
            r.seed,
            r.failure.as_deref().unwrap_or("")
        );
    }
    failed.is_empty()
}

fn run_command(args: RunArgs) -> Result<bool, HarnessError> {
    let mut suite = load_suite(&args.suite)?;
    if let Some(filter) = &args.problems {
        let wanted: Vec<&str> = filter.split(',').map(str::trim).collect();
        if let Some(missing) = wanted.iter().find(|w| !suite.problems.iter().any(|p| p.id == **w)) {
            return Err(HarnessError::Usage(format!("suite {} has no problem `{missing}`", suite.name)));
        }
        suite.problems.retain(|p| wanted.contains(&p.id.as_str()));
    }
    let experiment = Experiment {
        suite,
        algorithms: parse_algorithms(&args.algs)?,
        seeds: parse_seeds(&args.seeds)?,
        master_seed: args.master_seed,
        record_timing: args.record_timing,
    };
    let records = match args.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Usage(format!("cannot start {n} workers: {e}")))?
            .install(|| run_experiment(&experiment))?,
        None => run_experiment(&experiment)?,
    };
    let ok = report_failures(&records);
    emit_reports(&records, &args.out)?;
    println!("{} records written to {}", records.len(), args.out.display());
    Ok(ok)
}
