//! Command-line front end.
//!
//! Exit codes: `0` success, `1` error (bad input, I/O, numerical failure),
//! `2` attainment assumption violated, `3` evaluation cap reached.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::bounds;
use crate::error::{Error, Result};
use crate::problem::ProblemInstance;
use crate::problems::io::{self as pio, ProblemFile};
use crate::problems::lcurve::{self, LCurve};
use crate::problems::GeneratorSpec;
use crate::solvers::{
    btd_solve, grid_oracle, log_grid, trtlsg_solve, SolveReport, SolveStatus, SolverConfig, StoppingMode,
    TraceEvent,
};
use crate::trs;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ASSUMPTION: i32 = 2;
pub const EXIT_CAP: i32 = 3;

/// Environment variable with the worker count for `bench`.
pub const THREADS_ENV: &str = "RTLS_BENCH_THREADS";

const DEFAULT_RHO: f64 = 0.5;
const GRID_ORACLE_POINTS: usize = 2000;

#[derive(Debug, Parser)]
#[command(name = "rtls", version, about = "Global solver for Tikhonov-regularized total least squares")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and print the report.
    Solve(SolveArgs),
    /// Compare the closed-form search-interval bounds, one CSV row per instance.
    Bounds(BoundsArgs),
    /// Run BTD and TRTLSG over generated instances and report mean cost per setting.
    Bench(BenchArgs),
    /// Tabulate G(α), G′(α), λ(α) over a log-spaced grid.
    Curve(CurveArgs),
    /// Write a generated instance in the problem file format.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoChoice {
    /// Branch and bound with certified gap.
    Btd,
    /// Bisection on the sign of G′ (no certificate).
    Trtlsg,
    /// Dense grid scan (reference only).
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Human,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Global tolerance ε on the objective.
    #[arg(long = "eps", default_value_t = 1e-6)]
    pub eps: f64,
    /// Offset of the trivial lower end 1 + ε₁ (TRTLSG with --original-bounds).
    #[arg(long = "eps1", default_value_t = 0.1)]
    pub eps1: f64,
    /// Interval-width tolerance ε₂ of TRTLSG.
    #[arg(long = "eps2", default_value_t = 1e-6)]
    pub eps2: f64,
    /// Start TRTLSG from [1 + ε₁, Beck bound] instead of the sharper interval.
    #[arg(long)]
    pub original_bounds: bool,
    /// Cap on G evaluations.
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iter: usize,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            epsilon: self.eps,
            epsilon1: self.eps1,
            epsilon2: self.eps2,
            max_iterations: self.max_iter,
            use_improved_bounds: !self.original_bounds,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RhoArgs {
    /// Regularization weight ρ [default: the file's value, or 0.5 for generated instances].
    #[arg(long, conflicts_with = "rho_lcurve")]
    pub rho: Option<f64>,
    /// Pick ρ by the L-curve over GRID: `lo:hi:n` (log-spaced) or a comma list.
    #[arg(long, value_name = "GRID")]
    pub rho_lcurve: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Problem file (`%RTLS-PROBLEM` text format).
    #[arg(long, conflicts_with = "gen")]
    pub input: Option<PathBuf>,
    /// Generator spec: `shaw:N` or `blur:N:BAND`.
    #[arg(long, value_name = "SPEC")]
    pub gen: Option<String>,
    /// Noise level σ for generated instances.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Seed for generated instances; the first entry of a list is used.
    #[arg(long, value_name = "LIST", default_value = "0")]
    pub seeds: String,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub rho: RhoArgs,
    #[arg(long, value_enum, default_value_t = AlgoChoice::Btd)]
    pub algo: AlgoChoice,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write x* to FILE, one value per line.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
    /// Include the solver trace in JSON output.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    /// Problem files; may be repeated.
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// Generator specs; may be repeated or comma separated.
    #[arg(long, value_name = "SPEC", value_delimiter = ',')]
    pub gen: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, value_name = "LIST", default_value = "0")]
    pub seeds: String,
    /// ρ for generated instances; overrides the file value when given.
    #[arg(long)]
    pub rho: Option<f64>,
    /// ε used in the degenerate Aᵀb = 0 lower bound.
    #[arg(long = "eps", default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Print `NA` instead of timings.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Generator specs, one setting each; may be repeated or comma separated.
    #[arg(long, value_name = "SPEC", value_delimiter = ',', required = true)]
    pub gen: Vec<String>,
    /// Noise levels, one setting each.
    #[arg(long, value_name = "S", value_delimiter = ',', default_value = "0.05")]
    pub sigma: Vec<f64>,
    /// Instance seeds: comma list, `a..b` or `a..=b`.
    #[arg(long, value_name = "LIST", default_value = "1..=10")]
    pub seeds: String,
    /// Timed repetitions of each solve; times are averaged.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[command(flatten)]
    pub rho: RhoArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Print `NA` instead of timings (byte-identical reruns).
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Lower end of the α range [default: closed-form lower bound].
    #[arg(long)]
    pub alpha_min: Option<f64>,
    /// Upper end of the α range [default: closed-form upper bound].
    #[arg(long)]
    pub alpha_max: Option<f64>,
    /// Number of grid points.
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    /// Add the innermost BTD node containing each α (node_lo, node_hi, node_lb).
    #[arg(long)]
    pub overlay: bool,
    #[arg(long = "eps", default_value_t = 1e-6)]
    pub eps: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Generator spec: `shaw:N` or `blur:N:BAND`.
    #[arg(long, value_name = "SPEC")]
    pub gen: String,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, value_name = "LIST", default_value = "0")]
    pub seeds: String,
    #[arg(long, default_value_t = DEFAULT_RHO)]
    pub rho: f64,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Curve(a) => cmd_curve(&a),
        Command::Gen(a) => cmd_gen(&a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code_for(&e)
    })
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::AssumptionViolated { .. } => EXIT_ASSUMPTION,
        _ => EXIT_ERROR,
    }
}

/// Seeds from `1,2,5`, `0..10` or `1..=10`.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::InvalidArgument(format!("invalid seed list `{s}`"));
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| bad());
    let s = s.trim();
    let seeds = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

/// ρ grid from `lo:hi:n` (log-spaced) or a comma list.
pub fn parse_rho_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("invalid rho grid `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi > lo && n >= 1) {
            return Err(bad());
        }
        return Ok(lcurve::default_rho_grid(lo, hi, n));
    }
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn load_input(input: &InputArgs) -> Result<(ProblemFile, String)> {
    match (&input.input, &input.gen) {
        (Some(path), None) => Ok((pio::read_problem(path)?, path.display().to_string())),
        (None, Some(spec)) => {
            let spec: GeneratorSpec = spec.parse()?;
            let seed = parse_seeds(&input.seeds)?[0];
            let g = spec.generate(input.sigma, seed, DEFAULT_RHO)?;
            Ok((ProblemFile::from(g), spec.to_string()))
        }
        _ => Err(Error::InvalidArgument("exactly one of --input or --gen is required".into())),
    }
}

fn resolve_rho(
    p: ProblemInstance,
    rho: &RhoArgs,
    config: &SolverConfig,
) -> Result<(ProblemInstance, Option<LCurve>)> {
    if let Some(grid) = &rho.rho_lcurve {
        let grid = parse_rho_grid(grid)?;
        let lc = lcurve::lcurve_rho(&p, &grid, config)?;
        log::info!("L-curve selected rho = {}", lc.rho);
        Ok((p.with_rho(lc.rho)?, Some(lc)))
    } else if let Some(r) = rho.rho {
        Ok((p.with_rho(r)?, None))
    } else {
        Ok((p, None))
    }
}

fn run_algorithm(p: &ProblemInstance, algo: AlgoChoice, config: &SolverConfig) -> Result<SolveReport> {
    match algo {
        AlgoChoice::Btd => btd_solve(p, config),
        AlgoChoice::Trtlsg => {
            let cfg = SolverConfig { stopping_mode: StoppingMode::IntervalWidth, ..*config };
            trtlsg_solve(p, &cfg, None)
        }
        AlgoChoice::Grid => grid_oracle(p, GRID_ORACLE_POINTS, None, config.trs_tol),
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32> {
    let config = args.solver.config();
    config.validate()?;
    let (file, source) = load_input(&args.input)?;
    let (p, lc) = resolve_rho(file.instance, &args.rho, &config)?;
    let report = run_algorithm(&p, args.algo, &config)?;
    if report.lower_bound.is_none() {
        eprintln!(
            "warning: {} provides no global certificate; the result may be a local minimizer",
            report.algorithm
        );
    }

    let text = match args.format {
        OutputFormat::Human => solve_human(&source, &p, &report),
        OutputFormat::Json => {
            let mut v = solve_json(&source, &p, &report);
            if args.trace {
                v["trace"] = serde_json::to_value(&report.trace).expect("trace serializes");
            }
            if let Some(lc) = &lc {
                v["lcurve"] = serde_json::to_value(lc).expect("curve serializes");
            }
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
        OutputFormat::Csv => {
            let mut t = Table::new(&[
                "source",
                "algorithm",
                "status",
                "rho",
                "alpha_star",
                "objective",
                "lower_bound",
                "certified_gap",
                "iterations",
                "time_s",
            ]);
            t.push(vec![
                Cell::Str(source.clone()),
                Cell::Str(report.algorithm.to_string()),
                Cell::Str(status_name(report.status).into()),
                Cell::Num(p.rho()),
                Cell::Num(report.alpha_star),
                Cell::Num(report.objective),
                Cell::opt(report.lower_bound),
                Cell::opt(report.certified_gap),
                Cell::Int(report.iterations as u64),
                Cell::Num(report.wall_time.as_secs_f64()),
            ]);
            t.csv()
        }
    };
    write_output(None, &text)?;
    if let Some(path) = &args.out {
        let mut s = String::new();
        for v in report.x_star.iter() {
            s.push_str(&format!("{v:.16e}\n"));
        }
        fs::write(path, s)?;
    }
    Ok(match report.status {
        SolveStatus::IterationCap => EXIT_CAP,
        _ => EXIT_OK,
    })
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Exact => "exact",
        SolveStatus::Converged => "converged",
        SolveStatus::IterationCap => "iteration_cap",
    }
}

fn solve_human(source: &str, p: &ProblemInstance, r: &SolveReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "instance        {source} (m = {}, n = {}, k = {}, rho = {})\n",
        p.m(),
        p.n(),
        p.k(),
        p.rho()
    ));
    s.push_str(&format!("algorithm       {}\n", r.algorithm));
    s.push_str(&format!("status          {}\n", status_name(r.status)));
    s.push_str(&format!(
        "search interval [{}, {}]\n",
        fmt_num(r.search_interval.0),
        fmt_num(r.search_interval.1)
    ));
    s.push_str(&format!("alpha*          {}\n", fmt_num(r.alpha_star)));
    s.push_str(&format!("objective       {}\n", fmt_num(r.objective)));
    match (r.lower_bound, r.certified_gap) {
        (Some(lb), Some(gap)) => {
            s.push_str(&format!("lower bound     {}\n", fmt_num(lb)));
            s.push_str(&format!("certified gap   {}\n", fmt_num(gap)));
        }
        _ => s.push_str("certified gap   none (no certificate)\n"),
    }
    s.push_str(&format!("evaluations     {}\n", r.iterations));
    s.push_str(&format!("wall time       {:.6} s\n", r.wall_time.as_secs_f64()));
    let shown = r.x_star.len().min(8);
    let head: Vec<String> = r.x_star.iter().take(shown).map(|v| format!("{v:.6}")).collect();
    let ellipsis = if r.x_star.len() > shown { ", ..." } else { "" };
    s.push_str(&format!("x*              [{}{}] (norm {:.6})\n", head.join(", "), ellipsis, r.x_star.norm()));
    s
}

fn solve_json(source: &str, p: &ProblemInstance, r: &SolveReport) -> serde_json::Value {
    serde_json::json!({
        "source": source,
        "m": p.m(),
        "n": p.n(),
        "k": p.k(),
        "rho": p.rho(),
        "algorithm": r.algorithm,
        "status": r.status,
        "alpha_star": r.alpha_star,
        "objective": r.objective,
        "lower_bound": r.lower_bound,
        "certified_gap": r.certified_gap,
        "iterations": r.iterations,
        "time_s": r.wall_time.as_secs_f64(),
        "search_interval": [r.search_interval.0, r.search_interval.1],
        "bounds": r.bound_report,
        "x_star": r.x_star.as_slice(),
    })
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<i32> {
    let seeds = parse_seeds(&args.seeds)?;
    let mut instances: Vec<(String, ProblemInstance)> = Vec::new();
    for path in &args.input {
        let mut p = pio::read_problem(path)?.instance;
        if let Some(r) = args.rho {
            p = p.with_rho(r)?;
        }
        instances.push((path.display().to_string(), p));
    }
    for spec in &args.gen {
        let spec: GeneratorSpec = spec.parse()?;
        let g = spec.generate(args.sigma, seeds[0], args.rho.unwrap_or(DEFAULT_RHO))?;
        instances.push((spec.to_string(), g.instance));
    }

    let mut table = Table::new(&[
        "instance",
        "n",
        "alpha_min_time_s",
        "alpha_min",
        "beck_time_s",
        "alpha_max_beck",
        "new_time_s",
        "alpha_max_new",
        "status",
    ]);
    let mut code = EXIT_OK;
    let time = |d: Duration| if args.no_timing { Cell::Na } else { Cell::Num(d.as_secs_f64()) };
    for (name, p) in &instances {
        let t0 = Instant::now();
        let lower = bounds::alpha_lower(p, args.eps);
        let t_lower = t0.elapsed();
        let t0 = Instant::now();
        let beck = bounds::alpha_upper_beck(p);
        let t_beck = t0.elapsed();
        let t0 = Instant::now();
        let new = bounds::alpha_upper_new(p);
        let t_new = t0.elapsed();

        let mut status = "ok".to_string();
        let mut cell = |r: &Result<f64>| match r {
            Ok(v) => Cell::Num(*v),
            Err(e) => {
                let c = exit_code_for(e);
                code = code.max(c);
                status = match e {
                    Error::AssumptionViolated { .. } => "assumption_failed".into(),
                    other => format!("error: {other}"),
                };
                log::warn!("{name}: {e}");
                Cell::Na
            }
        };
        let lower_cell = cell(&lower.map(|l| l.alpha_min));
        let beck_cell = cell(&beck);
        let new_cell = cell(&new);
        table.push(vec![
            Cell::Str(name.clone()),
            Cell::Int(p.n() as u64),
            time(t_lower),
            lower_cell,
            time(t_beck),
            beck_cell,
            time(t_new),
            new_cell,
            Cell::Str(status),
        ]);
    }
    write_output(args.out.as_ref(), &table.render(args.format))?;
    Ok(code)
}

/// Outcome of one (setting, seed) cell of a benchmark.
#[derive(Debug, Clone)]
struct BenchCell {
    btd_iterations: usize,
    btd_time: f64,
    trtlsg_iterations: usize,
    trtlsg_time: f64,
    /// TRTLSG stopped at a value worse than BTD's by more than ε.
    trtlsg_local: bool,
}

fn bench_cell(
    spec: GeneratorSpec,
    sigma: f64,
    seed: u64,
    args: &BenchArgs,
    config: &SolverConfig,
) -> std::result::Result<BenchCell, i32> {
    let fail = |e: Error| {
        log::warn!("{spec} sigma={sigma} seed={seed}: {e}");
        exit_code_for(&e)
    };
    let g = spec.generate(sigma, seed, DEFAULT_RHO).map_err(fail)?;
    let (p, _) = resolve_rho(g.instance, &args.rho, config).map_err(fail)?;

    let reps = args.reps.max(1);
    let mut btd = None;
    let mut btd_time = 0.0;
    for _ in 0..reps {
        let r = btd_solve(&p, config).map_err(fail)?;
        btd_time += r.wall_time.as_secs_f64();
        btd = Some(r);
    }
    let btd = btd.expect("reps >= 1");
    if btd.status == SolveStatus::IterationCap {
        log::warn!("{spec} sigma={sigma} seed={seed}: BTD hit the evaluation cap");
        return Err(EXIT_CAP);
    }

    let tcfg = SolverConfig { stopping_mode: StoppingMode::CertifiedGap, ..*config };
    let mut trt = None;
    let mut trt_time = 0.0;
    for _ in 0..reps {
        let r = trtlsg_solve(&p, &tcfg, btd.lower_bound).map_err(fail)?;
        trt_time += r.wall_time.as_secs_f64();
        trt = Some(r);
    }
    let trt = trt.expect("reps >= 1");
    if trt.status == SolveStatus::IterationCap {
        log::warn!("{spec} sigma={sigma} seed={seed}: TRTLSG hit the evaluation cap");
        return Err(EXIT_CAP);
    }
    Ok(BenchCell {
        btd_iterations: btd.iterations,
        btd_time: btd_time / reps as f64,
        trtlsg_iterations: trt.iterations,
        trtlsg_time: trt_time / reps as f64,
        trtlsg_local: trt.objective > btd.objective + config.epsilon,
    })
}

fn bench_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))
        })?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::InvalidArgument(format!("cannot start thread pool: {e}")))
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    if args.reps == 0 {
        return Err(Error::InvalidArgument("--reps must be at least 1".into()));
    }
    let config = args.solver.config();
    config.validate()?;
    let seeds = parse_seeds(&args.seeds)?;
    let specs = args.gen.iter().map(|s| s.parse::<GeneratorSpec>()).collect::<Result<Vec<_>>>()?;
    for &s in &args.sigma {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma must be non-negative, got {s}")));
        }
    }

    let mut settings: Vec<(usize, GeneratorSpec, f64)> = Vec::new();
    for spec in &specs {
        for &sigma in &args.sigma {
            settings.push((settings.len(), *spec, sigma));
        }
    }
    let cells: Vec<(usize, u64)> =
        settings.iter().flat_map(|(i, _, _)| seeds.iter().map(move |&s| (*i, s))).collect();

    let pool = bench_pool()?;
    let mut results: Vec<(usize, u64, std::result::Result<BenchCell, i32>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, seed)| {
                let (_, spec, sigma) = settings[i];
                (i, seed, bench_cell(spec, sigma, seed, args, &config))
            })
            .collect()
    });
    results.sort_by_key(|(i, seed, _)| (*i, *seed));

    let mut table = Table::new(&[
        "problem",
        "n",
        "sigma",
        "instances",
        "failures",
        "btd_mean_iter",
        "btd_max_iter",
        "btd_mean_time_s",
        "trtlsg_mean_iter",
        "trtlsg_max_iter",
        "trtlsg_mean_time_s",
        "trtlsg_local",
    ]);
    let mut code = EXIT_OK;
    let mut order: Vec<&(usize, GeneratorSpec, f64)> = settings.iter().collect();
    order.sort_by(|a, b| {
        a.1.to_string().cmp(&b.1.to_string()).then(a.1.n().cmp(&b.1.n())).then(a.2.total_cmp(&b.2))
    });
    for &(idx, spec, sigma) in order {
        let ok: Vec<&BenchCell> =
            results.iter().filter(|(i, _, _)| *i == idx).filter_map(|(_, _, r)| r.as_ref().ok()).collect();
        let failures = results
            .iter()
            .filter(|(i, _, r)| *i == idx && r.is_err())
            .inspect(|(_, _, r)| code = code.max(*r.as_ref().unwrap_err()))
            .count();
        let n_ok = ok.len();
        let mean = |f: &dyn Fn(&BenchCell) -> f64| {
            if n_ok == 0 {
                Cell::Na
            } else {
                Cell::Num(ok.iter().map(|c| f(c)).sum::<f64>() / n_ok as f64)
            }
        };
        let max = |f: &dyn Fn(&BenchCell) -> usize| {
            ok.iter().map(|c| f(c)).max().map_or(Cell::Na, |v| Cell::Int(v as u64))
        };
        let timed = |c: Cell| if args.no_timing { Cell::Na } else { c };
        table.push(vec![
            Cell::Str(spec.to_string()),
            Cell::Int(spec.n() as u64),
            Cell::Num(sigma),
            Cell::Int(n_ok as u64),
            Cell::Int(failures as u64),
            mean(&|c| c.btd_iterations as f64),
            max(&|c| c.btd_iterations),
            timed(mean(&|c| c.btd_time)),
            mean(&|c| c.trtlsg_iterations as f64),
            max(&|c| c.trtlsg_iterations),
            timed(mean(&|c| c.trtlsg_time)),
            Cell::Int(ok.iter().filter(|c| c.trtlsg_local).count() as u64),
        ]);
    }
    write_output(args.out.as_ref(), &table.render(args.format))?;
    Ok(code)
}

pub fn cmd_curve(args: &CurveArgs) -> Result<i32> {
    if args.points == 0 {
        return Err(Error::InvalidArgument("--points must be at least 1".into()));
    }
    let (file, _) = load_input(&args.input)?;
    let p = match args.rho {
        Some(r) => file.instance.with_rho(r)?,
        None => file.instance,
    };
    let needs_bounds = args.alpha_min.is_none() || args.alpha_max.is_none();
    let report = if needs_bounds { Some(bounds::bound_report(&p, args.eps)?) } else { None };
    if let Some(r) = &report {
        if !r.assumption_holds && args.alpha_max.is_none() {
            return Err(Error::AssumptionViolated {
                l1: r.l1.unwrap_or(f64::NAN),
                l2: r.l2.unwrap_or(f64::NAN),
            });
        }
    }
    let lo = args.alpha_min.unwrap_or_else(|| report.as_ref().unwrap().alpha_min);
    let hi = args.alpha_max.unwrap_or_else(|| report.as_ref().unwrap().alpha_max);
    if !(lo >= 1.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "alpha range [{lo}, {hi}] must satisfy 1 <= lo <= hi < inf"
        )));
    }
    let grid = if lo == hi { vec![lo] } else { log_grid(lo, hi, args.points) };

    let nodes: Vec<(f64, f64, f64)> = if args.overlay {
        let r = btd_solve(&p, &SolverConfig { epsilon: args.eps, ..SolverConfig::default() })?;
        r.trace
            .iter()
            .filter_map(|e| match *e {
                TraceEvent::NodeCreated { alpha_lo, alpha_hi, lb, .. } => Some((alpha_lo, alpha_hi, lb)),
                _ => None,
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut header = vec!["alpha", "g", "g_deriv", "lambda", "hard_case"];
    if args.overlay {
        header.extend(["node_lo", "node_hi", "node_lb"]);
    }
    let mut table = Table::new(&header);
    for &a in &grid {
        let e = trs::eval_g(&p, a, trs::DEFAULT_TOL)?;
        let mut row = vec![
            Cell::Num(e.alpha),
            Cell::Num(e.g_value),
            Cell::opt(e.g_deriv),
            Cell::Num(e.lambda),
            Cell::Bool(e.hard_case),
        ];
        if args.overlay {
            let inner = nodes
                .iter()
                .filter(|(l, h, _)| *l <= a && a <= *h)
                .min_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)));
            match inner {
                Some(&(l, h, lb)) => row.extend([Cell::Num(l), Cell::Num(h), Cell::Num(lb)]),
                None => row.extend([Cell::Na, Cell::Na, Cell::Na]),
            }
        }
        table.push(row);
    }
    write_output(args.out.as_ref(), &table.render(args.format))?;
    Ok(EXIT_OK)
}

pub fn cmd_gen(args: &GenArgs) -> Result<i32> {
    let spec: GeneratorSpec = args.gen.parse()?;
    let seed = parse_seeds(&args.seeds)?[0];
    let g = spec.generate(args.sigma, seed, args.rho)?;
    write_output(args.out.as_ref(), &pio::to_string(&ProblemFile::from(g)))?;
    Ok(EXIT_OK)
}

/// Table cell; `Na` prints as `NA` in CSV and `null` in JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Str(String),
    Bool(bool),
    Na,
}

impl Cell {
    fn opt(v: Option<f64>) -> Self {
        v.map_or(Cell::Na, Cell::Num)
    }

    fn text(&self) -> String {
        match self {
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Str(s) => s.clone(),
            Cell::Bool(b) => u8::from(*b).to_string(),
            Cell::Na => "NA".into(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(v) if v.is_finite() => serde_json::json!(v),
            Cell::Num(_) | Cell::Na => serde_json::Value::Null,
            Cell::Int(v) => serde_json::json!(v),
            Cell::Str(s) => serde_json::json!(s),
            Cell::Bool(b) => serde_json::json!(b),
        }
    }
}

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e15)`.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Fixed-header table rendered as CSV, JSON records, or aligned text.
#[derive(Debug, Clone)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.csv(),
            OutputFormat::Json => self.json(),
            OutputFormat::Human => self.human(),
        }
    }

    pub fn csv(&self) -> String {
        let quote = |s: String| {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s
            }
        };
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| quote(c.text())).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn json(&self) -> String {
        let records: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let map = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(h, c)| (h.clone(), c.json()))
                    .collect::<serde_json::Map<_, _>>();
                serde_json::Value::Object(map)
            })
            .collect();
        serde_json::to_string_pretty(&records).expect("json") + "\n"
    }

    pub fn human(&self) -> String {
        let texts: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
        let widths: Vec<usize> = (0..self.header.len())
            .map(|j| texts.iter().map(|r| r[j].len()).chain([self.header[j].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.header);
        for r in &texts {
            out.push_str(&line(r));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds() {
        assert_eq!(parse_seeds("3").unwrap(), vec![3]);
        assert_eq!(parse_seeds("1,4, 9").unwrap(), vec![1, 4, 9]);
        assert_eq!(parse_seeds("0..3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("1..=3").unwrap(), vec![1, 2, 3]);
        assert!(parse_seeds("5..5").is_err());
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn rho_grids() {
        assert_eq!(parse_rho_grid("0.5").unwrap(), vec![0.5]);
        assert_eq!(parse_rho_grid("0.1,1").unwrap(), vec![0.1, 1.0]);
        let g = parse_rho_grid("0.01:100:5").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[2] - 1.0).abs() < 1e-12);
        assert!(parse_rho_grid("1:0.1:3").is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0634), "0.0634");
        assert_eq!(fmt_num(1e-7), "1e-7");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(3355.5794), "3355.5794");
        assert_eq!(fmt_num(2e20), "2e20");
    }

    #[test]
    fn table_rendering() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![Cell::Str("x,y".into()), Cell::Na]);
        t.push(vec![Cell::Int(3), Cell::Num(0.5)]);
        assert_eq!(t.csv(), "a,b\n\"x,y\",NA\n3,0.5\n");
        let v: serde_json::Value = serde_json::from_str(&t.json()).unwrap();
        assert_eq!(v[0]["b"], serde_json::Value::Null);
        assert_eq!(v[1]["b"], 0.5);
        assert_eq!(Table::new(&["n"]).csv(), "n\n");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
