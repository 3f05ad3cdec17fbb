mod manifest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use disjoint_ap::bounds::{self, ReportKind};
use disjoint_ap::construction::{build_construction, ConstructionParams, DEFAULT_C};
use disjoint_ap::family::{verify_family_with, VerifyOptions};
use disjoint_ap::io::{read_family_file, write_family_file};
use disjoint_ap::refinement::{build_chain, check_certificate, RefinementCertificate, RefinementParams};
use disjoint_ap::solver::{solve_exact, ModulusOrder, Pruning, SearchConfig, DEFAULT_NODE_BUDGET};
use disjoint_ap::Error;

use manifest::ManifestBuilder;

/// Thread count override for the rayon pool.
const THREADS_ENV: &str = "DAP_THREADS";

#[derive(Parser)]
#[command(name = "dap", version, about = "Families of pairwise disjoint arithmetic progressions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the smooth-modulus construction for a given x.
    Construct(ConstructArgs),
    /// Check a family file for pairwise disjointness.
    Verify(VerifyArgs),
    /// Compute f(x) exactly for small x.
    Solve(SolveArgs),
    /// Run the refinement chain and write its certificate.
    Refine(RefineArgs),
    /// Re-check a refinement certificate against its family.
    CheckCert(CheckCertArgs),
    /// Exact counts against their L-scale predictions, as CSV.
    Counts(CountsArgs),
    /// Restrict to one squarefull part and divide it out.
    Reduce(ReduceArgs),
    /// Time pairwise verification of a large disjoint family.
    Bench(BenchArgs),
}

#[derive(clap::Args, Serialize)]
struct ConstructArgs {
    #[arg(long, value_parser = parse_count)]
    x: u64,
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    #[arg(long)]
    squarefree_only: bool,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    include_p: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the summary JSON here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(clap::Args, Serialize)]
struct VerifyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    prefilter: bool,
}

#[derive(clap::Args, Serialize)]
struct SolveArgs {
    #[arg(long, value_parser = parse_count)]
    x: u64,
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET, value_parser = parse_count)]
    budget: u64,
    #[arg(long)]
    emit_witness: Option<PathBuf>,
    #[arg(long)]
    no_density_bound: bool,
    #[arg(long)]
    no_remaining_budget: bool,
    #[arg(long)]
    no_fix_translation: bool,
    /// Process moduli smallest first.
    #[arg(long)]
    ascending: bool,
}

#[derive(clap::Args, Serialize)]
struct RefineArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Defaults to sqrt(log x / log log x).
    #[arg(long)]
    omega_cap: Option<f64>,
    /// Defaults to L(1, x).
    #[arg(long)]
    prime_floor: Option<f64>,
    /// Defaults to sqrt(log x / log log x).
    #[arg(long)]
    ratio_denom: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args, Serialize)]
struct CheckCertArgs {
    #[arg(long)]
    cert: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(clap::Args, Serialize)]
struct CountsArgs {
    /// psi, psistar, omega-tail or construction.
    #[arg(long, value_delimiter = ',', required = true)]
    kind: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_count)]
    x: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    c: Vec<f64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Serialize)]
struct ReduceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Squarefull part to keep; the most common one when absent.
    #[arg(long)]
    alpha: Option<u64>,
}

#[derive(clap::Args, Serialize)]
struct BenchArgs {
    #[arg(long, default_value_t = 20_000, value_parser = parse_count)]
    k: u64,
    /// Construction bound; grown from 10^6 until the family reaches k when absent.
    #[arg(long, value_parser = parse_count)]
    x: Option<u64>,
    #[arg(long)]
    prefilter: bool,
    #[arg(long)]
    sequential: bool,
}

/// Accepts `1000000` as well as `1e6`.
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a count: {s:?}"))?;
    if v.is_finite() && v >= 0.0 && v.fract() == 0.0 && v < 2f64.powi(63) {
        Ok(v as u64)
    } else {
        Err(format!("not a non-negative integer: {s:?}"))
    }
}

/// Failure carrying its own exit code and message.
#[derive(Debug)]
struct Exit {
    code: u8,
    message: String,
}

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Exit {}

fn exit(code: u8, message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Exit { code, message: message.into() })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<Exit>() {
        return e.code;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::NotDisjoint(_)) => 1,
        _ => 2,
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn cmd_construct(args: &ConstructArgs) -> Result<()> {
    let m = ManifestBuilder::start("construct", args);
    let params = ConstructionParams::new(args.x)
        .with_c(args.c)
        .squarefree(args.squarefree_only)
        .include_p(args.include_p);
    let (family, summary) = build_construction(&params)?;
    let mut outputs = Vec::new();
    if let Some(out) = &args.out {
        write_family_file(&family, out)?;
        outputs.push(out.as_path());
    }
    if let Some(path) = &args.summary {
        write_json(path, &summary)?;
        outputs.push(path.as_path());
    }
    m.finish(&outputs)?;
    print_json(&summary)
}

fn cmd_verify(args: &VerifyArgs) -> Result<()> {
    let family = read_family_file(&args.input)?;
    let report =
        verify_family_with(&family, VerifyOptions { prefilter: args.prefilter, parallel: true });
    match report.witness {
        None => {
            println!("ok: {} progressions, {} pairs checked", family.len(), report.pairs_checked);
            Ok(())
        }
        Some(w) => Err(exit(1, format!("not disjoint: {w}"))),
    }
}

#[derive(Serialize)]
struct SolveSummary {
    x: u64,
    k_max: usize,
    proven_optimal: bool,
    nodes: u64,
}

fn cmd_solve(args: &SolveArgs) -> Result<()> {
    let m = ManifestBuilder::start("solve", args);
    let cfg = SearchConfig {
        fix_translation: !args.no_fix_translation,
        pruning: Pruning {
            density_bound: !args.no_density_bound,
            remaining_budget: !args.no_remaining_budget,
        },
        order: if args.ascending { ModulusOrder::Ascending } else { ModulusOrder::Descending },
        ..SearchConfig::new(args.x).with_budget(args.budget)
    };
    let result = solve_exact(&cfg)?;
    if let Some(path) = &args.emit_witness {
        write_family_file(&result.witness, path)?;
        m.finish(&[path])?;
    }
    print_json(&SolveSummary {
        x: args.x,
        k_max: result.k_max,
        proven_optimal: result.proven_optimal,
        nodes: result.nodes_explored,
    })?;
    if !result.proven_optimal {
        return Err(exit(3, format!("node budget {} exhausted; k_max is a lower bound", args.budget)));
    }
    Ok(())
}

fn cmd_refine(args: &RefineArgs) -> Result<()> {
    let m = ManifestBuilder::start("refine", args).input(&args.input);
    let family = read_family_file(&args.input)?;
    let defaults = RefinementParams::for_scale(family.x_bound())?;
    let params = RefinementParams {
        x: family.x_bound(),
        omega_cap: args.omega_cap.unwrap_or(defaults.omega_cap),
        prime_floor: args.prime_floor.unwrap_or(defaults.prime_floor),
        ratio_denominator: args.ratio_denom.unwrap_or(defaults.ratio_denominator),
    };
    let cert = build_chain(&family, &params)?;
    write_json(&args.out, &cert)?;
    m.finish(&[&args.out])?;
    print_json(&serde_json::json!({
        "s0": cert.s0.len(),
        "t": cert.t,
        "primes": cert.steps.iter().map(|s| s.chosen_prime).collect::<Vec<_>>(),
        "witness_prime": cert.witness_prime,
        "divisible_count": cert.divisible_count,
    }))
}

fn cmd_check_cert(args: &CheckCertArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.cert)
        .with_context(|| format!("reading {}", args.cert.display()))?;
    let cert: RefinementCertificate = serde_json::from_str(&text)
        .map_err(|e| exit(2, format!("{}: {e}", args.cert.display())))?;
    let family = read_family_file(&args.input)?;
    let outcome = check_certificate(&cert, &family);
    print_json(&outcome)?;
    match outcome.reason {
        None => Ok(()),
        Some(reason) => Err(exit(1, format!("certificate rejected: {reason}"))),
    }
}

fn cmd_counts(args: &CountsArgs) -> Result<()> {
    let m = ManifestBuilder::start("counts", args);
    let kinds = args
        .kind
        .iter()
        .map(|k| k.parse::<ReportKind>())
        .collect::<disjoint_ap::Result<Vec<_>>>()?;
    let rows = bounds::bounds_report(&kinds, &args.x, &args.c)?;
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            bounds::write_csv(&rows, &mut w)?;
            w.flush()?;
            drop(w);
            m.finish(&[path])?;
        }
        None => bounds::write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_reduce(args: &ReduceArgs) -> Result<()> {
    let m = ManifestBuilder::start("reduce", args).input(&args.input);
    let family = read_family_file(&args.input)?;
    let reduction = match args.alpha {
        Some(alpha) => bounds::corollary_reduce(&family, alpha)?,
        None => bounds::corollary_select(&family)?
            .ok_or_else(|| exit(1, "no member has a square-free part above 1"))?,
    };
    write_family_file(&reduction.family, &args.out)?;
    m.finish(&[&args.out])?;
    print_json(&serde_json::json!({
        "alpha": reduction.alpha,
        "class": reduction.class.residue,
        "candidates": reduction.candidates,
        "count": reduction.family.len(),
        "x": reduction.family.x_bound(),
    }))
}

#[derive(Serialize)]
struct BenchSummary {
    x: u64,
    k: usize,
    pairs: u64,
    construct_seconds: f64,
    verify_seconds: f64,
    pairs_per_second: f64,
    threads: usize,
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let k = usize::try_from(args.k)?;
    let started = Instant::now();
    let mut x = args.x.unwrap_or(1_000_000);
    let family = loop {
        let (family, _) = build_construction(&ConstructionParams::new(x))?;
        if family.len() >= k || args.x.is_some() {
            break family;
        }
        log::info!("x = {x} gives {} progressions, growing", family.len());
        x = x.checked_mul(2).ok_or_else(|| anyhow!("x overflow while growing to k = {k}"))?;
    };
    if family.len() < k {
        return Err(exit(2, format!("construction at x = {x} has only {} progressions", family.len())));
    }
    let family = family.truncated(k);
    let construct_seconds = started.elapsed().as_secs_f64();

    let t0 = Instant::now();
    let report = verify_family_with(
        &family,
        VerifyOptions { prefilter: args.prefilter, parallel: !args.sequential },
    );
    let verify_seconds = t0.elapsed().as_secs_f64();
    if let Some(w) = report.witness {
        return Err(exit(1, format!("not disjoint: {w}")));
    }
    let pairs = (k as u64) * (k as u64).saturating_sub(1) / 2;
    print_json(&BenchSummary {
        x,
        k,
        pairs,
        construct_seconds,
        verify_seconds,
        pairs_per_second: pairs as f64 / verify_seconds.max(1e-9),
        threads: rayon::current_num_threads(),
    })
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| exit(2, format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    match &cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Refine(a) => cmd_refine(a),
        Command::CheckCert(a) => cmd_check_cert(a),
        Command::Counts(a) => cmd_counts(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
