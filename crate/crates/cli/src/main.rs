//! `hlab`: run verification suites and write their reports.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for
//! configuration or usage errors, 3 for internal errors.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hlab_core::suite::{
    emit_series, parse_complex, run_suite, GridFile, GridMember, GridSpec, Report, RunConfig,
    SuiteId,
};
use hlab_core::tolerances::Tolerances;
use hlab_core::Error;
use num_complex::Complex64;

/// Directory for reports when `--out` is not given.
const OUT_DIR_ENV: &str = "HLAB_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "hlab",
    version,
    about = "Numerical checks for the CR Yamabe bubbles on the Heisenberg group"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Group law, Korányi norm and ball volume growth.
    VerifyGroup(RunArgs),
    /// Commutation rules of the Z_α, Z_ᾱ, ∂_t frame on the expression corpus.
    VerifyCommutators(RunArgs),
    /// Symbolic jets against finite differences.
    VerifyJets(RunArgs),
    /// Bubble residuals, amplitude, symmetries, decay and lower bounds.
    VerifyBubble(RunArgs),
    /// The divergence identity for M and the PDE gate.
    VerifyIdentity(RunArgs),
    /// Pointwise relations and inequalities for the tensors of f.
    VerifyInequalities(RunArgs),
    /// Bochner bound, the ∂_t identity and gradient estimates.
    VerifyAppendix(RunArgs),
    /// Monte Carlo integrals: divergence theorem, cutoffs, weighted estimate.
    VerifyIntegrals(RunArgs),
    /// Euclidean bubbles of the Yamabe equation on ℝⁿ.
    VerifyEuclidean(RunArgs),
    /// Every suite above, in order.
    All(RunArgs),
    /// Print one plot series of a saved report as two columns.
    EmitSeries(SeriesArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Dimensions, e.g. `--n 1,2`.
    #[arg(long = "n", value_delimiter = ',')]
    n: Vec<usize>,
    /// Bubble parameter λ of a single family member, e.g. `0.3+1.2i`.
    #[arg(long, conflicts_with = "grid", allow_hyphen_values = true)]
    lambda: Option<String>,
    /// Bubble parameter μ, one complex number per dimension.
    #[arg(
        long,
        value_delimiter = ',',
        requires = "lambda",
        allow_hyphen_values = true
    )]
    mu: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Radii for the decay, lower-bound and gradient checks.
    #[arg(long, value_delimiter = ',')]
    radii: Vec<f64>,
    /// Tolerance override `check=value`; repeatable. The check may carry a
    /// qualifier, as in `bochner[n=1,nu=1]=1e-2`.
    #[arg(long = "tol")]
    tol: Vec<String>,
    /// `default`, or a TOML file with bubble members and run settings.
    #[arg(long)]
    grid: Option<String>,
    /// Number of members in the default grid.
    #[arg(long, default_value_t = 50)]
    grid_size: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file. Defaults to `$HLAB_OUT_DIR/<suite>.<format>` when that
    /// variable is set, and to standard output otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the built-in test functions with this expression.
    #[arg(long, allow_hyphen_values = true)]
    expr: Option<String>,
    /// Record wall time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct SeriesArgs {
    /// A JSON report written by one of the suites.
    #[arg(long)]
    report: PathBuf,
    /// Series id, e.g. `decay-n1`.
    #[arg(long)]
    series: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn build_config(suite: SuiteId, args: &RunArgs) -> Result<RunConfig, Error> {
    let file = match args.grid.as_deref() {
        None | Some("default") => None,
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read grid file {path}: {e}")))?;
            Some(GridFile::parse(&text)?)
        }
    };
    let mut cfg = RunConfig::new(suite);
    cfg.dims = args.n.clone();
    cfg.grid = GridSpec::Default {
        count: args.grid_size,
    };
    cfg.expr = args.expr.clone();
    cfg.timing = args.timing;
    if let Some(f) = &file {
        cfg.seed = f.seed.unwrap_or(0);
        cfg.samples = f.samples;
        cfg.radii = f.radii.clone();
        if !f.members.is_empty() {
            cfg.grid = GridSpec::Members {
                members: f.members.clone(),
            };
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.samples.is_some() {
        cfg.samples = args.samples;
    }
    if !args.radii.is_empty() {
        cfg.radii = Some(args.radii.clone());
    }
    if let Some(lambda) = &args.lambda {
        cfg.grid = GridSpec::Members {
            members: explicit_members(lambda, &args.mu, &args.n)?,
        };
    }
    let mut tol = Tolerances::default();
    for o in &args.tol {
        tol.apply_override(o)?;
    }
    cfg.tolerances = tol;
    Ok(cfg)
}

/// Members for `--lambda`/`--mu`: one per requested dimension, or a single
/// member whose dimension is the length of `μ`.
fn explicit_members(lambda: &str, mu: &[String], dims: &[usize]) -> Result<Vec<GridMember>, Error> {
    let lambda = parse_complex(lambda)?;
    let mu = mu
        .iter()
        .map(|m| parse_complex(m))
        .collect::<Result<Vec<_>, _>>()?;
    let dims = match (dims.is_empty(), mu.is_empty()) {
        (false, _) => dims.to_vec(),
        (true, false) => vec![mu.len()],
        (true, true) => vec![1],
    };
    dims.iter()
        .map(|&n| {
            let mu = if mu.is_empty() {
                vec![Complex64::new(0.0, 0.0); n]
            } else if mu.len() == n {
                mu.clone()
            } else {
                return Err(Error::Config(format!(
                    "--mu has {} entries but n = {n}",
                    mu.len()
                )));
            };
            Ok(GridMember { n, lambda, mu })
        })
        .collect()
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)
                    .map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
            }
            fs::write(p, text)
                .map_err(|e| Error::Config(format!("cannot write {}: {e}", p.display())))
        }
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Config(format!("cannot write to stdout: {e}"))),
    }
}

fn summarize(report: &Report) {
    let mut err = io::stderr().lock();
    for c in report.checks.iter().filter(|c| !c.pass) {
        let value = c.value.map_or("none".to_string(), |v| format!("{v:e}"));
        let _ = writeln!(err, "FAIL {} value={value} tol={:e}", c.id, c.tolerance);
        if let Some(note) = &c.note {
            let _ = writeln!(err, "     {note}");
        }
    }
    let s = report.summary;
    let _ = writeln!(
        err,
        "{}: {} checks, {} passed, {} failed, {} skipped",
        report.suite, s.checks, s.passed, s.failed, s.skipped
    );
}

fn run(suite: SuiteId, args: &RunArgs) -> Result<bool, Error> {
    let cfg = build_config(suite, args)?;
    let report = run_suite(&cfg)?;
    let (text, ext) = match args.format {
        Format::Json => (report.to_json(), "json"),
        Format::Csv => (report.to_csv(), "csv"),
    };
    let out = args.out.clone().or_else(|| {
        std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{suite}.{ext}")))
    });
    write_output(out.as_deref(), &text)?;
    summarize(&report);
    Ok(report.all_passed())
}

fn series(args: &SeriesArgs) -> Result<bool, Error> {
    let text = fs::read_to_string(&args.report)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", args.report.display())))?;
    let report = Report::from_json(&text)?;
    write_output(args.out.as_deref(), &emit_series(&report, &args.series)?)?;
    Ok(true)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Parse { .. }
        | Error::UnknownSeries(_)
        | Error::Inadmissible { .. }
        | Error::InvalidDimension(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = std::panic::catch_unwind(|| match &cli.command {
        Command::VerifyGroup(a) => run(SuiteId::VerifyGroup, a),
        Command::VerifyCommutators(a) => run(SuiteId::VerifyCommutators, a),
        Command::VerifyJets(a) => run(SuiteId::VerifyJets, a),
        Command::VerifyBubble(a) => run(SuiteId::VerifyBubble, a),
        Command::VerifyIdentity(a) => run(SuiteId::VerifyIdentity, a),
        Command::VerifyInequalities(a) => run(SuiteId::VerifyInequalities, a),
        Command::VerifyAppendix(a) => run(SuiteId::VerifyAppendix, a),
        Command::VerifyIntegrals(a) => run(SuiteId::VerifyIntegrals, a),
        Command::VerifyEuclidean(a) => run(SuiteId::VerifyEuclidean, a),
        Command::All(a) => run(SuiteId::All, a),
        Command::EmitSeries(a) => series(a),
    });
    match outcome {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => {
            eprintln!("internal error");
            ExitCode::from(3)
        }
    }
}
