use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ve_infer::analysis::{env_seed, parse_request, run_analysis, McmcOverrides, Method};
use ve_infer::full_bayes::{elicit_priors, prior_mean_ve, GammaPriorPair, VarianceNSource, DEFAULT_SEED};
use ve_infer::model::{Efficacy, RatePair};
use ve_infer::moments::MomentMode;
use ve_infer::reproduce::reproduce;
use ve_infer::simulate::simulate_trial;
use ve_infer::validation::{default_moment_grid, product_grid, validate_moment_grid, write_moment_csv};
use ve_infer::Error;

#[derive(Parser)]
#[command(name = "ve-infer", version, about = "Bayesian vaccine-efficacy estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an analysis request and write the JSON report.
    Analyze(AnalyzeArgs),
    /// Print Gamma priors elicited from a VE guess and a control-arm rate.
    Elicit(ElicitArgs),
    /// Simulate a two-arm trial and write its summary data.
    Simulate(SimulateArgs),
    /// Check the follow-up moment formulas against quadrature and Monte Carlo.
    ValidateMoments(ValidateArgs),
    /// Recompute the published interim-analysis results and compare.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Conditional,
    Full,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum MomentModeArg {
    Paper,
    Corrected,
}

#[derive(Clone, Copy, ValueEnum)]
enum VarianceNArg {
    PerCohort,
    AppendixNv,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Request JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Report path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Chain CSV path (full model only).
    #[arg(long)]
    chain_output: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long, value_enum)]
    moment_mode: Option<MomentModeArg>,
    #[arg(long = "variance-n", value_enum)]
    variance_n: Option<VarianceNArg>,
}

#[derive(Args)]
struct ElicitArgs {
    /// Prior guess of VE, in [0, 1).
    #[arg(long, allow_negative_numbers = true)]
    ve_hat: f64,
    /// Prior guess of the control-arm infection rate (per unit time).
    #[arg(long, allow_negative_numbers = true)]
    lambda_c_hat: f64,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n_v: u64,
    #[arg(long)]
    n_c: u64,
    #[arg(long, allow_negative_numbers = true)]
    lambda_v: f64,
    #[arg(long, allow_negative_numbers = true)]
    lambda_c: f64,
    /// Accrual/study duration.
    #[arg(long, allow_negative_numbers = true)]
    duration: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Comma-separated rates; with --duration forms a product grid.
    #[arg(long, value_delimiter = ',', requires = "duration")]
    lambda: Option<Vec<f64>>,
    /// Comma-separated durations.
    #[arg(long, value_delimiter = ',', requires = "lambda")]
    duration: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1_000_000)]
    replicates: u64,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Full JSON results; the comparison table always goes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    /// Exit 1: a validation or acceptance check did not hold.
    Check(String),
    /// Exit 2.
    Input(String),
    /// Exit 3.
    Numerical(String),
    /// Exit 1: could not read or write a file.
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(path, e))?;
    fill(&mut tmp).and_then(|_| tmp.flush()).map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

fn emit(path: Option<&Path>, fill: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Failure> {
    match path {
        Some(p) => write_atomic(p, fill),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            fill(&mut lock).map_err(|e| Failure::Io(format!("stdout: {e}")))
        }
    }
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), Failure> {
    emit(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
        writeln!(w)
    })
}

fn seed_or_default(flag: Option<u64>) -> Result<u64, Failure> {
    Ok(flag.or(env_seed()?).unwrap_or(DEFAULT_SEED))
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.input).map_err(|e| Failure::Input(format!("{}: {e}", args.input.display())))?;
    let mut request = parse_request(&text)?;
    if let Some(m) = args.method {
        request.method = match m {
            MethodArg::Conditional => Method::Conditional,
            MethodArg::Full => Method::Full,
            MethodArg::Both => Method::Both,
        };
    }
    if let Some(level) = args.level {
        request.level = level;
    }
    if let Some(mode) = args.moment_mode {
        request.likelihood.moment_mode = match mode {
            MomentModeArg::Paper => MomentMode::PaperCompat,
            MomentModeArg::Corrected => MomentMode::Corrected,
        };
    }
    if let Some(v) = args.variance_n {
        request.likelihood.variance_n_source = match v {
            VarianceNArg::PerCohort => VarianceNSource::PerCohort,
            VarianceNArg::AppendixNv => VarianceNSource::AppendixNv,
        };
    }
    let flags = McmcOverrides {
        chains: args.chains,
        iterations: args.iterations,
        burn_in: args.burn_in,
        seed: args.seed,
        ..Default::default()
    };
    request.mcmc = flags.or(request.mcmc);
    let resolved = request.resolve(env_seed()?)?;
    let (report, chain) = run_analysis(&resolved)?;
    if let (Some(path), Some(chain)) = (&args.chain_output, &chain) {
        write_atomic(path, |w| chain.write_csv(w))?;
    }
    if let Some(full) = &report.full {
        for w in &full.posterior.warnings {
            eprintln!("warning: {w}");
        }
    }
    emit_json(args.output.as_deref(), &report)
}

#[derive(Serialize)]
struct ElicitOutput {
    #[serde(flatten)]
    priors: GammaPriorPair,
    prior_mean_ve: Option<Efficacy>,
}

fn elicit(args: ElicitArgs) -> Result<(), Failure> {
    let priors = elicit_priors(args.ve_hat, args.lambda_c_hat)?;
    let out = ElicitOutput {
        priors,
        prior_mean_ve: prior_mean_ve(&priors).ok(),
    };
    emit_json(None, &out)
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let rates = RatePair::new(args.lambda_v, args.lambda_c)?;
    let seed = seed_or_default(args.seed)?;
    let data = simulate_trial(args.n_v, args.n_c, rates, args.duration, seed)?;
    emit_json(args.output.as_deref(), &data)
}

fn validate_moments(args: ValidateArgs) -> Result<(), Failure> {
    let grid = match (args.lambda, args.duration) {
        (Some(l), Some(d)) => product_grid(&l, &d)?,
        _ => default_moment_grid(),
    };
    let seed = seed_or_default(args.seed)?;
    let rows = validate_moment_grid(&grid, args.replicates, seed)?;
    emit(args.output.as_deref(), |w| write_moment_csv(&rows, w))?;
    let failed = rows.iter().filter(|r| !r.corrected_row_passes()).count();
    let paper_failed = rows.iter().filter(|r| !r.paper_pass).count();
    eprintln!(
        "{} grid points: corrected formulas failed at {failed}, paper-compat variance failed at {paper_failed}",
        rows.len()
    );
    if failed > 0 {
        return Err(Failure::Check(format!("{failed} corrected-mode rows failed")));
    }
    Ok(())
}

fn run_reproduce(args: ReproduceArgs) -> Result<(), Failure> {
    let seed = seed_or_default(args.seed)?;
    let report = reproduce(seed)?;
    print!("{}", report.table());
    if let Some(path) = &args.output {
        emit_json(Some(path), &report)?;
    }
    if !report.all_pass() {
        return Err(Failure::Check("reported values not reproduced within tolerance".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => analyze(a),
        Command::Elicit(a) => elicit(a),
        Command::Simulate(a) => simulate(a),
        Command::ValidateMoments(a) => validate_moments(a),
        Command::Reproduce(a) => run_reproduce(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Check(m) | Failure::Io(m) => (1, m),
                Failure::Input(m) => (2, m),
                Failure::Numerical(m) => (3, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
