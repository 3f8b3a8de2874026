//! Command line front end for the volume estimator.
//!
//! Three subcommands: `estimate` runs the multiphase Monte Carlo estimator
//! (optionally repeated, optionally in parallel) and reports statistics;
//! `chebyshev` prints the largest inscribed ball; `generate` writes a
//! benchmark polytope as an `.hpoly` file.
//!
//! Exit codes: 0 success, 1 input error (bad flags, unreadable or malformed
//! files, infeasible or unbounded inputs), 2 numerical failure inside the
//! estimator.

mod format;
mod report;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use polyvol::generators::GeneratorSpec;
use polyvol::lp::chebyshev_ball;
use polyvol::volume::{estimate_with_statistics, Rounding, RunStatistics, VolumeParams};
use polyvol::walks::{default_walk_length, OracleKind, WalkVariant};
use polyvol::{Error as PolyError, HPolytope, RngStream};

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Format { line: usize, message: String },
    Usage(String),
    Poly(PolyError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Format { line, message } => write!(f, "line {line}: {message}"),
            CliError::Usage(message) => write!(f, "{message}"),
            CliError::Poly(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        CliError::Poly(e)
    }
}

fn exit_code(err: &CliError) -> u8 {
    match err {
        CliError::Io { .. } | CliError::Format { .. } | CliError::Usage(_) => 1,
        CliError::Poly(e) => poly_exit_code(e),
    }
}

/// Input defects earn exit 1; anything that went wrong while computing on a
/// valid input earns exit 2.
fn poly_exit_code(e: &PolyError) -> u8 {
    match e {
        PolyError::DimensionMismatch { .. }
        | PolyError::ZeroDimensional
        | PolyError::ZeroRow { .. }
        | PolyError::EmptyPolytope
        | PolyError::NotFullDimensional
        | PolyError::Unbounded
        | PolyError::Generator(_) => 1,
        PolyError::NotPositiveDefinite
        | PolyError::UnboundedDirection
        | PolyError::PivotLimit
        | PolyError::InconsistentSystem
        | PolyError::StateDrift
        | PolyError::UninitializedState
        | PolyError::FlatSample
        | PolyError::PhaseStarved { .. }
        | PolyError::Numerical(_) => 2,
    }
}

#[derive(Parser)]
#[command(
    name = "polyvol",
    version,
    about = "Convex polytope volume estimation by multiphase Monte Carlo over hit-and-run walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the volume of an H-polytope
    Estimate(EstimateArgs),
    /// Print the largest inscribed (Chebyshev) ball
    Chebyshev(ChebyshevArgs),
    /// Write a benchmark polytope in .hpoly format
    Generate(GenerateArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InputArgs {
    /// Read the polytope from an .hpoly file
    #[arg(long, value_name = "PATH")]
    file: Option<PathBuf>,
    /// Generate a benchmark polytope (cube:10, cross:8, simplex:10,
    /// simplex-product:5, skinny-cube:10, rh:8,40, birkhoff:5)
    #[arg(long, value_name = "KIND:PARAMS")]
    generate: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WalkArg {
    Cdhr,
    Rdhr,
}

impl From<WalkArg> for WalkVariant {
    fn from(w: WalkArg) -> Self {
        match w {
            WalkArg::Cdhr => WalkVariant::Cdhr,
            WalkArg::Rdhr => WalkVariant::Rdhr,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    Facet,
    Membership,
}

impl From<OracleArg> for OracleKind {
    fn from(o: OracleArg) -> Self {
        match o {
            OracleArg::Facet => OracleKind::Facet,
            OracleArg::Membership => OracleKind::Membership,
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Approximation parameter; the per-phase sample count is 400 d ln(d) / eps^2
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Walk variant
    #[arg(long, value_enum, default_value_t = WalkArg::Cdhr)]
    walk: WalkArg,
    /// Steps between retained samples; defaults to floor(10 + d/10)
    #[arg(long, value_name = "N")]
    walk_len: Option<usize>,
    /// Boundary oracle (membership exists for cross-validation)
    #[arg(long, value_enum, default_value_t = OracleArg::Facet)]
    oracle: OracleArg,
    /// Round the body first; optional axes-ratio threshold
    #[arg(long, value_name = "T_R", num_args = 0..=1, default_missing_value = "1.5")]
    round: Option<f64>,
    /// Master seed; repetition i draws from its substream i (default: entropy)
    #[arg(long)]
    seed: Option<u64>,
    /// Number of repetitions
    #[arg(long, value_name = "K", default_value_t = 1)]
    repeat: usize,
    /// Exact volume for error columns (defaults to the generator's, if known)
    #[arg(long, value_name = "F")]
    exact_volume: Option<f64>,
    /// Write the full JSON report here
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// Write per-run CSV rows here
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Run up to J repetitions concurrently
    #[arg(long, value_name = "J", default_value_t = 1)]
    parallel: usize,
}

#[derive(Args)]
struct ChebyshevArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Seed for random generators (default: entropy)
    #[arg(long)]
    seed: Option<u64>,
    /// Write a JSON report here
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator request, e.g. cube:10 or rh:8,40
    spec: String,
    /// Output path; stdout when omitted
    #[arg(long, short, value_name = "PATH")]
    output: Option<PathBuf>,
    /// Seed for random generators (default: entropy)
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(args) => run_estimate(args),
        Command::Chebyshev(args) => run_chebyshev(args),
        Command::Generate(args) => run_generate(args),
    }
}

struct LoadedBody {
    poly: HPolytope,
    generator: Option<GeneratorSpec>,
    file: Option<PathBuf>,
}

impl LoadedBody {
    fn label(&self) -> String {
        match (&self.generator, &self.file) {
            (Some(spec), _) => spec.to_string(),
            (None, Some(path)) => path.display().to_string(),
            (None, None) => "<unknown>".into(),
        }
    }
}

/// Builds or reads the polytope. Generators draw from stream 0 of the master
/// seed; estimation repetitions use substreams 1 and up, so the body stays
/// the same no matter how many repetitions follow.
fn load(input: &InputArgs, seed: u64) -> Result<LoadedBody, CliError> {
    if let Some(path) = &input.file {
        let text = fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.clone(), source })?;
        let poly = format::parse_polytope(&text)?;
        Ok(LoadedBody { poly, generator: None, file: Some(path.clone()) })
    } else if let Some(spec_text) = &input.generate {
        let spec = GeneratorSpec::parse(spec_text)?;
        let mut rng = RngStream::new(seed);
        let poly = spec.build(&mut rng)?;
        Ok(LoadedBody { poly, generator: Some(spec), file: None })
    } else {
        Err(CliError::Usage("either --file or --generate is required".into()))
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn run_estimate(args: EstimateArgs) -> Result<(), CliError> {
    if args.repeat == 0 {
        return Err(CliError::Usage("--repeat must be at least 1".into()));
    }
    if args.parallel == 0 {
        return Err(CliError::Usage("--parallel must be at least 1".into()));
    }
    let seed = resolve_seed(args.seed);
    let body = load(&args.input, seed)?;
    // Classify input defects before estimation starts: an unbounded body is a
    // bad input (exit 1), not a numerical failure inside a repetition.
    if !body.poly.check_bounded()? {
        return Err(PolyError::Unbounded.into());
    }
    let params = VolumeParams {
        epsilon: args.epsilon,
        variant: args.walk.into(),
        walk_len: args.walk_len,
        oracle: args.oracle.into(),
        rounding: match args.round {
            Some(threshold) => Rounding::On { threshold },
            None => Rounding::Off,
        },
        n_override: None,
    };
    let exact = args
        .exact_volume
        .or_else(|| body.generator.as_ref().and_then(|g| g.known_volume()));

    let master = RngStream::new(seed);
    let stats = if args.parallel > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.parallel)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
        pool.install(|| estimate_with_statistics(&body.poly, &params, args.repeat, exact, &master))
    } else {
        estimate_with_statistics(&body.poly, &params, args.repeat, exact, &master)
    }?;

    for failure in &stats.failures {
        eprintln!("warning: {failure}");
    }
    print_estimate(&body, &params, &stats, seed, args.repeat, args.parallel);

    if let Some(path) = &args.json {
        let report = report::EstimateReport {
            command: "estimate",
            generator: body.generator.as_ref().map(|g| g.to_string()),
            file: body.file.as_ref().map(|p| p.display().to_string()),
            dimension: body.poly.dim(),
            rows: body.poly.num_rows(),
            epsilon: args.epsilon,
            walk: params.variant,
            oracle: params.oracle,
            walk_len_override: args.walk_len,
            rounding: &params.rounding,
            seed,
            repetitions: args.repeat,
            parallel: args.parallel,
            statistics: &stats,
        };
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Usage(format!("cannot serialize report: {e}")))?;
        fs::write(path, text + "\n")
            .map_err(|source| CliError::Io { path: path.clone(), source })?;
    }
    if let Some(path) = &args.csv {
        fs::write(path, report::to_csv(&stats))
            .map_err(|source| CliError::Io { path: path.clone(), source })?;
    }
    Ok(())
}

fn print_estimate(
    body: &LoadedBody,
    params: &VolumeParams,
    stats: &RunStatistics,
    seed: u64,
    repeat: usize,
    parallel: usize,
) {
    let w = stats
        .runs
        .first()
        .map(|r| r.w)
        .unwrap_or_else(|| default_walk_length(body.poly.dim()));
    println!(
        "polytope: {} (d = {}, m = {})",
        body.label(),
        body.poly.dim(),
        body.poly.num_rows()
    );
    println!("seed: {seed}");
    let rounding = match params.rounding {
        Rounding::Off => "off".to_string(),
        Rounding::On { threshold } => format!("on (threshold {threshold})"),
    };
    println!(
        "walk: {}  W: {w}  oracle: {}  epsilon: {}  rounding: {rounding}",
        format!("{:?}", params.variant).to_lowercase(),
        format!("{:?}", params.oracle).to_lowercase(),
        params.epsilon
    );
    if repeat > 1 {
        println!("repetitions: {repeat} (parallel {parallel})");
    }
    println!("  run  volume            seconds");
    for (i, run) in stats.runs.iter().enumerate() {
        println!("  {:>3}  {:<16.10e}  {:.3}", i + 1, run.volume, run.elapsed_seconds);
    }
    if repeat > 1 {
        println!(
            "mean {:.10e}  std {:.4e}  min {:.4e}  max {:.4e}  spread {:.4}",
            stats.mean, stats.std_dev, stats.min, stats.max, stats.spread
        );
    }
    if let (Some(exact), Some(rel)) = (stats.exact, stats.rel_err_mean) {
        println!("exact {:.10e}  rel err of mean {:+.4}", exact, rel);
    }
}

fn run_chebyshev(args: ChebyshevArgs) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed);
    let body = load(&args.input, seed)?;
    let ball = chebyshev_ball(&body.poly)?;
    println!(
        "polytope: {} (d = {}, m = {})",
        body.label(),
        body.poly.dim(),
        body.poly.num_rows()
    );
    println!("seed: {seed}");
    let center = ball
        .center
        .iter()
        .map(|c| format!("{c:.12}"))
        .collect::<Vec<_>>()
        .join(" ");
    println!("center: [{center}]");
    println!("radius: {:.12}", ball.radius);
    if let Some(path) = &args.json {
        let report = report::ChebyshevReport {
            command: "chebyshev",
            generator: body.generator.as_ref().map(|g| g.to_string()),
            file: body.file.as_ref().map(|p| p.display().to_string()),
            dimension: body.poly.dim(),
            rows: body.poly.num_rows(),
            seed,
            center: ball.center.clone(),
            radius: ball.radius,
        };
        let text = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Usage(format!("cannot serialize report: {e}")))?;
        fs::write(path, text + "\n")
            .map_err(|source| CliError::Io { path: path.clone(), source })?;
    }
    Ok(())
}

fn run_generate(args: GenerateArgs) -> Result<(), CliError> {
    let seed = resolve_seed(args.seed);
    let spec = GeneratorSpec::parse(&args.spec)?;
    let mut rng = RngStream::new(seed);
    let poly = spec.build(&mut rng)?;
    let text = format::write_polytope(&poly);
    match &args.output {
        Some(path) => {
            fs::write(path, &text)
                .map_err(|source| CliError::Io { path: path.clone(), source })?;
            println!(
                "wrote {} (d = {}, m = {}) to {}",
                spec,
                poly.dim(),
                poly.num_rows(),
                path.display()
            );
            println!("seed: {seed}");
        }
        None => {
            // Keep stdout clean for piping; metadata goes to stderr.
            eprintln!("seed: {seed}");
            print!("{text}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_partition_the_error_space() {
        assert_eq!(exit_code(&CliError::Usage("x".into())), 1);
        assert_eq!(exit_code(&CliError::Format { line: 3, message: "y".into() }), 1);
        assert_eq!(poly_exit_code(&PolyError::Unbounded), 1);
        assert_eq!(poly_exit_code(&PolyError::EmptyPolytope), 1);
        assert_eq!(poly_exit_code(&PolyError::Generator("z".into())), 1);
        assert_eq!(poly_exit_code(&PolyError::PhaseStarved { phase: 4 }), 2);
        assert_eq!(poly_exit_code(&PolyError::StateDrift), 2);
        assert_eq!(poly_exit_code(&PolyError::Numerical("w".into())), 2);
        assert_eq!(poly_exit_code(&PolyError::PivotLimit), 2);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
