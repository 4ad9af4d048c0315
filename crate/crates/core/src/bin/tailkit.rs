use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tailkit::dist::{make_beta_prime, make_gaussian, make_noncentral_chi2, DistributionSpec};
use tailkit::engine::{SeedKind, TailSide, DEFAULT_TOL};
use tailkit::report::{
    awgn_table, bounds_table, log_spaced_ns, write_atomic, AwgnRequest, BoundsRequest, CsvTable, DEFAULT_ORACLE_MAX_N,
};
use tailkit::verify::{run_suite, Suite, VerifyTolerances};
use tailkit::Error;

#[derive(Parser)]
#[command(name = "tailkit", version, about = "Iterative tail-probability bounds and AWGN converse bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterates P_0..P_I of a catalog distribution on a grid, as CSV.
    Bounds(BoundsArgs),
    /// Converse-bound sandwich and approximations for the AWGN channel, as CSV.
    Awgn(AwgnArgs),
    /// Runs invariant suites and prints one pass/fail line per check.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DistName {
    Gaussian,
    BetaPrime,
    Ncchi2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Right,
    Left,
}

#[derive(Clone, Copy, ValueEnum)]
enum Seed {
    Pdf,
    ShiftedPdf,
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Jet,
    Specfun,
    Bounds,
    Awgn,
    All,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    dist: DistName,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// Defaults to left for ncchi2 and right otherwise.
    #[arg(long, value_enum)]
    side: Option<Side>,
    /// Defaults to pdf for gaussian and shifted-pdf otherwise.
    #[arg(long, value_enum)]
    seed: Option<Seed>,
    #[arg(long, default_value_t = 4)]
    iters: usize,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Write ln P_i instead of P_i.
    #[arg(long)]
    log: bool,
    #[arg(long)]
    timestamp: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AwgnArgs {
    #[arg(long, conflicts_with = "omega_db")]
    omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega_db: Option<f64>,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n_min", "n_max", "n_points"])]
    n_list: Option<Vec<u64>>,
    #[arg(long, default_value_t = 10)]
    n_min: u64,
    #[arg(long, default_value_t = 1_000_000)]
    n_max: u64,
    #[arg(long, default_value_t = 41)]
    n_points: usize,
    #[arg(long, value_enum, default_value_t = OnOff::Off)]
    oracle: OnOff,
    #[arg(long, default_value_t = DEFAULT_ORACLE_MAX_N)]
    oracle_max_n: u64,
    #[arg(long)]
    timestamp: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteName::All)]
    suite: SuiteName,
    /// Tolerance override NAME=VALUE; repeatable.
    #[arg(long = "tol")]
    tols: Vec<String>,
}

fn required(v: Option<f64>, flag: &str, dist: &str) -> Result<f64, Error> {
    v.ok_or_else(|| Error::Param(format!("--dist {dist} needs --{flag}")))
}

fn build_dist(a: &BoundsArgs) -> Result<DistributionSpec, Error> {
    match a.dist {
        DistName::Gaussian => make_gaussian(a.mu, a.sigma),
        DistName::BetaPrime => make_beta_prime(required(a.alpha, "alpha", "beta-prime")?, required(a.beta, "beta", "beta-prime")?),
        DistName::Ncchi2 => make_noncentral_chi2(required(a.k, "k", "ncchi2")?, required(a.s, "s", "ncchi2")?),
    }
}

fn bounds_request(a: &BoundsArgs) -> Result<BoundsRequest, Error> {
    let dist = Arc::new(build_dist(a)?);
    let side = match a.side {
        Some(Side::Left) => TailSide::Left,
        Some(Side::Right) => TailSide::Right,
        None if matches!(a.dist, DistName::Ncchi2) => TailSide::Left,
        None => TailSide::Right,
    };
    let seed = match (a.seed, a.dist) {
        (Some(Seed::Pdf), _) | (None, DistName::Gaussian) => SeedKind::PdfSeed,
        (Some(Seed::ShiftedPdf), _) | (None, _) => SeedKind::ShiftedPdfSeed,
    };
    let (dmin, dmax) = match side {
        TailSide::Right => (1.0, 100.0),
        TailSide::Left => (0.01, 0.5),
    };
    Ok(BoundsRequest {
        dist,
        side,
        seed,
        iters: a.iters,
        x_min: a.x_min.unwrap_or(dmin),
        x_max: a.x_max.unwrap_or(dmax),
        points: a.points,
        tol: a.tol,
        log_values: a.log,
        timestamp: a.timestamp.clone(),
    })
}

fn awgn_request(a: &AwgnArgs) -> Result<AwgnRequest, Error> {
    let omega = match (a.omega, a.omega_db) {
        (Some(o), None) => o,
        (None, Some(db)) => 10f64.powf(db / 10.0),
        _ => return Err(Error::Param("give exactly one of --omega and --omega-db".into())),
    };
    let ns = match &a.n_list {
        Some(list) if list.is_empty() => return Err(Error::Param("--n-list is empty".into())),
        Some(list) => list.clone(),
        None => log_spaced_ns(a.n_min, a.n_max, a.n_points)?,
    };
    Ok(AwgnRequest {
        omega,
        eps: a.eps,
        ns,
        oracle: matches!(a.oracle, OnOff::On),
        oracle_max_n: a.oracle_max_n,
        timestamp: a.timestamp.clone(),
    })
}

fn emit(table: &CsvTable, out: &Option<PathBuf>) -> Result<(), Error> {
    let text = table.render();
    match out {
        Some(p) => write_atomic(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Param(_) | Error::SeedIncompatible(_) | Error::WindowTooSmall(_) => 2,
        Error::SeedInvalid(_) => 3,
        _ => 1,
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("tailkit: {e}");
    ExitCode::from(exit_code(&e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Bounds(a) => match bounds_request(&a).and_then(|r| bounds_table(&r)).and_then(|t| emit(&t, &a.out)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::Awgn(a) => match awgn_request(&a).and_then(|r| awgn_table(&r)).and_then(|t| emit(&t, &a.out)) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => fail(e),
        },
        Command::Verify(a) => {
            let mut tols = VerifyTolerances::default();
            for spec in &a.tols {
                if let Err(e) = tols.apply(spec) {
                    return fail(e);
                }
            }
            let suite = match a.suite {
                SuiteName::Jet => Suite::Jet,
                SuiteName::Specfun => Suite::Specfun,
                SuiteName::Bounds => Suite::Bounds,
                SuiteName::Awgn => Suite::Awgn,
                SuiteName::All => Suite::All,
            };
            let start = Instant::now();
            let results = run_suite(suite, &tols);
            for r in &results {
                println!("{r}");
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            println!("{} checks, {} failed, {:.2} s", results.len(), failed, start.elapsed().as_secs_f64());
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
