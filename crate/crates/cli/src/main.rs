//! `kneadlab` command-line front end.
//!
//! Exit status: 0 on success, 1 when a check fails, 2 on bad input.

mod commands;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kneadlab::numeric::parse_rational;
use kneadlab::{load_system, Error, Rational, SystemSpec};

use report::{Fmt, Report};

#[derive(Parser)]
#[command(name = "kneadlab", version, about = "Kneading theory for systems of monotone interval maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Word depth m.
    #[arg(short = 'm', long = "depth", default_value_t = 14)]
    depth: usize,
    /// Series truncation: coefficients up to t^M.
    #[arg(short = 'M', long = "cap", default_value_t = 16)]
    cap: usize,
    /// Root tolerance, as a decimal or fraction.
    #[arg(long, default_value = "1e-9")]
    tol: String,
    /// Render numbers with k decimal places instead of exact fractions.
    #[arg(long, value_name = "K")]
    decimal: Option<usize>,
    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Node budget for word enumeration.
    #[arg(long, default_value_t = 50_000_000)]
    budget: u64,
    /// Print the result document as JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Write the result document and CSV side files into this directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Kneading determinant D(t).
    Determinant {
        system: PathBuf,
        /// Compute from this deleted column only instead of checking all of them.
        #[arg(long)]
        column: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run the identity suite; every residual must vanish.
    Verify {
        system: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the kneading data of two systems with the same layout.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Also build the combinatorial map on the critical orbit to this depth.
        #[arg(long, value_name = "DEPTH")]
        map: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Lap-count and determinant-root entropy.
    Entropy {
        system: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Kneading matrix and the column relation.
    Matrix {
        system: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Itineraries of points (turning points by default).
    Itinerary {
        system: PathBuf,
        /// A point such as 1/3, or 1/3+ / 1/3- for one-sided limits. Repeatable.
        #[arg(long = "point", allow_hyphen_values = true)]
        points: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Future and past separation of the critical orbit.
    Separability {
        system: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate of the self-similar measure of an interval.
    Measure {
        system: PathBuf,
        /// Interval as lo,hi; defaults to the hull.
        #[arg(long, allow_hyphen_values = true)]
        interval: Option<String>,
        /// Number of grid points for the φ profile.
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Constant-slope model and semiconjugacy residuals.
    Linearize {
        system: PathBuf,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// Fail when the largest residual exceeds this.
        #[arg(long)]
        max_residual: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Critical itineraries and entropy of a two-branch overlap system.
    Overlap {
        system: PathBuf,
        /// Number of itinerary terms N.
        #[arg(short = 'n', long, default_value_t = 32)]
        terms: usize,
        #[command(flatten)]
        common: Common,
    },
}

/// Resolved options shared by every command.
pub struct Run {
    pub m: usize,
    pub cap: usize,
    pub tol: Rational,
    pub budget: u64,
    pub fmt: Fmt,
}

/// An error with the exit status it maps to.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ColumnDependence { .. } | Error::Inconsistency(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

pub fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

pub fn load(path: &Path) -> Result<SystemSpec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    load_system(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn resolve(c: &Common) -> Result<Run, Failure> {
    if c.depth == 0 {
        return Err(input_error("depth m must be at least 1"));
    }
    let tol = parse_rational(&c.tol).map_err(|e| input_error(format!("--tol: {e}")))?;
    if tol <= Rational::from_integer(0.into()) {
        return Err(input_error("--tol must be positive"));
    }
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(input_error("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| input_error(format!("--threads: {e}")))?;
    }
    Ok(Run { m: c.depth, cap: c.cap, tol, budget: c.budget, fmt: Fmt { decimal: c.decimal } })
}

fn dispatch(cmd: &Command, run: &Run) -> Result<Report, Failure> {
    match cmd {
        Command::Determinant { system, column, .. } => commands::determinant(&load(system)?, *column, run),
        Command::Verify { system, .. } => commands::verify(&load(system)?, run),
        Command::Compare { a, b, map, .. } => commands::compare(&load(a)?, &load(b)?, *map, run),
        Command::Entropy { system, .. } => commands::entropy(&load(system)?, run),
        Command::Matrix { system, .. } => commands::matrix(&load(system)?, run),
        Command::Itinerary { system, points, .. } => commands::itinerary(&load(system)?, points, run),
        Command::Separability { system, .. } => commands::separability(&load(system)?, run),
        Command::Measure { system, interval, grid, .. } => {
            commands::measure(&load(system)?, interval.as_deref(), *grid, run)
        }
        Command::Linearize { system, grid, max_residual, .. } => {
            commands::linearize(&load(system)?, *grid, *max_residual, run)
        }
        Command::Overlap { system, terms, .. } => commands::overlap(&load(system)?, *terms, run),
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Determinant { common, .. }
        | Command::Verify { common, .. }
        | Command::Compare { common, .. }
        | Command::Entropy { common, .. }
        | Command::Matrix { common, .. }
        | Command::Itinerary { common, .. }
        | Command::Separability { common, .. }
        | Command::Measure { common, .. }
        | Command::Linearize { common, .. }
        | Command::Overlap { common, .. } => common,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = common(&cli.command);
    let outcome = resolve(opts).and_then(|run| dispatch(&cli.command, &run));
    let report = match outcome {
        Ok(r) => r,
        Err(f) => {
            eprintln!("kneadlab: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    if opts.json {
        println!("{}", serde_json::to_string_pretty(&report.document()).expect("json values serialize"));
    } else {
        print!("{}", report.text);
    }
    if let Some(dir) = &opts.out {
        if let Err(e) = report.write(dir) {
            eprintln!("kneadlab: {}: {e}", dir.display());
            return ExitCode::from(2);
        }
    }
    match &report.failure {
        Some(why) => {
            eprintln!("check failed: {why}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    }
}
