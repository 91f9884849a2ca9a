//! One binary, one subcommand per experiment. Every run is a pure
//! function of (config, seed): data files are byte-reproducible, and the
//! manifest records checksums alongside the wall time.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error, 3 invariant
//! violation (selftest).

mod commands;
mod config;
mod selftest;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use config::{BhArgs, ClassListArgs, DensityArgs, SeriesArgs, SieveArgs, VarietyArgs};

#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Runtime(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(msg) | AppError::Runtime(msg) => f.write_str(msg),
        }
    }
}

impl From<kummerlab::Error> for AppError {
    fn from(e: kummerlab::Error) -> Self {
        match e {
            kummerlab::Error::Domain(_) | kummerlab::Error::Precondition(_) => {
                AppError::Usage(e.to_string())
            }
            other => AppError::Runtime(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "kummerlab",
    version,
    about = "Experiments around prime values of n^r + k: singular-series scans, \
             order-r character sums, large-sieve ratios and conic solubility"
)]
struct Cli {
    /// TOML config file; command-line flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores, or KUMMERLAB_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fiber Lambda-sum deviation experiment over k <= y.
    BhRun(BhArgs),
    /// Truncated singular-series scan with stability metric.
    SingularSeries(SeriesArgs),
    /// Large-sieve ratio sweep over a (Q, M) grid.
    SieveLab(SieveArgs),
    /// Imaginary quadratic d with class number <= 2 and 2 unramified.
    ClassList(ClassListArgs),
    /// Integral point search on y^2 - a z^2 = t^r + k.
    VarietySolve(VarietyArgs),
    /// Density of k = n1^2 + d n2^2 + n3^r with exception list.
    Density(DensityArgs),
    /// Quick invariant battery; exits 3 on violation.
    Selftest,
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let _ = e.print();
            return 1;
        }
    };

    let workers = cli.workers.or_else(|| {
        std::env::var("KUMMERLAB_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(workers) = workers {
        kummerlab::set_worker_threads(workers);
    }

    let config = cli.config.as_deref();
    let outcome = match cli.command {
        Command::BhRun(args) => args
            .resolve(config)
            .and_then(|(params, out)| commands::bh_run(params, out)),
        Command::SingularSeries(args) => args
            .resolve(config)
            .and_then(|(params, out)| commands::singular_series(params, out)),
        Command::SieveLab(args) => args
            .resolve(config)
            .and_then(|(params, out)| commands::sieve_lab_run(params, out)),
        Command::ClassList(args) => args.resolve(config).and_then(commands::class_list),
        Command::VarietySolve(args) => args.resolve(config).and_then(commands::variety_solve),
        Command::Density(args) => args
            .resolve(config)
            .and_then(|(params, out)| commands::density(params, out)),
        Command::Selftest => {
            let failures = selftest::run();
            return if failures == 0 {
                println!("selftest: all checks passed");
                0
            } else {
                eprintln!("selftest: {failures} check(s) failed");
                3
            };
        }
    };

    match outcome {
        Ok(()) => 0,
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(AppError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}
