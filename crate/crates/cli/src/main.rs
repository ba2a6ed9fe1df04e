mod compare;
mod config;
mod error;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::compare::Tolerance;
use crate::config::{Kind, LoadedConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "ldlab",
    version,
    about = "Large deviation experiments: conjugates, deviation integrals, simulation and Monte Carlo checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; overrides `workers` in the config.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Numeric Legendre transform of a fundamental function, CSV `alpha,D`.
    Conjugate(RunArgs),
    /// Deviation integral of a path along refining partitions, CSV `K,I_value`.
    DeviationIntegral(RunArgs),
    /// Trajectories of a process model, CSV `t,Z` per trajectory.
    Simulate(RunArgs),
    /// Local large deviation estimates over a horizon grid.
    VerifyLocal(RunArgs),
    /// Finite-dimensional event estimates over a horizon grid.
    VerifyFdd(RunArgs),
    /// Tube event estimates around a path over a horizon grid.
    VerifyFunctional(RunArgs),
    /// Monte Carlo Varadhan functional against its variational value.
    Varadhan(RunArgs),
    /// Exponential tightness levels with Chernoff bounds.
    Tightness(RunArgs),
    /// Compare the CSV artifacts of two run directories.
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
        /// Absolute tolerance on numeric cells.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        /// Additional tolerance in standard errors for Monte Carlo columns.
        #[arg(long, default_value_t = 0.0)]
        stderr_mult: f64,
    },
}

fn execute(kind: Kind, args: &RunArgs) -> CliResult<()> {
    let cfg = LoadedConfig::load(&args.config)?;
    cfg.config.validate(kind)?;
    let seed = args
        .seed
        .or(cfg.config.seed)
        .ok_or_else(|| CliError::config("a seed is required (config `seed` or --seed)"))?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.config.out.as_ref().map(|o| cfg.dir.join(o)))
        .ok_or_else(|| CliError::config("an output directory is required (config `out` or --out)"))?;
    let workers = args.workers.or(cfg.config.workers);
    if workers == Some(0) {
        return Err(CliError::config("workers must be positive"));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::config(format!("worker pool: {e}")))?;
    let outcome = pool.install(|| experiments::run(kind, &cfg, seed))?;
    let manifest = outcome.artifacts.write(&out, kind.as_str(), seed, &cfg.raw)?;
    println!("{kind}: wrote {} files to {}", manifest.files.len() + 1, out.display());
    match outcome.failure {
        Some(msg) => Err(CliError::Diverged(msg)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Compare {
            dir_a,
            dir_b,
            tol,
            stderr_mult,
        } => {
            if !(tol >= 0.0 && stderr_mult >= 0.0) {
                eprintln!("error: tolerances must be nonnegative");
                return ExitCode::from(2);
            }
            return match compare::compare(&dir_a, &dir_b, Tolerance { abs: tol, stderr_mult }) {
                Ok(report) => {
                    for d in &report.differences {
                        println!(
                            "{} row {} {}: {} vs {} (allowed {})",
                            d.file, d.row, d.column, d.a, d.b, d.allowed
                        );
                    }
                    println!(
                        "compared {} files: {} differences",
                        report.files.len(),
                        report.differences.len()
                    );
                    ExitCode::from(u8::from(!report.differences.is_empty()))
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            };
        }
        Command::Conjugate(a) => (Kind::Conjugate, a),
        Command::DeviationIntegral(a) => (Kind::DeviationIntegral, a),
        Command::Simulate(a) => (Kind::Simulate, a),
        Command::VerifyLocal(a) => (Kind::VerifyLocal, a),
        Command::VerifyFdd(a) => (Kind::VerifyFdd, a),
        Command::VerifyFunctional(a) => (Kind::VerifyFunctional, a),
        Command::Varadhan(a) => (Kind::Varadhan, a),
        Command::Tightness(a) => (Kind::Tightness, a),
    };
    match execute(kind, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
