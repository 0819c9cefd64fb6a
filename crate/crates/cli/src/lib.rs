//! `navier4` command-line front end.

// `!(a > b)` is used on purpose so NaN fails the test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use navier4_core::Strategy;

mod commands;
pub mod config;
pub mod error;
mod output;
mod verify;

use config::{ExperimentConfig, Overrides, CONFIG_HELP};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "navier4", version, about = "Spectral solvers for coupled fourth-order systems with Navier conditions", after_help = CONFIG_HELP)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Experiment file; defaults apply to every missing key.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory [default: navier4-out].
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed of every randomized check.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Sine modes per axis for solves [default: 64 / 32 / 16 by dimension].
    #[arg(long, global = true, value_name = "K")]
    truncation: Option<usize>,
    /// Solver nodes per axis [default: 127 / 63 / 31 by dimension].
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Side fraction of the sub-box Ω₀ [default: 0.5].
    #[arg(long = "omega0-frac", global = true, value_name = "THETA")]
    omega0_frac: Option<f64>,
    /// Nonlinear strategy [default: from the hypothesis check].
    #[arg(long, global = true, value_name = "picard|newton")]
    strategy: Option<Strategy>,
    /// Residual tolerance [default: 1e-8].
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Iteration cap [default: 50 for newton, 500 for picard].
    #[arg(long = "max-iter", global = true, value_name = "N")]
    max_iter: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Admissibility of both parameter pairs.
    CheckParams,
    /// Resonance curves α = λ_k² − βλ_k as CSV.
    ResonanceMap {
        #[arg(long = "k-max", default_value_t = 3)]
        k_max: usize,
        /// Lower end of the β range [default: −2λ₁].
        #[arg(long = "beta-min", allow_negative_numbers = true)]
        beta_min: Option<f64>,
        /// Upper end of the β range [default: 2λ₁].
        #[arg(long = "beta-max", allow_negative_numbers = true)]
        beta_max: Option<f64>,
        #[arg(long, default_value_t = 41)]
        samples: usize,
    },
    /// Kernel report and diagonal for one shift.
    Greens,
    /// Kernel constants and the cone constant σ.
    Constants,
    /// Linear solve of both equations with the configured forcing.
    SolveLinear,
    /// Nonlinear solve with hypothesis check and cone verdict.
    Solve,
    /// Invariant suite.
    Verify,
}

/// Runs one invocation and returns its exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or("NAVIER4_LOG", "warn"))
        .format_timestamp(None)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("navier4: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let g = cli.global;
    let mut cfg = match &g.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        out: g.out,
        truncation: g.truncation,
        grid: g.grid,
        omega0_frac: g.omega0_frac,
        strategy: g.strategy,
        tol: g.tol,
        max_iter: g.max_iter,
    });
    let settings = cfg.resolve()?;
    match cli.command {
        Command::CheckParams => commands::check_params(&settings),
        Command::ResonanceMap { k_max, beta_min, beta_max, samples } => {
            commands::resonance_map(&settings, k_max, beta_min, beta_max, samples)
        }
        Command::Greens => commands::greens(&settings),
        Command::Constants => commands::constants(&settings),
        Command::SolveLinear => commands::solve_linear(&settings),
        Command::Solve => commands::solve(&settings),
        Command::Verify => verify::run(&settings, g.seed),
    }
}
