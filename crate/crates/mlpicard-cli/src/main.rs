//! Command-line front end: single evaluations, convergence sweeps, cost
//! tables, semi-norm estimates and the validation suites.
//!
//! Exit codes are stable: 0 success, 1 runtime failure, 2 unknown
//! problem or suite, 3 resource-limit guard, 64 invalid flags. Output
//! records are documented in `docs/output-schema.md`.

mod commands;
mod config;
mod validate;

use clap::{Parser, Subcommand};
use config::Mode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mlpicard", version, about = "Multilevel Picard PDE solver")]
struct Cli {
    /// Worker threads (default: hardware parallelism, or MLPICARD_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Force single-threaded, ordered reduction.
    #[arg(long, global = true, default_value_t = false)]
    deterministic: bool,

    /// Root seed (default: MLPICARD_SEED or 0).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one problem at one space-time point, writing a JSON record.
    Run {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, value_enum, default_value_t = Mode::Heat)]
        mode: Mode,
        /// Iteration depth N (heat) or k (general).
        #[arg(short = 'N', long = "depth", default_value_t = 1)]
        depth: u32,
        /// Monte Carlo base M (heat mode).
        #[arg(short = 'M', long = "samples", default_value_t = 1)]
        samples: u32,
        /// Quadrature order Q (heat mode).
        #[arg(short = 'Q', long = "order", default_value_t = 1)]
        order: u32,
        /// Accuracy base rho (general mode).
        #[arg(long, default_value_t = 2.0)]
        rho: f64,
        /// Evaluation time t in [0, T].
        #[arg(long = "time", default_value_t = 0.0)]
        time: f64,
        /// Evaluation point: "zero", "radial:<r>", or comma list.
        #[arg(long = "x", default_value = "zero")]
        x_spec: String,
        /// Independent repetitions averaged into the record.
        #[arg(long, default_value_t = 1)]
        reps: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagonal N = M = Q error sweep against the closed form; CSV out.
    Convergence {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Comma-separated diagonal levels, e.g. "1,2,3,4".
        #[arg(long, default_value = "1,2,3")]
        levels: String,
        #[arg(long, default_value_t = 100)]
        reps: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact cost-model table; CSV out.
    CostTable {
        #[arg(long = "n-max", default_value_t = 6)]
        n_max: u32,
        #[arg(long, default_value_t = 1)]
        dim: u64,
        #[arg(long, default_value_t = 1.0)]
        lipschitz: f64,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 0.25)]
        alpha: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Semi-norm estimates of a problem's approximation field; CSV out.
    Seminorm {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Largest measure depth reported (rows for 0..=depth).
        #[arg(long, default_value_t = 2)]
        depth: u32,
        #[arg(short = 'Q', long = "order", default_value_t = 4)]
        order: u32,
        /// Heat-mode field parameters N, M, Q for the evaluated field.
        #[arg(short = 'N', long = "field-depth", default_value_t = 1)]
        field_depth: u32,
        #[arg(short = 'M', long = "field-samples", default_value_t = 4)]
        field_samples: u32,
        #[arg(long = "field-order", default_value_t = 2)]
        field_order: u32,
        /// Inner samples per probe.
        #[arg(long, default_value_t = 200)]
        inner: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named property suite; exit 0 iff every check passes.
    Validate {
        /// One of: quadrature, cost, seminorm, oracle, all.
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Problem registry operations.
    Problems {
        #[command(subcommand)]
        action: ProblemsAction,
    },
}

#[derive(Subcommand)]
enum ProblemsAction {
    /// List registered problems.
    List {
        #[arg(long, default_value_t = 1)]
        dim: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    return ExitCode::SUCCESS;
                }
                _ => 64,
            };
            eprint!("{err}");
            return ExitCode::from(code);
        }
    };

    let seed = cli.seed.or_else(env_seed).unwrap_or(0);
    let threads = if cli.deterministic {
        Some(1)
    } else {
        cli.threads.or_else(env_threads)
    };
    if let Some(threads) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let parallel = !cli.deterministic;

    let outcome = match cli.command {
        Command::Run {
            problem,
            dim,
            mode,
            depth,
            samples,
            order,
            rho,
            time,
            x_spec,
            reps,
            out,
        } => {
            let config = config::RunConfig {
                problem,
                dim,
                mode,
                depth,
                samples,
                order,
                rho,
                time,
                x_spec,
                reps,
                seed,
                deterministic: cli.deterministic,
            };
            commands::run(&config, parallel, out.as_deref())
        }
        Command::Convergence {
            problem,
            dim,
            levels,
            reps,
            out,
        } => commands::convergence(&problem, dim, &levels, reps, seed, parallel, out.as_deref()),
        Command::CostTable {
            n_max,
            dim,
            lipschitz,
            horizon,
            alpha,
            out,
        } => commands::cost_table(n_max, dim, lipschitz, horizon, alpha, out.as_deref()),
        Command::Seminorm {
            problem,
            dim,
            depth,
            order,
            field_depth,
            field_samples,
            field_order,
            inner,
            out,
        } => commands::seminorm(
            &problem,
            dim,
            depth,
            order,
            (field_depth, field_samples, field_order),
            inner,
            seed,
            out.as_deref(),
        ),
        Command::Validate { suite, out } => {
            return validate::run_suite(&suite, seed, out.as_deref());
        }
        Command::Problems { action } => match action {
            ProblemsAction::List { dim } => commands::problems_list(dim),
        },
    };

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(commands::exit_code_for(&err))
        }
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("MLPICARD_SEED").ok()?.parse().ok()
}

fn env_threads() -> Option<usize> {
    std::env::var("MLPICARD_THREADS").ok()?.parse().ok()
}
