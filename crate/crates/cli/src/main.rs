use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use robust_bayes::commands::{self, Expansion, NormalDemoArgs};
use robust_bayes::{CliResult, GlobalOptions, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "robust-bayes",
    version,
    about = "Robustness of Bayes decisions over loss classes, and their convergence rates"
)]
struct Cli {
    /// Master seed for every random draw (overrides experiment.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum number of concurrent replications.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Flood-cost example under the Gamma(100, 193.6) posterior.
    DamDemo,
    /// Asymmetric squared-error class under a normal model: closed forms against the generic pipeline.
    NormalDemo {
        #[arg(long, default_value_t = 1.0)]
        k1: f64,
        #[arg(long, default_value_t = 2.0)]
        k2: f64,
        #[arg(long, default_value_t = 0.0)]
        mu0: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda0: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
        n_list: Vec<usize>,
    },
    /// Measure curve over a sample-size grid and its fitted log-log slope.
    Rates { config: PathBuf },
    /// Runnable checks of the regularity assumptions for a loss class.
    Diagnostics { config: PathBuf },
    /// First-order posterior expansion trend check.
    Thm81 { config: PathBuf },
    /// Second-order posterior expansion trend check.
    Thm82 { config: PathBuf },
}

fn run(cli: Cli) -> CliResult<()> {
    let opts = GlobalOptions {
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out,
    };
    match cli.command {
        Command::DamDemo => commands::cmd_dam_demo(&opts).map(drop),
        Command::NormalDemo {
            k1,
            k2,
            mu0,
            lambda0,
            lambda,
            theta,
            n_list,
        } => {
            let args = NormalDemoArgs {
                k1,
                k2,
                mu0,
                lambda0,
                lambda,
                theta,
                n_list,
            };
            commands::cmd_normal_demo(&args, &opts).map(drop)
        }
        Command::Rates { config } => {
            commands::cmd_rates(&RunConfig::load(&config)?, &opts).map(drop)
        }
        Command::Diagnostics { config } => {
            commands::cmd_diagnostics(&RunConfig::load(&config)?).map(drop)
        }
        Command::Thm81 { config } => {
            commands::cmd_expansion(Expansion::FirstOrder, &RunConfig::load(&config)?, &opts)
                .map(drop)
        }
        Command::Thm82 { config } => {
            commands::cmd_expansion(Expansion::SecondOrder, &RunConfig::load(&config)?, &opts)
                .map(drop)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
