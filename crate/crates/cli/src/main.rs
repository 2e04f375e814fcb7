//! `daps`: simulate, estimate, analyze and report detector-agnostic
//! phase-space scans.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod analyze;
mod config;
mod data;
mod error;
mod estimate;
mod io;
mod records;
mod report;
mod simulate;

#[derive(Parser)]
#[command(
    name = "daps",
    version,
    about = "Detector-agnostic phase-space distributions from multiplexed click statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a signal scan and its paired vacuum scan.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Overrides the seed of the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the heralding outcomes, e.g. `0,1,2`.
        #[arg(long, value_delimiter = ',')]
        khs: Option<Vec<usize>>,
    },
    /// Estimate G_z, g_min, mu_min and the detector-independent amplitude.
    Estimate {
        dataset: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Values of z for G_z.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.5, 0.0, 1.0])]
        z: Vec<f64>,
        /// Weight vector Z for the generating function; repeatable.
        #[arg(long = "zvec", allow_hyphen_values = true)]
        zvec: Vec<String>,
    },
    /// Vacuum-anchored analysis of one or more datasets.
    Analyze {
        #[arg(required = true)]
        datasets: Vec<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Output directory.
        #[arg(long)]
        output: PathBuf,
        #[arg(long, allow_negative_numbers = true, default_value_t = -1.5)]
        z: f64,
        #[arg(long, value_enum, default_value_t = analyze::VariableArg::Di)]
        variable: analyze::VariableArg,
        /// Polynomial degree per dataset for `fit`; defaults to the heralding outcome.
        #[arg(long, value_delimiter = ',')]
        khs: Option<Vec<usize>>,
        /// Hold the decay of the heralded fit at the vacuum value.
        #[arg(long)]
        fixed_decay: bool,
        /// z grid `start:stop:step` for `optimal-z`.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Collect result files into a Markdown report.
    Report {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Fit,
    Predict,
    Discriminate,
    OptimalZ,
}

fn run(cli: Cli) -> error::CliResult<()> {
    match cli.command {
        Command::Simulate {
            config,
            output,
            seed,
            khs,
        } => simulate::run(&config, &output, seed, khs),
        Command::Estimate {
            dataset,
            output,
            z,
            zvec,
        } => {
            let zvecs = zvec
                .iter()
                .map(|s| estimate::parse_vector(s))
                .collect::<Result<Vec<_>, _>>()?;
            estimate::run(&dataset, &output, &z, &zvecs)
        }
        Command::Analyze {
            datasets,
            mode,
            output,
            z,
            variable,
            khs,
            fixed_decay,
            grid,
        } => {
            let opts = analyze::Options {
                z,
                variable: variable.into(),
                khs,
                fixed_decay,
            };
            match mode {
                Mode::Fit => analyze::fit(&datasets, &output, &opts),
                Mode::Predict => analyze::predict(&datasets, &output, &opts),
                Mode::Discriminate => analyze::discriminate(&datasets, &output, &opts),
                Mode::OptimalZ => analyze::optimal_z(&datasets, &output, grid.as_deref()),
            }
        }
        Command::Report { inputs, output } => report::run(&inputs, &output),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("daps: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
