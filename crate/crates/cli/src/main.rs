//! `wshift`: batch verification and report generation for weighted
//! multishifts on the unit ball.
//!
//! Exit status: 0 clean, 1 the report carries a witness (or, for `example45`,
//! a stage failed), 2 bad input or configuration.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wshift_core::curvature::GridSpec;

#[derive(Parser, Debug)]
#[command(name = "wshift", version, about = "Exact and high-precision diagnostics for weighted multishifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the report here (atomically) instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format; CSV carries the plot-ready rows.
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct NumericArgs {
    /// Series truncation degree for metric evaluation.
    #[arg(long, default_value_t = 600)]
    pub eval_degree: u64,
    /// Working precision in bits.
    #[arg(long, default_value_t = 80, value_parser = clap::value_parser!(u32).range(53..))]
    pub precision_bits: u32,
    /// Relative tolerance for positive semidefiniteness.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Sample grid, `radial:<steps>x<angles>`.
    #[arg(long, default_value = "radial:10x8")]
    pub grid: GridSpec,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the binomial and multinomial identities the defect formulas rely on.
    VerifyIdentities {
        /// Largest order for the convolution and alternating-sum identities.
        #[arg(long, default_value_t = 8)]
        n_max: u64,
        /// Largest |beta| for the Vandermonde identity (dimensions 1 to 4).
        #[arg(long, default_value_t = 8)]
        beta_max: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Scan the defect diagonals d_k, k = 1..=n, for a negative entry.
    CheckHyper {
        /// Weight specification (JSON).
        #[arg(long, required = true)]
        weights: PathBuf,
        #[arg(long)]
        n: u64,
        /// Largest multi-index degree scanned.
        #[arg(long, default_value_t = 20)]
        degree: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Compare the incoming ratio sum with |a|/(|a|+n-1) on every nonzero index.
    Necessary {
        #[arg(long, required = true)]
        weights: PathBuf,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 20)]
        degree: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Scan squared weight ratios along rays for two weights.
    SimilarityScan {
        /// Exactly two weight specifications.
        #[arg(long, num_args = 1..=2, required = true)]
        weights: Vec<PathBuf>,
        #[arg(long, default_value_t = 20)]
        degree: u32,
        /// Longest ray scanned.
        #[arg(long, default_value_t = 10)]
        ray_length: u32,
        /// Spread growth between L/2 and L that raises the growth flag.
        #[arg(long, default_value_t = wshift_core::similarity::DEFAULT_GROWTH_FACTOR)]
        growth_factor: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Complex Hessian of log h on a grid; with two weights, of log(h1/h2).
    Curvature {
        /// One or two weight specifications.
        #[arg(long, num_args = 1..=2, required = true)]
        weights: Vec<PathBuf>,
        #[command(flatten)]
        numeric: NumericArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact finite truncation: commutators, defect diagonals, decay curves.
    Truncate {
        #[arg(long, required = true)]
        weights: PathBuf,
        /// Largest defect order reported.
        #[arg(long, default_value_t = 2)]
        n: u64,
        /// Truncation degree.
        #[arg(long, default_value_t = 8)]
        degree: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reproduce the ray-perturbed power kernel example end to end.
    Example45 {
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Number of variables.
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Number of perturbed blocks.
        #[arg(long = "blocks", default_value_t = 2)]
        blocks: u32,
        #[command(flatten)]
        numeric: NumericArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    use commands::*;
    let (report, output) = match cli.command {
        Command::VerifyIdentities { n_max, beta_max, output } => {
            (verify_identities(n_max, beta_max)?, output)
        }
        Command::CheckHyper { weights, n, degree, output } => {
            (check_hyper(&weights, n, degree, output.format)?, output)
        }
        Command::Necessary { weights, n, degree, output } => {
            (necessary(&weights, n, degree)?, output)
        }
        Command::SimilarityScan { weights, degree, ray_length, growth_factor, output } => (
            similarity(&weights, degree, ray_length, growth_factor, output.format)?,
            output,
        ),
        Command::Curvature { weights, numeric, output } => (curvature(&weights, &numeric)?, output),
        Command::Truncate { weights, n, degree, output } => (truncate(&weights, n, degree)?, output),
        Command::Example45 { n, m, blocks, numeric, output } => {
            (example45(n, m, blocks, &numeric)?, output)
        }
    };
    output::emit(&report, &output)?;
    if let Some(msg) = &report.finding {
        eprintln!("{msg}");
    }
    Ok(if report.failed() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors and 0 on --help/--version
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
