//! `psq`: spectral analysis of sojourn times in finite-population
//! processor-sharing queues.
//!
//! Subcommands reproduce the model's eigenvalue tables, eigenvector figure
//! data, tail-diagnostic tables and Monte Carlo validation reports as CSV,
//! JSON or aligned text.

mod commands;
mod output;

use clap::{Parser, Subcommand};
use output::{Format, OutputSpec};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "psq",
    version,
    about = "Finite-population processor-sharing queue: spectra, sojourn tails, simulation",
    after_help = "Exit codes: 0 success, 2 validation error, 3 numerical-tolerance failure.\n\
                  PSQ_THREADS caps the worker-thread count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Decimal places for CSV numbers (1-16), or 17 for machine mode
    /// (17 significant digits).
    #[arg(long, default_value_t = 4)]
    precision: usize,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

impl OutputArgs {
    fn to_spec(&self) -> Result<OutputSpec, CliError> {
        if !(1..=17).contains(&self.precision) {
            return Err(CliError::Validation(format!(
                "--precision must be in 1..=17, got {}",
                self.precision
            )));
        }
        Ok(OutputSpec {
            format: self.format,
            precision: self.precision,
            out: self.out.clone(),
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Exact and asymptotic eigenvalues with relative errors.
    Spectrum {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        rho: f64,
        /// Number of eigenvalues (starting from j = 0).
        #[arg(long)]
        count: usize,
        /// Override the automatic regime selection (sub|super|crit).
        #[arg(long)]
        regime: Option<String>,
        /// Restrict the subcritical expansion to this many terms (1-4).
        #[arg(long)]
        terms: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact eigenvector profile with an asymptotic overlay.
    Eigvec {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        rho: f64,
        /// Eigenvalue index.
        #[arg(long)]
        j: usize,
        /// Overlay scale: y, x, xi, smalln (rho < 1); X, xi, smalln
        /// (rho > 1); U, V, xi, smalln (critical).
        #[arg(long)]
        scale: Option<String>,
        /// State range lo:hi (inclusive); defaults to 0:N-1.
        #[arg(long)]
        range: Option<String>,
        /// Also emit the symmetrized column rho^{n/2} phi_j(n) (rho < 1).
        #[arg(long)]
        symmetrized: bool,
        /// Include the first correction term in the y-scale overlay.
        #[arg(long)]
        correction: bool,
        /// Override the automatic regime selection (sub|super|crit).
        #[arg(long)]
        regime: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Regenerate one of the five reference tables.
    Table {
        /// Table number (1-5).
        #[arg(long)]
        which: usize,
        /// Override the time grid of tables 3-5 (comma-separated).
        #[arg(long = "t-grid")]
        t_grid: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo simulation: tail-rate estimate and histogram comparison.
    Simulate {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tail cutoff for the rate fit; default 3/nu0 from a pilot fit.
        #[arg(long = "t-min")]
        t_min: Option<f64>,
        /// Number of equal-probability histogram cells.
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// CLI failure modes, mapped to exit codes.
pub enum CliError {
    /// Bad flags or unusable parameter combinations (exit 2).
    Validation(String),
    /// Numerical failure inside the computation (exit 3).
    Numerical(String),
    /// I/O problems writing the report (exit 3).
    Io(String),
}

impl From<psq_core::Error> for CliError {
    fn from(e: psq_core::Error) -> Self {
        use psq_core::Error::*;
        match e {
            InvalidParams(_) | Regime { .. } | Domain(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("PSQ_THREADS") {
        if let Ok(k) = v.trim().parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum {
            n,
            rho,
            count,
            regime,
            terms,
            output,
        } => commands::spectrum::run(n, rho, count, regime.as_deref(), terms, &output.to_spec()?),
        Command::Eigvec {
            n,
            rho,
            j,
            scale,
            range,
            symmetrized,
            correction,
            regime,
            output,
        } => commands::eigvec::run(
            n,
            rho,
            j,
            scale.as_deref(),
            range.as_deref(),
            symmetrized,
            correction,
            regime.as_deref(),
            &output.to_spec()?,
        ),
        Command::Table {
            which,
            t_grid,
            output,
        } => commands::table::run(which, t_grid.as_deref(), &output.to_spec()?),
        Command::Simulate {
            n,
            rho,
            samples,
            seed,
            t_min,
            bins,
            output,
        } => commands::simulate::run(n, rho, samples, seed, t_min, bins, &output.to_spec()?),
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) | Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
