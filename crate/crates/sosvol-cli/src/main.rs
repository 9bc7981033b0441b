//! Command-line driver: volume bounds, approximation sweeps, closed-form
//! degree bounds, rate fitting, and Monte Carlo oracles over a shared
//! problem-file format.

mod commands;
mod output;
mod problem;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::{ApproxArgs, BoundArgs, OracleArgs, RateArgs, VolumeArgs};
use problem::BasisSpec;

impl clap::ValueEnum for BasisSpec {
    fn value_variants<'a>() -> &'a [Self] {
        &[BasisSpec::Monomial, BasisSpec::Chebyshev]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(match self {
            BasisSpec::Monomial => clap::builder::PossibleValue::new("monomial"),
            BasisSpec::Chebyshev => clap::builder::PossibleValue::new("chebyshev"),
        })
    }
}

#[derive(Parser)]
#[command(
    name = "sosvol",
    version,
    about = "Certified volume upper bounds for basic semialgebraic sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the degree sweep and write the per-level CSV and report
    Volume {
        /// Problem file (JSON)
        file: PathBuf,
        #[arg(long)]
        dmin: Option<usize>,
        #[arg(long)]
        dmax: Option<usize>,
        #[arg(long)]
        step: Option<usize>,
        #[arg(long, value_enum)]
        basis: Option<BasisSpec>,
        /// Solver feasibility and gap tolerance
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo oracle sample count
        #[arg(long)]
        samples: Option<usize>,
        /// Output directory
        #[arg(long, default_value = "sosvol-out")]
        out: PathBuf,
        /// Report wall-clock times (makes outputs run-dependent)
        #[arg(long)]
        timing: bool,
        /// Dump each level in SDPA sparse format
        #[arg(long)]
        sdpa: bool,
    },
    /// One-sided L1 sweep, sup-norm probe, modulus and tube estimates
    Approx {
        file: PathBuf,
        /// Comma-separated degrees, e.g. 4,8,16
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<usize>>,
        /// Constraint grid size (points)
        #[arg(long)]
        grid: Option<usize>,
        /// Comma-separated tube radii, e.g. 0.05,0.1
        #[arg(long = "t-values", value_delimiter = ',')]
        t_values: Option<Vec<f64>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        basis: Option<BasisSpec>,
        /// Monte Carlo sample count for modulus/tube estimates
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value = "sosvol-out")]
        out: PathBuf,
        #[arg(long)]
        timing: bool,
    },
    /// Evaluate the closed-form degree bound for a target accuracy
    Bound {
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        c1: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        c2: f64,
        #[arg(long = "cG", default_value_t = 1.0, allow_negative_numbers = true)]
        c_g: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        r: f64,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Fit convergence-rate models to a (d, value) CSV
    Rate {
        /// CSV with d,value rows (a header line is skipped)
        csv: PathBuf,
        #[arg(long = "vol-ref")]
        vol_ref: f64,
        /// Also write the fit table to this file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo reference volume with confidence interval
    Oracle {
        file: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Halton sampling; the estimate is emitted without a standard error
        #[arg(long)]
        low_discrepancy: bool,
        /// Write a one-row CSV here
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Volume {
            file,
            dmin,
            dmax,
            step,
            basis,
            tol,
            seed,
            samples,
            out,
            timing,
            sdpa,
        } => commands::cmd_volume(VolumeArgs {
            file,
            dmin,
            dmax,
            step,
            basis,
            tol,
            seed,
            samples,
            out,
            timing,
            sdpa,
        }),
        Command::Approx {
            file,
            degrees,
            grid,
            t_values,
            seed,
            basis,
            samples,
            out,
            timing,
        } => commands::cmd_approx(ApproxArgs {
            file,
            degrees,
            grid,
            t_values,
            seed,
            basis,
            samples,
            out,
            timing,
        }),
        Command::Bound {
            epsilon,
            c1,
            c2,
            c_g,
            r,
            n,
        } => commands::cmd_bound(BoundArgs {
            epsilon,
            c1,
            c2,
            c_g,
            r,
            n,
        }),
        Command::Rate { csv, vol_ref, out } => commands::cmd_rate(RateArgs { csv, vol_ref, out }),
        Command::Oracle {
            file,
            samples,
            seed,
            low_discrepancy,
            out,
        } => commands::cmd_oracle(OracleArgs {
            file,
            samples,
            seed,
            low_discrepancy,
            out,
        }),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
