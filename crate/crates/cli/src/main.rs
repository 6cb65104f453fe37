#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod dataset;
mod exit;
mod output;

#[derive(Debug, Parser)]
#[command(
    name = "orthores",
    version,
    about = "Independent regression residuals via Householder QR"
)]
pub struct Cli {
    /// Tolerance for identity and oracle checks.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,

    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, env = "ORTHORES_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Householder factorization of every column of the input.
    Qr {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Policy::Standard)]
        policy: Policy,
    },
    /// Least-squares fit; the last column is the response. A single column is
    /// fitted against an intercept.
    Residuals { input: PathBuf },
    /// Independent residuals with the same sum of squares as the ordinary ones.
    Indep {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::General)]
        mode: Mode,
        /// minus|plus for student mode, a|b for univariate mode.
        #[arg(long, value_enum)]
        variant: Option<Variant>,
        /// 0-based rows used as the selected block (general mode).
        #[arg(long, value_delimiter = ',')]
        rows: Option<Vec<usize>>,
    },
    /// Monte Carlo moments of W and RᵀR.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = ConstructionArg::Generic)]
        construction: ConstructionArg,
    },
    /// Numerical self-checks of the formulas.
    Check {
        #[arg(long, value_delimiter = ',', default_value = "5,20,100")]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Timing of explicit-basis, reflection and closed-formula application.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1000,4000,16000")]
        n_grid: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        p: usize,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Policy {
    Standard,
    ToPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Student,
    Univariate,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    Minus,
    Plus,
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructionArg {
    Generic,
    StudentMinus,
    StudentPlus,
    UnivariateA,
    UnivariateB,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit::code_for(&err))
        }
    }
}
