//! `mfhh`: Milnor and Tjurina algebras, A∞ checks, Morita gluing and
//! matrix-factorization transfer from the command line.

mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "mfhh", version, about = "Exact singularity and A-infinity computations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Polynomial expression; repeat for commands taking two.
    #[arg(long, global = true)]
    pub expr: Vec<String>,
    /// Input file: an expression, or a JSON file for the file-based commands.
    #[arg(long, global = true)]
    pub file: Vec<PathBuf>,
    /// Comma-separated variable names, in order.
    #[arg(long, global = true, value_delimiter = ',')]
    pub vars: Option<Vec<String>>,
    /// Fixed jet order; disables the automatic search.
    #[arg(long, global = true)]
    pub trunc: Option<u32>,
    #[arg(long, global = true)]
    pub max_arity: Option<usize>,
    #[arg(long, global = true)]
    pub json: bool,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory against which relative file arguments are resolved.
    #[arg(long, global = true)]
    pub fixtures: Option<PathBuf>,
    /// Where to write the produced algebra file, if any.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Milnor algebra C[[x]]/J_W.
    Milnor,
    /// Tjurina algebra C[[x]]/(J_W + (W)).
    Tjurina,
    /// Decides W ∈ J_W and prints the Euler witness.
    Quasihom,
    /// Compares μ, τ and the Hilbert function of T for two potentials.
    Fingerprint,
    /// Koszul matrix factorization of W, or a factorization file.
    Koszul {
        #[arg(long)]
        check: bool,
    },
    /// Cohomology of the endomorphism dga of the Koszul factorization.
    Endo,
    /// Minimal model by homotopy transfer.
    Transfer,
    /// Class of the transferred structure against quasi-homogeneity of W.
    Compare,
    /// A∞ relations of an algebra file, or a seeded Maurer–Cartan probe.
    AinftyCheck {
        /// Perturbation file for a Maurer–Cartan check.
        #[arg(long)]
        perturbation: Option<PathBuf>,
    },
    /// Upper-triangular algebra from a bimodule file, or from two algebras.
    Glue {
        #[arg(long)]
        left: Option<PathBuf>,
        #[arg(long)]
        right: Option<PathBuf>,
    },
    /// Rank report for the exact triangle of Hochschild complexes.
    Triangle {
        #[arg(long)]
        left: Option<PathBuf>,
        #[arg(long)]
        right: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = commands::run(&cli);
    let text = if cli.common.json {
        report.render_json()
    } else {
        report.render_text()
    };
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
    ExitCode::from(report.status() as u8)
}
