use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Sum-of-squares decompositions of nonnegative trigonometric polynomials.
#[derive(Parser, Debug)]
#[command(name = "trigsos", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a random nonnegative instance.
    Gen {
        #[arg(long)]
        degree: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Minimum value of the instance; default 0.1·std(p).
        #[arg(long)]
        min_offset: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factor p = Σ u_i² from a JSON polynomial, or a generated instance.
    Decompose {
        input: Option<PathBuf>,
        /// Generate an instance of this degree instead of reading input.
        #[arg(long, conflicts_with = "input")]
        degree: Option<usize>,
        /// Relative residual f/‖p‖² required for exit code 0.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Project p onto the SOS cone.
    Project {
        input: PathBuf,
        /// Relative residual below which p counts as SOS (exit 0).
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Certify nonnegativity on intervals; input {"p": [...], "spec": {...}}.
    CertifyInterval {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Search for an SOS point satisfying a linear coefficient map.
    Sosopt {
        input: PathBuf,
        #[arg(long, default_value_t = trigsos::extensions::FEASIBILITY_TOL)]
        tol: f64,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Build (if absent) and verify a certificate; input {"u", "squares", "eta", "certificate"?}.
    CheckCert {
        input: PathBuf,
        /// Identity residual allowed relative to 1 + ‖p‖².
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterations and timings over seeded instances.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        degree: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "4")]
        rank: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct SolveArgs {
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Write the iteration trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

/// Outcome of a command that ran to completion.
enum Status {
    Ok,
    /// Infeasible or residual above tolerance.
    AboveTol,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = commands::init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    match commands::run(cli.command) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::AboveTol) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
