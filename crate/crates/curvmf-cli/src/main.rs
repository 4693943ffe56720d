//! Command-line runner: `solve`, `verify`, `sweep` and `mesh` subcommands
//! driven by a TOML configuration.
//!
//! Exit codes: 0 success, 2 infeasible curvature signs, 3 non-convergence,
//! 4 configuration or I/O error.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use run::Overrides;

#[derive(Debug)]
pub enum CliError {
    /// Malformed or inconsistent configuration, bad I/O: exit 4.
    Config(String),
    /// The sign conditions rule out any solution: exit 2.
    Infeasible(String),
    /// The solver ran but did not converge: exit 3.
    NonConvergence(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Infeasible(_) => 2,
            CliError::NonConvergence(_) => 3,
            CliError::Config(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Infeasible(m) | CliError::NonConvergence(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "curvmf",
    about = "Prescribe Gaussian and geodesic curvature on model surfaces by mean-field energy minimization"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Minimize the energy for the configured problem and write the solution.
    Solve {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        refinement: Option<usize>,
    },
    /// Recompute residuals for a solution CSV against the configured problem.
    Verify {
        config: PathBuf,
        solution: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured battery/sweep experiment (tm, trace, sharpness,
    /// lambda_sweep, perturb).
    Sweep {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the configured mesh and export it with its background check.
    Mesh {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        refinement: Option<usize>,
    },
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Solve {
            config,
            seed,
            out,
            refinement,
        } => {
            let cfg = RunConfig::load(&config)?;
            run::solve(
                &cfg,
                &Overrides {
                    seed,
                    out,
                    refinement,
                },
            )
        }
        Cmd::Verify {
            config,
            solution,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            run::verify(
                &cfg,
                &solution,
                &Overrides {
                    seed: None,
                    out,
                    refinement: None,
                },
            )
        }
        Cmd::Sweep { config, seed, out } => {
            let cfg = RunConfig::load(&config)?;
            run::sweep(
                &cfg,
                &Overrides {
                    seed,
                    out,
                    refinement: None,
                },
            )
        }
        Cmd::Mesh {
            config,
            out,
            refinement,
        } => {
            let cfg = RunConfig::load(&config)?;
            run::mesh(
                &cfg,
                &Overrides {
                    seed: None,
                    out,
                    refinement,
                },
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("curvmf: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
