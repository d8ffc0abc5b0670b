//! `ephol`: locate exceptional points, track loops, export sheet surfaces,
//! tabulate exchange-generator products and run the acceptance checks.
//!
//! Exit status: 0 success, 1 a verification check failed, 2 configuration
//! error, 3 numerical or runtime error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ep_holonomy::verify::Suite;

use crate::config::{ConfigError, Format};

#[derive(Parser, Debug)]
#[command(name = "ephol", version, about = "Exceptional points and eigenmode holonomy of 2×2/3×3 matrix families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone)]
pub struct LocateArgs {
    /// Built-in family name (paper3x3, paper2x2, tep3x3) or descriptor file.
    #[arg(long)]
    pub family: Option<String>,
    /// `a0,a1,b0,b1`
    #[arg(long, allow_hyphen_values = true)]
    pub region: Option<String>,
    /// `NA,NB` grid points along alpha and beta.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct TrackArgs {
    #[arg(long)]
    pub family: Option<String>,
    /// Loop descriptor file.
    #[arg(long = "loop")]
    pub loop_file: Option<PathBuf>,
    #[arg(long)]
    pub cycles: Option<usize>,
    /// Transport eigenvectors and report signs.
    #[arg(long)]
    pub track_vectors: bool,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Run one suite only: algebra, locate, track or properties.
    #[arg(long)]
    pub only: Option<Suite>,
    /// Family file to validate before running the checks.
    #[arg(long)]
    pub family: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find and refine EPs in a parameter region.
    Locate {
        #[command(flatten)]
        args: LocateArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Continue eigenvalues around a loop and report the holonomy.
    Track {
        #[command(flatten)]
        args: TrackArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Export continued eigenvalue sheets over a grid as CSV.
    Surface {
        #[command(flatten)]
        args: LocateArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Print products and orders of every ordering of exchange generators.
    Algebra {
        #[command(flatten)]
        common: Common,
    },
    /// Run the acceptance checks.
    Verify {
        #[command(flatten)]
        args: VerifyArgs,
        #[command(flatten)]
        common: Common,
    },
}

/// Why a command stopped.
pub enum Failure {
    Config(ConfigError),
    Runtime(ep_holonomy::Error),
    Io(String),
    ChecksFailed,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<ep_holonomy::Error> for Failure {
    fn from(e: ep_holonomy::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Locate { args, common } => commands::locate(&args, &common),
        Command::Track { args, common } => commands::track(&args, &common),
        Command::Surface { args, common } => commands::surface(&args, &common),
        Command::Algebra { common } => commands::algebra(&common),
        Command::Verify { args, common } => commands::verify(&args, &common),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::ChecksFailed) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(3)
        }
    }
}
