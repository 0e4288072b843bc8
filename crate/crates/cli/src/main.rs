use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use degen_blowup_cli::{run, Command};

#[derive(Parser)]
#[command(name = "degen-blowup", version, about = "Blow-up solution experiments for degenerate elliptic problems")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// TOML experiment (or sweep) file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Suppress the summary line
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Solve one problem and write the nodal solution
    Solve,
    /// Fit the blow-up rate near the boundary
    Rate,
    /// Check the explicit sub- and supersolution inequalities
    VerifySubsuper,
    /// Run the nested-domain exhaustion
    Exhaust,
    /// Tabulate the local integrability check for the weight catalogue
    B2,
    /// Run the jobs of a sweep file concurrently
    Sweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Sub::Solve => Command::Solve,
        Sub::Rate => Command::Rate,
        Sub::VerifySubsuper => Command::VerifySubsuper,
        Sub::Exhaust => Command::Exhaust,
        Sub::B2 => Command::B2,
        Sub::Sweep => Command::Sweep,
    };
    match run(command, cli.config.as_deref(), cli.out.as_deref()) {
        Ok(outcome) => {
            if !cli.quiet {
                println!("{}", outcome.summary);
            }
            ExitCode::from(outcome.status.code() as u8)
        }
        Err(e) => {
            eprintln!("degen-blowup: {e}");
            ExitCode::from(e.status().code() as u8)
        }
    }
}
