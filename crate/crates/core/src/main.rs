use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use modeswim::commands::{self, exit_code, Outcome};
use modeswim::config::RunConfig;
use modeswim::Result;

/// Modal analysis and swimming-tendency prediction for piezo-driven plates.
#[derive(Parser, Debug)]
#[command(name = "modeswim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Config file, or the name of a bundled fixture (paper_beam, rect_robot, circ_robot, ss_square).
    #[arg(long)]
    config: String,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for parallel stages (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cantilever frequencies in air and fluid against reference values.
    BeamValidate {
        #[command(flatten)]
        common: Common,
        /// Override the relative tolerance [%].
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Mode table and shape grids.
    Modes {
        #[command(flatten)]
        common: Common,
        /// Tolerance [%] for the closed-form comparison on simply supported rectangles.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Movement map over drive frequency and phase difference.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Check that reversing the phase difference mirrors the motion.
        #[arg(long)]
        verify_reversal: bool,
    },
    /// Closed-form degenerate mode superpositions.
    Atlas {
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<Outcome> {
    let common = match &cli.command {
        Command::BeamValidate { common, .. }
        | Command::Modes { common, .. }
        | Command::Sweep { common, .. }
        | Command::Atlas { common } => common,
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| modeswim::Error::Config(format!("cannot set up {n} threads: {e}")))?;
    }
    let (config, text) = RunConfig::load(&common.config)?;
    let out = &common.out;
    match &cli.command {
        Command::BeamValidate { tolerance, .. } => commands::beam_validate(&config, &text, out, *tolerance),
        Command::Modes { tolerance, .. } => commands::modes(&config, &text, out, *tolerance),
        Command::Sweep { verify_reversal, .. } => commands::sweep(&config, &text, out, *verify_reversal),
        Command::Atlas { .. } => commands::atlas(&config, &text, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            if let Some(w) = &outcome.digest_warning {
                eprintln!("{w}");
            }
            print!("{}", outcome.report);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
