//! `vsbi`: build compliance envelopes, scan devices, check scans against
//! envelopes, cross-check time- and frequency-domain verdicts, and run modal
//! analysis on linearized models.
//!
//! Exit codes: 0 success or PASS, 1 FAIL (or an inconsistent cross-check),
//! 2 usage, input or numerical errors, 3 INCOMPLETE.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod cmd;
mod criteria;
mod output;

use criteria::CriteriaArgs;
use output::FormatArg;

#[derive(Debug, Parser)]
#[command(name = "vsbi", version, about = "Frequency-domain compliance toolkit for grid-forming inverters")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Directory for output files; created when missing.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Output formats, comma-separated or repeated.
    #[arg(long, global = true, value_enum, value_delimiter = ',', default_value = "all")]
    pub format: Vec<FormatArg>,
    /// Allowed shortfall below the envelope before a point counts as a violation, dB.
    #[arg(long, global = true, default_value_t = 0.0)]
    pub tolerance_db: f64,
    /// Print extra diagnostics.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a minimum-magnitude envelope (CSV samples, JSON metadata, SVG plot).
    Envelope {
        #[command(flatten)]
        criteria: CriteriaArgs,
        /// Number of log-spaced samples in the envelope CSV.
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Check a Jacobian scan CSV against an envelope. Exit 0 PASS, 1 FAIL, 3 INCOMPLETE.
    Check {
        /// Scan CSV as written by `vsbi scan`.
        #[arg(long)]
        scan: PathBuf,
        #[command(flatten)]
        criteria: CriteriaArgs,
    },
    /// Measure a device's Jacobian by sinusoidal perturbation.
    Scan(cmd::scan::ScanArgs),
    /// Judge a device both by step response and by frequency response. Exit 0
    /// when both verdicts agree and pass.
    Verify {
        /// Device description file (TOML).
        #[arg(long)]
        device: PathBuf,
        #[command(flatten)]
        criteria: CriteriaArgs,
    },
    /// Eigenvalues, participation factors and voltage observability of a model bundle.
    Modal {
        /// Model bundle file.
        #[arg(long)]
        bundle: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Envelope { criteria, points } => cmd::envelope::run(&cli.global, criteria, *points),
        Command::Check { scan, criteria } => cmd::check::run(&cli.global, scan, criteria),
        Command::Scan(args) => cmd::scan::run(&cli.global, args),
        Command::Verify { device, criteria } => cmd::verify::run(&cli.global, device, criteria),
        Command::Modal { bundle } => cmd::modal::run(&cli.global, bundle),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
