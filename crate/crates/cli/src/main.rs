use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coherence::measures::RoofOptions;
use coherence_cli::commands::{self, ConvertOptions, FunctionalName};
use coherence_cli::{demo, CliError};

/// Coherence measures and optimal pure-state conversion under incoherent operations.
///
/// Exit codes: 0 success, 1 validation failure, 2 usage error.
#[derive(Parser)]
#[command(name = "coherence", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct FunctionalArgs {
    /// Generating function.
    #[arg(long = "f", value_enum)]
    f: FunctionalName,
    /// Order of the alpha entropy, in (0, 1).
    #[arg(long)]
    alpha: Option<f64>,
    /// Rank at which the Ky Fan tail starts (at least 2).
    #[arg(long)]
    l: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Coherence of a pure state under a built-in measure.
    Measure {
        state: PathBuf,
        #[command(flatten)]
        functional: FunctionalArgs,
    },
    /// Optimal probability of converting one pure state into another.
    Convert {
        source: PathBuf,
        target: PathBuf,
        /// Write the optimal protocol and its verification report here.
        #[arg(long)]
        protocol: Option<PathBuf>,
        /// Number of source copies.
        #[arg(long, default_value_t = 1)]
        copies: usize,
        /// Also tabulate target copies 1..=N.
        #[arg(long, value_name = "N", default_value_t = 1)]
        target_copies: usize,
    },
    /// Completeness and incoherence of a channel or exported protocol.
    VerifyChannel { channel: PathBuf },
    /// Breakpoints, ratios and intermediate state of the optimal protocol.
    Ladder { source: PathBuf, target: PathBuf },
    /// Convex-roof upper bound for a density matrix.
    Roof {
        density: PathBuf,
        #[command(flatten)]
        functional: FunctionalArgs,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the ensemble attaining the bound here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the published worked examples.
    PaperDemo {
        /// Machine-readable report.
        #[arg(long)]
        json: bool,
        /// Absolute tolerance shared by every check.
        #[arg(long, default_value_t = demo::DEFAULT_TOLERANCE, allow_hyphen_values = true)]
        tolerance: f64,
    },
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let f = |a: FunctionalArgs| commands::builtin(a.f, a.alpha, a.l);
    match command {
        Command::Measure { state, functional } => commands::measure(out, &state, f(functional)?),
        Command::Convert {
            source,
            target,
            protocol,
            copies,
            target_copies,
        } => commands::convert(
            out,
            &source,
            &target,
            &ConvertOptions {
                protocol: protocol.as_deref(),
                copies,
                target_copies,
            },
        ),
        Command::VerifyChannel { channel } => commands::verify_channel(out, &channel),
        Command::Ladder { source, target } => commands::ladder(out, &source, &target),
        Command::Roof {
            density,
            functional,
            restarts,
            seed,
            out: ensemble,
        } => {
            if restarts == 0 {
                return Err(CliError::Usage("--restarts must be at least 1".into()));
            }
            let options = RoofOptions {
                restarts,
                seed,
                ..RoofOptions::default()
            };
            commands::roof(out, &density, f(functional)?, &options, ensemble.as_deref())
        }
        Command::PaperDemo { json, tolerance } => demo::paper_demo(out, json, tolerance),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
