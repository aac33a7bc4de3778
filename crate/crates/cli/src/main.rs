//! `opmult`: norms, kernel application, compactness profiles and the
//! block-transposition demo from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use opmult::{MultiplierData, NormOptions};
use opmult_cli::{
    cmd_apply, cmd_compact_test, cmd_norm, cmd_saar, parse_schedule, CliError, KernelFile, MultiplierFile, Outcome,
};

#[derive(Parser)]
#[command(name = "opmult", version, about = "Operator multiplier norms and compactness diagnostics")]
struct Cli {
    /// Target relative width of norm brackets.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Seed of the randomized lower-bound search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the CSV here and the JSON summary next to it; standard output
    /// otherwise.
    #[arg(long, global = true)]
    emit: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bracket the multiplier norm of a multiplier file.
    Norm { input: PathBuf },
    /// Apply a multiplier to a kernel tuple: the entrywise action (d_1 x d_n)
    /// for Schur data, Φ_φ (d_n x d_1) for tensor sums.
    Apply {
        input: PathBuf,
        #[arg(long)]
        kernels: PathBuf,
    },
    /// Tail-norm profile along increasing truncations.
    CompactTest {
        input: PathBuf,
        /// Comma-separated cutoffs; defaults to every cutoff below the
        /// ambient dimension.
        #[arg(long)]
        schedule: Option<String>,
    },
    /// Certificates for the block-transposition map.
    SaarDemo {
        #[arg(long, default_value_t = 8)]
        max_block: usize,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("reading {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<MultiplierData, CliError> {
    MultiplierFile::parse(&read(path)?)?.to_data()
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let opts = NormOptions { tol: cli.tol, seed: cli.seed, ..NormOptions::default() };
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        return Err(CliError::Input(format!("tol: {} outside (0, 1)", cli.tol)));
    }
    match &cli.command {
        Command::Norm { input } => cmd_norm(&load(input)?, &opts),
        Command::Apply { input, kernels } => {
            let ks = KernelFile::parse(&read(kernels)?)?.to_tuple()?;
            cmd_apply(&load(input)?, &ks)
        }
        Command::CompactTest { input, schedule } => {
            let schedule = schedule.as_deref().map(parse_schedule).transpose()?;
            cmd_compact_test(&load(input)?, schedule, &opts)
        }
        Command::SaarDemo { max_block } => cmd_saar(*max_block, &opts),
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("OPMULT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("OPMULT_THREADS: '{v}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("OPMULT_THREADS: {e}")))
}

fn main() -> ExitCode {
    // usage errors are input errors; clap's own code 2 means inconclusive here
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { opmult_cli::EXIT_INPUT as u8 } else { 0 });
        }
    };
    let start = Instant::now();
    let result = configure_threads().and_then(|_| run(&cli)).and_then(|o| {
        o.report.emit(cli.emit.as_deref())?;
        Ok(o.code)
    });
    eprintln!("wall time: {:.3} s", start.elapsed().as_secs_f64());
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
