mod commands;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{FraccalcOpts, KernelOpts, LpNormOpts, MlOpts, SimulateOpts, VerifyOpts};

#[derive(Debug, Parser)]
#[command(name = "fspde", version, about = "Time-fractional SPDE numerics and estimate checks")]
struct Cli {
    /// Worker threads (overrides FSPDE_THREADS and the config key `threads`).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the Mittag-Leffler function E_{a,b}(z).
    Ml(MlOpts),
    /// Fractional integral or derivative of a sampled function.
    Fraccalc(FraccalcOpts),
    /// Sample a fundamental-solution kernel on the torus.
    Kernel(KernelOpts),
    /// Lebesgue, Bessel-potential or Besov norm of a field file.
    LpNorm(LpNormOpts),
    /// Solve an experiment configuration for every seed.
    Simulate(SimulateOpts),
    /// Run one of the estimate checks and write its report.
    Verify(VerifyOpts),
}

/// Exit status and message of a failed run.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const FAILED: u8 = 1;
    pub const CONFIG: u8 = 2;

    pub fn config(message: impl Into<String>) -> Self {
        Self { code: Self::CONFIG, message: message.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::config(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<fspde_core::Error> for CliError {
    fn from(e: fspde_core::Error) -> Self {
        use fspde_core::Error as E;
        let code = match e {
            E::Accuracy { .. } | E::NonConvergence { .. } => Self::FAILED,
            _ => Self::CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

/// `--threads`, then `FSPDE_THREADS`, then the config value, then all cores.
pub fn init_threads(flag: Option<usize>, config: Option<usize>) -> Result<(), CliError> {
    let env = match std::env::var("FSPDE_THREADS") {
        Ok(s) if flag.is_none() => Some(
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::config(format!("FSPDE_THREADS: '{s}' is not a thread count")))?,
        ),
        _ => None,
    };
    let Some(n) = flag.or(env).or(config) else {
        return Ok(());
    };
    if n == 0 {
        return Err(CliError::config("thread count must be >= 1"));
    }
    // a second initialisation in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn read_text(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    let result = match cli.command {
        Command::Ml(o) => commands::ml(o, threads),
        Command::Fraccalc(o) => commands::fraccalc(o, threads),
        Command::Kernel(o) => commands::kernel(o, threads),
        Command::LpNorm(o) => commands::lp_norm(o, threads),
        Command::Simulate(o) => commands::simulate(o, threads),
        Command::Verify(o) => commands::verify(o, threads),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
