//! Batch driver behind the `hamlink` binary.
//!
//! Every subcommand reads one TOML run configuration (see [`config`]) and
//! writes its artifacts into the output directory. Exit status: 0 when every
//! verdict in scope passes, 1 on a failed verdict, 2 on usage or
//! configuration errors, 3 on I/O errors.

// `!(x > 0.0)` is how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

pub mod commands;
pub mod config;
mod json;

pub use commands::{execute, Outcome};
pub use config::{parse_config, parse_potential, PotentialSource, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Caps the worker count of the solver's thread pool.
pub const THREADS_ENV: &str = "HAMLINK_THREADS";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{}: {reason}", path.display())]
    Io { path: PathBuf, reason: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) | Self::Config(_) => EXIT_USAGE,
            Self::Io { .. } => EXIT_IO,
        }
    }

    pub(crate) fn io(path: &Path, e: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Eigenpairs of A and L and bases of Y and Z as CSV.
    Spectra,
    /// Sampled checks of the potential hypotheses D1 to D4.
    Check,
    /// Critical points, linking geometry and the two-solution certificate.
    Solve,
    /// Recompute a persisted solution set and report drift.
    Verify,
    /// Text summary plus plot-ready CSVs of I along rays and planes.
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Spectra => "spectra",
            Self::Check => "check",
            Self::Solve => "solve",
            Self::Verify => "verify",
            Self::Report => "report",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hamlink",
    version,
    about = "Periodic solutions of discrete Hamiltonian systems"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed for every random stream; overrides `solver.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Suppress the summary on stdout.
    #[arg(long)]
    pub quiet: bool,
}

/// Worker count from `HAMLINK_THREADS`, capped at the available parallelism.
pub fn thread_count(var: Option<&str>) -> Result<usize, CliError> {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match var {
        None => Ok(available),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n.min(available)),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV}: must be a positive integer, got {s:?}"
            ))),
        },
    }
}

/// Load the config named on the command line and apply flag overrides.
pub fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| CliError::io(&cli.config, e))?;
    let base = cli.config.parent().unwrap_or(Path::new("."));
    let mut cfg = parse_config(&text, base)?;
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    } else if cfg.output_dir.is_relative() {
        cfg.output_dir = base.join(&cfg.output_dir);
    }
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

/// Run one invocation and return its exit status.
pub fn run(cli: &Cli) -> i32 {
    let result = (|| {
        let threads = thread_count(std::env::var(THREADS_ENV).ok().as_deref())?;
        let cfg = load(cli)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        pool.install(|| execute(cli.command, &cfg, threads))
    })();
    match result {
        Ok(outcome) => {
            if !cli.quiet {
                print!("{}", outcome.summary);
            }
            if outcome.passed {
                EXIT_OK
            } else {
                if cli.quiet {
                    eprint!("{}", outcome.summary);
                }
                EXIT_VERDICT
            }
        }
        Err(e) => {
            eprintln!("hamlink {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_env_parsing() {
        let available = std::thread::available_parallelism().map_or(1, |n| n.get());
        assert_eq!(thread_count(None).unwrap(), available);
        assert_eq!(thread_count(Some("1")).unwrap(), 1);
        assert_eq!(thread_count(Some("100000")).unwrap(), available);
        assert_eq!(thread_count(Some("0")).unwrap_err().exit_code(), EXIT_USAGE);
        assert_eq!(
            thread_count(Some("four")).unwrap_err().exit_code(),
            EXIT_USAGE
        );
    }

    #[test]
    fn cli_parses_flags() {
        let cli = Cli::try_parse_from([
            "hamlink", "solve", "--config", "run.toml", "--out", "o", "--seed", "7", "--quiet",
        ])
        .unwrap();
        assert_eq!(cli.command, Command::Solve);
        assert_eq!(cli.seed, Some(7));
        assert!(cli.quiet);
        assert!(Cli::try_parse_from(["hamlink", "solve"]).is_err());
        assert!(Cli::try_parse_from(["hamlink", "fly", "--config", "x"]).is_err());
    }
}
