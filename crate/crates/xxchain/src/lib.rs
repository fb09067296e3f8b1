//! Command-line reports for the XX chain: every computation in
//! `xxchain-core` as deterministic JSON or CSV.

pub mod commands;
pub mod config;
pub mod report;

use std::io::Write;

pub use commands::run;
pub use config::{Cli, RunConfig};
pub use report::{Outcome, Report};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFICATION_FAILED: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const UNRELIABLE: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Model(#[from] xxchain_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot encode report: {0}")]
    Encode(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(xxchain_core::Error::NonConvergence { .. }) => exit::UNRELIABLE,
            _ => exit::VALIDATION,
        }
    }
}

/// Runs a parsed command line, writing the report to stdout or
/// `--output`, and returns the exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = RunConfig::from_cli(&cli.command).and_then(|cfg| {
        let outcome = with_threads(cfg.threads, || run(&cfg))?;
        let text = outcome.report.render(cfg.format)?;
        match &cfg.output {
            Some(path) => std::fs::write(path, text.as_bytes())?,
            None => stdout.write_all(text.as_bytes())?,
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for line in &outcome.diagnostics {
                let _ = writeln!(stderr, "{line}");
            }
            outcome.exit_code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}
