//! Batch front-end for `rwn-core`: perturb, evaluate, diagnose and bench
//! subcommands over CSV files.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or usage,
//! 3 invalid data.

use std::ffi::OsString;
use std::fmt;

use clap::Parser;
use rwn_core::RwnError;

pub mod args;
mod commands;
pub mod config;
pub mod manifest;
mod tables;

pub use manifest::RunManifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Io,
    Config,
    Data,
}

impl FailureKind {
    pub fn exit_code(self) -> i32 {
        match self {
            FailureKind::Io => 1,
            FailureKind::Config => 2,
            FailureKind::Data => 3,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn io(error: impl Into<anyhow::Error>) -> Self {
        Self {
            kind: FailureKind::Io,
            error: error.into(),
        }
    }

    pub fn config(msg: impl fmt::Display) -> Self {
        Self {
            kind: FailureKind::Config,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        Self {
            kind: FailureKind::Data,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    fn context(mut self, what: impl fmt::Display + Send + Sync + 'static) -> Self {
        self.error = self.error.context(what);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<RwnError> for Failure {
    fn from(e: RwnError) -> Self {
        let kind = if e.is_io() {
            FailureKind::Io
        } else if e.is_config() {
            FailureKind::Config
        } else {
            FailureKind::Data
        };
        Self { kind, error: e.into() }
    }
}

pub type CliResult<T> = Result<T, Failure>;

/// Parse `args` (program name first) and run the command; returns the exit
/// code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("rwn: error: {f}");
            f.kind.exit_code()
        }
    }
}

pub fn execute(cli: args::Cli) -> CliResult<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Failure::config("workers: must be >= 1"));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(Failure::io)?;
    pool.install(|| match cli.command {
        args::Command::Perturb(a) => commands::perturb(a),
        args::Command::Evaluate(a) => commands::evaluate(a),
        args::Command::Diagnose(a) => commands::diagnose(a),
        args::Command::Bench(a) => commands::bench(a),
    })
}
