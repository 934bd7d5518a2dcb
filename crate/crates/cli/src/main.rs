//! `hyperaudit`: validate, train, evaluate, run the agent pipeline and
//! aggregate run directories.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 constraint violation,
//! 3 training diverged, 4 pipeline run aborted.

mod args;
mod commands;
mod report;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self { code: 1, error }
    }
}

macro_rules! failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Self::from(anyhow::Error::new(e))
            }
        }
    )*};
}

failure_from!(
    hyperaudit_core::model::ModelError,
    hyperaudit_core::datasets::DatasetError,
    hyperaudit_agents::AgentError
);

pub const EXIT_ERROR: u8 = 1;
pub const EXIT_VIOLATION: u8 = 2;
pub const EXIT_DIVERGED: u8 = 3;
pub const EXIT_ABORTED: u8 = 4;

/// Error chain joined by ": ", skipping causes already in the message.
fn message(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Train(a) => commands::train(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Generate(a) => commands::generate(a),
        Command::Pipeline(a) => run::pipeline(a),
        Command::Report(a) => report::report(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", message(&f.error));
            ExitCode::from(f.code)
        }
    }
}
