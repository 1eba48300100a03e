//! Experiment runner for the block-sum MLE bounds: bound tables, Monte Carlo
//! checks, log-log rate fits and a verification report.
//!
//! The binary is a thin layer over [`execute`] and [`Outcome::render`];
//! everything it prints can be produced from a library call.

pub mod row;
pub mod run;
pub mod spec;
pub mod verify;

use thiserror::Error;

pub use row::{CheckRow, CheckStatus, RateRow, Record, ResultRow};
pub use run::{fit_power_law, run_bound_table, run_rate_fit, run_simulation, PowerFit};
pub use spec::{Command, ExperimentSpec, OutputFormat};
pub use verify::{run_verify, VerifyReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("n={n}, k={k} needs {draws} draws, above the budget of {budget}")]
    Budget {
        n: usize,
        k: usize,
        draws: u64,
        budget: u64,
    },
    #[error(transparent)]
    Model(#[from] stein_mle::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID_SPEC: i32 = 1;
    pub const VIOLATION: i32 = 2;
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Rows(Vec<ResultRow>),
    Rates(Vec<RateRow>),
    Verify(VerifyReport),
}

impl Outcome {
    pub fn render(&self, format: OutputFormat) -> Result<String, HarnessError> {
        match self {
            Outcome::Rows(rows) => row::render(rows, format),
            Outcome::Rates(rows) => row::render(rows, format),
            Outcome::Verify(report) => row::render(&report.rows, format),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Verify(report) if report.violations() > 0 => exit::VIOLATION,
            _ => exit::OK,
        }
    }
}

pub fn execute(spec: &ExperimentSpec) -> Result<Outcome, HarnessError> {
    match spec.command {
        Command::Bound => run_bound_table(spec).map(Outcome::Rows),
        Command::Simulate => run_simulation(spec).map(Outcome::Rows),
        Command::Rate => run_rate_fit(spec).map(Outcome::Rates),
        Command::Verify => run_verify(spec).map(Outcome::Verify),
    }
}
