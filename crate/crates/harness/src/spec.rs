use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use stein_mle::blocksum::BoundMode;

use crate::HarnessError;

/// Default cap on scalar normal draws per simulated `n`.
pub const DEFAULT_DRAW_BUDGET: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bound,
    Simulate,
    Rate,
    Verify,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Bound => "bound",
            Command::Simulate => "simulate",
            Command::Rate => "rate",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

/// Everything a run depends on. Two runs with equal specs produce the same
/// bytes (unless `timing` is on).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: Command,
    pub n_values: Vec<usize>,
    /// Rows are produced for every `k`, outer loop over `k`.
    pub k_values: Vec<usize>,
    pub sigma2: f64,
    pub theta0: f64,
    pub reps: usize,
    pub seed: u64,
    pub mode: BoundMode,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Maximum scalar draws `(nk + 1) · reps` for one simulated row.
    pub draw_budget: u64,
    /// Fill the `wall_ms` column. Off by default because it breaks
    /// byte-identical reruns.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(command: Command) -> Self {
        let (n_values, k_values) = match command {
            Command::Verify => (vec![10, 20, 100], vec![1, 2, 3]),
            _ => (Vec::new(), Vec::new()),
        };
        Self {
            command,
            n_values,
            k_values,
            sigma2: 1.0,
            theta0: 0.0,
            reps: 10_000,
            seed: 0,
            mode: BoundMode::Normative,
            format: OutputFormat::Csv,
            out: None,
            draw_budget: DEFAULT_DRAW_BUDGET,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidSpec(msg));
        if self.n_values.is_empty() {
            return bad("at least one n value is required".into());
        }
        if self.k_values.is_empty() {
            return bad("at least one k value is required".into());
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n == 0) {
            return bad(format!("n must be positive, got {n}"));
        }
        if self.k_values.contains(&0) {
            return bad("k must be positive".into());
        }
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return bad(format!("sigma2 must be finite and positive, got {}", self.sigma2));
        }
        if !self.theta0.is_finite() {
            return bad(format!("theta0 must be finite, got {}", self.theta0));
        }
        if self.reps == 0 {
            return bad("reps must be positive".into());
        }
        if self.command == Command::Simulate && self.reps < 2 {
            return bad(format!("simulate needs at least 2 replicates, got {}", self.reps));
        }
        Ok(())
    }
}
