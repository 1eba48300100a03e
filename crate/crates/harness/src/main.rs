use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use stein_mle::blocksum::BoundMode;
use stein_mle_harness::spec::DEFAULT_DRAW_BUDGET;
use stein_mle_harness::{execute, exit, Command, ExperimentSpec, HarnessError, OutputFormat};

#[derive(Debug, Parser)]
#[command(name = "stein-mle", version, about = "Wasserstein bounds for the block-sum MLE")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Bound breakdown and exact distance for each (k, n).
    Bound {
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate the scaled MLE and compare its empirical distance with the exact value.
    Simulate {
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        mc: MonteCarlo,
        /// Maximum scalar draws per row.
        #[arg(long, default_value_t = DEFAULT_DRAW_BUDGET)]
        budget: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Log-log slope of the bound over n.
    Rate {
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-check the generic bound against closed forms and simulation.
    Verify {
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 20, 100])]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3])]
        k: Vec<usize>,
        #[command(flatten)]
        mc: MonteCarlo,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Grid {
    /// Comma-separated block counts.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Comma-separated overlap parameters.
    #[arg(long, value_delimiter = ',', required = true)]
    k: Vec<usize>,
}

#[derive(Debug, Args)]
struct Model {
    #[arg(long, default_value = "normative")]
    mode: BoundMode,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta0: f64,
}

#[derive(Debug, Args)]
struct MonteCarlo {
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Fill the wall_ms column.
    #[arg(long)]
    timing: bool,
}

fn apply_common(spec: &mut ExperimentSpec, common: &Common) {
    spec.format = common.format;
    spec.out = common.out.clone();
    spec.timing = common.timing;
}

fn apply_model(spec: &mut ExperimentSpec, grid: Grid, model: Model) {
    spec.n_values = grid.n;
    spec.k_values = grid.k;
    spec.mode = model.mode;
    spec.sigma2 = model.sigma2;
    spec.theta0 = model.theta0;
}

fn build_spec(cli: Cli) -> (ExperimentSpec, Option<usize>) {
    match cli.command {
        Sub::Bound { grid, model, common } => {
            let mut spec = ExperimentSpec::new(Command::Bound);
            apply_model(&mut spec, grid, model);
            apply_common(&mut spec, &common);
            (spec, common.workers)
        }
        Sub::Rate { grid, model, common } => {
            let mut spec = ExperimentSpec::new(Command::Rate);
            apply_model(&mut spec, grid, model);
            apply_common(&mut spec, &common);
            (spec, common.workers)
        }
        Sub::Simulate {
            grid,
            model,
            mc,
            budget,
            common,
        } => {
            let mut spec = ExperimentSpec::new(Command::Simulate);
            apply_model(&mut spec, grid, model);
            apply_common(&mut spec, &common);
            spec.reps = mc.reps;
            spec.seed = mc.seed;
            spec.draw_budget = budget;
            (spec, common.workers)
        }
        Sub::Verify { n, k, mc, common } => {
            let mut spec = ExperimentSpec::new(Command::Verify);
            spec.n_values = n;
            spec.k_values = k;
            spec.reps = mc.reps;
            spec.seed = mc.seed;
            apply_common(&mut spec, &common);
            (spec, common.workers)
        }
    }
}

fn run(spec: &ExperimentSpec, workers: Option<usize>) -> anyhow::Result<i32> {
    let outcome = match workers {
        Some(0) => return Err(HarnessError::InvalidSpec("--workers must be positive".into()).into()),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .context("building the worker pool")?
            .install(|| execute(spec))?,
        None => execute(spec)?,
    };
    let text = outcome.render(spec.format)?;
    match &spec.out {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::INVALID_SPEC } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (spec, workers) = build_spec(cli);
    match run(&spec, workers) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::INVALID_SPEC as u8)
        }
    }
}
