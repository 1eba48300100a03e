use std::time::Instant;

use stein_mle::blocksum::{closed_forms, corollary_bound, map_replicates, mle, BoundMode};
use stein_mle::wasserstein::{empirical_w1_std_normal, exact_w1_normal, NormalParams, SampleSet};
use stein_mle::{BlockSumConfig, BoundBreakdown};

use crate::row::{RateRow, ResultRow};
use crate::spec::{Command, ExperimentSpec};
use crate::HarnessError;

/// `W₁(N(0, n i₂ Var θ̂), N(0, 1))`, the exact distance of the scaled MLE.
pub fn exact_true_w1(config: &BlockSumConfig) -> f64 {
    let cf = closed_forms(config);
    let sd = (config.n as f64 * cf.i2 * cf.var_mle).sqrt();
    exact_w1_normal(NormalParams { mean: 0.0, sd }, NormalParams::standard())
}

/// Tolerance for the empirical distance against the exact one.
pub fn empirical_tolerance(reps: usize) -> f64 {
    (3.0 / (reps as f64).sqrt()).max(0.02)
}

fn fill_bound(row: &mut ResultRow, b: &BoundBreakdown, exact: f64) {
    row.q_total = Some(b.q_total);
    row.term_scale_gap = Some(b.term_scale_gap);
    row.term_remainder = Some(b.term_remainder);
    row.term_second_deriv = Some(b.term_second_deriv);
    row.total = Some(b.total);
    row.exact_w1 = Some(exact);
    row.q_interior = b.q_part("interior");
    row.bound_ok = Some(b.total >= exact);
}

fn check_command(spec: &ExperimentSpec, want: Command) -> Result<(), HarnessError> {
    spec.validate()?;
    if spec.command != want {
        return Err(HarnessError::InvalidSpec(format!(
            "expected a {} spec, got {}",
            want.as_str(),
            spec.command.as_str()
        )));
    }
    Ok(())
}

fn grid(spec: &ExperimentSpec) -> impl Iterator<Item = (usize, usize)> + '_ {
    spec.k_values
        .iter()
        .flat_map(|&k| spec.n_values.iter().map(move |&n| (n, k)))
}

/// One row per `(k, n)` with the bound breakdown and the exact distance.
/// Cells the mode cannot evaluate get an `error` entry instead.
pub fn run_bound_table(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, HarnessError> {
    check_command(spec, Command::Bound)?;
    Ok(grid(spec)
        .map(|(n, k)| {
            let started = Instant::now();
            let mut row = ResultRow::empty(n, k, spec.sigma2, spec.mode.as_str());
            let outcome = BlockSumConfig::new(n, k, spec.theta0, spec.sigma2)
                .and_then(|c| Ok((corollary_bound(&c, spec.mode)?, exact_true_w1(&c))));
            match outcome {
                Ok((b, exact)) => fill_bound(&mut row, &b, exact),
                Err(e) => row.error = Some(e.to_string()),
            }
            if spec.timing {
                row.wall_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            row
        })
        .collect())
}

/// Scaled estimates `√(n i₂)(θ̂ − θ₀)`, one per replicate.
pub fn scaled_estimates(config: &BlockSumConfig, reps: usize, seed: u64) -> Result<Vec<f64>, HarnessError> {
    let scale = (config.n as f64 * closed_forms(config).i2).sqrt();
    let est = map_replicates(config, reps, seed, |_, s| {
        mle(s, config.k).map(|t| scale * (t - config.theta0))
    })?;
    Ok(est.into_iter().collect::<Result<Vec<_>, _>>()?)
}

/// Simulates every `(k, n)` cell and compares the empirical distance of the
/// scaled MLE with the exact value and the bound.
pub fn run_simulation(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, HarnessError> {
    check_command(spec, Command::Simulate)?;
    for (n, k) in grid(spec) {
        let draws = ((n as u64).saturating_mul(k as u64).saturating_add(1)).saturating_mul(spec.reps as u64);
        if draws > spec.draw_budget {
            return Err(HarnessError::Budget {
                n,
                k,
                draws,
                budget: spec.draw_budget,
            });
        }
    }
    let tol = empirical_tolerance(spec.reps);
    grid(spec)
        .map(|(n, k)| {
            let started = Instant::now();
            let config = BlockSumConfig::new(n, k, spec.theta0, spec.sigma2)?;
            let mut row = ResultRow::empty(n, k, spec.sigma2, spec.mode.as_str());
            let exact = exact_true_w1(&config);
            match corollary_bound(&config, spec.mode) {
                Ok(b) => fill_bound(&mut row, &b, exact),
                Err(e) => {
                    row.exact_w1 = Some(exact);
                    row.error = Some(e.to_string());
                }
            }
            let samples = SampleSet::new(scaled_estimates(&config, spec.reps, spec.seed)?)?;
            let empirical = empirical_w1_std_normal(&samples)?;
            row.empirical_w1 = Some(empirical);
            row.empirical_ok = Some((empirical - exact).abs() <= tol);
            row.reps = Some(spec.reps);
            row.seed = Some(spec.seed);
            if spec.timing {
                row.wall_ms = Some(started.elapsed().as_secs_f64() * 1e3);
            }
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub max_abs_residual: f64,
    pub points: usize,
}

/// Ordinary least squares of `log y` on `log n`.
///
/// Needs at least four points with positive values whose `n` span at least
/// three decades.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerFit, HarnessError> {
    let bad = |msg: String| Err(HarnessError::InvalidSpec(msg));
    if points.len() < 4 {
        return bad(format!("rate fit needs at least 4 points, got {}", points.len()));
    }
    if let Some(&(n, y)) = points.iter().find(|&&(n, y)| !(n > 0.0 && y > 0.0 && y.is_finite())) {
        return bad(format!("rate fit needs positive values, got {y} at n = {n}"));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(n, _)| (lo.min(n), hi.max(n)));
    if (hi / lo).log10() < 3.0 - 1e-9 {
        return bad(format!("n values {lo}..{hi} span less than three decades"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x));
    let (sse, max_abs_residual) = residuals.fold((0.0, 0.0f64), |(s, m), r| (s + r * r, m.max(r.abs())));
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(PowerFit {
        slope,
        intercept,
        r_squared,
        max_abs_residual,
        points: points.len(),
    })
}

fn rate_row(k: usize, mode: BoundMode, term: &str, fit: PowerFit) -> RateRow {
    RateRow {
        k,
        mode: mode.as_str().to_string(),
        term: term.to_string(),
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        max_abs_residual: fit.max_abs_residual,
        points: fit.points,
    }
}

/// Log-log slopes of the total bound and of the scale-gap term, per `k`.
pub fn run_rate_fit(spec: &ExperimentSpec) -> Result<Vec<RateRow>, HarnessError> {
    check_command(spec, Command::Rate)?;
    let mut out = Vec::new();
    for &k in &spec.k_values {
        let mut totals = Vec::with_capacity(spec.n_values.len());
        let mut gaps = Vec::with_capacity(spec.n_values.len());
        for &n in &spec.n_values {
            let config = BlockSumConfig::new(n, k, spec.theta0, spec.sigma2)?;
            let b = corollary_bound(&config, spec.mode)?;
            totals.push((n as f64, b.total));
            gaps.push((n as f64, b.term_scale_gap));
        }
        out.push(rate_row(k, spec.mode, "total", fit_power_law(&totals)?));
        out.push(rate_row(k, spec.mode, "scale_gap", fit_power_law(&gaps)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_gives_half_slope() {
        let pts: Vec<(f64, f64)> = [1e3, 1e4, 1e5, 1e6, 1e7]
            .iter()
            .map(|&n: &f64| (n, 3.7 / n.sqrt()))
            .collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-8);
        assert!((fit.intercept - 3.7f64.ln()).abs() < 1e-8);
        assert!(fit.max_abs_residual < 1e-10);
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        let short = [(1e3, 1.0), (1e4, 0.5), (1e5, 0.2)];
        assert!(fit_power_law(&short).is_err());
        let narrow = [(10.0, 1.0), (20.0, 0.9), (50.0, 0.8), (100.0, 0.7)];
        assert!(fit_power_law(&narrow).is_err());
        let zero = [(10.0, 1.0), (100.0, 0.0), (1e3, 0.8), (1e4, 0.7)];
        assert!(fit_power_law(&zero).is_err());
    }

    #[test]
    fn closed_form_mode_below_ten_is_a_row_error() {
        let mut spec = ExperimentSpec::new(Command::Bound);
        spec.n_values = vec![5, 10];
        spec.k_values = vec![1];
        spec.mode = BoundMode::ClosedForm;
        let rows = run_bound_table(&spec).unwrap();
        assert!(rows[0].error.is_some() && rows[0].total.is_none());
        assert!(rows[1].error.is_none());
        assert!((rows[1].q_interior.unwrap() - 5.0 * 339.0 / 27.0).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let mut spec = ExperimentSpec::new(Command::Simulate);
        spec.n_values = vec![1000];
        spec.k_values = vec![1];
        spec.reps = 100;
        spec.draw_budget = 100_000;
        assert!(matches!(run_simulation(&spec), Err(HarnessError::Budget { .. })));
    }

    #[test]
    fn wrong_command_is_rejected() {
        let mut spec = ExperimentSpec::new(Command::Rate);
        spec.n_values = vec![10];
        spec.k_values = vec![1];
        assert!(run_bound_table(&spec).is_err());
    }
}
