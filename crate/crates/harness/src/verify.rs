//! Cross-checks between the generic bound, the printed closed forms and
//! simulation.
//!
//! Only `fail` rows are violations. Differences between the generic terms
//! and the printed per-case formulas are itemised as `discrepancy`.

use stein_mle::blocksum::{
    closed_form_scale_gap, closed_forms, compare_closed_forms, corollary_bound, interior_constant, map_replicates,
    moment_profile, q_interior_bound, second_derivative, standardized_contributions, third_derivative, BlockSumConfig,
    BoundMode, DEPENDENCE_RANGE,
};
use stein_mle::dependence::{
    build_neighborhoods, empirical_moment_profile, lemma_terms_mc, q_sum, q_term, NeighborhoodSystem,
    ScoreMomentProfile,
};
use stein_mle::ReplicateMatrix;

use crate::row::{CheckRow, CheckStatus};
use crate::run::exact_true_w1;
use crate::spec::{Command, ExperimentSpec};
use crate::HarnessError;

/// Closed-form agreement threshold for matching components.
pub const MATCH_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-12;
const NEIGHBORHOOD_MAX_N: usize = 200;
const NEIGHBORHOOD_MAX_M: usize = 10;
const LEMMA_N: usize = 10;
const LEMMA_K: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<CheckRow>,
}

impl VerifyReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| r.status == CheckStatus::Fail).count()
    }

    pub fn discrepancies(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| r.status == CheckStatus::Discrepancy)
    }

    pub fn find(&self, check: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.check == check)
    }
}

fn rel_diff(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        if value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (value - reference) / reference
    }
}

fn row(check: String, ok: bool, value: f64, reference: f64, detail: String) -> CheckRow {
    CheckRow {
        check,
        status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
        value: Some(value),
        reference: Some(reference),
        rel_diff: Some(rel_diff(value, reference)),
        detail,
    }
}

/// Direct triple sum over the neighbourhoods, independent of the
/// factorised evaluation in the library.
pub fn brute_force_q_sum(system: &NeighborhoodSystem, moments: &ScoreMomentProfile<f64>) -> Result<f64, HarnessError> {
    let n = system.n();
    let mut total = 0.0;
    for v in 1..=n {
        let ev = moments.entry(v)?;
        let (a, b) = (system.a(v)?, system.b(v)?);
        let mut acc = 0.0;
        for j in a.iter() {
            let ej = moments.entry(j)?;
            for l in b.iter() {
                let el = moments.entry(l)?;
                acc += 2.0 * (ev.fourth * ej.fourth * el.fourth).powf(0.25);
                acc += 2.0 * (ev.second * ej.second * el.second).sqrt();
            }
            acc += a.len() as f64 * (ev.second * ej.fourth).sqrt();
        }
        total += acc / (n as f64).powf(1.5);
    }
    Ok(total)
}

fn neighborhood_rows() -> CheckRow {
    let mut checked = 0usize;
    let mut failure = None;
    'outer: for n in 1..=NEIGHBORHOOD_MAX_N {
        for m in 0..=NEIGHBORHOOD_MAX_M {
            let system = build_neighborhoods(n, m).expect("n >= 1");
            if let Err(e) = system.check_invariants() {
                failure = Some(format!("n={n} m={m}: {e}"));
                break 'outer;
            }
            checked += 1;
        }
    }
    CheckRow {
        check: "neighborhood_invariants".into(),
        status: if failure.is_none() {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        value: None,
        reference: None,
        rel_diff: None,
        detail: failure
            .unwrap_or_else(|| format!("{checked} systems with n <= {NEIGHBORHOOD_MAX_N}, m <= {NEIGHBORHOOD_MAX_M}")),
    }
}

fn interior_constant_row() -> CheckRow {
    let c: f64 = interior_constant();
    let ok = c < 339.0 && (c - 338.45691).abs() <= 1e-5;
    row("interior_constant".into(), ok, c, 339.0, format!("{c:.8} < 339"))
}

fn closed_form_rows(n: usize, k: usize) -> Result<Vec<CheckRow>, HarnessError> {
    let mut out = Vec::new();
    let config = BlockSumConfig::new(n, k, 0.0, 1.0)?;
    let system = build_neighborhoods(n, DEPENDENCE_RANGE)?;
    let moments = moment_profile(&config)?;

    let fast = q_sum(&system, &moments)?;
    let brute = brute_force_q_sum(&system, &moments)?;
    out.push(row(
        format!("q_sum_brute_force n={n} k={k}"),
        rel_diff(fast, brute).abs() <= IDENTITY_TOL,
        fast,
        brute,
        "factorised sum vs direct triple sum".into(),
    ));

    for cmp in compare_closed_forms::<f64>(n, k)? {
        let parts = [
            (
                "product",
                cmp.printed.product,
                cmp.generic.fourth_moment + cmp.generic.second_moment,
            ),
            ("jensen", cmp.printed.jensen, cmp.generic.jensen),
            ("total", cmp.printed.total(), cmp.generic.total()),
        ];
        for (label, printed, generic) in parts {
            let d = rel_diff(printed, generic);
            let agrees = d.abs() <= MATCH_TOL;
            out.push(CheckRow {
                check: format!("q{}_{label} n={n} k={k}", cmp.case),
                status: if agrees {
                    CheckStatus::Pass
                } else {
                    CheckStatus::Discrepancy
                },
                value: Some(printed),
                reference: Some(generic),
                rel_diff: Some(d),
                detail: if agrees {
                    "printed closed form matches generic terms".into()
                } else {
                    format!("printed {printed:.6} vs generic {generic:.6}")
                },
            });
        }
    }

    let cap: f64 = q_interior_bound(n, k);
    let mut worst = 0.0f64;
    for v in 6..=n {
        worst = worst.max(q_term(v, &system, &moments)?);
    }
    out.push(row(
        format!("interior_domination n={n} k={k}"),
        worst <= cap,
        worst,
        cap,
        "max generic Q_v over v >= 6 vs interior bound".into(),
    ));

    let normative = corollary_bound(&config, BoundMode::Normative)?;
    let printed_gap: f64 = closed_form_scale_gap(n, k);
    let d = rel_diff(printed_gap, normative.term_scale_gap);
    out.push(CheckRow {
        check: format!("scale_gap_forms n={n} k={k}"),
        status: if d.abs() <= MATCH_TOL {
            CheckStatus::Pass
        } else {
            CheckStatus::Discrepancy
        },
        value: Some(printed_gap),
        reference: Some(normative.term_scale_gap),
        rel_diff: Some(d),
        detail: "printed scale gap vs |sqrt(n i2 var_mle) - 1|".into(),
    });

    let exact = exact_true_w1(&config);
    out.push(row(
        format!("bound_dominates_exact n={n} k={k}"),
        normative.total > exact,
        normative.total,
        exact,
        "normative total vs exact W1 of the scaled MLE".into(),
    ));
    Ok(out)
}

fn identity_rows(spec: &ExperimentSpec) -> Result<Vec<CheckRow>, HarnessError> {
    let mut alpha_worst = (0.0f64, String::new());
    let mut deriv_worst = (0.0f64, String::new());
    let mut lyapunov_failure = None;
    for &n in &spec.n_values {
        for &k in &spec.k_values {
            for sigma2 in [0.25, 1.0, 4.0] {
                let config = BlockSumConfig::new(n, k, 0.0, sigma2)?;
                let cf = closed_forms(&config);
                let d = rel_diff(cf.alpha * cf.alpha * cf.var_mle, cf.var_score).abs();
                if d >= alpha_worst.0 {
                    alpha_worst = (d, format!("n={n} k={k} sigma2={sigma2}"));
                }
                let d2 = rel_diff(-second_derivative(n, k, sigma2), cf.alpha).abs();
                if d2 >= deriv_worst.0 {
                    deriv_worst = (d2, format!("n={n} k={k} sigma2={sigma2}"));
                }
                for (range, e) in moment_profile(&config)?.runs() {
                    if e.second * e.second > e.fourth * (1.0 + 1e-12) {
                        lyapunov_failure = Some(format!("n={n} k={k} indices {}..={}", range.lo(), range.hi()));
                    }
                }
            }
        }
    }
    let third: f64 = third_derivative();
    let gaussian_abs3 = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
    Ok(vec![
        row(
            "alpha_identity".into(),
            alpha_worst.0 <= IDENTITY_TOL,
            alpha_worst.0,
            IDENTITY_TOL,
            format!("max |alpha^2 var_mle / var_score - 1| at {}", alpha_worst.1),
        ),
        row(
            "second_derivative_is_minus_alpha".into(),
            deriv_worst.0 <= 4.0 * f64::EPSILON,
            deriv_worst.0,
            4.0 * f64::EPSILON,
            format!("max relative gap at {}", deriv_worst.1),
        ),
        row(
            "third_derivative_zero".into(),
            third == 0.0,
            third,
            0.0,
            "l''' is identically zero".into(),
        ),
        CheckRow {
            check: "lyapunov".into(),
            status: if lyapunov_failure.is_none() && gaussian_abs3 >= 1.0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            value: Some(gaussian_abs3),
            reference: Some(1.0),
            rel_diff: None,
            detail: lyapunov_failure
                .unwrap_or_else(|| "(E xi^2)^2 <= E xi^4 on every profile; Gaussian E|Z|^3 >= 1".into()),
        },
    ])
}

fn lemma_row(spec: &ExperimentSpec) -> Result<CheckRow, HarnessError> {
    let config = BlockSumConfig::new(LEMMA_N, LEMMA_K, 0.0, 1.0)?;
    let rows = map_replicates(&config, spec.reps, spec.seed, |_, s| {
        standardized_contributions(s, &config)
    })?
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let paths = ReplicateMatrix::from_rows(&rows)?;
    let system = build_neighborhoods(LEMMA_N, DEPENDENCE_RANGE)?;
    let lemma = lemma_terms_mc(&paths, &system)?;
    let relaxed = q_sum(&system, &empirical_moment_profile(&paths)?)?;
    let closed = q_sum(&system, &moment_profile(&config)?)?;
    let slack = 3.0 * lemma.standard_error_total;
    let ok = lemma.lemma_total <= relaxed + slack && lemma.lemma_total <= closed + slack;
    Ok(row(
        format!("lemma_dominance n={LEMMA_N} k={LEMMA_K}"),
        ok,
        lemma.lemma_total,
        closed,
        format!(
            "lemma {:.6} (se {:.2e}) vs relaxation {relaxed:.6} empirical, {closed:.6} closed form; reps={} seed={}",
            lemma.lemma_total, lemma.standard_error_total, spec.reps, spec.seed
        ),
    ))
}

/// Runs every cross-check. Errors only on an unusable spec.
pub fn run_verify(spec: &ExperimentSpec) -> Result<VerifyReport, HarnessError> {
    spec.validate()?;
    if spec.command != Command::Verify {
        return Err(HarnessError::InvalidSpec(format!(
            "expected a verify spec, got {}",
            spec.command.as_str()
        )));
    }
    if let Some(n) = spec.n_values.iter().find(|&&n| n < 10) {
        return Err(HarnessError::InvalidSpec(format!(
            "verify compares closed forms that need n >= 10, got {n}"
        )));
    }
    if spec.reps < 2 {
        return Err(HarnessError::InvalidSpec("verify needs at least 2 replicates".into()));
    }
    let mut rows = vec![neighborhood_rows(), interior_constant_row()];
    for &k in &spec.k_values {
        for &n in &spec.n_values {
            rows.extend(closed_form_rows(n, k)?);
        }
    }
    rows.extend(identity_rows(spec)?);
    rows.push(lemma_row(spec)?);
    Ok(VerifyReport { rows })
}
