//! Printed per-case closed forms for the block-sum example, kept as a
//! cross-check against the generic per-index evaluation.
//!
//! Every printed `Q_v` has the shape `P · {X (1 + 3^{3/4}) + √3 Y}`. With
//! Gaussian moments the fourth-moment Hölder term is exactly `3^{3/4}` times
//! the second-moment term, so `P X (1 + 3^{3/4})` corresponds to their sum
//! and `P √3 Y` to the Jensen term. [`compare_closed_forms`] compares the two
//! parts separately.

use std::fmt;
use std::str::FromStr;

use super::{closed_forms, denominator, moment_profile, BlockSumConfig, DEPENDENCE_RANGE};
use crate::bound::{general_bound, BoundBreakdown, BoundTerm, TheoremInputs};
use crate::dependence::{build_neighborhoods, q_term_components, QComponents};
use crate::error::{Error, Result};
use crate::real::Real;

const MIN_CLOSED_FORM_N: usize = 10;

/// How the block-sum bound is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BoundMode {
    /// Generic per-index evaluation of the theorem.
    #[default]
    Normative,
    /// The printed per-case closed forms plus `(n−5)` interior bounds.
    ClosedForm,
}

impl BoundMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundMode::Normative => "normative",
            BoundMode::ClosedForm => "paper",
        }
    }
}

impl fmt::Display for BoundMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "normative" => Ok(BoundMode::Normative),
            "paper" | "closed-form" | "paper-closed-form" => Ok(BoundMode::ClosedForm),
            other => Err(format!("unknown mode `{other}` (expected normative or paper)")),
        }
    }
}

/// `90 + 90·3^{3/4} + 25√3`: the interior `Q_v` constant for unit Gaussian
/// moments with `|A| = 5`, `|B| = 9`.
pub fn interior_constant<T: Real>() -> T {
    let three = T::lit(3.0);
    T::lit(90.0) + T::lit(90.0) * three.powf(T::lit(0.75)) + T::lit(25.0) * three.sqrt()
}

/// `339·[k(k+1)(k+2)/(nk³+(3n+2)k²+10k+2)]^{3/2}`, the printed bound on every
/// interior `Q_v`.
pub fn q_interior_bound<T: Real>(n: usize, k: usize) -> T {
    let kt = T::from_count(k);
    let one = T::one();
    let ratio = kt * (kt + one) * (kt + T::lit(2.0)) / denominator::<T>(n, k);
    T::lit(339.0) * ratio.powf(T::lit(1.5))
}

/// The two parts of a printed `Q_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrintedCaseParts<T> {
    /// The `(1 + 3^{3/4})` part: fourth- plus second-moment terms.
    pub product: T,
    /// The `√3` part: Jensen term.
    pub jensen: T,
}

impl<T: Real> PrintedCaseParts<T> {
    pub fn total(&self) -> T {
        self.product + self.jensen
    }
}

/// Printed closed form of `Q_case`, `case ∈ 1..=5`, split into parts.
pub fn q_closed_form_parts<T: Real>(case: usize, n: usize, k: usize) -> Result<PrintedCaseParts<T>> {
    if n < MIN_CLOSED_FORM_N {
        return Err(Error::ClosedFormDomain { n });
    }
    let kt = T::from_count(k);
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let five = T::lit(5.0);
    let c = one + three.powf(T::lit(0.75));
    let sqrt3 = three.sqrt();
    let sk = kt.sqrt();
    let sk2 = (kt + two).sqrt();
    let skk = (kt * (kt + two)).sqrt();
    let d32 = denominator::<T>(n, k).powf(T::lit(1.5));
    let k1_32 = (kt + one).powf(T::lit(1.5));
    let k2_32 = (kt + two).powf(T::lit(1.5));
    let common = k1_32 * k2_32 / d32;

    let (prefactor, x, y) = match case {
        1 => (
            two * k1_32 * (kt + two) * (kt + two) / d32,
            T::lit(9.0) * kt + two + T::lit(6.0) * skk,
            three * (kt + one),
        ),
        2 => (
            T::lit(4.0) * sk * common,
            T::lit(8.0) * kt + one + T::lit(4.0) * skk,
            two * (two * kt + one),
        ),
        3 => (
            sk * common,
            two * (T::lit(25.0) * kt + two + T::lit(10.0) * skk),
            five * (five * kt + two),
        ),
        4 => (five * kt * common, two * (sk2 + T::lit(7.0) * sk), five * sk),
        5 => (five * kt * common, two * (sk2 + T::lit(8.0) * sk), five * sk),
        other => return Err(Error::CaseOutOfRange(other)),
    };
    Ok(PrintedCaseParts {
        product: prefactor * x * c,
        jensen: prefactor * sqrt3 * y,
    })
}

/// Printed closed form of `Q_case` as a single value.
pub fn q_closed_form<T: Real>(case: usize, n: usize, k: usize) -> Result<T> {
    q_closed_form_parts(case, n, k).map(|p| p.total())
}

/// Generic and printed values of one edge case side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseComparison<T> {
    pub case: usize,
    pub n: usize,
    pub k: usize,
    pub generic: QComponents<T>,
    pub printed: PrintedCaseParts<T>,
}

impl<T: Real> CaseComparison<T> {
    fn signed_rel(printed: T, generic: T) -> T {
        if generic == T::zero() {
            if printed == T::zero() {
                T::zero()
            } else {
                T::infinity()
            }
        } else {
            (printed - generic) / generic
        }
    }

    /// `(printed − generic)/generic` for the fourth- plus second-moment part.
    pub fn product_rel_diff(&self) -> T {
        Self::signed_rel(
            self.printed.product,
            self.generic.fourth_moment + self.generic.second_moment,
        )
    }

    /// `(printed − generic)/generic` for the Jensen part.
    pub fn jensen_rel_diff(&self) -> T {
        Self::signed_rel(self.printed.jensen, self.generic.jensen)
    }

    pub fn total_rel_diff(&self) -> T {
        Self::signed_rel(self.printed.total(), self.generic.total())
    }
}

/// Compares the generic `Q_1 … Q_5` with the printed closed forms.
pub fn compare_closed_forms<T: Real>(n: usize, k: usize) -> Result<Vec<CaseComparison<T>>> {
    if n < MIN_CLOSED_FORM_N {
        return Err(Error::ClosedFormDomain { n });
    }
    let config = BlockSumConfig::new(n, k, T::zero(), T::one())?;
    let system = build_neighborhoods(n, DEPENDENCE_RANGE)?;
    let moments = moment_profile(&config)?;
    (1..=5)
        .map(|case| {
            Ok(CaseComparison {
                case,
                n,
                k,
                generic: q_term_components(case, &system, &moments)?,
                printed: q_closed_form_parts(case, n, k)?,
            })
        })
        .collect()
}

/// The printed closed form of the scale-gap term,
/// `|(1 − 2/(nk+2)) √((k+3+2/n+10/(nk)+2/(nk²))/(k+3)) − 1|`.
pub fn closed_form_scale_gap<T: Real>(n: usize, k: usize) -> T {
    let nt = T::from_count(n);
    let kt = T::from_count(k);
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let inner = (kt + three + two / nt + T::lit(10.0) / (nt * kt) + two / (nt * kt * kt)) / (kt + three);
    ((T::one() - two / (nt * kt + two)) * inner.sqrt() - T::one()).abs()
}

/// The full bound for the block-sum model.
///
/// Normative mode feeds the closed-form moments and variances through
/// [`general_bound`]; the result does not depend on `θ₀` or `σ²`.
pub fn corollary_bound<T: Real>(config: &BlockSumConfig<T>, mode: BoundMode) -> Result<BoundBreakdown<T>> {
    config.validate()?;
    let (n, k) = (config.n, config.k);
    match mode {
        BoundMode::Normative => {
            let cf = closed_forms(config);
            let system = build_neighborhoods(n, DEPENDENCE_RANGE)?;
            let moments = moment_profile(config)?;
            let inputs = TheoremInputs {
                n,
                var_score: cf.var_score,
                var_mle: cf.var_mle,
                i2: cf.i2,
                s_d: cf.s_d,
                mse_mle: cf.mse_mle,
                sq_dev_second: cf.sq_dev_second,
            };
            general_bound(&system, &moments, &inputs)
        }
        BoundMode::ClosedForm => {
            if n < MIN_CLOSED_FORM_N {
                return Err(Error::ClosedFormDomain { n });
            }
            const LABELS: [&str; 5] = ["case_q1", "case_q2", "case_q3", "case_q4", "case_q5"];
            let mut parts = Vec::with_capacity(6);
            for (case, label) in (1..=5).zip(LABELS) {
                parts.push(BoundTerm {
                    label,
                    value: q_closed_form(case, n, k)?,
                });
            }
            parts.push(BoundTerm {
                label: "interior",
                value: T::from_count(n - 5) * q_interior_bound(n, k),
            });
            Ok(BoundBreakdown::assemble(
                parts,
                closed_form_scale_gap(n, k),
                T::zero(),
                T::zero(),
            ))
        }
    }
}
