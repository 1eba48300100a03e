//! The six-term Wasserstein-1 bound for the scaled MLE and its i.i.d. form.
//!
//! For `Z ~ N(0, 1)` the distance `d_W(√(n i₂)(θ̂ₙ − θ₀), Z)` is bounded by
//!
//! * `Σ_v Q_v`, the moment-relaxed Stein terms (see [`crate::dependence`]);
//! * the scale gap `|√(n i₂ Var ℓ′)/α − 1|`;
//! * the remainder term `S_d(n) √(n i₂)/(2α) · E(θ̂ₙ − θ₀)²`;
//! * the second-derivative term `√(n i₂)/α · √E(θ̂ₙ − θ₀)² · √E(ℓ″ + α)²`;
//!
//! where `α = √(Var ℓ′ / Var θ̂ₙ)`.

use crate::dependence::{q_sum_components, NeighborhoodSystem, ScoreMomentProfile};
use crate::error::{invalid, Error, Result};
use crate::real::Real;

/// `α = √(var_score / var_mle)`.
pub fn alpha<T: Real>(var_score: T, var_mle: T) -> Result<T> {
    for (name, x) in [("var_score", var_score), ("var_mle", var_mle)] {
        if !x.is_finite() || x <= T::zero() {
            return Err(invalid(name, format!("{x} must be finite and positive")));
        }
    }
    Ok((var_score / var_mle).sqrt())
}

/// Model quantities consumed by the bound.
///
/// `mse_mle` should dominate the squared bias whenever a bias is known; this
/// is not checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremInputs<T> {
    pub n: usize,
    /// `Var ℓ′(θ₀; X)`
    pub var_score: T,
    /// `Var θ̂ₙ`
    pub var_mle: T,
    /// The limit `i₂(θ₀)` of `1/(n Var θ̂ₙ)`.
    pub i2: T,
    /// Uniform bound on `|ℓ⁽³⁾|`.
    pub s_d: T,
    /// `E(θ̂ₙ − θ₀)²`
    pub mse_mle: T,
    /// `E(ℓ″(θ₀; X) + α)²`
    pub sq_dev_second: T,
}

impl<T: Real> TheoremInputs<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyIndexSet);
        }
        let positive = [
            ("var_score", self.var_score),
            ("var_mle", self.var_mle),
            ("i2", self.i2),
        ];
        for (name, x) in positive {
            if !x.is_finite() || x <= T::zero() {
                return Err(invalid(name, format!("{x} must be finite and positive")));
            }
        }
        let non_negative = [
            ("s_d", self.s_d),
            ("mse_mle", self.mse_mle),
            ("sq_dev_second", self.sq_dev_second),
        ];
        for (name, x) in non_negative {
            if !x.is_finite() || x < T::zero() {
                return Err(invalid(name, format!("{x} must be finite and non-negative")));
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> Result<T> {
        alpha(self.var_score, self.var_mle)
    }
}

/// One labelled addend of the Stein part of a bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerm<T> {
    pub label: &'static str,
    pub value: T,
}

/// Per-term values of a computed bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundBreakdown<T> {
    /// Stein part of the bound: `Σ_v Q_v`, or its closed-form or i.i.d.
    /// replacement.
    pub q_total: T,
    /// Labelled pieces adding up to `q_total`.
    pub q_parts: Vec<BoundTerm<T>>,
    pub term_scale_gap: T,
    pub term_remainder: T,
    pub term_second_deriv: T,
    pub total: T,
}

impl<T: Real> BoundBreakdown<T> {
    pub(crate) fn assemble(
        q_parts: Vec<BoundTerm<T>>,
        term_scale_gap: T,
        term_remainder: T,
        term_second_deriv: T,
    ) -> Self {
        let q_total = q_parts.iter().fold(T::zero(), |a, t| a + t.value);
        Self {
            q_total,
            q_parts,
            term_scale_gap,
            term_remainder,
            term_second_deriv,
            total: q_total + term_scale_gap + term_remainder + term_second_deriv,
        }
    }

    /// All addends of `total` with their labels.
    pub fn terms(&self) -> Vec<BoundTerm<T>> {
        let mut out = self.q_parts.clone();
        out.push(BoundTerm {
            label: "scale_gap",
            value: self.term_scale_gap,
        });
        out.push(BoundTerm {
            label: "remainder",
            value: self.term_remainder,
        });
        out.push(BoundTerm {
            label: "second_deriv",
            value: self.term_second_deriv,
        });
        out
    }

    pub fn q_part(&self, label: &str) -> Option<T> {
        self.q_parts.iter().find(|t| t.label == label).map(|t| t.value)
    }
}

/// Terms four to six, shared by every variant of the bound.
fn taylor_terms<T: Real>(inputs: &TheoremInputs<T>, scale_gap: T, alpha: T) -> (T, T, T) {
    let root_ni2 = (T::from_count(inputs.n) * inputs.i2).sqrt();
    let remainder = inputs.s_d * root_ni2 / (T::lit(2.0) * alpha) * inputs.mse_mle;
    let second = root_ni2 / alpha * inputs.mse_mle.sqrt() * inputs.sq_dev_second.sqrt();
    (scale_gap, remainder, second)
}

/// The full bound for a locally dependent sample.
pub fn general_bound<T: Real>(
    system: &NeighborhoodSystem,
    moments: &ScoreMomentProfile<T>,
    inputs: &TheoremInputs<T>,
) -> Result<BoundBreakdown<T>> {
    inputs.validate()?;
    if system.n() != inputs.n {
        return Err(Error::SizeMismatch {
            expected: inputs.n,
            found: system.n(),
        });
    }
    let q = q_sum_components(system, moments)?;
    let alpha = inputs.alpha()?;
    let gap = ((T::from_count(inputs.n) * inputs.i2 * inputs.var_score).sqrt() / alpha - T::one()).abs();
    let (gap, remainder, second) = taylor_terms(inputs, gap, alpha);
    let parts = vec![
        BoundTerm {
            label: "fourth_moment",
            value: q.fourth_moment,
        },
        BoundTerm {
            label: "second_moment",
            value: q.second_moment,
        },
        BoundTerm {
            label: "jensen",
            value: q.jensen,
        },
    ];
    Ok(BoundBreakdown::assemble(parts, gap, remainder, second))
}

/// Moments of the single-observation score `d/dθ log f(X₁|θ₀)` of an i.i.d.
/// sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IidScoreMoments<T> {
    /// `E|d/dθ log f(X₁|θ₀)|³`
    pub abs3: T,
    /// `Var(d/dθ log f(X₁|θ₀))`
    pub var1: T,
}

/// The bound specialised to i.i.d. observations.
///
/// The Stein part becomes `5 E|score|³ / (√n Var(score)^{3/2})` and the scale
/// gap uses the single-observation variance: `|n √(i₂ var1)/α − 1|`.
pub fn iid_bound<T: Real>(score: IidScoreMoments<T>, inputs: &TheoremInputs<T>) -> Result<BoundBreakdown<T>> {
    inputs.validate()?;
    let IidScoreMoments { abs3, var1 } = score;
    if !var1.is_finite() || var1 <= T::zero() {
        return Err(invalid("var1", format!("{var1} must be finite and positive")));
    }
    let lyapunov = var1.powf(T::lit(1.5));
    let slack = T::one() + T::lit(64.0) * T::epsilon();
    if !abs3.is_finite() || abs3 * slack < lyapunov {
        return Err(Error::InvalidMoments {
            index: 1,
            reason: format!("E|score|^3 = {abs3} is below Var(score)^(3/2) = {lyapunov}"),
        });
    }
    let n = T::from_count(inputs.n);
    let alpha = inputs.alpha()?;
    let stein = T::lit(5.0) * abs3 / (n.sqrt() * lyapunov);
    let gap = (n * (inputs.i2 * var1).sqrt() / alpha - T::one()).abs();
    let (gap, remainder, second) = taylor_terms(inputs, gap, alpha);
    let parts = vec![BoundTerm {
        label: "abs_third_moment",
        value: stein,
    }];
    Ok(BoundBreakdown::assemble(parts, gap, remainder, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::{build_neighborhoods, q_sum, MomentEntry};
    use std::f64::consts::PI;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(6.0, 0.09375).unwrap(), 8.0);
        assert_eq!(alpha(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(alpha(4.0, 1.0).unwrap(), 2.0);
        assert!(alpha(0.0, 1.0).is_err());
        assert!(alpha(1.0, -1.0).is_err());
        assert!(alpha(f64::INFINITY, 1.0).is_err());
        assert!(alpha(1.0, f64::NAN).is_err());
    }

    fn gaussian_mean_inputs(n: usize, sigma2: f64) -> TheoremInputs<f64> {
        let nf = n as f64;
        TheoremInputs {
            n,
            var_score: nf / sigma2,
            var_mle: sigma2 / nf,
            i2: 1.0 / sigma2,
            s_d: 0.0,
            mse_mle: sigma2 / nf,
            sq_dev_second: 0.0,
        }
    }

    fn gaussian_score(sigma2: f64) -> IidScoreMoments<f64> {
        let sigma = sigma2.sqrt();
        IidScoreMoments {
            abs3: 2.0 * (2.0 / PI).sqrt() / sigma.powi(3),
            var1: 1.0 / sigma2,
        }
    }

    #[test]
    fn iid_gaussian_mean_model() {
        for sigma2 in [0.25, 1.0, 4.0] {
            let b = iid_bound(gaussian_score(sigma2), &gaussian_mean_inputs(100, sigma2)).unwrap();
            assert!((b.total - 0.797_884_560_802_865_4).abs() < 1e-12, "sigma2={sigma2}");
            assert!(b.term_scale_gap.abs() < 1e-15);
            assert_eq!(b.term_remainder, 0.0);
            assert_eq!(b.term_second_deriv, 0.0);
        }
    }

    #[test]
    fn iid_first_term_halves_when_n_quadruples() {
        let b1 = iid_bound(gaussian_score(1.0), &gaussian_mean_inputs(50, 1.0)).unwrap();
        let b4 = iid_bound(gaussian_score(1.0), &gaussian_mean_inputs(200, 1.0)).unwrap();
        assert!((b4.q_total * 2.0 - b1.q_total).abs() < 1e-14);
    }

    #[test]
    fn iid_lyapunov_boundary_and_violation() {
        let inputs = gaussian_mean_inputs(16, 1.0);
        let var1: f64 = 2.0;
        let b = iid_bound(
            IidScoreMoments {
                abs3: var1.powf(1.5),
                var1,
            },
            &inputs,
        )
        .unwrap();
        assert!((b.q_total - 5.0 / 4.0).abs() < 1e-14);
        let bad = iid_bound(
            IidScoreMoments {
                abs3: 0.9 * var1.powf(1.5),
                var1,
            },
            &inputs,
        );
        assert!(matches!(bad, Err(Error::InvalidMoments { .. })));
    }

    #[test]
    fn block_sum_general_bound() {
        // n = 10, k = 1, sigma^2 = 1 closed forms.
        let mut s2 = vec![10.0 / 9.0; 10];
        s2[0] = 10.0 / 3.0;
        let s4: Vec<f64> = s2.iter().map(|s| 3.0 * s * s).collect();
        let moments = ScoreMomentProfile::from_per_index(&s2, &s4).unwrap();
        let system = build_neighborhoods(10, 1).unwrap();
        let inputs = TheoremInputs {
            n: 10,
            var_score: 6.0,
            var_mle: 0.09375,
            i2: 1.0,
            s_d: 0.0,
            mse_mle: 0.09375,
            sq_dev_second: 0.0,
        };
        let b = general_bound(&system, &moments, &inputs).unwrap();
        let q = q_sum(&system, &moments).unwrap();
        assert!((b.q_total - q).abs() < 1e-12 * q);
        assert!((b.term_scale_gap - 0.031_754_163_448_145_78).abs() < 1e-14);
        assert_eq!(b.term_remainder, 0.0);
        assert_eq!(b.term_second_deriv, 0.0);
        let sum: f64 = b.terms().iter().map(|t| t.value).sum();
        assert!((b.total - sum).abs() < 1e-12 * b.total);
    }

    #[test]
    fn exact_scaling_removes_scale_gap() {
        // alpha = sqrt(n i2 var_score) exactly when n i2 var_mle = 1.
        let system = build_neighborhoods(4, 0).unwrap();
        let moments = ScoreMomentProfile::uniform(4, MomentEntry::gaussian(1.0)).unwrap();
        let inputs = TheoremInputs {
            n: 4,
            var_score: 2.0,
            var_mle: 0.25,
            i2: 1.0,
            s_d: 0.0,
            mse_mle: 0.25,
            sq_dev_second: 0.0,
        };
        let b = general_bound(&system, &moments, &inputs).unwrap();
        assert_eq!(b.term_scale_gap, 0.0);
    }

    #[test]
    fn remainder_and_second_derivative_terms() {
        let system = build_neighborhoods(4, 0).unwrap();
        let moments = ScoreMomentProfile::uniform(4, MomentEntry::gaussian(1.0f64)).unwrap();
        let inputs = TheoremInputs {
            n: 4,
            var_score: 4.0,
            var_mle: 1.0,
            i2: 1.0,
            s_d: 3.0,
            mse_mle: 0.5,
            sq_dev_second: 2.0,
        };
        let b = general_bound(&system, &moments, &inputs).unwrap();
        // alpha = 2, sqrt(n i2) = 2.
        assert!((b.term_remainder - 3.0 * 2.0 / 4.0 * 0.5).abs() < 1e-15);
        assert!((b.term_second_deriv - 1.0 * 0.5f64.sqrt() * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let system = build_neighborhoods(3, 0).unwrap();
        let moments = ScoreMomentProfile::uniform(3, MomentEntry::gaussian(1.0)).unwrap();
        let good = TheoremInputs {
            n: 3,
            var_score: 1.0,
            var_mle: 1.0,
            i2: 1.0,
            s_d: 0.0,
            mse_mle: 0.0,
            sq_dev_second: 0.0,
        };
        assert!(general_bound(&system, &moments, &good).is_ok());
        let bad = [
            TheoremInputs { i2: 0.0, ..good },
            TheoremInputs { var_mle: -1.0, ..good },
            TheoremInputs { s_d: -1.0, ..good },
            TheoremInputs {
                mse_mle: f64::NAN,
                ..good
            },
            TheoremInputs { n: 4, ..good },
        ];
        for inputs in bad {
            assert!(general_bound(&system, &moments, &inputs).is_err(), "{inputs:?}");
        }
    }
}
