//! Overlapping Gaussian block sums: a 1-dependent worked model.
//!
//! With `X_0, …, X_{nk}` i.i.d. `N(θ, σ²)` and known `σ²`, the blocks
//! `S_j = X_{(j-1)k} + … + X_{jk}` share exactly one summand with each
//! neighbour. Each `S_j ~ N((k+1)θ, (k+1)σ²)`, adjacent blocks have
//! covariance `σ²` and blocks further apart are independent.
//!
//! The likelihood is built from `S_1` and the Gaussian conditionals of
//! `S_i | S_{i-1}`, which gives a closed-form MLE, a constant second
//! derivative and a vanishing third derivative.

mod closed_form;
mod simulate;

pub use closed_form::{
    closed_form_scale_gap, compare_closed_forms, corollary_bound, interior_constant, q_closed_form,
    q_closed_form_parts, q_interior_bound, BoundMode, CaseComparison, PrintedCaseParts,
};
pub use simulate::{map_replicates, simulate_paths, simulate_paths_sequential};

use crate::dependence::{MomentEntry, ScoreMomentProfile};
use crate::error::{invalid, Result};
use crate::real::Real;

/// Underlying data are 1-dependent.
pub const DEPENDENCE_RANGE: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSumConfig<T> {
    /// Number of blocks.
    pub n: usize,
    /// Block overlap parameter; each block sums `k + 1` base variables.
    pub k: usize,
    pub theta0: T,
    pub sigma2: T,
}

impl<T: Real> BlockSumConfig<T> {
    pub fn new(n: usize, k: usize, theta0: T, sigma2: T) -> Result<Self> {
        let config = Self { n, k, theta0, sigma2 };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        if self.k == 0 {
            return Err(invalid("k", "must be at least 1"));
        }
        if !self.theta0.is_finite() {
            return Err(invalid("theta0", "must be finite"));
        }
        if !self.sigma2.is_finite() || self.sigma2 <= T::zero() {
            return Err(invalid(
                "sigma2",
                format!("{} must be finite and positive", self.sigma2),
            ));
        }
        Ok(())
    }

    /// Number of base variables `X_0 … X_{nk}`.
    pub fn base_len(&self) -> usize {
        self.n * self.k + 1
    }
}

/// `nk³ + (3n+2)k² + 10k + 2`, the common denominator of the example.
pub(crate) fn denominator<T: Real>(n: usize, k: usize) -> T {
    let n = T::from_count(n);
    let k = T::from_count(k);
    let two = T::lit(2.0);
    n * k * k * k + (T::lit(3.0) * n + two) * k * k + T::lit(10.0) * k + two
}

/// Closed-form moments and constants of the block-sum model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSumClosedForms<T> {
    pub var_mle: T,
    pub var_score: T,
    pub i2: T,
    pub alpha: T,
    /// `E ξ_1²`
    pub xi1_m2: T,
    /// `E ξ_1⁴`
    pub xi1_m4: T,
    /// `E ξ_i²` for `i ≥ 2`
    pub xii_m2: T,
    /// `E ξ_i⁴` for `i ≥ 2`
    pub xii_m4: T,
    /// Uniform bound on `|ℓ⁽³⁾|`; zero here.
    pub s_d: T,
    /// The MLE is unbiased, so this equals `var_mle`.
    pub mse_mle: T,
    /// `ℓ″ ≡ −α`, so this is zero.
    pub sq_dev_second: T,
    /// Correlation of adjacent blocks, `1/(k+1)`.
    pub rho: T,
}

pub fn closed_forms<T: Real>(config: &BlockSumConfig<T>) -> BlockSumClosedForms<T> {
    let n = T::from_count(config.n);
    let k = T::from_count(config.k);
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let s2 = config.sigma2;
    let d = denominator::<T>(config.n, config.k);
    let nk2 = n * k + two;
    let k1 = k + one;
    let k2 = k + two;

    let var_mle = s2 * d / (nk2 * nk2 * k1 * k1);
    let var_score = d / (k2 * k2 * s2);
    let xi1_m2 = n * k2 * k2 * k1 / d;
    let xii_m2 = n * k * k1 * k2 / d;
    BlockSumClosedForms {
        var_mle,
        var_score,
        i2: k1 * k1 / ((k + three) * s2),
        alpha: nk2 * k1 / (k2 * s2),
        xi1_m2,
        xi1_m4: three * xi1_m2 * xi1_m2,
        xii_m2,
        xii_m4: three * xii_m2 * xii_m2,
        s_d: T::zero(),
        mse_mle: var_mle,
        sq_dev_second: T::zero(),
        rho: one / k1,
    }
}

/// Moments of the standardised score contributions: index 1 gets the
/// `ξ_1` pair, indices `2..=n` the `ξ_i` pair.
pub fn moment_profile<T: Real>(config: &BlockSumConfig<T>) -> Result<ScoreMomentProfile<T>> {
    config.validate()?;
    let cf = closed_forms(config);
    ScoreMomentProfile::from_runs([
        (1, MomentEntry::new(cf.xi1_m2, cf.xi1_m4)),
        (config.n - 1, MomentEntry::new(cf.xii_m2, cf.xii_m4)),
    ])
}

/// `k ΣS_i + S_1 + S_n`, the sufficient statistic.
fn weighted_sum<T: Real>(s: &[T], k: usize) -> T {
    let total = s.iter().fold(T::zero(), |a, &x| a + x);
    T::from_count(k) * total + s[0] + s[s.len() - 1]
}

/// Closed-form MLE `(k ΣS_i + S_1 + S_n) / ((nk+2)(k+1))`.
pub fn mle<T: Real>(s: &[T], k: usize) -> Result<T> {
    if s.is_empty() {
        return Err(invalid("s", "block vector is empty"));
    }
    let n = T::from_count(s.len());
    let k_t = T::from_count(k);
    Ok(weighted_sum(s, k) / ((n * k_t + T::lit(2.0)) * (k_t + T::one())))
}

/// Score `ℓ′(θ; S)`.
pub fn score<T: Real>(theta: T, s: &[T], k: usize, sigma2: T) -> Result<T> {
    if s.is_empty() {
        return Err(invalid("s", "block vector is empty"));
    }
    let n = T::from_count(s.len());
    let k_t = T::from_count(k);
    let one = T::one();
    let two = T::lit(2.0);
    let centred = weighted_sum(s, k) - (k_t + one) * (n * k_t + two) * theta;
    Ok(centred / ((k_t + two) * sigma2))
}

/// `ℓ″`, constant in `θ` and the data.
pub fn second_derivative<T: Real>(n: usize, k: usize, sigma2: T) -> T {
    let n = T::from_count(n);
    let k = T::from_count(k);
    let two = T::lit(2.0);
    -((n * k + two) * (k + T::one()) / ((k + two) * sigma2))
}

/// `ℓ⁽³⁾`, identically zero.
pub fn third_derivative<T: Real>() -> T {
    T::zero()
}

/// Mean and variance of `S_i | S_{i-1} = s_prev`.
pub fn conditional_params<T: Real>(s_prev: T, k: usize, theta: T, sigma2: T) -> (T, T) {
    let k = T::from_count(k);
    let k1 = k + T::one();
    let mean = k1 * theta + (s_prev - k1 * theta) / k1;
    let var = k * (k + T::lit(2.0)) * sigma2 / k1;
    (mean, var)
}

/// Per-index score contributions `d/dθ log f(S_1|θ)` and
/// `d/dθ log f(S_i|S_{i-1}; θ)` at `theta`. They sum to [`score`].
pub fn score_contributions<T: Real>(theta: T, s: &[T], config: &BlockSumConfig<T>) -> Result<Vec<T>> {
    if s.len() != config.n {
        return Err(crate::Error::SizeMismatch {
            expected: config.n,
            found: s.len(),
        });
    }
    let k = T::from_count(config.k);
    let k1 = k + T::one();
    let k2 = k + T::lit(2.0);
    let sigma2 = config.sigma2;
    let centre = k1 * theta;
    let mut out = Vec::with_capacity(s.len());
    out.push((s[0] - centre) / sigma2);
    for w in s.windows(2) {
        let (prev, cur) = (w[0] - centre, w[1] - centre);
        out.push((k1 * cur - prev) / (k2 * sigma2));
    }
    Ok(out)
}

/// Standardised summands `ξ_i/√n = contribution_i / √Var ℓ′` at the true
/// parameter; they sum to `W = ℓ′(θ₀)/√Var ℓ′`.
pub fn standardized_contributions<T: Real>(s: &[T], config: &BlockSumConfig<T>) -> Result<Vec<T>> {
    let scale = closed_forms(config).var_score.sqrt();
    let mut out = score_contributions(config.theta0, s, config)?;
    for x in &mut out {
        *x = *x / scale;
    }
    Ok(out)
}
