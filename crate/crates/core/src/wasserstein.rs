//! Standard normal CDF and quantile, and Wasserstein-1 distances to normal
//! laws.
//!
//! In one dimension `W₁(F, G) = ∫ |F(x) − G(x)| dx`. Against an empirical
//! CDF the integrand is `|c − Φ(x)|` with `c` constant between consecutive
//! order statistics, and `∫ Φ = xΦ(x) + φ(x)` gives every piece in closed
//! form, including both infinite tails.

use crate::error::{Error, Result};
use crate::real::Real;

pub fn std_normal_pdf<T: Real>(x: T) -> T {
    (-(x * x) / T::lit(2.0)).exp() / (T::lit(2.0) * T::PI()).sqrt()
}

/// `Φ(x) = erfc(−x/√2)/2`.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    (-x * T::FRAC_1_SQRT_2()).erfc() / T::lit(2.0)
}

// Rational approximation of the normal quantile (P. J. Acklam), relative
// error below 1.2e-9 before refinement.
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.38357751867269e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const P_LOW: f64 = 0.02425;

fn acklam_lower(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Quantile for `p ≤ 1/2`, refined by Halley steps on `Φ(z) − p`.
fn lower_quantile<T: Real>(p: T) -> T {
    let mut z = T::lit(acklam_lower(p.to_f64().expect("finite probability")));
    for _ in 0..2 {
        let pdf = std_normal_pdf(z);
        if pdf <= T::zero() {
            break;
        }
        let u = (std_normal_cdf(z) - p) / pdf;
        z = z - u / (T::one() + z * u / T::lit(2.0));
    }
    z
}

/// `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn std_normal_quantile<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::ProbabilityOutOfRange(p.to_f64().unwrap_or(f64::NAN)));
    }
    let half = T::lit(0.5);
    Ok(if p == half {
        T::zero()
    } else if p < half {
        lower_quantile(p)
    } else {
        -lower_quantile(T::one() - p)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalParams<T> {
    pub mean: T,
    pub sd: T,
}

impl<T: Real> NormalParams<T> {
    pub fn new(mean: T, sd: T) -> Result<Self> {
        if !mean.is_finite() || !sd.is_finite() || sd < T::zero() {
            return Err(Error::InvalidInput {
                name: "normal",
                reason: format!("mean {mean} and sd {sd} must be finite with sd >= 0"),
            });
        }
        Ok(Self { mean, sd })
    }

    pub fn standard() -> Self {
        Self {
            mean: T::zero(),
            sd: T::one(),
        }
    }
}

/// Exact `W₁` between two normal laws: `E|δ + sZ|` for the mean difference
/// `δ` and sd difference `s` (the comonotone coupling).
pub fn exact_w1_normal<T: Real>(a: NormalParams<T>, b: NormalParams<T>) -> T {
    let delta = (a.mean - b.mean).abs();
    let s = (a.sd - b.sd).abs();
    if s == T::zero() {
        return delta;
    }
    let sqrt_2_over_pi = T::FRAC_2_SQRT_PI() * T::FRAC_1_SQRT_2();
    s * sqrt_2_over_pi * (-(delta * delta) / (T::lit(2.0) * s * s)).exp()
        + delta * (T::one() - T::lit(2.0) * std_normal_cdf(-delta / s))
}

/// A finite sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet<T> {
    values: Vec<T>,
    sorted: bool,
}

impl<T: Real> SampleSet<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { replicate: i, index: 0 });
        }
        let sorted = values.windows(2).all(|w| w[0] <= w[1]);
        Ok(Self { values, sorted })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_sorted(mut self) -> Self {
        if !self.sorted {
            self.values.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
            self.sorted = true;
        }
        self
    }

    fn sorted_values(&self) -> std::borrow::Cow<'_, [T]> {
        if self.sorted {
            std::borrow::Cow::Borrowed(&self.values)
        } else {
            let mut v = self.values.clone();
            v.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
            std::borrow::Cow::Owned(v)
        }
    }

    /// Sample shifted and scaled by `(x − mean)/sd`.
    fn standardized(&self, reference: NormalParams<T>) -> Vec<T> {
        self.sorted_values()
            .iter()
            .map(|&x| (x - reference.mean) / reference.sd)
            .collect()
    }
}

/// `∫_{-∞}^{x} Φ(t) dt = xΦ(x) + φ(x)`.
fn cdf_integral_below<T: Real>(x: T, cdf: T) -> T {
    x * cdf + std_normal_pdf(x)
}

/// `∫_a^b (c − Φ(x)) dx` for `a ≤ b`, using the form with the smaller
/// magnitudes on each side of zero.
fn signed_piece<T: Real>(c: T, a: T, b: T) -> T {
    if a >= T::zero() {
        // ∫ (c − Φ) = ∫ (1 − Φ) − (1 − c)(b − a), with ∫_x^∞ (1 − Φ) = G(−x).
        let upper = |x: T| cdf_integral_below(-x, std_normal_cdf(-x));
        upper(a) - upper(b) - (T::one() - c) * (b - a)
    } else {
        c * (b - a) - (cdf_integral_below(b, std_normal_cdf(b)) - cdf_integral_below(a, std_normal_cdf(a)))
    }
}

/// `∫_a^b |c − Φ(x)| dx` for `0 < c < 1`.
fn abs_piece<T: Real>(c: T, a: T, b: T, cdf_a: T, cdf_b: T) -> T {
    if b <= a {
        return T::zero();
    }
    if cdf_a >= c {
        return -signed_piece(c, a, b);
    }
    if cdf_b <= c {
        return signed_piece(c, a, b);
    }
    let q = std_normal_quantile(c).expect("0 < c < 1").max(a).min(b);
    signed_piece(c, a, q) - signed_piece(c, q, b)
}

fn w1_sorted_std<T: Real>(xs: &[T]) -> T {
    let n = xs.len();
    let nt = T::from_count(n);
    let cdfs: Vec<T> = xs.iter().map(|&x| std_normal_cdf(x)).collect();
    // Left tail: ∫_{-∞}^{x_(1)} Φ. Right tail: ∫_{x_(n)}^{∞} (1 − Φ).
    let first = xs[0];
    let last = xs[n - 1];
    let mut acc = cdf_integral_below(first, cdfs[0]);
    acc = acc + cdf_integral_below(-last, std_normal_cdf(-last));
    for i in 1..n {
        let c = T::from_count(i) / nt;
        acc = acc + abs_piece(c, xs[i - 1], xs[i], cdfs[i - 1], cdfs[i]);
    }
    acc
}

/// Exact `W₁` between the empirical law of `samples` and `reference`.
pub fn empirical_w1_normal<T: Real>(samples: &SampleSet<T>, reference: NormalParams<T>) -> Result<T> {
    if reference.sd <= T::zero() {
        return Err(Error::InvalidInput {
            name: "reference",
            reason: "sd must be positive".into(),
        });
    }
    Ok(reference.sd * w1_sorted_std(&samples.standardized(reference)))
}

/// Exact `W₁` between the empirical law of `samples` and `N(0, 1)`.
pub fn empirical_w1_std_normal<T: Real>(samples: &SampleSet<T>) -> Result<T> {
    Ok(w1_sorted_std(&samples.sorted_values()))
}

/// Quantile-coupling approximation `(1/N) Σ |x_(i) − Φ⁻¹((i − 1/2)/N)|`.
pub fn quantile_coupling_w1<T: Real>(samples: &SampleSet<T>) -> Result<T> {
    let xs = samples.sorted_values();
    let nt = T::from_count(xs.len());
    let half = T::lit(0.5);
    let mut acc = T::zero();
    for (i, &x) in xs.iter().enumerate() {
        let q = std_normal_quantile((T::from_count(i) + half) / nt)?;
        acc = acc + (x - q).abs();
    }
    Ok(acc / nt)
}
