//! Local dependence neighbourhoods and the moment-relaxed Stein terms.
//!
//! Score contributions of an `m`-dependent sample form a `2m`-dependent
//! family. For index `i` the first neighbourhood `A_i` holds every index
//! within `2m` of `i` and the second neighbourhood `B_i` every index within
//! `4m`, both clipped to `1..=n`. All indices in the public API are 1-based.
//!
//! The three relaxed terms for index `v` are
//!
//! ```text
//! n^{-3/2} { 2 Σ_{j∈A_v} Σ_{l∈B_v} (E ξ_v⁴ E ξ_j⁴ E ξ_l⁴)^{1/4}
//!          + 2 Σ_{j∈A_v} Σ_{l∈B_v} (E ξ_v² E ξ_j² E ξ_l²)^{1/2}
//!          + |A_v| Σ_{j∈A_v} (E ξ_v² E ξ_j⁴)^{1/2} }
//! ```
//!
//! Every summand is a product of per-index factors, so each double sum is
//! evaluated as a product of two window sums.

use std::ops::{Add, AddAssign, Mul};

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::matrix::ReplicateMatrix;
use crate::real::Real;

/// Closed interval `lo..=hi` of 1-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexInterval {
    lo: usize,
    hi: usize,
}

impl IndexInterval {
    /// # Panics
    /// If `lo == 0` or `lo > hi`.
    pub fn new(lo: usize, hi: usize) -> Self {
        assert!(lo >= 1 && lo <= hi, "invalid interval {lo}..={hi}");
        Self { lo, hi }
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, i: usize) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn is_subset_of(&self, other: &IndexInterval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

/// Dependency neighbourhoods `A_i ⊆ B_i` for a `2m`-dependent family of `n`
/// summands. Intervals are derived on demand from `(n, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodSystem {
    n: usize,
    m: usize,
}

/// Builds the clipped interval neighbourhoods for `n` summands whose
/// underlying data are `m`-dependent.
pub fn build_neighborhoods(n: usize, m: usize) -> Result<NeighborhoodSystem> {
    if n == 0 {
        return Err(Error::EmptyIndexSet);
    }
    Ok(NeighborhoodSystem { n, m })
}

impl NeighborhoodSystem {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dependence range of the underlying data.
    pub fn m(&self) -> usize {
        self.m
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(())
    }

    fn clipped(&self, i: usize, radius: usize) -> IndexInterval {
        IndexInterval {
            lo: i.saturating_sub(radius).max(1),
            hi: i.saturating_add(radius).min(self.n),
        }
    }

    /// `A_i = {max(1, i-2m) ..= min(n, i+2m)}`.
    pub fn a(&self, i: usize) -> Result<IndexInterval> {
        self.check_index(i)?;
        Ok(self.clipped(i, 2 * self.m))
    }

    /// `B_i = {max(1, i-4m) ..= min(n, i+4m)}`.
    pub fn b(&self, i: usize) -> Result<IndexInterval> {
        self.check_index(i)?;
        Ok(self.clipped(i, 4 * self.m))
    }

    /// Exhaustively checks the neighbourhood invariants. Quadratic in `n`;
    /// intended for verification runs on small systems.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let a_cap = 4 * self.m + 1;
        let b_cap = 8 * self.m + 1;
        for i in 1..=self.n {
            let a = self.clipped(i, 2 * self.m);
            let b = self.clipped(i, 4 * self.m);
            if !a.contains(i) {
                return Err(format!("{i} not in A_{i}"));
            }
            if !a.is_subset_of(&b) {
                return Err(format!("A_{i} not contained in B_{i}"));
            }
            if b.lo < 1 || b.hi > self.n {
                return Err(format!("B_{i} leaves 1..={}", self.n));
            }
            if a.len() > a_cap || b.len() > b_cap {
                return Err(format!("|A_{i}| or |B_{i}| exceeds its cap"));
            }
            for j in 1..=self.n {
                if !a.contains(j) && j.abs_diff(i) <= 2 * self.m {
                    return Err(format!("{j} lies within 2m of {i} but outside A_{i}"));
                }
            }
        }
        Ok(())
    }
}

/// Moments of one standardised score contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEntry<T> {
    pub second: T,
    pub fourth: T,
    pub abs_third: Option<T>,
}

impl<T: Real> MomentEntry<T> {
    pub fn new(second: T, fourth: T) -> Self {
        Self {
            second,
            fourth,
            abs_third: None,
        }
    }

    /// Moments of a centred normal with the given second moment.
    pub fn gaussian(second: T) -> Self {
        Self::new(second, T::lit(3.0) * second * second)
    }

    pub fn with_abs_third(mut self, abs_third: T) -> Self {
        self.abs_third = Some(abs_third);
        self
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |reason: String| Error::InvalidMoments { index, reason };
        let slack = T::one() + T::lit(64.0) * T::epsilon();
        let values = [Some(self.second), Some(self.fourth), self.abs_third];
        for x in values.into_iter().flatten() {
            if !x.is_finite() || x < T::zero() {
                return Err(bad(format!("moment {x} is not finite and non-negative")));
            }
        }
        if self.second * self.second > self.fourth * slack {
            return Err(bad(format!(
                "(E xi^2)^2 = {} exceeds E xi^4 = {}",
                self.second * self.second,
                self.fourth
            )));
        }
        if let Some(a3) = self.abs_third {
            let lower = self.second.powf(T::lit(1.5));
            let upper = self.fourth.powf(T::lit(0.75));
            if lower > a3 * slack || a3 > upper * slack {
                return Err(bad(format!(
                    "E|xi|^3 = {a3} outside the Lyapunov range [{lower}, {upper}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Run<T> {
    start: usize,
    len: usize,
    entry: MomentEntry<T>,
}

impl<T> Run<T> {
    fn end(&self) -> usize {
        self.start + self.len - 1
    }
}

/// Per-index moments `E ξ_i²`, `E ξ_i⁴` (and optionally `E|ξ_i|³`) of the
/// standardised score contributions.
///
/// Stored run-length encoded: models with a handful of distinct marginals
/// (such as the block-sum example) stay O(1) in memory for any `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMomentProfile<T> {
    n: usize,
    runs: Vec<Run<T>>,
}

impl<T: Real> ScoreMomentProfile<T> {
    pub fn from_per_index(second: &[T], fourth: &[T]) -> Result<Self> {
        if second.len() != fourth.len() {
            return Err(Error::SizeMismatch {
                expected: second.len(),
                found: fourth.len(),
            });
        }
        Self::from_runs(second.iter().zip(fourth).map(|(&s, &f)| (1, MomentEntry::new(s, f))))
    }

    pub fn from_per_index_with_abs_third(second: &[T], fourth: &[T], abs_third: &[T]) -> Result<Self> {
        if second.len() != fourth.len() || second.len() != abs_third.len() {
            return Err(Error::SizeMismatch {
                expected: second.len(),
                found: fourth.len().min(abs_third.len()),
            });
        }
        Self::from_runs(
            second
                .iter()
                .zip(fourth)
                .zip(abs_third)
                .map(|((&s, &f), &a)| (1, MomentEntry::new(s, f).with_abs_third(a))),
        )
    }

    pub fn uniform(n: usize, entry: MomentEntry<T>) -> Result<Self> {
        Self::from_runs([(n, entry)])
    }

    /// Builds a profile from consecutive `(length, entry)` runs starting at
    /// index 1. Zero-length runs are skipped; equal neighbours are merged.
    pub fn from_runs(runs: impl IntoIterator<Item = (usize, MomentEntry<T>)>) -> Result<Self> {
        let mut out: Vec<Run<T>> = Vec::new();
        let mut next = 1;
        for (len, entry) in runs {
            if len == 0 {
                continue;
            }
            entry.validate(next)?;
            match out.last_mut() {
                Some(last) if last.entry == entry => last.len += len,
                _ => out.push(Run {
                    start: next,
                    len,
                    entry,
                }),
            }
            next += len;
        }
        if out.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        Ok(Self { n: next - 1, runs: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn run_position(&self, i: usize) -> usize {
        self.runs.partition_point(|r| r.end() < i)
    }

    pub fn entry(&self, i: usize) -> Result<MomentEntry<T>> {
        if i == 0 || i > self.n {
            return Err(Error::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(self.runs[self.run_position(i)].entry)
    }

    pub fn second(&self, i: usize) -> Result<T> {
        Ok(self.entry(i)?.second)
    }

    pub fn fourth(&self, i: usize) -> Result<T> {
        Ok(self.entry(i)?.fourth)
    }

    pub fn abs_third(&self, i: usize) -> Result<Option<T>> {
        Ok(self.entry(i)?.abs_third)
    }

    /// Maximal runs of identical entries, in index order.
    pub fn runs(&self) -> impl Iterator<Item = (IndexInterval, MomentEntry<T>)> + '_ {
        self.runs
            .iter()
            .map(|r| (IndexInterval::new(r.start, r.end()), r.entry))
    }

    /// Expands to per-index `(second, fourth)` vectors.
    pub fn to_per_index(&self) -> (Vec<T>, Vec<T>) {
        let mut second = Vec::with_capacity(self.n);
        let mut fourth = Vec::with_capacity(self.n);
        for r in &self.runs {
            second.extend(std::iter::repeat_n(r.entry.second, r.len));
            fourth.extend(std::iter::repeat_n(r.entry.fourth, r.len));
        }
        (second, fourth)
    }

    fn window_sum(&self, window: IndexInterval, g: impl Fn(&MomentEntry<T>) -> T) -> T {
        let mut acc = T::zero();
        for run in &self.runs[self.run_position(window.lo)..] {
            if run.start > window.hi {
                break;
            }
            let lo = run.start.max(window.lo);
            let hi = run.end().min(window.hi);
            acc = acc + g(&run.entry) * T::from_count(hi - lo + 1);
        }
        acc
    }
}

/// Fractional power with sub-`1e-300` inputs flushed to zero.
fn root<T: Real>(x: T, p: T) -> T {
    if x < T::lit(1e-300) {
        T::zero()
    } else {
        x.powf(p)
    }
}

/// The three relaxed Stein terms, either for one index or summed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QComponents<T> {
    /// Hölder term built from fourth moments.
    pub fourth_moment: T,
    /// Cauchy–Schwarz term built from second moments.
    pub second_moment: T,
    /// Jensen term `|A_v| Σ (E ξ_v² E ξ_j⁴)^{1/2}`.
    pub jensen: T,
}

impl<T: Real> QComponents<T> {
    pub fn zero() -> Self {
        Self {
            fourth_moment: T::zero(),
            second_moment: T::zero(),
            jensen: T::zero(),
        }
    }

    pub fn total(&self) -> T {
        self.fourth_moment + self.second_moment + self.jensen
    }
}

impl<T: Real> Add for QComponents<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            fourth_moment: self.fourth_moment + rhs.fourth_moment,
            second_moment: self.second_moment + rhs.second_moment,
            jensen: self.jensen + rhs.jensen,
        }
    }
}

impl<T: Real> AddAssign for QComponents<T> {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Real> Mul<T> for QComponents<T> {
    type Output = Self;
    fn mul(self, c: T) -> Self {
        Self {
            fourth_moment: self.fourth_moment * c,
            second_moment: self.second_moment * c,
            jensen: self.jensen * c,
        }
    }
}

fn check_sizes<T>(system: &NeighborhoodSystem, moments: &ScoreMomentProfile<T>) -> Result<()> {
    if system.n != moments.n {
        return Err(Error::SizeMismatch {
            expected: system.n,
            found: moments.n,
        });
    }
    Ok(())
}

fn q_term_unchecked<T: Real>(v: usize, system: &NeighborhoodSystem, moments: &ScoreMomentProfile<T>) -> QComponents<T> {
    let quarter = T::lit(0.25);
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let a = system.clipped(v, 2 * system.m);
    let b = system.clipped(v, 4 * system.m);
    let ev = moments.runs[moments.run_position(v)].entry;

    let f4_root = |e: &MomentEntry<T>| root(e.fourth, quarter);
    let s2_root = |e: &MomentEntry<T>| root(e.second, half);
    let f4_sqrt = |e: &MomentEntry<T>| root(e.fourth, half);

    let scale = T::from_count(system.n).powf(T::lit(-1.5));
    QComponents {
        fourth_moment: two
            * root(ev.fourth, quarter)
            * moments.window_sum(a, f4_root)
            * moments.window_sum(b, f4_root)
            * scale,
        second_moment: two
            * root(ev.second, half)
            * moments.window_sum(a, s2_root)
            * moments.window_sum(b, s2_root)
            * scale,
        jensen: T::from_count(a.len()) * root(ev.second, half) * moments.window_sum(a, f4_sqrt) * scale,
    }
}

/// The relaxed Stein terms of index `v`, split by component.
pub fn q_term_components<T: Real>(
    v: usize,
    system: &NeighborhoodSystem,
    moments: &ScoreMomentProfile<T>,
) -> Result<QComponents<T>> {
    check_sizes(system, moments)?;
    system.check_index(v)?;
    Ok(q_term_unchecked(v, system, moments))
}

/// `Q_v`: the sum of the three relaxed Stein terms of index `v`.
pub fn q_term<T: Real>(v: usize, system: &NeighborhoodSystem, moments: &ScoreMomentProfile<T>) -> Result<T> {
    q_term_components(v, system, moments).map(|q| q.total())
}

/// `Σ_v Q_v` split by component.
///
/// Indices whose `B_v` is unclipped and lies inside a single moment run all
/// share one value, so each such stretch is evaluated once and scaled.
pub fn q_sum_components<T: Real>(
    system: &NeighborhoodSystem,
    moments: &ScoreMomentProfile<T>,
) -> Result<QComponents<T>> {
    check_sizes(system, moments)?;
    let reach = 4 * system.m;
    let mut acc = QComponents::zero();
    for run in &moments.runs {
        let (start, end) = (run.start, run.end());
        let stable = (end >= reach && start + reach <= end - reach).then(|| (start + reach, end - reach));
        match stable {
            Some((lo, hi)) => {
                for v in start..lo {
                    acc += q_term_unchecked(v, system, moments);
                }
                acc += q_term_unchecked(lo, system, moments) * T::from_count(hi - lo + 1);
                for v in hi + 1..=end {
                    acc += q_term_unchecked(v, system, moments);
                }
            }
            None => {
                for v in start..=end {
                    acc += q_term_unchecked(v, system, moments);
                }
            }
        }
    }
    Ok(acc)
}

/// `Σ_v Q_v`, the moment-relaxed value of the first three bound terms.
pub fn q_sum<T: Real>(system: &NeighborhoodSystem, moments: &ScoreMomentProfile<T>) -> Result<T> {
    q_sum_components(system, moments).map(|q| q.total())
}

/// Monte Carlo estimate of the local-dependence Stein bound
/// `2 Σ (E|ξ η τ| + |E(ξ η)| E|τ|) + Σ E|ξ η²|` on summands `ξ_i/√n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaTermEstimate<T> {
    /// `Σ_i E|ξ_i η_i τ_i|`
    pub term_xi_eta_tau: T,
    /// `Σ_i |E(ξ_i η_i)| E|τ_i|`
    pub term_cov_abs: T,
    /// `Σ_i E|ξ_i η_i²|`
    pub term_xi_eta_sq: T,
    pub lemma_total: T,
    pub replicate_count: usize,
    /// Delta-method standard error of `lemma_total`.
    pub standard_error_total: T,
}

const LEMMA_CHUNK: usize = 256;

struct LemmaSums<T> {
    abs_xet: Vec<T>,
    xe: Vec<T>,
    abs_tau: Vec<T>,
    abs_xee: Vec<T>,
}

impl<T: Real> LemmaSums<T> {
    fn zeros(n: usize) -> Self {
        Self {
            abs_xet: vec![T::zero(); n],
            xe: vec![T::zero(); n],
            abs_tau: vec![T::zero(); n],
            abs_xee: vec![T::zero(); n],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (dst, src) in [
            (&mut self.abs_xet, &other.abs_xet),
            (&mut self.xe, &other.xe),
            (&mut self.abs_tau, &other.abs_tau),
            (&mut self.abs_xee, &other.abs_xee),
        ] {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = *d + s;
            }
        }
        self
    }
}

/// Calls `f(i, x_i, η_i, τ_i)` for every index of one realisation.
fn for_each_window<T: Real>(
    row: &[T],
    prefix: &mut Vec<T>,
    system: &NeighborhoodSystem,
    mut f: impl FnMut(usize, T, T, T),
) {
    prefix.clear();
    prefix.push(T::zero());
    let mut run = T::zero();
    for &x in row {
        run = run + x;
        prefix.push(run);
    }
    for (idx, &x) in row.iter().enumerate() {
        let i = idx + 1;
        let a = system.clipped(i, 2 * system.m);
        let b = system.clipped(i, 4 * system.m);
        let eta = prefix[a.hi] - prefix[a.lo - 1];
        let tau = prefix[b.hi] - prefix[b.lo - 1];
        f(idx, x, eta, tau);
    }
}

/// Estimates each expectation of the local-dependence Stein bound by
/// replicate averaging.
///
/// `paths` holds one realisation of `(ξ_1/√n, …, ξ_n/√n)` per row. Rows are
/// processed in fixed-size chunks combined in chunk order, so the result does
/// not depend on the number of worker threads.
pub fn lemma_terms_mc<T: Real>(
    paths: &ReplicateMatrix<T>,
    system: &NeighborhoodSystem,
) -> Result<LemmaTermEstimate<T>> {
    let n = system.n;
    if paths.width() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: paths.width(),
        });
    }
    let reps = paths.reps();
    if reps < 2 {
        return Err(Error::TooFewReplicates { found: reps });
    }
    if let Some(pos) = paths.as_slice().iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite {
            replicate: pos / n,
            index: pos % n + 1,
        });
    }

    let chunks: Vec<&[T]> = paths.as_slice().chunks(LEMMA_CHUNK * n).collect();
    let partials: Vec<LemmaSums<T>> = chunks
        .par_iter()
        .map(|chunk| {
            let mut sums = LemmaSums::zeros(n);
            let mut prefix = Vec::with_capacity(n + 1);
            for row in chunk.chunks_exact(n) {
                for_each_window(row, &mut prefix, system, |i, x, eta, tau| {
                    sums.abs_xet[i] = sums.abs_xet[i] + (x * eta * tau).abs();
                    sums.xe[i] = sums.xe[i] + x * eta;
                    sums.abs_tau[i] = sums.abs_tau[i] + tau.abs();
                    sums.abs_xee[i] = sums.abs_xee[i] + (x * eta * eta).abs();
                });
            }
            sums
        })
        .collect();
    let sums = partials.into_iter().fold(LemmaSums::zeros(n), LemmaSums::merge);

    let r = T::from_count(reps);
    let mean_xe: Vec<T> = sums.xe.iter().map(|&s| s / r).collect();
    let mean_tau: Vec<T> = sums.abs_tau.iter().map(|&s| s / r).collect();
    let term_xi_eta_tau = sums.abs_xet.iter().fold(T::zero(), |a, &s| a + s / r);
    let term_cov_abs = mean_xe
        .iter()
        .zip(&mean_tau)
        .fold(T::zero(), |a, (&mu, &nu)| a + mu.abs() * nu);
    let term_xi_eta_sq = sums.abs_xee.iter().fold(T::zero(), |a, &s| a + s / r);
    let two = T::lit(2.0);
    let lemma_total = two * (term_xi_eta_tau + term_cov_abs) + term_xi_eta_sq;

    // Linearised per-replicate contribution; its mean is
    // 2·term_xi_eta_tau + 4·term_cov_abs + term_xi_eta_sq.
    let centre = two * term_xi_eta_tau + T::lit(4.0) * term_cov_abs + term_xi_eta_sq;
    let sq_dev: Vec<T> = chunks
        .par_iter()
        .map(|chunk| {
            let mut prefix = Vec::with_capacity(n + 1);
            let mut acc = T::zero();
            for row in chunk.chunks_exact(n) {
                let mut l = T::zero();
                for_each_window(row, &mut prefix, system, |i, x, eta, tau| {
                    let mu = mean_xe[i];
                    let sign = if mu < T::zero() { -T::one() } else { T::one() };
                    l = l
                        + two * (x * eta * tau).abs()
                        + two * sign * mean_tau[i] * x * eta
                        + two * mu.abs() * tau.abs()
                        + (x * eta * eta).abs();
                });
                acc = acc + (l - centre) * (l - centre);
            }
            acc
        })
        .collect();
    let ss = sq_dev.into_iter().fold(T::zero(), |a, s| a + s);
    let standard_error_total = (ss / (r - T::one()) / r).sqrt();

    Ok(LemmaTermEstimate {
        term_xi_eta_tau,
        term_cov_abs,
        term_xi_eta_sq,
        lemma_total,
        replicate_count: reps,
        standard_error_total,
    })
}

/// Sample moments of `ξ_i = √n · x_i` from replicate rows of `x_i = ξ_i/√n`.
pub fn empirical_moment_profile<T: Real>(paths: &ReplicateMatrix<T>) -> Result<ScoreMomentProfile<T>> {
    let n = paths.width();
    if n == 0 {
        return Err(Error::EmptyIndexSet);
    }
    if paths.reps() == 0 {
        return Err(invalid("paths", "no replicates"));
    }
    let r = T::from_count(paths.reps());
    let nn = T::from_count(n);
    let mut second = vec![T::zero(); n];
    let mut fourth = vec![T::zero(); n];
    for row in paths.rows() {
        for (i, &x) in row.iter().enumerate() {
            let x2 = x * x;
            second[i] = second[i] + x2;
            fourth[i] = fourth[i] + x2 * x2;
        }
    }
    for (s, f) in second.iter_mut().zip(fourth.iter_mut()) {
        *s = *s / r * nn;
        *f = *f / r * nn * nn;
    }
    ScoreMomentProfile::from_per_index(&second, &fourth)
}
