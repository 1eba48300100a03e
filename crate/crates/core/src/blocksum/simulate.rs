use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{conditional_params, BlockSumConfig};
use crate::error::{invalid, Result};
use crate::matrix::ReplicateMatrix;
use crate::real::Real;
use crate::rng::substream;

fn draw_block_sums<T, R>(config: &BlockSumConfig<T>, rng: &mut R, base: &mut Vec<T>, out: &mut Vec<T>)
where
    T: Real,
    R: Rng,
    StandardNormal: Distribution<T>,
{
    let sigma = config.sigma2.sqrt();
    base.clear();
    base.extend((0..config.base_len()).map(|_| {
        let z: T = StandardNormal.sample(rng);
        config.theta0 + sigma * z
    }));
    out.clear();
    let k = config.k;
    out.extend((1..=config.n).map(|j| base[(j - 1) * k..=j * k].iter().fold(T::zero(), |a, &x| a + x)));
}

/// Draws `reps` independent block-sum vectors and maps each through `f`.
///
/// Replicate `r` uses RNG substream `r` of `seed`; results come back in
/// replicate order and are identical for any rayon pool size.
pub fn map_replicates<T, U, F>(config: &BlockSumConfig<T>, reps: usize, seed: u64, f: F) -> Result<Vec<U>>
where
    T: Real,
    U: Send,
    F: Fn(usize, &[T]) -> U + Sync + Send,
    StandardNormal: Distribution<T>,
{
    config.validate()?;
    Ok((0..reps)
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(base, sums), r| {
                let mut rng = substream(seed, r as u64);
                draw_block_sums(config, &mut rng, base, sums);
                f(r, sums)
            },
        )
        .collect())
}

/// Simulated block sums, one replicate per row.
pub fn simulate_paths<T>(config: &BlockSumConfig<T>, reps: usize, seed: u64) -> Result<ReplicateMatrix<T>>
where
    T: Real,
    StandardNormal: Distribution<T>,
{
    if reps == 0 {
        return Err(invalid("reps", "must be at least 1"));
    }
    let rows = map_replicates(config, reps, seed, |_, s| s.to_vec())?;
    ReplicateMatrix::from_rows(&rows)
}

/// Sequential simulator driven by the marginal of `S_1` and the conditional
/// law of `S_i | S_{i-1}`.
///
/// This chain matches the marginals and the adjacent covariance of the block
/// sums, but it is Markov: blocks two apart have covariance `σ²/(k+1)`
/// instead of zero. Use it only to cross-check one-step quantities.
pub fn simulate_paths_sequential<T>(config: &BlockSumConfig<T>, reps: usize, seed: u64) -> Result<ReplicateMatrix<T>>
where
    T: Real,
    StandardNormal: Distribution<T>,
{
    config.validate()?;
    if reps == 0 {
        return Err(invalid("reps", "must be at least 1"));
    }
    let k1 = T::from_count(config.k + 1);
    let rows: Vec<Vec<T>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, r as u64);
            let mut row = Vec::with_capacity(config.n);
            let z: T = StandardNormal.sample(&mut rng);
            let mut prev = k1 * config.theta0 + (k1 * config.sigma2).sqrt() * z;
            row.push(prev);
            for _ in 1..config.n {
                let (mean, var) = conditional_params(prev, config.k, config.theta0, config.sigma2);
                let z: T = StandardNormal.sample(&mut rng);
                prev = mean + var.sqrt() * z;
                row.push(prev);
            }
            row
        })
        .collect();
    ReplicateMatrix::from_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    fn cov(a: &[f64], b: &[f64]) -> f64 {
        let (ma, mb) = (mean(a), mean(b));
        a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() - 1) as f64
    }

    #[test]
    fn block_sums_share_one_summand() {
        let config = BlockSumConfig::new(3, 2, 0.0, 1.0).unwrap();
        let mut rng = substream(1, 0);
        let (mut base, mut sums) = (Vec::new(), Vec::new());
        draw_block_sums(&config, &mut rng, &mut base, &mut sums);
        assert_eq!(base.len(), 7);
        assert_eq!(sums.len(), 3);
        assert_eq!(sums[0], base[0] + base[1] + base[2]);
        assert_eq!(sums[1], base[2] + base[3] + base[4]);
        assert_eq!(sums[2], base[4] + base[5] + base[6]);
    }

    #[test]
    fn marginal_and_covariance_structure() {
        let (k, theta0, sigma2) = (2usize, 1.5, 2.0);
        let config = BlockSumConfig::new(4, k, theta0, sigma2).unwrap();
        let reps = 40_000;
        let paths = simulate_paths(&config, reps, 11).unwrap();
        let s1 = paths.column(0);
        let s2 = paths.column(1);
        let s3 = paths.column(2);
        let var = (k as f64 + 1.0) * sigma2;
        let se_mean = (var / reps as f64).sqrt();
        assert!((mean(&s1) - 3.0 * theta0).abs() < 4.0 * se_mean);
        // Var of a sample variance of normals: 2 var^2 / (reps - 1).
        let se_var = var * (2.0 / reps as f64).sqrt();
        assert!((cov(&s1, &s1) - var).abs() < 4.0 * se_var);
        let se_cov = var / (reps as f64).sqrt() * 1.5;
        assert!((cov(&s1, &s2) - sigma2).abs() < 4.0 * se_cov);
        assert!(cov(&s1, &s3).abs() < 4.0 * se_cov);
    }

    #[test]
    fn vanishing_variance_collapses_to_zero() {
        let config = BlockSumConfig::new(5, 3, 0.0f64, 1e-300).unwrap();
        let paths = simulate_paths(&config, 3, 5).unwrap();
        assert!(paths.as_slice().iter().all(|x| x.abs() < 1e-140));
    }

    #[test]
    fn reproducible_across_pool_sizes() {
        let config = BlockSumConfig::new(20, 1, 0.3, 1.0).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_paths(&config, 500, 99).unwrap())
        };
        assert_eq!(run(1), run(8));
    }

    #[test]
    fn sequential_simulator_matches_adjacent_covariance() {
        let (k, sigma2) = (1usize, 1.0);
        let config = BlockSumConfig::new(3, k, 0.0, sigma2).unwrap();
        let reps = 40_000;
        let paths = simulate_paths_sequential(&config, reps, 3).unwrap();
        let s1 = paths.column(0);
        let s2 = paths.column(1);
        let var = (k as f64 + 1.0) * sigma2;
        let se_cov = var / (reps as f64).sqrt() * 1.5;
        assert!((cov(&s1, &s2) - sigma2).abs() < 4.0 * se_cov);
        assert!((cov(&s2, &s2) - var).abs() < 4.0 * var * (2.0 / reps as f64).sqrt());
    }

    #[test]
    fn rejects_zero_replicates() {
        let config = BlockSumConfig::new(3, 1, 0.0, 1.0).unwrap();
        assert!(simulate_paths(&config, 0, 1).is_err());
        assert!(simulate_paths_sequential(&config, 0, 1).is_err());
    }
}
