use rand_distr::{Distribution, StandardNormal};
use stein_mle::blocksum::{
    closed_forms, map_replicates, mle, moment_profile, standardized_contributions, BlockSumConfig,
};
use stein_mle::dependence::{build_neighborhoods, empirical_moment_profile, lemma_terms_mc, q_sum};
use stein_mle::rng::substream;
use stein_mle::wasserstein::{empirical_w1_std_normal, exact_w1_normal, quantile_coupling_w1, NormalParams, SampleSet};
use stein_mle::ReplicateMatrix;

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

fn normal_draws(count: usize, sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, 0);
    (0..count)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect()
}

fn standardized_paths(config: &BlockSumConfig<f64>, reps: usize, seed: u64) -> ReplicateMatrix<f64> {
    let rows = map_replicates(config, reps, seed, |_, s| {
        standardized_contributions(s, config).unwrap()
    })
    .unwrap();
    ReplicateMatrix::from_rows(&rows).unwrap()
}

#[test]
fn score_moments_match_the_profile() {
    let config = BlockSumConfig::new(10, 1, 0.7, 2.0).unwrap();
    let reps = 20_000;
    let paths = standardized_paths(&config, reps, 21);
    let expected = moment_profile(&config).unwrap();
    let n = config.n as f64;
    for i in 0..config.n {
        let xi2: Vec<f64> = paths.column(i).iter().map(|x| n * x * x).collect();
        let (m, v) = mean_var(&xi2);
        let se = (v / reps as f64).sqrt();
        let target = expected.second(i + 1).unwrap();
        assert!(
            (m - target).abs() < 3.0 * se,
            "index {}: {m} vs {target} (se {se})",
            i + 1
        );
    }
}

#[test]
fn standardized_score_has_unit_variance() {
    let config = BlockSumConfig::new(30, 2, 0.0, 1.0).unwrap();
    let reps = 20_000;
    let paths = standardized_paths(&config, reps, 5);
    let w: Vec<f64> = paths.rows().map(|r| r.iter().sum()).collect();
    let (_, v) = mean_var(&w);
    // Var of a sample variance of normals: 2σ⁴/(reps − 1).
    let se = (2.0 / (reps as f64 - 1.0)).sqrt();
    assert!((v - 1.0).abs() < 3.0 * se, "{v}");
}

#[test]
fn mle_is_unbiased_with_the_closed_form_variance() {
    let config = BlockSumConfig::new(100, 3, -1.25, 0.5).unwrap();
    let reps = 20_000;
    let est = map_replicates(&config, reps, 8, |_, s| mle(s, config.k).unwrap()).unwrap();
    let (m, v) = mean_var(&est);
    let var_mle = closed_forms(&config).var_mle;
    assert!((m - config.theta0).abs() < 3.0 * (v / reps as f64).sqrt());
    assert!(((v - var_mle) / var_mle).abs() < 0.05);
}

#[test]
fn lemma_total_is_dominated_by_empirical_relaxation() {
    let config = BlockSumConfig::new(10, 1, 0.0, 1.0).unwrap();
    let paths = standardized_paths(&config, 10_000, 13);
    let system = build_neighborhoods(10, 1).unwrap();
    let lemma = lemma_terms_mc(&paths, &system).unwrap();
    let relaxed = q_sum(&system, &empirical_moment_profile(&paths).unwrap()).unwrap();
    assert!(lemma.lemma_total <= relaxed + 3.0 * lemma.standard_error_total);
}

#[test]
fn iid_lemma_total_matches_gaussian_moments() {
    let (reps, n) = (10_000, 100);
    let scale = 1.0 / (n as f64).sqrt();
    let data = normal_draws(reps * n, scale, 3);
    let paths = ReplicateMatrix::from_row_major(reps, n, data).unwrap();
    let est = lemma_terms_mc(&paths, &build_neighborhoods(n, 0).unwrap()).unwrap();
    // 2·E|Z|³ + 2·E Z²·E|Z| + E|Z|³, all over √n.
    let abs1 = (2.0 / std::f64::consts::PI).sqrt();
    let expected = (3.0 * 2.0 * abs1 + 2.0 * abs1) / (n as f64).sqrt();
    assert!((expected - 0.6383082).abs() < 1e-6);
    assert!((est.lemma_total - expected).abs() < 3.0 * est.standard_error_total);
}

#[test]
fn empirical_w1_shrinks_towards_the_exact_value() {
    let v: f64 = 0.9375;
    let exact = exact_w1_normal(NormalParams::new(0.0, v.sqrt()).unwrap(), NormalParams::standard());
    let mut errors = Vec::new();
    for (count, seed) in [(1_000usize, 1u64), (10_000, 2), (100_000, 3)] {
        let samples = SampleSet::new(normal_draws(count, v.sqrt(), seed))
            .unwrap()
            .into_sorted();
        let est = empirical_w1_std_normal(&samples).unwrap();
        let coupled = quantile_coupling_w1(&samples).unwrap();
        assert!((est - coupled).abs() < 2.0 / (count as f64).sqrt());
        errors.push((est - exact).abs());
    }
    assert!(errors[2] < errors[0]);
    assert!(errors[2] < 0.01);
}

#[test]
fn million_draws_recover_the_exact_distance() {
    let sd = 0.9375f64.sqrt();
    let exact = exact_w1_normal(NormalParams::new(0.0, sd).unwrap(), NormalParams::standard());
    let est = empirical_w1_std_normal(&SampleSet::new(normal_draws(1_000_000, sd, 17)).unwrap()).unwrap();
    assert!((est - exact).abs() < 0.005, "{est} vs {exact}");
}

#[test]
fn standard_normal_draws_are_close_to_the_reference() {
    let est = empirical_w1_std_normal(&SampleSet::new(normal_draws(100_000, 1.0, 99)).unwrap()).unwrap();
    assert!(est < 0.01, "{est}");
}
