use proptest::prelude::*;
use stein_mle::blocksum::{closed_forms, corollary_bound, BlockSumConfig, BoundMode};
use stein_mle::bound::{general_bound, TheoremInputs};
use stein_mle::dependence::{build_neighborhoods, lemma_terms_mc, q_term, MomentEntry, ScoreMomentProfile};
use stein_mle::wasserstein::{
    empirical_w1_normal, empirical_w1_std_normal, std_normal_cdf, std_normal_quantile, NormalParams, SampleSet,
};
use stein_mle::ReplicateMatrix;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn moment_vec(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    // Fourth moment as second² times a kurtosis factor ≥ 1.
    prop::collection::vec((0.01f64..5.0, 1.0f64..6.0), n)
        .prop_map(|v| v.into_iter().map(|(s, r)| (s, s * s * r)).collect())
}

fn profile(entries: &[(f64, f64)]) -> ScoreMomentProfile<f64> {
    let (s, f): (Vec<f64>, Vec<f64>) = entries.iter().copied().unzip();
    ScoreMomentProfile::from_per_index(&s, &f).unwrap()
}

fn inputs(n: usize, s_d: f64, mse: f64, sq_dev: f64) -> TheoremInputs<f64> {
    TheoremInputs {
        n,
        var_score: 6.0,
        var_mle: 0.09375,
        i2: 1.0,
        s_d,
        mse_mle: mse,
        sq_dev_second: sq_dev,
    }
}

proptest! {
    #[test]
    fn q_term_is_monotone_in_every_moment(
        entries in moment_vec(12),
        m in 0usize..3,
        v in 1usize..=12,
        which in 0usize..12,
        bump in 0.0f64..2.0,
        fourth in any::<bool>(),
    ) {
        let system = build_neighborhoods(12, m).unwrap();
        let base = q_term(v, &system, &profile(&entries)).unwrap();
        let mut bumped = entries.clone();
        let (s, f) = bumped[which];
        bumped[which] = if fourth { (s, f + bump) } else {
            // Keep the Lyapunov ordering valid by raising the fourth moment too.
            let s2 = s + bump;
            (s2, f.max(s2 * s2))
        };
        let after = q_term(v, &system, &profile(&bumped)).unwrap();
        prop_assert!(after >= base * (1.0 - 1e-12));
    }

    #[test]
    fn total_is_monotone_in_taylor_inputs(
        s_d in 0.0f64..3.0,
        mse in 0.0f64..1.0,
        sq in 0.0f64..4.0,
        ds in 0.0f64..1.0,
        dm in 0.0f64..1.0,
        dq in 0.0f64..1.0,
    ) {
        let system = build_neighborhoods(10, 1).unwrap();
        let moments = ScoreMomentProfile::uniform(10, MomentEntry::gaussian(1.0)).unwrap();
        let lo = general_bound(&system, &moments, &inputs(10, s_d, mse, sq)).unwrap();
        let hi = general_bound(&system, &moments, &inputs(10, s_d + ds, mse + dm, sq + dq)).unwrap();
        prop_assert!(hi.total >= lo.total);
        for b in [&lo, &hi] {
            let sum: f64 = b.terms().iter().map(|t| t.value).sum();
            prop_assert!(rel(sum, b.total) < 1e-12);
            prop_assert!(b.terms().iter().all(|t| t.value.is_finite() && t.value >= 0.0));
        }
    }

    #[test]
    fn scale_gap_identity(n in 1usize..10_000, var_mle in 1e-4f64..10.0, alpha in 0.1f64..50.0, i2 in 0.01f64..10.0) {
        let var_score = alpha * alpha * var_mle;
        let system = build_neighborhoods(n, 0).unwrap();
        let moments = ScoreMomentProfile::uniform(n, MomentEntry::gaussian(1.0)).unwrap();
        let t = TheoremInputs { n, var_score, var_mle, i2, s_d: 0.0, mse_mle: 0.0, sq_dev_second: 0.0 };
        let b = general_bound(&system, &moments, &t).unwrap();
        let expected = ((n as f64 * i2 * var_mle).sqrt() - 1.0).abs();
        prop_assert!((b.term_scale_gap - expected).abs() <= 1e-12 * (1.0 + expected));
    }

    #[test]
    fn blocksum_closed_form_identities(n in 1usize..100_000, k in 1usize..20, sigma2 in 0.01f64..100.0) {
        let cf = closed_forms(&BlockSumConfig::new(n, k, 0.0, sigma2).unwrap());
        prop_assert!(rel(cf.alpha * cf.alpha * cf.var_mle, cf.var_score) < 1e-12);
        prop_assert!(rel(cf.xi1_m4, 3.0 * cf.xi1_m2 * cf.xi1_m2) < 1e-12);
        prop_assert!(rel(cf.xii_m4, 3.0 * cf.xii_m2 * cf.xii_m2) < 1e-12);
        prop_assert!(cf.i2 > 0.0);
    }

    #[test]
    fn bound_ignores_location_and_scale(n in 10usize..5_000, k in 1usize..6, theta0 in -10.0f64..10.0, sigma2 in 0.05f64..20.0) {
        let base = corollary_bound(&BlockSumConfig::new(n, k, 0.0, 1.0).unwrap(), BoundMode::Normative).unwrap();
        let moved = corollary_bound(&BlockSumConfig::new(n, k, theta0, sigma2).unwrap(), BoundMode::Normative).unwrap();
        prop_assert!(rel(moved.total, base.total) < 1e-10);
    }

    #[test]
    fn cdf_is_symmetric(x in -8.0f64..8.0) {
        prop_assert!((std_normal_cdf(-x) - (1.0 - std_normal_cdf(x))).abs() < 1e-15);
    }

    #[test]
    fn quantile_inverts_cdf(p in 1e-12f64..(1.0 - 1e-12)) {
        let z = std_normal_quantile(p).unwrap();
        prop_assert!((std_normal_cdf(z) - p).abs() <= 1e-8 * p.min(1.0 - p).max(1e-8));
    }

    #[test]
    fn empirical_w1_is_translation_invariant(xs in prop::collection::vec(-4.0f64..4.0, 1..60), c in -20.0f64..20.0) {
        let plain = empirical_w1_std_normal(&SampleSet::new(xs.clone()).unwrap()).unwrap();
        let shifted = SampleSet::new(xs.iter().map(|x| x + c).collect()).unwrap();
        let moved = empirical_w1_normal(&shifted, NormalParams::new(c, 1.0).unwrap()).unwrap();
        prop_assert!((plain - moved).abs() <= 1e-9 * (1.0 + plain));
    }

    #[test]
    fn lemma_estimate_ignores_thread_count(seed in any::<u64>(), m in 0usize..3) {
        use rand::{Rng, SeedableRng};
        let (reps, n) = (700, 9);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..reps * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let paths = ReplicateMatrix::from_row_major(reps, n, data).unwrap();
        let system = build_neighborhoods(n, m).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
                .install(|| lemma_terms_mc(&paths, &system).unwrap())
        };
        let (a, b) = (run(1), run(5));
        prop_assert!(rel(a.lemma_total, b.lemma_total) < 1e-12);
        prop_assert!(rel(a.standard_error_total, b.standard_error_total) < 1e-12);
    }
}
