use proptest::prelude::*;
use stein_mle_harness::row::{to_csv, to_json};
use stein_mle_harness::{RateRow, ResultRow};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(f64::MIN_POSITIVE),
        Just(f64::MAX),
    ]
}

fn result_row() -> impl Strategy<Value = ResultRow> {
    (
        (1usize..10_000_000, 1usize..50, finite(), prop::bool::ANY),
        prop::array::uniform8(prop::option::of(finite())),
        (prop::option::of(2usize..1_000_000), prop::option::of(any::<u64>())),
        (
            prop::option::of(any::<bool>()),
            prop::option::of(any::<bool>()),
            prop::option::of("[a-z ,\"=<>]{0,20}"),
        ),
    )
        .prop_map(
            |((n, k, sigma2, closed_form), v, (reps, seed), (bound_ok, empirical_ok, error))| ResultRow {
                n,
                k,
                sigma2,
                mode: if closed_form { "paper" } else { "normative" }.into(),
                q_total: v[0],
                term_scale_gap: v[1],
                term_remainder: v[2],
                term_second_deriv: v[3],
                total: v[4],
                exact_w1: v[5],
                empirical_w1: v[6],
                reps,
                seed,
                wall_ms: v[7],
                q_interior: v[0].map(|x| x / 3.0),
                bound_ok,
                empirical_ok,
                // An empty CSV field reads back as missing.
                error: error.filter(|e| !e.is_empty()),
            },
        )
}

proptest! {
    #[test]
    fn result_rows_survive_csv(rows in prop::collection::vec(result_row(), 0..8)) {
        let text = to_csv(&rows).unwrap();
        let back: Vec<ResultRow> = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<Result<_, _>>()
            .unwrap();
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn result_rows_survive_json(rows in prop::collection::vec(result_row(), 0..8)) {
        let back: Vec<ResultRow> = serde_json::from_str(&to_json(&rows).unwrap()).unwrap();
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn rate_rows_survive_csv(slope in finite(), intercept in finite(), r2 in finite(), res in finite()) {
        let rows = vec![RateRow {
            k: 2,
            mode: "normative".into(),
            term: "total".into(),
            slope,
            intercept,
            r_squared: r2,
            max_abs_residual: res,
            points: 5,
        }];
        let text = to_csv(&rows).unwrap();
        let back: Vec<RateRow> = csv::Reader::from_reader(text.as_bytes()).deserialize().collect::<Result<_, _>>().unwrap();
        prop_assert_eq!(back, rows);
    }
}
