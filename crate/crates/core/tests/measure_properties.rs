use mg_core::game::StepRecord;
use mg_core::measure::{
    activity, attendance_variance, class_fractions, conditional_variances, ranked_signal_variances,
    variance_gap_split, ObservableSeries,
};
use proptest::prelude::*;

fn records(d: usize) -> impl Strategy<Value = Vec<StepRecord>> {
    prop::collection::vec(
        (
            0..d,
            prop::collection::vec(-1.0f64..1.0, d),
            prop::collection::vec(-0.5f64..0.5, d),
        ),
        1..300,
    )
    .prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(t, (mu, a, delta))| StepRecord {
                t: t as u64,
                mu_star: mu,
                attendance: a[mu],
                k_vec: vec![0.0; a.len()],
                a_vec_before: a,
                delta_a: delta,
            })
            .collect()
    })
}

/// Textbook two-pass population variance.
fn two_pass(xs: &[f64]) -> f64 {
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

proptest! {
    #[test]
    fn volatility_matches_two_pass_formula(recs in records(2), n in 1usize..2000) {
        let s = ObservableSeries::new(&recs, 2, n);
        let xs: Vec<f64> = recs.iter().map(|r| r.attendance).collect();
        let expected = n as f64 / 4.0 * two_pass(&xs);
        prop_assert!((attendance_variance(&s).unwrap() - expected).abs() <= 1e-9 * (1.0 + expected));
    }

    #[test]
    fn conditional_variances_bound_total(recs in records(4)) {
        // Total variance = mean conditional variance + variance of conditional means.
        let s = ObservableSeries::new(&recs, 4, 1001);
        let total = attendance_variance(&s).unwrap();
        let cond = conditional_variances(&s);
        let t = recs.len() as f64;
        let weighted: f64 = cond
            .iter()
            .enumerate()
            .filter_map(|(mu, v)| v.map(|v| v * recs.iter().filter(|r| r.mu_star == mu).count() as f64 / t))
            .sum();
        prop_assert!(weighted <= total * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn ranks_are_descending_with_gaps_last(recs in records(4)) {
        let s = ObservableSeries::new(&recs, 4, 101);
        let r = ranked_signal_variances(&s);
        let present: Vec<f64> = r.iter().map_while(|x| *x).collect();
        prop_assert!(r[present.len()..].iter().all(Option::is_none));
        prop_assert!(present.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn fractions_are_probabilities(recs in records(3), theta in 0.0f64..0.6, eps in 0.0f64..1.0) {
        let s = ObservableSeries::new(&recs, 3, 101);
        let f = class_fractions(&s, theta).unwrap();
        prop_assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let a = activity(&s, eps).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn gap_split_separates_groups(small in prop::collection::vec(1e-8f64..1e-6, 1..50), large in prop::collection::vec(0.1f64..10.0, 1..50)) {
        let all: Vec<f64> = small.iter().chain(&large).copied().collect();
        let g = variance_gap_split(&all, 1e-12).unwrap();
        prop_assert_eq!(g.n_small, small.len());
        prop_assert!(small.iter().all(|&v| v < g.threshold) && large.iter().all(|&v| v > g.threshold));
    }
}
