//! Invariants of the evaluation metrics: histograms partition the sample,
//! equal-mass bins tile it in error order, macro averages ignore class
//! sizes, and binned uncertainty tracks binned error when the scales are
//! actually informative.

use pacint_core::{
    coverage_rate, equal_mass_bins, error_range_distribution, macro_mae, spearman_rank,
    EvaluatedExample, Interval,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn example(y: f64, mu: f64, sigma: f64) -> EvaluatedExample {
    EvaluatedExample::new(y, mu, sigma, None).unwrap()
}

proptest! {
    #[test]
    fn histogram_is_a_partition(errors in proptest::collection::vec(0.0..40.0f64, 1..300)) {
        let h = error_range_distribution(&errors).unwrap();
        for pct in [h.pct_0_5, h.pct_6_10, h.pct_11_plus] {
            prop_assert!((0.0..=100.0).contains(&pct));
        }
        prop_assert!((h.pct_0_5 + h.pct_6_10 + h.pct_11_plus - 100.0).abs() <= 1e-9);
    }

    #[test]
    fn bins_tile_the_sample_in_error_order(
        errors in proptest::collection::vec(0.0..30.0f64, 1..200),
        n_bins in 1usize..12,
    ) {
        prop_assume!(errors.len() >= n_bins);
        let examples: Vec<EvaluatedExample> =
            errors.iter().map(|&e| example(e, 0.0, 1.0)).collect();
        let bins = equal_mass_bins(&examples, n_bins).unwrap();

        prop_assert_eq!(bins.len(), n_bins);
        prop_assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), errors.len());
        let max = bins.iter().map(|b| b.count).max().unwrap();
        let min = bins.iter().map(|b| b.count).min().unwrap();
        prop_assert!(max - min <= 1);
        for pair in bins.windows(2) {
            prop_assert!(pair[0].count >= pair[1].count); // remainder goes to earlier bins
            prop_assert!(pair[0].mean_abs_error <= pair[1].mean_abs_error + 1e-12);
        }
    }

    // Replicating every example of one class must not move the macro MAE:
    // the class mean is unchanged and classes are equally weighted.
    #[test]
    fn macro_mae_ignores_class_multiplicity(
        base in proptest::collection::vec((0u8..=10, 0.0..3.0f64), 2..40),
        dup_class in 0u8..=10,
    ) {
        let examples: Vec<EvaluatedExample> = base
            .iter()
            .map(|&(klass, err)| example(f64::from(klass), f64::from(klass) + err, 1.0))
            .collect();
        let mut duplicated = examples.clone();
        duplicated.extend(
            examples.iter().filter(|e| e.label().klass() == dup_class).copied(),
        );
        let a = macro_mae(&examples).unwrap();
        let b = macro_mae(&duplicated).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn coverage_counts_explicitly(
        points in proptest::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..100),
    ) {
        let examples: Vec<EvaluatedExample> = points
            .iter()
            .map(|&(y, mu)| {
                let interval = Interval::new(mu - 1.0, mu + 1.0).unwrap();
                EvaluatedExample::new(y, mu, 1.0, Some(interval)).unwrap()
            })
            .collect();
        let hits = points.iter().filter(|&&(y, mu)| (y - mu).abs() <= 1.0).count();
        let want = 100.0 * hits as f64 / points.len() as f64;
        prop_assert!((coverage_rate(&examples).unwrap() - want).abs() <= 1e-12);
    }

    #[test]
    fn spearman_is_one_under_monotone_transforms(
        xs in proptest::collection::hash_set(-50i32..50, 3..40),
    ) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let grown: Vec<f64> = xs.iter().map(|x| (0.1 * x).exp()).collect();
        let flipped: Vec<f64> = xs.iter().map(|x| -x).collect();
        prop_assert_eq!(spearman_rank(&xs, &grown).unwrap(), 1.0);
        prop_assert_eq!(spearman_rank(&xs, &flipped).unwrap(), -1.0);
    }
}

// With informative scales (error drawn as |σ·ξ|), sorting by error must
// drag σ along: the binned σ means rise almost monotonically and correlate
// near-perfectly with the binned errors.
#[test]
fn binned_sigma_tracks_binned_error_when_scales_are_honest() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let examples: Vec<EvaluatedExample> = (0..4000)
        .map(|_| {
            let sigma = rng.random_range(0.2..2.0);
            let noise: f64 = rng.sample(StandardNormal);
            example(sigma * noise, 0.0, sigma)
        })
        .collect();
    let bins = equal_mass_bins(&examples, 5).unwrap();
    let errors: Vec<f64> = bins.iter().map(|b| b.mean_abs_error).collect();
    let sigmas: Vec<f64> = bins.iter().map(|b| b.mean_sigma).collect();
    let rho = spearman_rank(&errors, &sigmas).unwrap();
    assert!(rho >= 0.9, "bin rank correlation {rho}");
    let rising = sigmas.windows(2).filter(|p| p[1] >= p[0]).count();
    assert!(
        rising >= 3,
        "sigma means should rise across most bins: {sigmas:?}"
    );
}
