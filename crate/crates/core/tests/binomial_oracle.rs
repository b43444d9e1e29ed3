//! Cross-checks the exact binomial lower bound against an independent
//! evaluation route: the survival function computed by direct log-space
//! summation of probability masses, inverted with plain bisection. The
//! library goes through the regularized incomplete beta function instead,
//! so agreement here exercises two unrelated code paths.

use pacint_core::{cp_lower_bound, BinomialObservation, ConfidenceLevel};

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut table = vec![0.0; n + 1];
    for j in 1..=n {
        table[j] = table[j - 1] + (j as f64).ln();
    }
    table
}

/// P[Bin(n, p) ≥ k] summed term by term.
fn survival(lnf: &[f64], n: u64, k: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let mut total = 0.0;
    for i in k..=n {
        let ln_choose = lnf[n as usize] - lnf[i as usize] - lnf[(n - i) as usize];
        total += (ln_choose + i as f64 * ln_p + (n - i) as f64 * ln_q).exp();
    }
    total.min(1.0)
}

/// Largest p with P[Bin(n, p) ≥ k] ≤ δ, by bisection on the summed tail.
fn oracle_bound(k: u64, n: u64, delta: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let lnf = ln_factorials(n as usize);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if survival(&lnf, n, k, mid) <= delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn library_bound(k: u64, n: u64, delta: f64) -> f64 {
    cp_lower_bound(
        BinomialObservation::new(k, n).unwrap(),
        ConfidenceLevel::new(delta).unwrap(),
    )
}

#[test]
fn agrees_with_summed_tail_on_a_grid() {
    let deltas = [0.3, 0.05, 1e-3, 1e-6];
    for n in [1u64, 2, 3, 5, 10, 37, 100, 250] {
        let ks = [0, 1, n / 3, n / 2, (2 * n) / 3, n.saturating_sub(1), n];
        for &k in &ks {
            for &delta in &deltas {
                let got = library_bound(k, n, delta);
                let want = oracle_bound(k, n, delta);
                assert!(
                    (got - want).abs() <= 1e-10,
                    "k = {k}, n = {n}, delta = {delta}: {got} vs oracle {want}"
                );
            }
        }
    }
}

#[test]
fn agrees_with_summed_tail_at_large_n() {
    for (k, n, delta) in [
        (1500u64, 2000u64, 0.05),
        (1435, 2000, 0.05),
        (9000, 11000, 1e-5),
    ] {
        let got = library_bound(k, n, delta);
        let want = oracle_bound(k, n, delta);
        assert!(
            (got - want).abs() <= 1e-9,
            "k = {k}, n = {n}, delta = {delta}: {got} vs oracle {want}"
        );
    }
}

// Reference values from 40-digit bisection of the exact tail. They pin the
// oracle itself as well as the library, so a shared bug cannot hide.
#[test]
#[allow(clippy::excessive_precision)]
fn both_routes_match_high_precision_references() {
    let cases = [
        (3u64, 4u64, 0.5, 0.614_272_431_867_610_5),
        (7, 10, 0.05, 0.393_375_783_894_587_0),
        (15, 20, 0.1, 0.585_109_611_676_670_0),
        (1, 5, 0.2, 0.043_647_500_209_963_01),
        (40, 50, 1e-5, 0.497_127_657_412_444_0),
        (99, 100, 0.01, 0.935_457_267_951_418_4),
        (1500, 2000, 0.05, 0.733_557_769_504_525_7),
        (9000, 11000, 1e-5, 0.802_095_430_370_233_5),
    ];
    for (k, n, delta, want) in cases {
        let lib = library_bound(k, n, delta);
        let ora = oracle_bound(k, n, delta);
        assert!(
            (lib - want).abs() <= 1e-11,
            "library at k={k}, n={n}: {lib} vs {want}"
        );
        assert!(
            (ora - want).abs() <= 1e-11,
            "oracle at k={k}, n={n}: {ora} vs {want}"
        );
    }
}

// The bound is *defined* by its straddle: the tail probability is within
// budget at the bound and above budget just past it.
#[test]
fn returned_bound_straddles_the_budget() {
    for (k, n, delta) in [
        (1u64, 1u64, 0.05),
        (2, 3, 0.1),
        (7, 10, 0.05),
        (30, 40, 1e-3),
        (90, 100, 0.2),
    ] {
        let bound = library_bound(k, n, delta);
        let lnf = ln_factorials(n as usize);
        let slack = 1e-7;
        let below = survival(&lnf, n, k, (bound - slack).max(0.0));
        let above = survival(&lnf, n, k, (bound + slack).min(1.0));
        assert!(
            below <= delta * (1.0 + 1e-9),
            "k={k}, n={n}: tail below = {below} > {delta}"
        );
        assert!(
            above >= delta * (1.0 - 1e-9),
            "k={k}, n={n}: tail above = {above} < {delta}"
        );
    }
}
