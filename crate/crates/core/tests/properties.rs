//! Property tests over seeded random profiles.

use henon4_core::log_transform::{log_energy, sqrt_transform_energy, to_log_profile, weighted_exp_integral_log};
use henon4_core::moser::{moser_navier, MoserParams};
use henon4_core::radial::{
    cavalieri_pair, embedding_bound, laplacian_l2_sq, pointwise_log_bound_margin, random_smooth_profile,
    series_upper_bound, sigma_alpha, weighted_functional, weighted_lp_norm_p,
};
use henon4_core::{BoundaryKind, FunctionalParams, QuadratureSpec};
use proptest::prelude::*;

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn m_strategy() -> impl Strategy<Value = Option<u32>> {
    prop_oneof![Just(None), (0u32..4).prop_map(Some)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_is_quadratic(seed in 0u64..10_000, c in -5.0f64..5.0) {
        let u = random_smooth_profile(seed);
        let e = laplacian_l2_sq(&u, &spec()).unwrap();
        let ec = laplacian_l2_sq(&u.scaled(c), &spec()).unwrap();
        prop_assert!((ec - c * c * e).abs() <= 1e-10 * (1.0 + ec));
    }

    #[test]
    fn lp_norm_is_homogeneous(seed in 0u64..10_000, c in 0.1f64..5.0, p in 1.0f64..8.0, alpha in 0.0f64..20.0) {
        let u = random_smooth_profile(seed);
        let a = weighted_lp_norm_p(&u, p, alpha, &spec()).unwrap();
        let b = weighted_lp_norm_p(&u.scaled(-c), p, alpha, &spec()).unwrap();
        prop_assert!(rel(b, c.powf(p) * a) <= 1e-9);
    }

    #[test]
    fn energy_identity_triple(seed in 0u64..10_000, gamma in 0.5f64..40.0) {
        let u = random_smooth_profile(seed);
        let radial = laplacian_l2_sq(&u, &spec()).unwrap();
        let sqrt_form = sqrt_transform_energy(&u, &spec()).unwrap();
        let log_form = log_energy(&to_log_profile(&u, gamma).unwrap(), &spec()).unwrap();
        prop_assert!(rel(radial, sqrt_form) <= 1e-8, "{radial} vs {sqrt_form}");
        prop_assert!(rel(radial, log_form) <= 1e-8, "{radial} vs {log_form}");
    }

    #[test]
    fn functional_identity(seed in 0u64..10_000, alpha in 0.0f64..16.0, beta in 0.05f64..0.9, gamma in 1.0f64..30.0) {
        let v = random_smooth_profile(seed).normalized(&spec()).unwrap();
        let sigma = beta * sigma_alpha(alpha);
        let p = FunctionalParams::new(alpha, sigma, None).unwrap();
        let direct = weighted_functional(&v, &p, &spec()).unwrap();
        let wp = to_log_profile(&v, gamma).unwrap();
        let log = weighted_exp_integral_log(&wp, alpha, sigma, &spec()).unwrap();
        prop_assert!(rel(direct, log) <= 1e-8, "{direct} vs {log}");
    }

    #[test]
    fn pointwise_margin(seed in 0u64..10_000) {
        let u = random_smooth_profile(seed);
        prop_assert!(pointwise_log_bound_margin(&u, &spec()).unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn embedding_holds(seed in 0u64..10_000, p in 1.0f64..8.0, alpha in 0.0f64..30.0) {
        let u = random_smooth_profile(seed);
        let lap = laplacian_l2_sq(&u, &spec()).unwrap().sqrt();
        let lhs = weighted_lp_norm_p(&u, p, alpha, &spec()).unwrap();
        prop_assert!(lhs <= embedding_bound(p, alpha, lap));
    }

    #[test]
    fn series_bound_dominates(seed in 0u64..10_000, alpha in 0.0f64..20.0, beta in 0.05f64..0.95, m in m_strategy()) {
        let v = random_smooth_profile(seed).normalized(&spec()).unwrap();
        let p = FunctionalParams::new(alpha, beta * sigma_alpha(alpha), m).unwrap();
        let value = weighted_functional(&v, &p, &spec()).unwrap();
        prop_assert!(value <= series_upper_bound(&p, 1.0).unwrap());
    }

    #[test]
    fn truncation_is_monotone(seed in 0u64..10_000, alpha in 0.0f64..20.0, beta in 0.05f64..1.5) {
        let v = random_smooth_profile(seed).normalized(&spec()).unwrap();
        let sigma = beta * sigma_alpha(alpha);
        let f = |m| weighted_functional(&v, &FunctionalParams::new(alpha, sigma, m).unwrap(), &spec()).unwrap();
        let mut prev = f(None);
        for m in 0..4 {
            let cur = f(Some(m));
            prop_assert!(cur <= prev * (1.0 + 1e-10), "m = {m}: {cur} > {prev}");
            prev = cur;
        }
    }

    #[test]
    fn cavalieri(seed in 0u64..10_000, k in 1.0f64..4.0) {
        let u = random_smooth_profile(seed);
        let (direct, rearranged) = cavalieri_pair(&u, |x| x.powf(k), 1 << 16, &spec()).unwrap();
        prop_assert!(rel(direct, rearranged) <= 1e-6, "{direct} vs {rearranged}");
    }

    #[test]
    fn moser_norm_decreases_to_one(d1 in 1.0f64..30.0, gap in 0.5f64..30.0) {
        let norm = |d: f64| {
            let u = moser_navier(&MoserParams::new(10f64.powf(-d), BoundaryKind::Navier).unwrap()).unwrap();
            laplacian_l2_sq(&u, &spec()).unwrap()
        };
        let (a, b) = (norm(d1), norm(d1 + gap));
        prop_assert!(b < a && b > 1.0);
    }
}
