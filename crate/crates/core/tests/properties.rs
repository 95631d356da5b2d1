use adomian_core::{
    catalan_closed, catalan_recurrence, cauchy_convolve, convergence_threshold, majorant_ratio,
    majorant_term, MajorantParams, OddPowerSeries,
};
use proptest::prelude::*;

proptest! {
    #[test]
    fn catalan_recurrence_equals_closed_form(n in 0usize..=30) {
        let table = catalan_recurrence(n);
        prop_assert_eq!(&table.values()[n], &catalan_closed(n));
    }

    #[test]
    fn majorant_monotone_in_norm(
        n in 1usize..80,
        beta in -4.0f64..4.0,
        l0 in 1e-3f64..2.0,
        bump in 1e-3f64..1.0,
    ) {
        let lo = MajorantParams::new(beta, l0, 1.0, 0.1).unwrap();
        let hi = MajorantParams::new(beta, l0 + bump, 1.0, 0.1).unwrap();
        prop_assert!(majorant_term(n, &hi) > majorant_term(n, &lo));
    }

    #[test]
    fn majorant_monotone_in_abs_beta(
        n in 1usize..80,
        beta in 0.0f64..4.0,
        bump in 1e-3f64..1.0,
        l0 in 1e-3f64..2.0,
        flip in any::<bool>(),
    ) {
        let s = if flip { -1.0 } else { 1.0 };
        let lo = MajorantParams::new(s * beta, l0, 1.0, 0.1).unwrap();
        let hi = MajorantParams::new(-s * (beta + bump), l0, 1.0, 0.1).unwrap();
        prop_assert!(majorant_term(n, &hi) > majorant_term(n, &lo));
    }

    #[test]
    fn ratios_below_one_under_threshold(
        beta in -5.0f64..5.0,
        a_omega in 1e-3f64..10.0,
        frac in 0.01f64..0.999,
        n in 10usize..400,
    ) {
        let theta = convergence_threshold(&MajorantParams::new(beta, 0.0, a_omega, 0.0).unwrap()).unwrap();
        let p = MajorantParams::from_source(beta, a_omega, frac * theta).unwrap();
        prop_assert!(majorant_ratio(n, &p) < 1.0);
    }

    #[test]
    fn ratios_above_one_at_twice_threshold(
        beta in -5.0f64..5.0,
        a_omega in 1e-3f64..10.0,
        n in 10usize..400,
    ) {
        let theta = convergence_threshold(&MajorantParams::new(beta, 0.0, a_omega, 0.0).unwrap()).unwrap();
        let p = MajorantParams::from_source(beta, a_omega, 2.0 * theta).unwrap();
        prop_assert!(majorant_ratio(n, &p) > 1.0);
    }

    #[test]
    fn ratio_is_quotient_of_terms(beta in -2.0f64..2.0, l0 in 0.01f64..0.3, n in 0usize..60) {
        let p = MajorantParams::new(beta, l0, 1.0, 0.1).unwrap();
        let q = majorant_term(n + 1, &p) / majorant_term(n, &p);
        prop_assert!((majorant_ratio(n, &p) - q).abs() <= 1e-12 * q);
    }

    #[test]
    fn odd_series_is_odd(coeffs in prop::collection::vec(-10.0f64..10.0, 1..20), s in -2.0f64..2.0) {
        let a = OddPowerSeries::new(coeffs).unwrap();
        prop_assert_eq!(a.eval(-s), -a.eval(s));
    }

    #[test]
    fn convolution_commutes(
        a in prop::collection::vec(-3i32..3, 1..12),
        b in prop::collection::vec(-3i32..3, 1..12),
    ) {
        let n = a.len().min(b.len()) - 1;
        let fa = OddPowerSeries::new(a.iter().map(|&v| v as f64).collect()).unwrap();
        let fb = OddPowerSeries::new(b.iter().map(|&v| v as f64).collect()).unwrap();
        prop_assert_eq!(cauchy_convolve(&fa, &fb, n).unwrap(), cauchy_convolve(&fb, &fa, n).unwrap());
    }
}
