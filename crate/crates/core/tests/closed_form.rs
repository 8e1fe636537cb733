//! Fund-selection criteria and the buy-low sell-high smooth-fit solution.

use ambiswitch_core::closed_form::{
    classify_fund_strategy, fund_k, fund_thresholds, kappa2_boundary, solve_smoothfit, value_buy_sell, BuyLowParams,
    FundError, FundGrid, FundParams, StrategyType,
};
use proptest::prelude::*;

#[test]
fn reference_k_values() {
    let p = FundParams::reference(0.0);
    assert!((fund_k(&p, 1, false).unwrap() - 61.53846).abs() <= 1e-5);
    assert!((fund_k(&p, 2, false).unwrap() - 160.0).abs() <= 1e-9);
    let edge = FundParams::reference(1.0 / 15.0);
    assert!((fund_k(&edge, 2, true).unwrap() - fund_k(&edge, 1, true).unwrap()).abs() <= 1e-9);
    assert!((kappa2_boundary(&p) - 1.0 / 15.0).abs() < 1e-15);
}

#[test]
fn classification_examples() {
    assert_eq!(
        classify_fund_strategy(&FundParams::reference(0.0)).unwrap(),
        StrategyType::TwoWayThresholds { from: 1, to: 2 }
    );
    // regime roles flip: fund 1 is preferred and switching to it pays
    assert_eq!(
        classify_fund_strategy(&FundParams::reference(0.1)).unwrap(),
        StrategyType::AlwaysToJ { from: 2, to: 1 }
    );
    let twin = FundParams { b2: 0.03, sigma2: 0.1, c12: 5.0, c21: 3.0, ..FundParams::reference(0.0) };
    assert_eq!(classify_fund_strategy(&twin).unwrap(), StrategyType::NeverSwitch);
    let free = FundParams { c21: -1.0, ..twin };
    assert_eq!(classify_fund_strategy(&free).unwrap(), StrategyType::SwitchIfFree { from: 2, to: 1 });
    let one_way = FundParams { c21: 10.0, ..FundParams::reference(0.0) };
    assert_eq!(classify_fund_strategy(&one_way).unwrap(), StrategyType::OneWayThreshold { from: 1, to: 2 });
}

#[test]
fn nonpositive_denominator_rejected() {
    let p = FundParams { rho: 0.01, ..FundParams::reference(0.0) };
    assert!(matches!(fund_k(&p, 2, false), Err(FundError::Denominator { regime: 2, .. })));
    assert!(p.validate().is_err());
}

#[test]
fn fund_thresholds_ordered() {
    let t = fund_thresholds(&FundParams::reference(0.0), &FundGrid::default()).unwrap();
    let (lo1, up2) = (t.x_lower_1.unwrap(), t.x_upper_2.unwrap());
    assert!(lo1.is_finite() && up2.is_finite());
    assert!(up2 < lo1, "{up2} vs {lo1}");
}

/// Number of nodes where a regime does not switch.
fn stay_count(t: &ambiswitch_core::closed_form::FundThresholds, regime: usize, nx: usize) -> usize {
    nx - t.regions[regime].regions.iter().map(|r| r.k_hi - r.k_lo + 1).sum::<usize>()
}

#[test]
fn larger_k_regime_is_preferred() {
    let grid = FundGrid::default();
    for kappa2 in [0.03, 0.1] {
        let p = FundParams::reference(kappa2);
        let t = fund_thresholds(&p, &grid).unwrap();
        let better = if t.k2 > t.k1 { 1 } else { 0 };
        let (a, b) = (stay_count(&t, better, grid.nx), stay_count(&t, 1 - better, grid.nx));
        assert!(a > b, "kappa2 {kappa2}: {a} vs {b}");
    }
}

#[test]
fn smoothfit_reference_solution() {
    let s = solve_smoothfit(&BuyLowParams::reference(0.0)).unwrap();
    assert!(s.x1 < s.x2);
    assert!(s.x2 - s.x1 > (1.01f64 / 0.99).ln());
    assert!(s.conditions.all_ok(), "{:?}", s.conditions);
    assert!(s.c1 >= 0.0 && s.c2 >= 0.0);
    assert!(!s.multiple_roots);
}

#[test]
fn assembled_value_is_c1_and_dominant() {
    for kappa in [0.0, 0.1, 0.2] {
        let s = solve_smoothfit(&BuyLowParams::reference(kappa)).unwrap();
        let k = s.params.k;
        let eps = 1e-9;
        for (regime, x) in [(1, s.x1), (2, s.x2), (1, s.x2), (2, s.x1)] {
            let l = value_buy_sell(x - eps, regime, &s);
            let r = value_buy_sell(x + eps, regime, &s);
            assert!((l - r).abs() <= 1e-8, "continuity regime {regime} at {x}: {l} vs {r}");
        }
        // second-order one-sided slopes on each side of the junction
        let h = 1e-4;
        for (regime, x) in [(1, s.x1), (2, s.x2)] {
            let f = |y: f64| value_buy_sell(y, regime, &s);
            let (xl, xr) = (x - eps, x + eps);
            let dl = (3.0 * f(xl) - 4.0 * f(xl - h) + f(xl - 2.0 * h)) / (2.0 * h);
            let dr = (-3.0 * f(xr) + 4.0 * f(xr + h) - f(xr + 2.0 * h)) / (2.0 * h);
            assert!((dl - dr).abs() <= 1e-5 * dl.abs().max(dr.abs()), "C1 regime {regime} at {x}: {dl} vs {dr}");
        }
        for q in 0..=200 {
            let x = s.x1 - 2.0 + (s.x2 + 2.0 - (s.x1 - 2.0)) * q as f64 / 200.0;
            let (v1, v2) = (value_buy_sell(x, 1, &s), value_buy_sell(x, 2, &s));
            let tol = 1e-9 * (1.0 + x.exp());
            assert!(v1 >= v2 - x.exp() * (1.0 + k) - tol, "buy gain at {x}");
            assert!(v2 >= v1 + x.exp() * (1.0 - k) - tol, "sell gain at {x}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn common_drift_shift_keeps_class(delta in -0.1..0.1f64, kappa2 in 0.0..0.12f64) {
        let base = FundParams::reference(kappa2);
        let moved = FundParams { b1: base.b1 + delta, b2: base.b2 + delta, ..base };
        let denom = |b: f64, s: f64, k: f64| moved.rho - (b - k * s) * moved.p + 0.5 * s * s * moved.p * (1.0 - moved.p);
        let ok = denom(moved.b1, moved.sigma1, moved.kappa1) > 0.0 && denom(moved.b2, moved.sigma2, moved.kappa2) > 0.0;
        let got = classify_fund_strategy(&moved);
        if ok {
            prop_assert_eq!(got.unwrap(), classify_fund_strategy(&base).unwrap());
        } else {
            prop_assert!(got.is_err());
        }
    }

    #[test]
    fn boundary_flips_class(eps in 1e-6..1e-3f64) {
        let b = kappa2_boundary(&FundParams::reference(0.0));
        let below = classify_fund_strategy(&FundParams::reference(b - eps)).unwrap();
        let above = classify_fund_strategy(&FundParams::reference(b + eps)).unwrap();
        prop_assert_ne!(below.name(), above.name());
    }
}
