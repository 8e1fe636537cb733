//! Property tests over random instances, each against an independent oracle.

mod common;

use ambiswitch_core::closed_form::quadrature::moment_integral;
use ambiswitch_core::closed_form::{phi_integral, BuyLowParams, PhiVariant};
use ambiswitch_core::pde::SolverConfig;
use ambiswitch_core::validate::{
    validate_non_free_loop, validate_problem, validate_strong_triangular, MomentConstants,
};
use ambiswitch_core::{sigma_support, Horizon};
use common::*;
use proptest::prelude::*;
use statrs::function::gamma::gamma;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_support_nonnegative(kappa in 0.0..5.0f64, phi in -10.0..10.0f64, z in -10.0..10.0f64) {
        let (s, theta) = sigma_support(kappa, phi, z);
        prop_assert!(s >= 0.0);
        prop_assert!(theta.abs() <= kappa);
        prop_assert!((theta * (phi + z) - s).abs() <= 1e-12 * (1.0 + s));
    }

    #[test]
    fn sigma_support_homogeneous(kappa in 0.0..5.0f64, phi in -10.0..10.0f64, z in -10.0..10.0f64, c in 0.0..20.0f64) {
        let base = sigma_support(kappa, phi, z).0;
        let scaled = sigma_support(kappa, c * phi, c * z).0;
        prop_assert!((scaled - c * base).abs() <= 1e-10 * (1.0 + c * base));
    }

    #[test]
    fn sigma_support_lipschitz(kappa in 0.0..5.0f64, phi in -10.0..10.0f64, z in -10.0..10.0f64, w in -10.0..10.0f64) {
        let d = (sigma_support(kappa, phi, z).0 - sigma_support(kappa, phi, w).0).abs();
        prop_assert!(d <= kappa * (z - w).abs() + 1e-12);
    }

    #[test]
    fn non_free_loop_matches_enumeration(seed in any::<u64>(), n in 2usize..=6) {
        let m = random_matrix(seed, n);
        let oracle = brute_force_min_loop(&m);
        let entry = validate_non_free_loop(&constant_problem(m, Horizon::Infinite), &[0.0, 1.0]);
        prop_assert_eq!(entry.margin, Some(oracle));
        prop_assert_eq!(entry.passed(), oracle > 0.0);
    }

    #[test]
    fn strong_triangular_matches_pointwise(
        seed in any::<u64>(),
        n in 2usize..=4,
        c_qx in 0.0..0.5f64,
        c_q in 0.0..0.5f64,
        t in 0.1..3.0f64,
        finite in any::<bool>(),
    ) {
        let m = random_matrix(seed, n);
        let grid = [-0.5, -0.1, 0.0, 0.2, 0.5];
        let horizon = if finite { Horizon::Finite { t } } else { Horizon::Infinite };
        let constants = MomentConstants { q: 1.0, c_qx, c_q, c_qx_inf: c_qx };
        let factor = |x: f64| {
            let g = 1.0 + x.abs();
            if finite { 1.0 + c_qx * g * (c_q * t).exp() } else { 1.0 + c_qx * g }
        };
        let oracle = strong_triangular_oracle(&m, &grid, 1.0, factor);
        let entry = validate_strong_triangular(&constant_problem(m, horizon), &grid, &constants);
        prop_assert_eq!(entry.passed(), oracle);
    }

    #[test]
    fn validators_deterministic(seed in any::<u64>()) {
        let p = random_problem(seed, Horizon::Infinite);
        let grid: Vec<f64> = small_grid().points();
        let c = MomentConstants::defaults(&p);
        prop_assert_eq!(validate_problem(&p, &grid, &c), validate_problem(&p, &grid, &c));
    }

    #[test]
    fn gamma_reduction(lambda in 0.05..6.0f64) {
        let exact0 = 2f64.powf(lambda / 2.0 - 1.0) * gamma(lambda / 2.0);
        let exact1 = 2f64.powf((lambda - 1.0) / 2.0) * gamma((lambda + 1.0) / 2.0);
        prop_assert!((moment_integral(lambda, 0, 0.0) / exact0 - 1.0).abs() < 1e-10);
        prop_assert!((moment_integral(lambda, 1, 0.0) / exact1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phi_positive_and_monotone(
        a in 0.2..2.0f64,
        b in -2.0..4.0f64,
        sigma in 0.1..1.0f64,
        rho in 0.05..2.0f64,
        kappa in 0.0..0.5f64,
        dx in -1.5..1.5f64,
    ) {
        let p = BuyLowParams { a, b, sigma, rho, k: 0.01, kappa };
        let x = b + dx * p.stationary_std();
        let y = x + 0.05 * p.stationary_std();
        for v in [PhiVariant::Phi1, PhiVariant::Phi2, PhiVariant::Phi1Star, PhiVariant::Phi2Star] {
            prop_assert!(phi_integral(x, &p, v) > 0.0);
        }
        prop_assert!(phi_integral(y, &p, PhiVariant::Phi1) < phi_integral(x, &p, PhiVariant::Phi1));
        prop_assert!(phi_integral(y, &p, PhiVariant::Phi2) > phi_integral(x, &p, PhiVariant::Phi2));
    }

    #[test]
    fn phi_derivative_relations(kappa in 0.0..0.4f64, dx in -2.0..2.0f64) {
        let p = BuyLowParams::reference(kappa);
        let x = p.b + dx * p.stationary_std();
        let h = 1e-4;
        let m = p.m();
        let d1 = (phi_integral(x + h, &p, PhiVariant::Phi1) - phi_integral(x - h, &p, PhiVariant::Phi1)) / (2.0 * h);
        let d2 = (phi_integral(x + h, &p, PhiVariant::Phi2) - phi_integral(x - h, &p, PhiVariant::Phi2)) / (2.0 * h);
        let s1 = -m * phi_integral(x, &p, PhiVariant::Phi1Star);
        let s2 = m * phi_integral(x, &p, PhiVariant::Phi2Star);
        prop_assert!((d1 / s1 - 1.0).abs() < 1e-6, "phi1: {d1} vs {s1}");
        prop_assert!((d2 / s2 - 1.0).abs() < 1e-6, "phi2: {d2} vs {s2}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn picard_iterates_increase(seed in any::<u64>()) {
        let p = random_problem(seed, Horizon::Infinite);
        let cfg = SolverConfig { record_iterates: true, ..config() };
        let s = solve(&p, &small_grid(), &cfg);
        prop_assert!(check_picard_monotone(&s, 1e-9).is_ok(), "{:?}", check_picard_monotone(&s, 1e-9));
    }

    #[test]
    fn larger_kappa_lowers_value(seed in any::<u64>(), regime in 0usize..3, extra in 0.01..0.5f64) {
        let p = random_problem(seed, Horizon::Infinite);
        let mut kappa: Vec<f64> = (0..p.regime_count()).map(|i| p.kappa(i)).collect();
        let r = regime % kappa.len();
        kappa[r] += extra;
        // keep the net reward nonnegative under the larger radius
        let wider = p.with_kappa(kappa);
        prop_assume!(wider.is_ok());
        let wider = wider.unwrap();
        let grid = small_grid();
        let report = ambiswitch_core::validate::validate_nonnegative_reward(&wider, &grid.points());
        prop_assume!(report.passed());
        let base = solve(&p, &grid, &config());
        let more = solve(&wider, &grid, &config());
        prop_assert!(check_dominated(&more, &base, 1e-9, "kappa").is_ok(), "{:?}", check_dominated(&more, &base, 1e-9, "kappa"));
    }

    #[test]
    fn obstacle_dominance_and_complementarity(seed in any::<u64>()) {
        let p = random_problem(seed, Horizon::Infinite);
        let s = solve(&p, &small_grid(), &config());
        let r = check_complementarity(&p, &s, 1e-8);
        prop_assert!(r.is_ok(), "{:?}", r);
    }

    #[test]
    fn longer_horizon_raises_value(seed in any::<u64>()) {
        let short = random_problem(seed, Horizon::Finite { t: 1.0 });
        let long = short.with_horizon(Horizon::Finite { t: 2.0 }).unwrap();
        let g1 = small_grid().with_time_steps(50).unwrap();
        let g2 = small_grid().with_time_steps(100).unwrap();
        let a = solve(&short, &g1, &config());
        let b = solve(&long, &g2, &config());
        prop_assert!(check_dominated(&a, &b, 1e-9, "horizon").is_ok(), "{:?}", check_dominated(&a, &b, 1e-9, "horizon"));
        prop_assert!(check_time_monotone(&b, 1e-9).is_ok(), "{:?}", check_time_monotone(&b, 1e-9));
    }
}

#[test]
fn sigma_support_grid_search() {
    let (kappa, phi, z) = (0.25, 1.5, -2.0);
    let (s, theta) = sigma_support(kappa, phi, z);
    let n = 1_000_000;
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
    for k in 0..=n {
        let t = -kappa + 2.0 * kappa * k as f64 / n as f64;
        let v = t * (phi + z);
        if v > best {
            best = v;
            arg = t;
        }
    }
    assert!((s - 0.125).abs() < 1e-15 && (s - best).abs() < 1e-12);
    assert_eq!(theta, -0.25);
    assert!((arg - theta).abs() < 1e-12);
}

#[test]
fn normal_cdf_reduction() {
    use statrs::distribution::{ContinuousCDF, Normal};
    let normal = Normal::standard();
    for beta in [-1.0f64, 0.0, 2.0] {
        let exact = (2.0 * std::f64::consts::PI).sqrt() * (0.5 * beta * beta).exp() * normal.cdf(beta);
        let v = moment_integral(1.0, 0, beta);
        // the reference CDF is accurate to about 1e-11
        assert!((v / exact - 1.0).abs() < 1e-9, "beta {beta}: {v} vs {exact}");
    }
}

#[test]
fn gamma_reduction_reference_lambda() {
    let lambda: f64 = 0.5 / 0.8;
    let exact = 2f64.powf(lambda / 2.0 - 1.0) * gamma(lambda / 2.0);
    let p = BuyLowParams::reference(0.0);
    // β₁ vanishes at x = b + κσ/a
    let v = phi_integral(p.b, &p, PhiVariant::Phi1);
    assert!((v / exact - 1.0).abs() < 1e-10, "{v} vs {exact}");
}

#[test]
fn derivative_relation_five_points() {
    let p = BuyLowParams::reference(0.1);
    let m = p.m();
    for x in [1.0, 1.5, 2.0, 2.5, 3.0] {
        let h = 1e-4;
        let d = (phi_integral(x + h, &p, PhiVariant::Phi1) - phi_integral(x - h, &p, PhiVariant::Phi1)) / (2.0 * h);
        let s = -m * phi_integral(x, &p, PhiVariant::Phi1Star);
        assert!((d / s - 1.0).abs() < 1e-6, "x {x}: {d} vs {s}");
    }
}
