use approx::assert_relative_eq;
use proptest::prelude::*;
use qet_core::chain::Boundary;
use qet_core::ising::{
    analytic_energies, asymptote_check, default_directions, delta_log, delta_log_reordered, ln_h,
    normalize, numeric_cross_check, CrossCheckOptions, IsingParams, C_ASYMPTOTE,
};
use qet_core::quantum::EigenOptions;
use std::f64::consts::PI;

/// Direct product `h(n) = ∏ k^{n−k}` for small n.
fn h_direct(n: u64) -> f64 {
    (1..n).map(|k| (k as f64).powi((n - k) as i32)).product()
}

/// Δ(n) evaluated straight from the definition; overflows beyond n ≈ 5.
fn delta_direct(n: u64) -> f64 {
    let nf = n as f64;
    -(2.0 / PI).powi(n as i32) * 2f64.powf(2.0 * nf * (nf - 1.0)) * h_direct(n).powi(4)
        / ((4.0 * nf * nf - 1.0) * h_direct(2 * n))
}

#[test]
fn delta_small_separations() {
    let (l1, s1) = delta_log(1).unwrap();
    assert_eq!(s1, -1.0);
    assert_relative_eq!(s1 * l1.exp(), -2.0 / (3.0 * PI), max_relative = 1e-14);
    let (l2, s2) = delta_log(2).unwrap();
    assert_relative_eq!(s2 * l2.exp(), -16.0 / (45.0 * PI * PI), max_relative = 1e-14);
    assert!((s1 * l1.exp() + 0.212207).abs() < 1e-6);
    assert!((s2 * l2.exp() + 0.0360253).abs() < 1e-7);
    for n in 1..=5 {
        let (l, s) = delta_log(n).unwrap();
        assert_relative_eq!(s * l.exp(), delta_direct(n), max_relative = 1e-12);
    }
}

#[test]
fn delta_log_slope() {
    let xs: Vec<f64> = (20..=100u64).map(|n| (n as f64).ln()).collect();
    let ys: Vec<f64> = (20..=100u64).map(|n| delta_log(n).unwrap().0).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!((slope + 2.25).abs() < 0.03, "{slope}");
}

#[test]
fn delta_log_stable_to_200() {
    for n in 1..=200 {
        let (l, _) = delta_log(n).unwrap();
        assert!(l.is_finite());
        let r = delta_log_reordered(n).unwrap();
        assert!((l - r).abs() <= 1e-9 * l.abs().max(1.0), "n={n}: {l} vs {r}");
    }
    assert!(ln_h(400).is_finite());
}

#[test]
fn analytic_values() {
    let e = analytic_energies(1.0, 1, C_ASYMPTOTE).unwrap();
    assert!((e.e_a - 1.909859).abs() < 1e-6);
    assert!((e.e_r - 0.909859).abs() < 1e-6);
    let exact = 2.0 / PI * (10f64.sqrt() / 3.0 - 1.0);
    assert_relative_eq!(e.e_b, exact, max_relative = 1e-13);
    assert!((e.e_b - 0.0344364).abs() < 1e-7);
    let scaled = analytic_energies(2.5, 7, C_ASYMPTOTE).unwrap();
    let unit = analytic_energies(1.0, 7, C_ASYMPTOTE).unwrap();
    assert_relative_eq!(scaled.e_b, 2.5 * unit.e_b, max_relative = 1e-14);
}

#[test]
fn output_decreases_and_stays_below_input() {
    let mut prev = f64::INFINITY;
    for n in 1..=200 {
        let e = analytic_energies(1.0, n, C_ASYMPTOTE).unwrap();
        assert!(e.e_b > 0.0 && e.e_b < prev && e.e_b < e.e_a, "n={n}");
        prev = e.e_b;
    }
}

#[test]
fn small_delta_limit() {
    let rel = |n: u64| {
        let e = analytic_energies(1.0, n, C_ASYMPTOTE).unwrap();
        let d = delta_log(n).unwrap().0.exp();
        (e.e_b - PI / 4.0 * d * d).abs() / e.e_b
    };
    let seq: Vec<f64> = [1, 2, 5, 10, 50].iter().map(|&n| rel(n)).collect();
    assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
    assert!(seq[4] < 1e-8);
}

#[test]
fn power_law_asymptote() {
    let fit = asymptote_check(1.0, 30, 100).unwrap();
    assert!((fit.exponent + 4.5).abs() < 0.05, "{}", fit.exponent);
    assert!(fit.exponential_residual > 100.0 * fit.power_residual);
    assert!((fit.c_implied - C_ASYMPTOTE).abs() / C_ASYMPTOTE < 0.05, "{}", fit.c_implied);
    assert!((fit.c_implied_fixed - C_ASYMPTOTE).abs() / C_ASYMPTOTE < 0.05, "{}", fit.c_implied_fixed);
    let e = analytic_energies(1.0, 100, C_ASYMPTOTE).unwrap();
    assert!((e.e_b / e.e_b_asymptotic - 1.0).abs() < 0.05);
}

#[test]
fn normalized_chain_constants() {
    for n in [8, 10] {
        let p = IsingParams::new(1.0, n, Boundary::Periodic).unwrap();
        let c = normalize(&p, &EigenOptions::default()).unwrap();
        assert!(c.epsilon_spread < 1e-10);
        // Exact periodic ground energy of the critical chain: −2J / sin(π/2N).
        let exact = -2.0 / (PI / (2.0 * n as f64)).sin();
        assert!((c.e_g - exact).abs() < 1e-9, "N={n}: {} vs {exact}", c.e_g);
        assert!((c.epsilon - c.e_g / n as f64).abs() < 1e-12);
        assert!(c.epsilon < 0.0);
        assert!(c.epsilon < -4.0 / PI && c.epsilon + 4.0 / PI > -0.02);
    }
}

#[test]
fn cross_check_report() {
    let opts = CrossCheckOptions {
        directions: default_directions().into_iter().take(3).collect(),
        ..Default::default()
    };
    let report = numeric_cross_check(1.0, &[8, 10, 12], &opts).unwrap();
    assert_eq!(report.rows.len(), 9);
    for r in &report.rows {
        assert!(r.e_a > 0.0);
        assert!(r.e_b_max <= r.e_r + 1e-9 && r.e_r <= r.e_a + 1e-12, "{r:?}");
        assert!((r.e_b_numeric - r.e_b_max).abs() < 1e-10);
    }
    let z = report.extrapolations.iter().find(|e| e.direction == "z").unwrap();
    assert!(z.monotone);
    assert!(!report.flags.iter().any(|f| f.contains("ordering")));
    assert_eq!(report.energy_per_site.len(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energies_scale_with_coupling(j in 0.01f64..100.0, n in 1u64..150) {
        let e = analytic_energies(j, n, C_ASYMPTOTE).unwrap();
        let u = analytic_energies(1.0, n, C_ASYMPTOTE).unwrap();
        prop_assert!((e.e_b - j * u.e_b).abs() <= 1e-13 * j * u.e_b);
        prop_assert!(e.e_b < e.e_r && e.e_r < e.e_a);
    }
}
