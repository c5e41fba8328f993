use approx::assert_relative_eq;
use proptest::prelude::*;
use qet_core::field::{
    bob_energy, eta_xi, finite_mode_oracle, input_energy, output_energy, vacuum_overlap, FieldProtocolSpec,
    reference_profiles, OracleOptions, Profile, Theta,
};
use std::f64::consts::PI;

fn sin2(eps: f64, a: f64, w: f64) -> Profile {
    Profile::sin2(eps, a, w, 256).unwrap()
}

fn standard_spec(t: f64) -> FieldProtocolSpec {
    FieldProtocolSpec::new(sin2(0.1, 0.0, 1.0), sin2(1.0, 3.0, 1.0), t, Theta::Auto).unwrap()
}

#[test]
fn input_energy_examples() {
    let zero = Profile::from_fn(0.0, 1.0, 128, |_| 0.0).unwrap();
    assert_eq!(input_energy(&zero), 0.0);
    let e = input_energy(&Profile::sin2(0.1, 0.0, 1.0, 4096).unwrap());
    assert!((e - 0.01 * PI * PI / 2.0).abs() < 1e-7);
    assert!((e - 0.0493480).abs() < 1e-7);
    let p = sin2(0.1, 0.0, 1.0);
    let e = input_energy(&p);
    assert_relative_eq!(input_energy(&p.scaled(3.0)), 9.0 * e, max_relative = 1e-10);
}

#[test]
fn input_energy_converges_at_second_order() {
    let exact = 0.01 * PI * PI / 2.0;
    let errs: Vec<f64> =
        [64, 128, 256].iter().map(|&n| (input_energy(&Profile::sin2(0.1, 0.0, 1.0, n).unwrap()) - exact).abs()).collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] > 3.5, "{errs:?}");
    }
    let xi_exact = PI * PI / 2.0;
    let xi: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&n| (Profile::sin2(1.0, 3.0, 1.0, n).unwrap().gradient_energy() - xi_exact).abs())
        .collect();
    assert!(xi[0] / xi[1] > 3.5 && xi[1] / xi[2] > 3.5, "{xi:?}");
}

#[test]
fn overlap_bounds() {
    let zero = Profile::from_fn(0.0, 1.0, 128, |_| 0.0).unwrap();
    assert_eq!(vacuum_overlap(&zero).unwrap(), 1.0);
    let o = vacuum_overlap(&sin2(0.1, 0.0, 1.0)).unwrap();
    assert!(o > 0.0 && o < 1.0);
}

#[test]
fn overlap_matches_mode_oracle() {
    for (i, p) in reference_profiles().iter().enumerate() {
        let fft = vacuum_overlap(p).unwrap();
        let oracle = finite_mode_oracle(p, &OracleOptions::default()).unwrap();
        let rel = (fft - oracle.overlap).abs() / oracle.overlap;
        assert!(rel < 1e-6, "profile {i}: fft {fft} oracle {} rel {rel:e}", oracle.overlap);
        assert!((oracle.prob_plus - 0.5).abs() < 1e-8);
        assert!(oracle.refinement_change < 1e-5, "profile {i}: {}", oracle.refinement_change);
    }
}

#[test]
fn oracle_trivial_profile_and_monotone_decay() {
    let zero = Profile::from_fn(0.0, 1.0, 128, |_| 0.0).unwrap();
    let o = finite_mode_oracle(&zero, &OracleOptions::default()).unwrap();
    assert_eq!(o.overlap, 1.0);
    assert!((o.prob_plus - 0.5).abs() < 1e-15);
    let p = sin2(0.3, 0.0, 1.0);
    let opts = OracleOptions { n_modes: 1024, omega_max: None };
    let mut prev = 1.0;
    for s in [1.0, 1.5, 2.0, 3.0] {
        let v = finite_mode_oracle(&p.scaled(s), &opts).unwrap().overlap;
        assert!(v < prev);
        prev = v;
    }
    assert!(finite_mode_oracle(&p, &OracleOptions { n_modes: 100, omega_max: None }).is_err());
}

#[test]
fn overlap_exponent_scales_quadratically() {
    let p = sin2(0.2, 0.0, 1.0);
    let base = vacuum_overlap(&p).unwrap();
    for s in [0.5, 2.0, 3.0] {
        assert!((vacuum_overlap(&p.scaled(s)).unwrap() - base.powf(s * s)).abs() < 1e-8);
    }
}

#[test]
fn eta_and_xi() {
    let zero = Profile::from_fn(0.0, 1.0, 256, |_| 0.0).unwrap();
    let spec = FieldProtocolSpec::new(zero, sin2(1.0, 3.0, 1.0), 3.0, Theta::Auto).unwrap();
    let ex = eta_xi(&spec).unwrap();
    assert_eq!(ex.eta, 0.0);
    assert_eq!(output_energy(&spec).unwrap().e_b_max, 0.0);

    let ex = eta_xi(&standard_spec(3.0)).unwrap();
    assert!(ex.xi > 0.0);
    assert!(ex.eta_refinement.unwrap() < 1e-6, "{:?}", ex.eta_refinement);
    // sin² profiles are positive and the kernel is positive, so η < 0.
    assert!(ex.eta < 0.0);

    let plateau = Profile::from_fn(3.0, 4.0, 400, |x| ((x - 3.0) * 10.0).min((4.0 - x) * 10.0).min(1.0)).unwrap();
    let spec = FieldProtocolSpec::new(sin2(0.1, 0.0, 1.0), plateau, 3.0, Theta::Auto).unwrap();
    assert!(eta_xi(&spec).unwrap().xi > 0.0);
}

#[test]
fn protocol_preconditions() {
    let a = sin2(0.1, 0.0, 1.0);
    assert!(FieldProtocolSpec::new(a.clone(), sin2(1.0, 0.5, 1.0), 3.0, Theta::Auto).is_err());
    assert!(FieldProtocolSpec::new(a.clone(), sin2(1.0, 2.0, 1.0), -1.0, Theta::Auto).is_err());
    assert!(FieldProtocolSpec::new(a.clone(), sin2(1.0, 1.001, 1.0), 0.0, Theta::Auto).is_err());
    let flat = Profile::from_fn(3.0, 4.0, 128, |_| 0.0).unwrap();
    let spec = FieldProtocolSpec::new(a, flat, 1.0, Theta::Auto).unwrap();
    assert!(output_energy(&spec).is_err());
}

#[test]
fn output_energy_identities() {
    let r = output_energy(&standard_spec(3.0)).unwrap();
    assert!((r.theta_opt - r.eta / (2.0 * r.xi)).abs() < 1e-15);
    assert!(r.e_b_max > 0.0);
    assert!((r.e_b - r.e_b_max).abs() <= 1e-15 * r.e_b_max.max(1e-300));
    assert!((r.e_b_final_formula - r.e_b_max).abs() <= 1e-12 * r.e_b_max);
    assert_eq!(r.bob_local_energy, -r.e_b);
    assert_eq!(r.alice_packet_energy, r.e_a);
    assert!((r.total_decrease - r.e_b).abs() <= 1e-15 * r.e_a);
    assert!((r.prob_plus - 0.5).abs() < 1e-8);
    assert!(r.e_b < r.e_a);

    // θ sweep of θη − θ²ξ peaks at θ_opt within grid resolution.
    let n = 10_001;
    let span = 4.0 * r.theta_opt.abs();
    let (mut best, mut arg) = (f64::NEG_INFINITY, 0.0);
    for i in 0..n {
        let th = -span + 2.0 * span * i as f64 / (n - 1) as f64;
        let e = -bob_energy(r.eta, r.xi, th);
        if e > best {
            best = e;
            arg = th;
        }
    }
    assert!((arg - r.theta_opt).abs() <= 2.0 * span / (n - 1) as f64);

    let fixed = FieldProtocolSpec { theta: Theta::Fixed(0.0), ..standard_spec(3.0) };
    assert_eq!(output_energy(&fixed).unwrap().e_b, 0.0);
}

#[test]
fn output_decays_with_delay() {
    let mut prev = f64::INFINITY;
    for t in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let e = output_energy(&standard_spec(t)).unwrap().e_b_max;
        assert!(e < prev, "T={t}");
        prev = e;
    }
}

#[test]
fn joint_translation_invariance() {
    let base = output_energy(&standard_spec(3.0)).unwrap();
    for d in [-2.5, 0.75, 10.0] {
        let s = standard_spec(3.0);
        let moved = FieldProtocolSpec::new(s.lambda_a.shifted(d), s.p_b.shifted(d), 3.0, Theta::Auto).unwrap();
        let r = output_energy(&moved).unwrap();
        for (a, b) in [(r.e_a, base.e_a), (r.eta, base.eta), (r.xi, base.xi), (r.e_b_max, base.e_b_max)] {
            assert!((a - b).abs() <= 1e-10 * b.abs().max(1e-12), "shift {d}: {a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn output_is_nonnegative_and_scales(
        eps in 0.01f64..0.5, w_a in 0.5f64..2.0, gap in 0.5f64..3.0, w_b in 0.5f64..2.0, t in 0.0f64..5.0, s in 0.2f64..3.0,
    ) {
        let a = sin2(eps, 0.0, w_a);
        let b = sin2(1.0, w_a + gap, w_b);
        let spec = FieldProtocolSpec::new(a.clone(), b.clone(), t, Theta::Auto).unwrap();
        let r = output_energy(&spec).unwrap();
        prop_assert!(r.e_b_max >= 0.0);
        prop_assert!((r.e_b_max == 0.0) == (r.eta == 0.0));
        let scaled = FieldProtocolSpec::new(a.scaled(s), b, t, Theta::Auto).unwrap();
        let rs = output_energy(&scaled).unwrap();
        prop_assert!((rs.e_a - s * s * r.e_a).abs() <= 1e-10 * rs.e_a);
        prop_assert!((rs.overlap - r.overlap.powf(s * s)).abs() <= 1e-8);
    }
}
