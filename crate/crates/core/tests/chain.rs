use qet_core::chain::{
    parse_model, qubit_closed_form, qubit_optimal, BondTerm, Boundary, ChainModel, ChainProtocolSpec,
    KrausKind, NormalizedChain, ResidualOptions,
};
use qet_core::ising::{self, IsingParams};
use qet_core::quantum::random::{random_state, unit_vector3};
use qet_core::quantum::{
    pauli_component, pauli_i, pauli_x, pauli_z, EigenOptions, LocalOperator, Operator, PovmMeasurement,
};
use qet_core::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const X: [f64; 3] = [1.0, 0.0, 0.0];
const Y: [f64; 3] = [0.0, 1.0, 0.0];
const Z: [f64; 3] = [0.0, 0.0, 1.0];

fn ising_chain(n: usize) -> NormalizedChain {
    let p = IsingParams::new(1.0, n, Boundary::Periodic).unwrap();
    ising::build(&p).unwrap().normalize(&EigenOptions::default()).unwrap()
}

fn decoupled(n: usize) -> NormalizedChain {
    ChainModel::uniform(n, Boundary::Periodic, pauli_z() + pauli_i(), vec![])
        .unwrap()
        .normalize(&EigenOptions::default())
        .unwrap()
}

#[test]
fn normalization_zeroes_every_density() {
    let chain = ising_chain(8);
    let g = chain.state();
    let mut sum = 0.0;
    for t in chain.densities() {
        let e = g.expectation_real(&t.operator).unwrap();
        assert!(e.abs() < 1e-9, "site {}: {e}", t.site);
        sum += e;
    }
    assert!(sum.abs() < 1e-9);
    assert!(g.expectation_real(chain.hamiltonian()).unwrap().abs() < 1e-9);
    let s = chain.applied_shifts();
    assert!(s.iter().all(|x| (x - s[0]).abs() < 1e-10));

    let again = chain.model().normalize(&EigenOptions::default()).unwrap();
    assert!(again.applied_shifts().iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn negative_density_witness() {
    let chain = ising_chain(8);
    for n in 0..8 {
        let w = chain.negative_density_witness(n).unwrap();
        assert!(w.epsilon_minus < 0.0);
        assert!((w.witness_energy - w.epsilon_minus).abs() < 1e-10);
        assert!(w.entangled());
    }
    let w = decoupled(6).negative_density_witness(2).unwrap();
    assert!(w.epsilon_minus.abs() < 1e-12);
    assert!(!w.entangled());
}

#[test]
fn zero_angle_extracts_nothing() {
    let chain = ising_chain(10);
    let r = chain.run_protocol(&ChainProtocolSpec::pauli(1, X, 6, Y, 0.0).unwrap()).unwrap();
    assert!(r.e_b.abs() < 1e-12);
    assert!(r.e_a > 0.0);
}

#[test]
fn sweep_matches_closed_form_at_n12() {
    let chain = ising_chain(12);
    let ex = chain.eta_xi(&pauli_component(X, 1).unwrap(), &pauli_component(Y, 8).unwrap()).unwrap();
    assert!(ex.locality_defect < 1e-10);
    assert!(ex.eta_imag.abs() < 1e-10);
    assert!(ex.xi > 0.0);
    assert!(ex.eta.abs() > 1e-6);
    let (theta_opt, e_max) = qubit_optimal(ex.eta, ex.xi).unwrap();

    let mut best = f64::NEG_INFINITY;
    let points = 201;
    for i in 0..points {
        let theta = theta_opt - 0.05 + 0.1 * i as f64 / (points - 1) as f64;
        let r = chain.run_protocol(&ChainProtocolSpec::pauli(1, X, 8, Y, theta).unwrap()).unwrap();
        assert!((r.e_b - qubit_closed_form(ex.eta, ex.xi, theta)).abs() < 1e-10);
        best = best.max(r.e_b);
    }
    assert!((best - e_max).abs() < 1e-9, "{best} vs {e_max}");

    let r = chain.run_protocol(&ChainProtocolSpec::pauli(1, X, 8, Y, theta_opt).unwrap()).unwrap();
    assert!((r.e_b - e_max).abs() < 1e-10);
    assert!((r.bob_local_energy + r.e_b).abs() < 1e-10);
    assert!((r.e_b - r.e_b_direct).abs() < 1e-10);
    assert!(r.far_density_max < 1e-10);
    assert!(r.e_b < r.e_a);
}

#[test]
fn decoupled_chain_has_no_eta() {
    let chain = decoupled(8);
    let ex = chain.eta_xi(&pauli_component(X, 0).unwrap(), &pauli_component(Y, 4).unwrap()).unwrap();
    assert!(ex.eta.abs() < 1e-12);
    assert_eq!(qubit_optimal(ex.eta, ex.xi).unwrap().1, 0.0);
}

#[test]
fn qubit_examples() {
    assert_eq!(qubit_optimal(0.0, 1.0).unwrap().1, 0.0);
    let (t, e) = qubit_optimal(1.0, 1.0).unwrap();
    assert!((t - PI / 8.0).abs() < 1e-15);
    assert!((e - 0.207107).abs() < 1e-6);
}

#[test]
fn separation_rules() {
    let chain = ising_chain(10);
    let close = ChainProtocolSpec::pauli(1, X, 3, Y, 0.1).unwrap();
    assert!(matches!(chain.run_protocol(&close), Err(Error::InvalidParameter(_))));
    let wrapped = ChainProtocolSpec::pauli(1, X, 9, Y, 0.1).unwrap();
    assert!(chain.run_protocol(&wrapped).is_err());
    let warn = chain.run_protocol(&ChainProtocolSpec::pauli(1, X, 5, Y, 0.1).unwrap()).unwrap();
    assert_eq!(warn.warnings.len(), 1);
    let ok = chain.run_protocol(&ChainProtocolSpec::pauli(1, X, 6, Y, 0.1).unwrap()).unwrap();
    assert!(ok.warnings.is_empty());
}

#[test]
fn small_angle_linearization_and_sign_rule() {
    let chain = ising_chain(10);
    let ex = chain.eta_xi(&pauli_component(X, 0).unwrap(), &pauli_component(Y, 5).unwrap()).unwrap();
    let thetas: Vec<f64> = (0..20).map(|i| 1e-4 * 100f64.powf(i as f64 / 19.0)).collect();
    let mut ratios = Vec::new();
    for &t in &thetas {
        let signed = t * ex.eta.signum();
        let r = chain.run_protocol(&ChainProtocolSpec::pauli(0, X, 5, Y, signed).unwrap()).unwrap();
        if t < ex.eta.abs() / ex.xi {
            assert!(r.e_b > 0.0);
        }
        ratios.push((r.e_b - signed * ex.eta).abs() / (t * t));
    }
    // The remainder is exactly −(ξ/2)(1 − cos 2θ) − (η/2)(2θ − sin 2θ) ≈ −ξθ².
    let c_max = ratios.iter().cloned().fold(0.0, f64::max);
    assert!(c_max <= ex.xi * 1.001 + 1e-6, "{c_max} vs {}", ex.xi);
}

#[test]
fn measurement_and_rotation_commute_with_the_rest() {
    let chain = ising_chain(10);
    let (a, b) = (1, 6);
    let model = chain.model();
    let h_a = model.local_hamiltonian(a).unwrap();
    let h_b = model.local_hamiltonian(b).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v = random_state(10, &mut rng).into_amplitudes();
    let rest = |w: &qet_core::CVector| chain.hamiltonian().apply(w) - h_a.apply(w) - h_b.apply(w);
    let m = PovmMeasurement::projective(a, X).unwrap();
    let u = pauli_component(Y, b).unwrap().unitary_exp(0.37).unwrap();
    let mut ops: Vec<LocalOperator> = m.outcomes().iter().map(|(_, k)| k.clone()).collect();
    ops.push(u);
    for op in ops {
        let lhs = rest(&op.apply_to(&v, 10).unwrap());
        let rhs = op.apply_to(&rest(&v), 10).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }
}

#[test]
fn residual_energy_on_decoupled_chain_vanishes() {
    let chain = decoupled(6);
    let m = PovmMeasurement::projective(2, X).unwrap();
    let r = chain.residual_energy(2, &m, &ResidualOptions::default()).unwrap();
    assert!((r.e_a - 1.0).abs() < 1e-12);
    assert!(r.e_r.abs() < 1e-9, "{}", r.e_r);
}

#[test]
fn residual_energy_of_minimal_model_is_positive() {
    let (h, k) = (1.0, 1.0);
    let model = ChainModel::uniform(
        2,
        Boundary::Open,
        pauli_z() * qet_core::C64::new(h, 0.0),
        vec![BondTerm::new(2.0 * k, pauli_x(), pauli_x()).unwrap()],
    )
    .unwrap();
    let chain = model.normalize(&EigenOptions::default()).unwrap();
    let m = PovmMeasurement::projective(0, X).unwrap();
    let unitary = chain.residual_energy(0, &m, &ResidualOptions::default()).unwrap();
    assert!(unitary.e_r > 1e-3);
    assert!(unitary.e_r <= unitary.e_a);
    let opts = ResidualOptions { kind: KrausKind::Rank2, ..Default::default() };
    let rank2 = chain.residual_energy(0, &m, &opts).unwrap();
    assert!(rank2.e_r <= unitary.e_r + 1e-10);
    assert!(rank2.e_r > 0.0);
}

#[test]
fn energy_ordering_on_ising() {
    for n in [8, 10] {
        let chain = ising_chain(n);
        let ex = chain.eta_xi(&pauli_component(X, 1).unwrap(), &pauli_component(Y, 6).unwrap()).unwrap();
        let (_, e_b) = qubit_optimal(ex.eta, ex.xi).unwrap();
        let m = PovmMeasurement::projective(1, X).unwrap();
        let r = chain.residual_energy(1, &m, &ResidualOptions::default()).unwrap();
        assert!(e_b <= r.e_r + 1e-9 && r.e_r <= r.e_a + 1e-12, "N={n}: {e_b} {} {}", r.e_r, r.e_a);
    }
}

#[test]
fn distribution_single_site_matches_protocol() {
    let chain = ising_chain(10);
    let spec = ChainProtocolSpec::pauli(1, X, 6, Y, 0.2).unwrap();
    let single = chain.run_protocol(&spec).unwrap();
    let d = chain
        .energy_distribution(1, &spec.measurement, &[(6, spec.g_b.clone())], &[0.2])
        .unwrap();
    assert!((d.energies[0] - single.e_b).abs() < 1e-12);
}

#[test]
fn distribution_is_symmetric_about_a() {
    let chain = ising_chain(12);
    let m = PovmMeasurement::projective(0, X).unwrap();
    let ops = [(4, pauli_component(Y, 4).unwrap()), (8, pauli_component(Y, 8).unwrap())];
    let d = chain.energy_distribution(0, &m, &ops, &[0.003, 0.003]).unwrap();
    assert!(d.energies[0] > 0.0);
    assert!((d.energies[0] - d.energies[1]).abs() < 1e-10);
    assert!(d.energies.iter().sum::<f64>() <= d.e_a);
}

#[test]
fn distribution_sum_bound_random() {
    let chain = ising_chain(10);
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let u_a = unit_vector3(&mut rng);
        let m = PovmMeasurement::projective(0, u_a).unwrap();
        let ops = [
            (4, pauli_component(unit_vector3(&mut rng), 4).unwrap()),
            (7, pauli_component(unit_vector3(&mut rng), 7).unwrap()),
        ];
        let thetas = [rand::Rng::random_range(&mut rng, -1.0..1.0), rand::Rng::random_range(&mut rng, -1.0..1.0)];
        let d = chain.energy_distribution(0, &m, &ops, &thetas).unwrap();
        assert!(d.energies.iter().sum::<f64>() <= d.e_a + 1e-10);
    }
}

#[test]
fn model_file_round_trip() {
    let text = "n_sites = 8\nboundary = periodic\nsite.default = -1*z\nbond.default = -1 x x\n";
    let from_file = parse_model(text).unwrap().normalize(&EigenOptions::default()).unwrap();
    let direct = ising_chain(8);
    assert!((from_file.applied_shifts()[0] - direct.applied_shifts()[0]).abs() < 1e-10);
    let spec = ChainProtocolSpec::pauli(0, Z, 5, X, 0.3).unwrap();
    let a = from_file.run_protocol(&spec).unwrap();
    let b = direct.run_protocol(&spec).unwrap();
    assert!((a.e_b - b.e_b).abs() < 1e-10);
}
