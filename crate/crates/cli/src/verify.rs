//! Verification suites. Numbered checks follow the acceptance list; each is seeded and deterministic.

use crate::args::Suite;
use qet_core::chain::{
    qubit_closed_form, qubit_optimal, BondTerm, Boundary, ChainModel, ChainProtocolSpec, NormalizedChain,
    ResidualOptions,
};
use qet_core::field::{
    bob_energy, checked_overlap, output_energy, reference_profiles, FieldProtocolSpec, OracleOptions, Profile,
    Theta,
};
use qet_core::ising::{self, IsingParams};
use qet_core::minimal::{self, MinimalModel, MinimalParams};
use qet_core::quantum::random::{haar_unitary, random_hermitian, unit_vector3};
use qet_core::quantum::{pauli_component, pauli_x, EigenOptions, LocalOperator, Operator, PovmMeasurement};
use qet_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;

type Outcome = qet_core::Result<(bool, String, Value)>;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    /// Acceptance criterion number, if the check is one.
    pub criterion: Option<u32>,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub metrics: Value,
}

impl Check {
    pub fn line(&self) -> String {
        let tag = match self.criterion {
            Some(n) => format!("criterion {n:>2}"),
            None => "report      ".to_string(),
        };
        let status = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {status}  {}: {}", self.name, self.detail)
    }
}

fn guarded(criterion: Option<u32>, name: &str, f: impl FnOnce() -> Outcome) -> Check {
    let (passed, detail, metrics) = match f() {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}"), Value::Null),
    };
    Check { criterion, name: name.to_string(), passed, detail, metrics }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn random_params(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> qet_core::Result<MinimalParams> {
    MinimalParams::new(r.random_range(lo..=hi), r.random_range(lo..=hi))
}

pub const NUMBERED: [u32; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub fn suite_members(suite: Suite) -> (Vec<u32>, bool) {
    match suite {
        Suite::Minimal => (vec![1, 2, 3, 4, 9], false),
        Suite::Chain => (vec![5, 6, 7], false),
        Suite::Ising => (vec![8], true),
        Suite::Field => (vec![10], false),
        Suite::All => (NUMBERED.to_vec(), true),
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Vec<Check> {
    // Several checks deliberately use separations below 5; their warnings are expected.
    let level = log::max_level();
    log::set_max_level(level.min(log::LevelFilter::Error));
    let (ids, cross) = suite_members(suite);
    let mut checks: Vec<Check> = ids.into_iter().map(|n| criterion(n, seed)).collect();
    if cross {
        checks.push(ising_cross_check());
    }
    log::set_max_level(level);
    checks
}

pub fn criterion(n: u32, seed: u64) -> Check {
    match n {
        1 => guarded(Some(1), "minimal closed forms vs brute force", || closed_forms(seed)),
        2 => guarded(Some(2), "output identity at the optimal angle", || optimum_identity(seed)),
        3 => guarded(Some(3), "no local extraction at B", || no_local_extraction(seed)),
        4 => guarded(Some(4), "time evolution after the measurement", || time_evolution(seed)),
        5 => guarded(Some(5), "passivity of ground states", || passivity(seed)),
        6 => guarded(Some(6), "chain engine route equivalence", || route_equivalence(seed)),
        7 => guarded(Some(7), "energy ordering and distribution bound", || ordering(seed)),
        8 => guarded(Some(8), "Ising analytics", ising_analytics),
        9 => guarded(Some(9), "entanglement-energy bound", || entanglement_bound(seed)),
        10 => guarded(Some(10), "field protocol", field_checks),
        other => Check {
            criterion: Some(other),
            name: "unknown".into(),
            passed: false,
            detail: format!("no criterion {other}"),
            metrics: Value::Null,
        },
    }
}

fn closed_forms(seed: u64) -> Outcome {
    let mut r = rng(seed, 1);
    let (mut err_a, mut err_b) = (0.0_f64, 0.0_f64);
    for _ in 0..100 {
        let p = random_params(&mut r, 0.1, 10.0)?;
        let (theta, e_max) = minimal::optimize(&p);
        let run = MinimalModel::build(p)?.run_protocol(theta)?;
        let e_a = minimal::input_energy(&p);
        err_a = err_a.max((run.e_a - e_a).abs() / e_a);
        err_b = err_b.max((run.e_b - e_max).abs() / e_max);
    }
    let passed = err_a < 1e-10 && err_b < 1e-10;
    let detail = format!("100 samples, max relative error E_A {err_a:.2e}, E_B_max {err_b:.2e} (< 1e-10)");
    Ok((passed, detail, json!({"samples": 100, "max_rel_err_E_A": err_a, "max_rel_err_E_B_max": err_b})))
}

fn optimum_identity(seed: u64) -> Outcome {
    let mut r = rng(seed, 1);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let p = random_params(&mut r, 0.1, 10.0)?;
        let (h, k) = (p.h, p.k);
        // Optimal angle from its sine and cosine rather than through optimize().
        let a = h * h + 2.0 * k * k;
        let norm = a.hypot(h * k);
        let theta = 0.5 * (h * k / norm).atan2(a / norm);
        let e = minimal::output_energy(&p, theta);
        let (_, e_max) = minimal::optimize(&p);
        worst = worst.max((e - e_max).abs() / e_max.max(1.0));
    }
    let passed = worst <= 1e-12;
    let detail = format!("100 samples, max |E_B(theta_opt) - E_B_max| / max(E_B_max, 1) = {worst:.2e} (<= 1e-12)");
    Ok((passed, detail, json!({"samples": 100, "max_scaled_difference": worst})))
}

fn no_local_extraction(seed: u64) -> Outcome {
    let mut r = rng(seed, 3);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let m = MinimalModel::build(random_params(&mut r, 0.1, 10.0)?)?;
        let w = LocalOperator::single(minimal::SITE_B, haar_unitary(2, &mut r))?;
        worst = worst.max(m.local_cooling_deficit(&w)?);
    }
    let passed = worst <= 1e-12;
    let detail = format!("200 Haar unitaries at B, largest extracted energy {worst:.2e} (<= 1e-12)");
    Ok((passed, detail, json!({"samples": 200, "max_extracted": worst})))
}

fn time_evolution(seed: u64) -> Outcome {
    let mut r = rng(seed, 4);
    let (mut err_hb, mut err_v) = (0.0_f64, 0.0_f64);
    for _ in 0..10 {
        let p = random_params(&mut r, 0.1, 10.0)?;
        let m = MinimalModel::build(p)?;
        // Two periods of cos 4kt.
        let t_max = PI / p.k;
        for i in 0..100 {
            let t = t_max * i as f64 / 99.0;
            let (hb, v) = m.evolution_numeric(t)?;
            err_hb = err_hb.max((hb - minimal::hb_evolution(&p, t)).abs());
            err_v = err_v.max(v.abs());
        }
    }
    let passed = err_hb <= 1e-9 && err_v <= 1e-9;
    let detail = format!("10 models x 100 times, max |H_B error| {err_hb:.2e}, max |<V>| {err_v:.2e} (<= 1e-9)");
    Ok((passed, detail, json!({"max_abs_err_H_B": err_hb, "max_abs_V": err_v})))
}

fn ising_chain(n: usize, seed: u64) -> qet_core::Result<NormalizedChain> {
    let p = IsingParams::new(1.0, n, Boundary::Periodic)?;
    let opts = EigenOptions { seed, ..Default::default() };
    Ok(ising::normalize(&p, &opts)?.chain)
}

fn passivity(seed: u64) -> Outcome {
    let mut r = rng(seed, 5);
    let mut min_minimal = f64::INFINITY;
    for i in 0..200 {
        let m = MinimalModel::build(random_params(&mut r, 0.1, 10.0)?)?;
        let u = LocalOperator::single(i % 2, haar_unitary(2, &mut r))?;
        min_minimal = min_minimal.min(m.passivity_energy(&u)?);
    }
    let chain = ising_chain(8, seed)?;
    let g = chain.state().amplitudes();
    let mut min_ising = f64::INFINITY;
    for _ in 0..200 {
        let site = r.random_range(0..8);
        let u = LocalOperator::single(site, haar_unitary(2, &mut r))?;
        let psi = u.apply_to(g, 8)?;
        min_ising = min_ising.min(psi.dotc(&chain.hamiltonian().apply(&psi)).re);
    }
    let passed = min_minimal >= -1e-12 && min_ising >= -1e-12;
    let detail = format!(
        "200 unitaries each, min energy minimal model {min_minimal:.2e}, Ising N=8 {min_ising:.2e} (>= -1e-12)"
    );
    Ok((passed, detail, json!({"min_energy_minimal": min_minimal, "min_energy_ising_n8": min_ising})))
}

/// Open chain of `n` qubits with random on-site fields and random two-axis bonds.
pub fn random_chain(n: usize, r: &mut ChaCha8Rng, seed: u64) -> qet_core::Result<NormalizedChain> {
    let onsite = (0..n).map(|_| random_hermitian(2, r)).collect();
    let mut bonds = Vec::new();
    for _ in 0..n - 1 {
        let mut terms = Vec::new();
        for _ in 0..2 {
            let left = pauli_component(unit_vector3(r), 0)?.matrix().clone();
            let right = pauli_component(unit_vector3(r), 0)?.matrix().clone();
            terms.push(BondTerm::new(r.random_range(-1.5..1.5), left, right)?);
        }
        bonds.push(terms);
    }
    let opts = EigenOptions { seed, ..Default::default() };
    ChainModel::new(n, Boundary::Open, onsite, bonds)?.normalize(&opts)
}

fn route_equivalence(seed: u64) -> Outcome {
    let mut r = rng(seed, 6);
    let mut chains = vec![("ising_n12".to_string(), ising_chain(12, seed)?)];
    for i in 0..5 {
        chains.push((format!("random_n10_{i}"), random_chain(10, &mut r, seed)?));
    }
    let (mut routes, mut closed) = (0.0_f64, 0.0_f64);
    let mut runs = 0;
    for (_, chain) in &chains {
        let (a, b) = (2, 7);
        let (u_a, u_b) = (unit_vector3(&mut r), unit_vector3(&mut r));
        let ex = chain.eta_xi(&pauli_component(u_a, a)?, &pauli_component(u_b, b)?)?;
        let (theta_opt, _) = qubit_optimal(ex.eta, ex.xi)?;
        let mut thetas = vec![theta_opt];
        thetas.extend((0..4).map(|_| r.random_range(-1.0..1.0)));
        for theta in thetas {
            let run = chain.run_protocol(&ChainProtocolSpec::pauli(a, u_a, b, u_b, theta)?)?;
            let scale = run.e_a.abs().max(1.0);
            routes = routes.max((run.e_b - run.e_b_direct).abs() / scale);
            closed = closed.max((run.e_b - qubit_closed_form(ex.eta, ex.xi, theta)).abs() / scale);
            runs += 1;
        }
    }
    let passed = routes <= 1e-10 && closed <= 1e-10;
    let detail = format!(
        "{} chains, {runs} runs, max route difference {routes:.2e}, max closed-form difference {closed:.2e} (<= 1e-10)",
        chains.len()
    );
    let names: Vec<&str> = chains.iter().map(|(n, _)| n.as_str()).collect();
    Ok((passed, detail, json!({"chains": names, "runs": runs, "max_route_diff": routes, "max_closed_form_diff": closed})))
}

fn ordering(seed: u64) -> Outcome {
    let tol = 1e-9;
    let mut rows = Vec::new();
    let mut ok = true;
    let residual = ResidualOptions::default();
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for (n, dirs) in [(8usize, vec![("x", 0), ("y", 1), ("z", 2)]), (10, vec![("x", 0), ("y", 1)])] {
        let chain = ising_chain(n, seed)?;
        let (a, b) = (1, 6);
        for (name, d) in dirs {
            let sigma_a = pauli_component(axes[d], a)?;
            let mut e_b = 0.0_f64;
            for ub in axes {
                let ex = chain.eta_xi(&sigma_a, &pauli_component(ub, b)?)?;
                e_b = e_b.max(qubit_optimal(ex.eta, ex.xi)?.1);
            }
            let res = chain.residual_energy(a, &PovmMeasurement::projective(a, axes[d])?, &residual)?;
            let good = e_b >= 0.0 && e_b <= res.e_r + tol && res.e_r <= res.e_a + tol;
            ok &= good;
            rows.push(json!({"config": format!("ising N={n} sigma_{name}"), "E_B": e_b, "E_r": res.e_r, "E_A": res.e_a, "ok": good}));
        }
    }
    // Minimal model as a two-site chain, with E_B from its closed form.
    let p = MinimalParams::new(1.0, 1.0)?;
    let two = ChainModel::uniform(
        2,
        Boundary::Open,
        qet_core::quantum::pauli_z() * C64::new(p.h, 0.0),
        vec![BondTerm::new(2.0 * p.k, pauli_x(), pauli_x())?],
    )?
    .normalize(&EigenOptions::default())?;
    let res = two.residual_energy(0, &PovmMeasurement::projective(0, axes[0])?, &residual)?;
    let (_, e_b) = minimal::optimize(&p);
    let good = e_b >= 0.0 && e_b <= res.e_r + tol && res.e_r <= res.e_a + tol;
    ok &= good;
    rows.push(json!({"config": "minimal h=k=1", "E_B": e_b, "E_r": res.e_r, "E_A": res.e_a, "ok": good}));

    let chain = ising_chain(10, seed)?;
    let mut r = rng(seed, 7);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..20 {
        let m = PovmMeasurement::projective(0, unit_vector3(&mut r))?;
        let ops = [
            (4, pauli_component(unit_vector3(&mut r), 4)?),
            (7, pauli_component(unit_vector3(&mut r), 7)?),
        ];
        let thetas = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let d = chain.energy_distribution(0, &m, &ops, &thetas)?;
        worst = worst.max(d.energies.iter().sum::<f64>() - d.e_a);
    }
    ok &= worst <= 1e-10;
    let detail = format!(
        "{} ordering configurations {}, 20 distributions with max (sum E_n - E_A) = {worst:.3e} (<= 0)",
        rows.len(),
        if rows.iter().all(|r| r["ok"] == true) { "hold" } else { "VIOLATED" }
    );
    Ok((ok, detail, json!({"ordering": rows, "distribution_max_excess": worst})))
}

fn ising_analytics() -> Outcome {
    let (l1, s1) = ising::delta_log(1)?;
    let (l2, s2) = ising::delta_log(2)?;
    let e1 = ((l1 - (2.0 / (3.0 * PI)).ln()) / l1).abs();
    let e2 = ((l2 - (16.0 / (45.0 * PI * PI)).ln()) / l2).abs();
    let fit = ising::asymptote_check(1.0, 30, 100)?;
    let c_rel = (fit.c_implied - ising::C_ASYMPTOTE).abs() / ising::C_ASYMPTOTE;
    let passed = s1 == -1.0 && s2 == -1.0 && e1 <= 1e-14 && e2 <= 1e-14 && (fit.exponent + 4.5).abs() <= 0.05 && c_rel <= 0.05;
    let detail = format!(
        "Delta(1), Delta(2) log errors {e1:.1e}, {e2:.1e}; exponent {:.5}; c_implied {:.4} ({:.2}% from 1.28)",
        fit.exponent,
        fit.c_implied,
        100.0 * c_rel
    );
    Ok((
        passed,
        detail,
        json!({
            "delta1_log_rel_err": e1,
            "delta2_log_rel_err": e2,
            "exponent": fit.exponent,
            "c_implied": fit.c_implied,
            "c_implied_fixed_exponent": fit.c_implied_fixed,
            "power_law_rms": fit.power_residual,
            "exponential_rms": fit.exponential_residual,
        }),
    ))
}

/// Finite-size E_A and E_r next to the infinite-chain values; a report, not an equality test.
pub fn ising_cross_check() -> Check {
    guarded(None, "Ising finite-size cross-check", || {
        let opts = ising::CrossCheckOptions {
            directions: ising::default_directions().into_iter().take(3).collect(),
            ..Default::default()
        };
        let rep = ising::numeric_cross_check(1.0, &[8, 10, 12], &opts)?;
        let ordering = !rep.flags.iter().any(|f| f.contains("ordering"));
        let best = rep.extrapolations.iter().find(|e| e.direction == rep.best_direction);
        let detail = match best {
            Some(b) => format!(
                "best sigma_{}: E_A(N->inf) {:.6} vs 6/pi {:.6}, E_r {:.6} vs {:.6}",
                b.direction, b.e_a_limit, rep.analytic_e_a, b.e_r_limit, rep.analytic_e_r
            ),
            None => "no extrapolation".into(),
        };
        let rows: Vec<Value> = rep
            .rows
            .iter()
            .map(|r| json!({"N": r.n_sites, "direction": r.direction, "E_A": r.e_a, "E_B_max": r.e_b_max, "E_r": r.e_r}))
            .collect();
        let ex: Vec<Value> = rep
            .extrapolations
            .iter()
            .map(|e| json!({"direction": e.direction, "E_A_limit": e.e_a_limit, "E_r_limit": e.e_r_limit, "monotone": e.monotone}))
            .collect();
        Ok((ordering, detail, json!({"rows": rows, "extrapolations": ex, "flags": rep.flags})))
    })
}

fn entanglement_bound(seed: u64) -> Outcome {
    let m = MinimalModel::build(MinimalParams::new(1.0, 1.0)?)?;
    let b = m.entanglement_bound(&m.measurement())?;
    let p = 0.5 * (1.0 - std::f64::consts::FRAC_1_SQRT_2);
    let entropy = -p * p.ln() - (1.0 - p) * (1.0 - p).ln();
    let explicit = (b.delta_s - entropy).abs() < 1e-12 && (b.bound_rhs - 0.30341).abs() < 1e-5;
    let mut worst = b.delta_s - b.bound_rhs;
    let mut r = rng(seed, 9);
    for _ in 0..50 {
        let m = MinimalModel::build(random_params(&mut r, 0.2, 5.0)?)?;
        let povm = minimal::random_commuting_povm(r.random_range(2..=4), &mut r)?;
        let b = m.entanglement_bound(&povm)?;
        worst = worst.min(b.delta_s - b.bound_rhs);
    }
    let passed = explicit && worst >= -1e-9;
    let detail = format!(
        "h=k=1: delta_S {:.6} >= rhs {:.6}; min margin over projective + 50 POVMs {worst:.3e} (>= -1e-9)",
        b.delta_s, b.bound_rhs
    );
    Ok((
        passed,
        detail,
        json!({"delta_S": b.delta_s, "rhs": b.bound_rhs, "rhs_general": b.bound_rhs_general, "min_margin": worst}),
    ))
}

fn field_checks() -> Outcome {
    let opts = OracleOptions::default();
    let (mut overlap_err, mut prob_err) = (0.0_f64, 0.0_f64);
    let profiles = reference_profiles();
    for p in &profiles {
        let c = checked_overlap(p, &opts)?;
        overlap_err = overlap_err.max(c.relative_difference);
        prob_err = prob_err.max((c.oracle.prob_plus - 0.5).abs());
    }

    let exact = 0.01 * PI * PI / 2.0;
    let errors: Vec<f64> = [64, 128, 256, 512]
        .iter()
        .map(|&n| Profile::sin2(0.1, 0.0, 1.0, n).map(|p| (qet_core::field::input_energy(&p) - exact).abs()))
        .collect::<qet_core::Result<_>>()?;
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let second_order = orders.iter().all(|o| (o - 2.0).abs() < 0.2);

    let spec = FieldProtocolSpec::new(
        Profile::sin2(0.1, 0.0, 1.0, 512)?,
        Profile::sin2(1.0, 3.0, 1.0, 512)?,
        3.0,
        Theta::Auto,
    )?;
    let res = output_energy(&spec)?;
    let identity = (res.e_b_max - res.e_b_final_formula).abs() / res.e_b_max;
    let points = 2001;
    let step = 2.0 * res.theta_opt / (points - 1) as f64;
    let best = (0..points)
        .map(|i| i as f64 * step)
        .map(|t| (t, -bob_energy(res.eta, res.xi, t)))
        .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let sweep_ok = (best.0 - res.theta_opt).abs() <= step.abs() && (best.1 - res.e_b_max).abs() <= 1e-12 * res.e_b_max;

    let passed = overlap_err < 1e-6 && prob_err <= 1e-8 && second_order && identity <= 1e-12 && sweep_ok;
    let detail = format!(
        "overlap max rel diff {overlap_err:.2e} on {} profiles; |p-1/2| {prob_err:.1e}; E_A orders {}; identity {identity:.1e}; sweep argmax {:.6} vs theta_opt {:.6}",
        profiles.len(),
        orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join("/"),
        best.0,
        res.theta_opt
    );
    Ok((
        passed,
        detail,
        json!({
            "overlap_max_rel_diff": overlap_err,
            "prob_plus_max_err": prob_err,
            "input_energy_errors": errors,
            "input_energy_orders": orders,
            "identity_rel_diff": identity,
            "theta_opt": res.theta_opt,
            "sweep_argmax": best.0,
            "E_B_max": res.e_b_max,
        }),
    ))
}
