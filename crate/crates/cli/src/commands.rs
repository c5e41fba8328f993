//! Subcommand implementations.

use crate::args::{
    ChainArgs, Command, FieldArgs, IsingArgs, IsingMode, Kraus, MinimalArgs, ThetaArg, VerifyArgs,
};
use crate::output::{json_document, num, CsvTable, Done, Output};
use crate::{verify, CliError, Result, EXIT_INVARIANT, EXIT_OK};
use qet_core::chain::{
    parse_model, qubit_closed_form, qubit_optimal, ChainProtocolSpec, KrausKind, NormalizedChain,
    ResidualOptions, MIN_SEPARATION,
};
use qet_core::field::{output_energy_checked, FieldProtocolSpec, OracleOptions, Profile, Theta};
use qet_core::ising::{self, IsingParams};
use qet_core::minimal::{self, MinimalModel, MinimalParams};
use qet_core::optimize::SearchOptions;
use qet_core::quantum::{pauli_component, EigenOptions};
use qet_core::chain::Boundary;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;

pub fn dispatch(cmd: Command) -> Result<Done> {
    match cmd {
        Command::Minimal(a) => single("minimal", &a, a.common.seed, &a.common.output, minimal_result(&a)?),
        Command::Chain(a) => single("chain", &a, a.common.seed, &a.common.output, chain_result(&a)?),
        Command::Field(a) => single("field", &a, a.common.seed, &a.common.output, field_result(&a)?),
        Command::Ising(a) => {
            let mut table = CsvTable::new("ising", a.common.seed, &config_value(&a), vec![]);
            let (header, rows, comments) = ising_table(&a)?;
            table.header = header;
            table.rows = rows;
            table.comments.extend(comments);
            Ok(done(table.render(), &a.common.output, EXIT_OK))
        }
        Command::Verify(a) => verify_command(&a),
        Command::Sweep(s) => crate::sweep::run(s.target),
    }
}

pub fn config_value<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn done(body: String, path: &Option<std::path::PathBuf>, status: i32) -> Done {
    Done { output: Output { body, path: path.clone() }, status, notes: Vec::new() }
}

fn single<T: Serialize>(
    command: &str,
    args: &T,
    seed: u64,
    path: &Option<std::path::PathBuf>,
    result: Value,
) -> Result<Done> {
    Ok(done(json_document(command, seed, config_value(args), result), path, EXIT_OK))
}

fn resolve(theta: ThetaArg, opt: f64) -> f64 {
    match theta {
        ThetaArg::Auto => opt,
        ThetaArg::Value(v) => v,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// Attaches the file name to non-invariant core errors.
fn in_file(path: &Path) -> impl Fn(qet_core::Error) -> CliError + '_ {
    move |e| {
        if e.is_invariant_failure() {
            CliError::Core(e)
        } else {
            CliError::Usage(format!("{}: {e}", path.display()))
        }
    }
}

pub fn minimal_result(a: &MinimalArgs) -> Result<Value> {
    let p = MinimalParams::new(a.h, a.k)?;
    let (theta_opt, e_b_max) = minimal::optimize(&p);
    let theta = resolve(a.theta, theta_opt);
    let model = MinimalModel::build(p)?;
    let r = model.run_protocol(theta)?;
    let b = model.entanglement_bound(&model.measurement())?;
    if !(e_b_max >= 0.0 && e_b_max < r.e_a && r.e_b <= e_b_max + 1e-12 * e_b_max.max(1.0)) {
        return Err(CliError::Invariant(format!(
            "energy ordering violated: E_B = {}, E_B_max = {e_b_max}, E_A = {}",
            r.e_b, r.e_a
        )));
    }
    if !b.holds {
        return Err(CliError::Invariant(format!(
            "entanglement bound violated: delta_S = {} < {}",
            b.delta_s, b.bound_rhs
        )));
    }
    let probabilities: Vec<Value> =
        r.outcomes.iter().map(|o| json!({"alpha": o.alpha, "p": o.probability})).collect();
    Ok(json!({
        "h": a.h,
        "k": a.k,
        "theta": theta,
        "theta_opt": theta_opt,
        "E_A": r.e_a,
        "E_B": r.e_b,
        "E_B_max": e_b_max,
        "E_B_closed_form": r.e_b_closed,
        "residual_energy": r.residual_energy,
        "bob_local_energy": r.bob_local_energy,
        "probabilities": probabilities,
        "bound": {
            "delta_S": b.delta_s,
            "coefficient": minimal::bound_coefficient(&p),
            "E_B_max": b.max_e_b,
            "rhs": b.bound_rhs,
            "holds": b.holds,
            "E_B_max_general": b.max_e_b_general,
            "rhs_general": b.bound_rhs_general,
            "holds_general": b.holds_general,
        },
    }))
}

pub fn eigen_options(dense_max_sites: usize, seed: u64) -> EigenOptions {
    EigenOptions { dense_max_sites, seed, ..Default::default() }
}

pub fn load_chain(a: &ChainArgs) -> Result<NormalizedChain> {
    let text = read(&a.model)?;
    let model = parse_model(&text).map_err(in_file(&a.model))?;
    Ok(model.normalize(&eigen_options(a.dense_max_sites, a.common.seed))?)
}

pub fn chain_result(a: &ChainArgs) -> Result<Value> {
    let chain = load_chain(a)?;
    chain_result_on(&chain, a)
}

pub fn chain_result_on(chain: &NormalizedChain, a: &ChainArgs) -> Result<Value> {
    let sigma_a = pauli_component(a.measure.vector, a.site_a)?;
    let sigma_b = pauli_component(a.generator.vector, a.site_b)?;
    let ex = chain.eta_xi(&sigma_a, &sigma_b)?;
    let (theta_opt, e_b_max) = qubit_optimal(ex.eta, ex.xi)?;
    let theta = resolve(a.theta, theta_opt);
    let spec = ChainProtocolSpec::pauli(a.site_a, a.measure.vector, a.site_b, a.generator.vector, theta)?;
    let r = chain.run_protocol(&spec)?;
    let closed = qubit_closed_form(ex.eta, ex.xi, theta);
    let scale = r.e_a.abs().max(1.0);
    if (r.e_b - closed).abs() > 1e-10 * scale {
        return Err(CliError::Invariant(format!(
            "brute-force E_B = {} differs from the closed form {closed}",
            r.e_b
        )));
    }
    let residual = if a.residual {
        let kind = match a.kraus {
            Kraus::Unitary => KrausKind::Unitary,
            Kraus::Rank2 => KrausKind::Rank2,
        };
        let opts = ResidualOptions { kind, search: SearchOptions { seed: a.common.seed, ..Default::default() } };
        let res = chain.residual_energy(a.site_a, &spec.measurement, &opts)?;
        if !(e_b_max <= res.e_r + 1e-9 * scale && res.e_r <= res.e_a + 1e-9 * scale) {
            return Err(CliError::Invariant(format!(
                "ordering E_B <= E_r <= E_A violated: {e_b_max}, {}, {}",
                res.e_r, res.e_a
            )));
        }
        json!({
            "E_r": res.e_r,
            "kraus": a.kraus,
            "converged": res.converged,
            "untouched_energy": res.untouched_energy,
        })
    } else {
        Value::Null
    };
    let outcomes: Vec<Value> = r.outcomes.iter().map(|o| json!({"alpha": o.alpha, "p": o.probability})).collect();
    Ok(json!({
        "n_sites": chain.n_sites(),
        "separation": chain.model().distance(a.site_a, a.site_b),
        "ground_energy": chain.ground().energy,
        "eta": ex.eta,
        "xi": ex.xi,
        "theta": theta,
        "theta_opt": theta_opt,
        "E_A": r.e_a,
        "E_B": r.e_b,
        "E_B_direct": r.e_b_direct,
        "E_B_closed_form": closed,
        "E_B_max": e_b_max,
        "bob_local_energy": r.bob_local_energy,
        "far_density_max": r.far_density_max,
        "probabilities": outcomes,
        "residual": residual,
        "warnings": r.warnings,
    }))
}

pub type Rows = Vec<Vec<String>>;

/// Header, rows and extra comment lines of the Ising table.
pub fn ising_table(a: &IsingArgs) -> Result<(Vec<String>, Rows, Vec<String>)> {
    let ns: Vec<u64> = (a.n.start..=a.n.end).collect();
    let mut header: Vec<String> =
        ["n", "delta_sign", "ln_abs_delta", "E_A", "E_B_analytic", "E_B_asymptotic", "E_r"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        let e = ising::analytic_energies(a.j, n, a.c)?;
        let (ln_d, sign) = ising::delta_log(n)?;
        if !(e.e_b > 0.0 && e.e_b <= e.e_r && e.e_r <= e.e_a) {
            return Err(CliError::Invariant(format!(
                "n = {n}: ordering 0 < E_B <= E_r <= E_A violated ({}, {}, {})",
                e.e_b, e.e_r, e.e_a
            )));
        }
        rows.push(vec![n.to_string(), num(sign), num(ln_d), num(e.e_a), num(e.e_b), num(e.e_b_asymptotic), num(e.e_r)]);
    }
    let mut comments = Vec::new();
    if a.fit {
        let f = ising::asymptote_check(a.j, a.n.start, a.n.end)?;
        comments.push(format!(
            "fit: exponent = {}, prefactor = {}, c_implied = {}, c_implied_fixed_exponent = {}",
            f.exponent, f.prefactor, f.c_implied, f.c_implied_fixed
        ));
        comments.push(format!(
            "fit: power_law_rms = {}, exponential_rms = {}",
            f.power_residual, f.exponential_residual
        ));
    }
    if a.mode == IsingMode::Numeric {
        if a.sizes.is_empty() {
            return Err(CliError::Usage("numeric mode needs at least one chain size".into()));
        }
        let eigen = eigen_options(EigenOptions::default().dense_max_sites, a.common.seed);
        let columns: Vec<Vec<(String, Vec<String>)>> = a
            .sizes
            .par_iter()
            .map(|&size| numeric_columns(a, size, &ns, &eigen))
            .collect::<Result<_>>()?;
        for (name, values) in columns.into_iter().flatten() {
            header.push(name);
            for (row, v) in rows.iter_mut().zip(values) {
                row.push(v);
            }
        }
        comments.push("numeric columns are finite periodic chains with A at site 1; empty cells mark separations below 3 or beyond N/2".into());
    }
    Ok((header, rows, comments))
}

fn numeric_columns(a: &IsingArgs, size: usize, ns: &[u64], eigen: &EigenOptions) -> Result<Vec<(String, Vec<String>)>> {
    let p = IsingParams::new(a.j, size, Boundary::Periodic)?;
    let chain = ising::normalize(&p, eigen)?.chain;
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let site_a = 1 % size;
    let mut out = Vec::new();
    for d in &a.directions {
        let (mut e_a_col, mut e_b_col) = (Vec::new(), Vec::new());
        for &n in ns {
            let n = n as usize;
            if n < MIN_SEPARATION || 2 * n > size {
                e_a_col.push(String::new());
                e_b_col.push(String::new());
                continue;
            }
            let b = (site_a + n) % size;
            let sigma_a = pauli_component(d.vector, site_a)?;
            let mut best: Option<([f64; 3], f64, f64)> = None;
            for ub in axes {
                let ex = chain.eta_xi(&sigma_a, &pauli_component(ub, b)?)?;
                let (theta, e) = qubit_optimal(ex.eta, ex.xi)?;
                if best.is_none_or(|x| e > x.2) {
                    best = Some((ub, theta, e));
                }
            }
            let (ub, theta, _) = best.expect("three axes tried");
            let r = chain.run_protocol(&ChainProtocolSpec::pauli(site_a, d.vector, b, ub, theta)?)?;
            e_a_col.push(num(r.e_a));
            e_b_col.push(num(r.e_b));
        }
        out.push((format!("E_A_numeric_N{size}_{}", d.name), e_a_col));
        out.push((format!("E_B_numeric_N{size}_{}", d.name), e_b_col));
    }
    Ok(out)
}

fn sin2_profile(spec: &str, intervals: usize, flag: &str) -> Result<Profile> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--{flag}: expected eps:a:w, got `{spec}`")))?;
    let [eps, a, w] = parts[..] else {
        return Err(CliError::Usage(format!("--{flag}: expected eps:a:w, got `{spec}`")));
    };
    Ok(Profile::sin2(eps, a, w, intervals)?)
}

fn profile(file: &Option<std::path::PathBuf>, sin2: &str, intervals: usize, flag: &str) -> Result<Profile> {
    match file {
        Some(path) => Profile::from_csv(&read(path)?).map_err(in_file(path)),
        None => sin2_profile(sin2, intervals, &format!("{flag}-sin2")),
    }
}

pub fn field_profiles(a: &FieldArgs) -> Result<(Profile, Profile)> {
    Ok((
        profile(&a.lambda, &a.lambda_sin2, a.resolution, "lambda")?,
        profile(&a.p, &a.p_sin2, a.resolution, "p")?,
    ))
}

pub fn field_result(a: &FieldArgs) -> Result<Value> {
    let (lambda, p) = field_profiles(a)?;
    field_result_on(lambda, p, a)
}

pub fn field_result_on(lambda: Profile, p: Profile, a: &FieldArgs) -> Result<Value> {
    let theta = match a.theta {
        ThetaArg::Auto => Theta::Auto,
        ThetaArg::Value(v) => Theta::Fixed(v),
    };
    let spec = FieldProtocolSpec::new(lambda, p, a.t, theta)?;
    let opts = OracleOptions { n_modes: a.oracle_modes, omega_max: None };
    let (r, check) = output_energy_checked(&spec, &opts)?;
    let scale = r.e_b_max.abs().max(f64::MIN_POSITIVE);
    if (r.e_b_max - r.e_b_final_formula).abs() > 1e-12 * scale {
        return Err(CliError::Invariant(format!(
            "eta^2/(4 xi) = {} differs from the kernel formula {}",
            r.e_b_max, r.e_b_final_formula
        )));
    }
    if (check.oracle.prob_plus - 0.5).abs() > 1e-8 {
        return Err(CliError::Invariant(format!("oracle outcome probability {} != 1/2", check.oracle.prob_plus)));
    }
    Ok(json!({
        "E_A": r.e_a,
        "eta": r.eta,
        "xi": r.xi,
        "theta": r.theta,
        "theta_opt": r.theta_opt,
        "E_B": r.e_b,
        "E_B_max": r.e_b_max,
        "E_B_final_formula": r.e_b_final_formula,
        "bob_local_energy": r.bob_local_energy,
        "alice_packet_energy": r.alice_packet_energy,
        "total_decrease": r.total_decrease,
        "overlap": {
            "value": r.overlap,
            "fft": check.fft,
            "oracle": check.oracle.overlap,
            "relative_difference": check.relative_difference,
            "agreed": check.agreed,
            "oracle_modes": check.oracle.n_modes,
            "oracle_omega_max": check.oracle.omega_max,
            "oracle_refinement_change": check.oracle.refinement_change,
        },
        "prob_plus": r.prob_plus,
        "prob_plus_oracle": check.oracle.prob_plus,
        "eta_refinement": r.eta_refinement,
        "min_kernel_argument": spec.min_kernel_argument(),
    }))
}

fn verify_command(a: &VerifyArgs) -> Result<Done> {
    let checks = verify::run_suite(a.suite, a.common.seed);
    let failed = checks.iter().filter(|c| !c.passed).count();
    let result = json!({
        "suite": a.suite,
        "passed": checks.len() - failed,
        "failed": failed,
        "checks": checks,
    });
    let mut d = done(
        json_document("verify", a.common.seed, config_value(a), result),
        &a.common.output,
        if failed == 0 { EXIT_OK } else { EXIT_INVARIANT },
    );
    d.notes = checks.iter().map(|c| c.line()).collect();
    Ok(d)
}
