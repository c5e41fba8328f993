//! Two-qubit minimal model.
//!
//! Site 0 is A, site 1 is B. `H_A = hσ_z^A + h²/r`, `H_B = hσ_z^B + h²/r`,
//! `V = 2kσ_x^Aσ_x^B + 2k²/r` with `r = √(h² + k²)`, so that every piece has
//! zero ground-state expectation and `H = H_A + H_B + V ≥ 0`.

use crate::optimize::{minimize, SearchOptions};
use crate::quantum::{
    apply_measurement, c, commutator_norm, embed_local, ground_state, kron, pauli_x, pauli_y,
    pauli_z, von_neumann_entropy, CMatrix, CVector, DensityOperator, LocalOperator, LocalSum,
    Operator, PovmMeasurement, SpectralPropagator, StateVector, C64,
};
use crate::{Error, Result, TOL_CONSTRUCT, TOL_IDENTITY};
use rand::Rng;

pub const SITE_A: usize = 0;
pub const SITE_B: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalParams {
    pub h: f64,
    pub k: f64,
}

impl MinimalParams {
    pub fn new(h: f64, k: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0 && k.is_finite() && k > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "h and k must be positive and finite (h = {h}, k = {k})"
            )));
        }
        Ok(Self { h, k })
    }

    /// `√(h² + k²)`.
    pub fn r(&self) -> f64 {
        self.h.hypot(self.k)
    }
}

/// `E_A = h²/√(h² + k²)`.
pub fn input_energy(p: &MinimalParams) -> f64 {
    p.h * p.h / p.r()
}

/// Energy extracted at B with rotation angle `theta`.
pub fn output_energy(p: &MinimalParams, theta: f64) -> f64 {
    let (h, k) = (p.h, p.k);
    let t = 2.0 * theta;
    (h * k * t.sin() - (h * h + 2.0 * k * k) * (1.0 - t.cos())) / p.r()
}

/// Optimal angle (with `2θ` in the first quadrant) and the maximal output.
pub fn optimize(p: &MinimalParams) -> (f64, f64) {
    let (h, k) = (p.h, p.k);
    let a = h * h + 2.0 * k * k;
    let b = h * k;
    let theta = 0.5 * b.atan2(a);
    let ratio = b / a;
    // √(1+x²) − 1 written to avoid cancellation for weak coupling.
    let e_max = a / p.r() * ratio * ratio / (1.0 + ratio.hypot(1.0));
    (theta, e_max)
}

/// Best value of [`output_energy`] on `points` equally spaced angles in `[0, π)`.
pub fn theta_sweep(p: &MinimalParams, points: usize) -> (f64, f64) {
    (0..points)
        .map(|i| std::f64::consts::PI * i as f64 / points as f64)
        .map(|t| (t, output_energy(p, t)))
        .fold((0.0, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
}

/// `⟨H_B(t)⟩` after the measurement at A, averaged over outcomes.
pub fn hb_evolution(p: &MinimalParams, t: f64) -> f64 {
    p.h * p.h / (2.0 * p.r()) * (1.0 - (4.0 * p.k * t).cos())
}

/// `[(1 + sin²ς)/(2cos³ς)] ln[(1 + cos ς)/(1 − cos ς)]` with `cos ς = h/r`.
pub fn bound_coefficient(p: &MinimalParams) -> f64 {
    let cs = p.h / p.r();
    let s2 = 1.0 - cs * cs;
    (1.0 + s2) / (2.0 * cs.powi(3)) * ((1.0 + cs) / (1.0 - cs)).ln()
}

/// `U_B(α) = cos θ I − iα sin θ σ_y`.
pub fn bob_rotation(alpha: f64, theta: f64) -> LocalOperator {
    let m = CMatrix::identity(2, 2) * c(theta.cos()) - pauli_y() * C64::new(0.0, alpha * theta.sin());
    LocalOperator::single(SITE_B, m).expect("2x2 on one site")
}

#[derive(Debug, Clone)]
pub struct MinimalModel {
    params: MinimalParams,
    h_a: LocalSum,
    h_b: LocalSum,
    v: LocalSum,
    h: LocalSum,
    ground: StateVector,
}

impl MinimalModel {
    pub fn build(params: MinimalParams) -> Result<Self> {
        let MinimalParams { h, k } = params;
        let r = params.r();
        let mut h_a = LocalSum::from(LocalOperator::single(SITE_A, pauli_z() * c(h))?, 2);
        h_a.add_constant(h * h / r);
        let mut h_b = LocalSum::from(LocalOperator::single(SITE_B, pauli_z() * c(h))?, 2);
        h_b.add_constant(h * h / r);
        let mut v = LocalSum::from(
            LocalOperator::two_site(SITE_A, &(pauli_x() * c(2.0 * k)), SITE_B, &pauli_x())?,
            2,
        );
        v.add_constant(2.0 * k * k / r);
        let mut total = h_a.clone();
        total.extend(&h_b)?;
        total.extend(&v)?;

        let mut amps = CVector::zeros(4);
        amps[0] = c((0.5 * (1.0 - h / r)).sqrt());
        amps[3] = c(-(0.5 * (1.0 + h / r)).sqrt());
        let ground = StateVector::new(2, amps)?;

        let model = Self { params, h_a, h_b, v, h: total, ground };
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let scale = self.params.h.max(self.params.k).max(1.0);
        for (name, op) in [("H_A", &self.h_a), ("H_B", &self.h_b), ("V", &self.v)] {
            let e = self.ground.expectation_real(op)?;
            if e.abs() > TOL_CONSTRUCT * scale {
                return Err(Error::Invariant(format!("<g|{name}|g> = {e:e}, expected 0")));
            }
        }
        let numeric = ground_state(&self.h)?;
        if numeric.energy < -TOL_IDENTITY * scale {
            return Err(Error::Invariant(format!(
                "lowest eigenvalue of H is {:e}, expected >= 0",
                numeric.energy
            )));
        }
        let fidelity = self.ground.overlap(&numeric.state);
        if (1.0 - fidelity).abs() > TOL_IDENTITY {
            return Err(Error::Invariant(format!(
                "closed-form ground state has overlap {fidelity} with the numerical one"
            )));
        }
        Ok(())
    }

    pub fn params(&self) -> MinimalParams {
        self.params
    }

    pub fn h_a(&self) -> &LocalSum {
        &self.h_a
    }

    pub fn h_b(&self) -> &LocalSum {
        &self.h_b
    }

    pub fn v(&self) -> &LocalSum {
        &self.v
    }

    pub fn hamiltonian(&self) -> &LocalSum {
        &self.h
    }

    pub fn ground(&self) -> &StateVector {
        &self.ground
    }

    /// `H_B + V`, the part of `H` a unitary at B can change.
    pub fn bob_energy(&self) -> LocalSum {
        let mut k = self.h_b.clone();
        k.extend(&self.v).expect("same register");
        k
    }

    pub fn measurement(&self) -> PovmMeasurement {
        PovmMeasurement::projective(SITE_A, [1.0, 0.0, 0.0]).expect("unit axis")
    }

    /// `Σ_α ⟨g|P_A(α) H P_A(α)|g⟩`.
    pub fn input_energy_numeric(&self) -> Result<f64> {
        let mut total = 0.0;
        for (_, v) in self.measurement().branches(self.ground.amplitudes(), 2)? {
            total += v.dotc(&self.h.apply(&v)).re;
        }
        Ok(total)
    }

    /// Executes measurement, announcement and rotation by brute force.
    pub fn run_protocol(&self, theta: f64) -> Result<ProtocolResult> {
        let record = apply_measurement(&self.ground, &self.measurement())?;
        let bob = self.bob_energy();
        let mut outcomes = Vec::new();
        let (mut e_a, mut residual, mut bob_local) = (0.0, 0.0, 0.0);
        for b in record.branches {
            let u = bob_rotation(b.label, theta);
            let after = StateVector::new(2, u.apply_to(b.state.amplitudes(), 2)?)?;
            e_a += b.probability * b.state.expectation_real(&self.h)?;
            residual += b.probability * after.expectation_real(&self.h)?;
            bob_local += b.probability * after.expectation_real(&bob)?;
            outcomes.push(OutcomeRecord {
                alpha: b.label,
                probability: b.probability,
                post_measurement: b.state,
                post_operation: after,
            });
        }
        let result = ProtocolResult {
            e_a,
            e_b: e_a - residual,
            theta,
            outcomes,
            residual_energy: residual,
            bob_local_energy: bob_local,
            e_a_closed: input_energy(&self.params),
            e_b_closed: output_energy(&self.params, theta),
        };
        result.check()?;
        Ok(result)
    }

    /// `E_A − Tr[ωH] = −⟨g|W†(H_B + V)W|g⟩` for an outcome-independent unitary at B.
    pub fn local_cooling_deficit(&self, w: &LocalOperator) -> Result<f64> {
        if w.support() != [SITE_B] {
            return Err(Error::InvalidSupport(format!(
                "operation must act on site {SITE_B} only, got {:?}",
                w.support()
            )));
        }
        let deviation = w.unitarity_defect();
        if deviation > TOL_IDENTITY {
            return Err(Error::NotUnitary { deviation });
        }
        let psi = w.apply_to(self.ground.amplitudes(), 2)?;
        Ok(-psi.dotc(&self.bob_energy().apply(&psi)).re)
    }

    /// `⟨g|U†HU|g⟩` for a unitary `U` on one site.
    pub fn passivity_energy(&self, u: &LocalOperator) -> Result<f64> {
        let deviation = u.unitarity_defect();
        if deviation > TOL_IDENTITY {
            return Err(Error::NotUnitary { deviation });
        }
        let psi = u.apply_to(self.ground.amplitudes(), 2)?;
        Ok(psi.dotc(&self.h.apply(&psi)).re)
    }

    /// Outcome-averaged `⟨H_B(t)⟩` and `⟨V(t)⟩` by spectral evolution.
    pub fn evolution_numeric(&self, t: f64) -> Result<(f64, f64)> {
        let prop = SpectralPropagator::new(&self.h)?;
        let record = apply_measurement(&self.ground, &self.measurement())?;
        let (mut hb, mut v) = (0.0, 0.0);
        for b in record.branches {
            let s = prop.evolve(&b.state, t)?;
            hb += b.probability * s.expectation_real(&self.h_b)?;
            v += b.probability * s.expectation_real(&self.v)?;
        }
        Ok((hb, v))
    }

    /// Entanglement consumed by a measurement at A versus the energy it lets B extract.
    pub fn entanglement_bound(&self, m: &PovmMeasurement) -> Result<EntanglementBound> {
        if m.site() != SITE_A {
            return Err(Error::InvalidSupport(format!(
                "measurement must act on site {SITE_A}, got {}",
                m.site()
            )));
        }
        let v_dense = self.v.matrix_on(&[0, 1])?;
        for (_, op) in m.outcomes() {
            let d = commutator_norm(&embed_local(op, 2)?, &v_dense);
            if d > TOL_IDENTITY {
                return Err(Error::InvalidParameter(format!(
                    "measurement operator does not commute with V (norm {d:e})"
                )));
            }
        }

        let s_b = von_neumann_entropy(&DensityOperator::reduced_from_pure(&self.ground, &[SITE_B])?);
        let k = self.bob_energy().matrix_on(&[0, 1])?;
        let sy = kron(&CMatrix::identity(2, 2), &pauli_y());
        let mut conditional = 0.0;
        let mut restricted = 0.0;
        let mut general = 0.0;
        for (_, branch) in m.branches(self.ground.amplitudes(), 2)? {
            let p = branch.norm_squared();
            if p < crate::quantum::MIN_PROBABILITY {
                continue;
            }
            let post = StateVector::normalized(2, branch.clone())?;
            conditional += p * von_neumann_entropy(&DensityOperator::reduced_from_pure(&post, &[SITE_B])?);

            let (best, theta) = rotation_optimum(&branch, &k, &sy);
            restricted += best;
            general += general_optimum(&branch, &k, theta).max(best);
        }
        let delta_s = s_b - conditional;
        let coeff = bound_coefficient(&self.params);
        let r = self.params.r();
        let bound_rhs = coeff * restricted / r;
        let bound_rhs_general = coeff * general / r;
        Ok(EntanglementBound {
            delta_s,
            max_e_b: restricted,
            max_e_b_general: general,
            bound_rhs,
            bound_rhs_general,
            holds: delta_s >= bound_rhs - 1e-9,
            holds_general: delta_s >= bound_rhs_general - 1e-9,
        })
    }
}

/// Per-outcome maximum of `−⟨v|U†KU|v⟩` over `U = cos θ − i sin θ σ_y^B`,
/// with the maximizing angle.
fn rotation_optimum(v: &CVector, k: &CMatrix, sy: &CMatrix) -> (f64, f64) {
    let kv = k * v;
    let sv = sy * v;
    let a = v.dotc(&kv).re;
    let b = sv.dotc(&(k * &sv)).re;
    // i⟨[σ, K]⟩ = −2 Im⟨σv|Kv⟩.
    let cc = -2.0 * sv.dotc(&kv).im;
    // ⟨U†KU⟩ = (a+b)/2 + (a−b)/2 cos 2θ + (cc/2) sin 2θ.
    let phase = (-cc).atan2(b - a);
    let best = -0.5 * (a + b) + 0.5 * (a - b).hypot(cc);
    (best, 0.5 * phase)
}

fn general_optimum(v: &CVector, k: &CMatrix, theta: f64) -> f64 {
    let id = CMatrix::identity(2, 2);
    let cost = |p: &[f64]| {
        let gen = pauli_x() * c(p[0]) + pauli_y() * c(p[1]) + pauli_z() * c(p[2]);
        let u = LocalOperator::single(0, gen)
            .and_then(|g| g.unitary_exp(1.0))
            .expect("2x2 Hermitian generator");
        let w = kron(&id, u.matrix()) * v;
        w.dotc(&(k * &w)).re
    };
    let opts = SearchOptions { random_starts: 8, grid_points: 0, grid_refinements: 0, ..Default::default() };
    -minimize(&cost, 3, &[vec![0.0, theta, 0.0]], &opts).value
}

/// Random measurement on A diagonal in the `σ_x^A` eigenbasis, hence commuting with `V`.
pub fn random_commuting_povm<R: Rng + ?Sized>(outcomes: usize, rng: &mut R) -> Result<PovmMeasurement> {
    let plus = crate::quantum::random::unit_complex_vector(outcomes, rng);
    let minus = crate::quantum::random::unit_complex_vector(outcomes, rng);
    let id = CMatrix::identity(2, 2);
    let p_plus = (&id + pauli_x()) * c(0.5);
    let p_minus = (&id - pauli_x()) * c(0.5);
    let ops = (0..outcomes)
        .map(|mu| (mu as f64, &p_plus * plus[mu] + &p_minus * minus[mu]))
        .collect();
    PovmMeasurement::new(SITE_A, ops)
}

#[derive(Debug, Clone)]
pub struct OutcomeRecord {
    pub alpha: f64,
    pub probability: f64,
    pub post_measurement: StateVector,
    pub post_operation: StateVector,
}

#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub e_a: f64,
    pub e_b: f64,
    pub theta: f64,
    pub outcomes: Vec<OutcomeRecord>,
    /// Total energy left after the operation at B, `E_A − E_B`.
    pub residual_energy: f64,
    /// `Tr[ρ(H_B + V)]` after the operation, `−E_B`.
    pub bob_local_energy: f64,
    pub e_a_closed: f64,
    pub e_b_closed: f64,
}

impl ProtocolResult {
    fn check(&self) -> Result<()> {
        let scale = self.e_a_closed.max(1.0);
        let tol = 1e-11 * scale;
        if (self.e_a - self.e_a_closed).abs() > tol || (self.e_b - self.e_b_closed).abs() > tol {
            return Err(Error::Invariant(format!(
                "protocol gave E_A = {}, E_B = {}; closed forms {} and {}",
                self.e_a, self.e_b, self.e_a_closed, self.e_b_closed
            )));
        }
        if self.residual_energy < -tol {
            return Err(Error::Invariant(format!(
                "negative total energy {} after the protocol",
                self.residual_energy
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementBound {
    pub delta_s: f64,
    /// Extractable energy with a `σ_y` rotation per outcome.
    pub max_e_b: f64,
    /// Extractable energy with an arbitrary unitary per outcome.
    pub max_e_b_general: f64,
    pub bound_rhs: f64,
    pub bound_rhs_general: f64,
    pub holds: bool,
    pub holds_general: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> MinimalModel {
        MinimalModel::build(MinimalParams::new(1.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn rejects_nonpositive_params() {
        assert!(MinimalParams::new(0.0, 1.0).is_err());
        assert!(MinimalParams::new(1.0, -1.0).is_err());
        assert!(MinimalParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn rotation_closed_form_matches_scan() {
        let m = unit();
        let k = m.bob_energy().matrix_on(&[0, 1]).unwrap();
        let sy = kron(&CMatrix::identity(2, 2), &pauli_y());
        let branches = m.measurement().branches(m.ground.amplitudes(), 2).unwrap();
        for (alpha, v) in branches {
            let (best, theta) = rotation_optimum(&v, &k, &sy);
            let at = |t: f64| {
                let w = bob_rotation(1.0, t).apply_to(&v, 2).unwrap();
                -w.dotc(&(&k * &w)).re
            };
            assert!((at(theta) - best).abs() < 1e-12, "alpha {alpha}");
            let scan = (0..2000).map(|i| at(i as f64 * std::f64::consts::PI / 2000.0)).fold(f64::MIN, f64::max);
            assert!(scan <= best + 1e-12);
        }
    }

    #[test]
    fn general_unitary_is_not_worse_than_rotation() {
        let m = unit();
        let b = m.entanglement_bound(&m.measurement()).unwrap();
        assert!(b.max_e_b_general >= b.max_e_b - 1e-12);
    }

    #[test]
    fn deficit_requires_unitary_on_b() {
        let m = unit();
        let a = LocalOperator::single(SITE_A, pauli_y()).unwrap();
        assert!(matches!(m.local_cooling_deficit(&a), Err(Error::InvalidSupport(_))));
        let half = LocalOperator::single(SITE_B, pauli_y() * c(0.5)).unwrap();
        assert!(matches!(m.local_cooling_deficit(&half), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn noncommuting_measurement_rejected() {
        let m = unit();
        let z = PovmMeasurement::projective(SITE_A, [0.0, 0.0, 1.0]).unwrap();
        assert!(m.entanglement_bound(&z).is_err());
    }

    #[test]
    fn haar_unitaries_on_b_never_cool() {
        let m = unit();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let w = LocalOperator::single(SITE_B, haar_unitary(2, &mut rng)).unwrap();
            assert!(m.local_cooling_deficit(&w).unwrap() <= 1e-12);
        }
    }
}
