use super::NormalizedChain;
use crate::quantum::{CVector, LocalOperator, LocalSum, Operator, PovmMeasurement, MIN_PROBABILITY};
use crate::{Error, Result, TOL_IDENTITY};
use log::warn;

/// Smallest A–B distance for which the local Hamiltonians around A and B share no term.
pub const MIN_SEPARATION: usize = 3;
/// Separation assumed by the general theory; closer pairs only warn.
pub const WARN_SEPARATION: usize = 5;

/// Measurement at A, announcement, and `U_B(α) = exp(−iαθG_B)` at B.
#[derive(Debug, Clone)]
pub struct ChainProtocolSpec {
    pub site_a: usize,
    pub site_b: usize,
    pub measurement: PovmMeasurement,
    pub g_b: LocalOperator,
    pub theta: f64,
}

impl ChainProtocolSpec {
    /// Projective measurement of `u_A·σ` and generator `u_B·σ`.
    pub fn pauli(site_a: usize, u_a: [f64; 3], site_b: usize, u_b: [f64; 3], theta: f64) -> Result<Self> {
        Ok(Self {
            site_a,
            site_b,
            measurement: PovmMeasurement::projective(site_a, u_a)?,
            g_b: crate::quantum::pauli_component(u_b, site_b)?,
            theta,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutcome {
    pub alpha: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainProtocolResult {
    /// `Σ_α ⟨g|M†H_A M|g⟩`.
    pub e_a: f64,
    /// `Σ_α ⟨g|M†H M|g⟩`.
    pub e_a_total: f64,
    /// `E_A − Tr[Hρ_QET]`.
    pub e_b: f64,
    /// `−Σ_α ⟨g|Π(α)U†H_B U|g⟩`.
    pub e_b_direct: f64,
    /// `Tr[ρ_QET H_B]`, equal to `−E_B`.
    pub bob_local_energy: f64,
    /// Largest `|Σ_α ⟨g|M†T_n M|g⟩|` over `|n − n_A| ≥ 2`.
    pub far_density_max: f64,
    pub theta: f64,
    pub outcomes: Vec<ChainOutcome>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaXi {
    pub eta: f64,
    pub xi: f64,
    /// `|η|` computed with `H` minus `|η|` computed with `H_B`.
    pub locality_defect: f64,
    /// Imaginary part of `⟨g|σ_A i[H, σ_B]|g⟩`.
    pub eta_imag: f64,
}

/// `E_B(θ) = (η/2) sin 2θ − (ξ/2)(1 − cos 2θ)`.
pub fn qubit_closed_form(eta: f64, xi: f64, theta: f64) -> f64 {
    0.5 * eta * (2.0 * theta).sin() - 0.5 * xi * (1.0 - (2.0 * theta).cos())
}

/// Maximizing angle (sin 2θ carrying the sign of η) and `½(√(ξ² + η²) − ξ)`.
pub fn qubit_optimal(eta: f64, xi: f64) -> Result<(f64, f64)> {
    if !(xi > 0.0) {
        return Err(Error::InvalidParameter(format!("xi must be positive, got {xi}")));
    }
    let theta = 0.5 * eta.atan2(xi);
    let e = 0.5 * eta * eta / (eta.hypot(xi) + xi);
    Ok((theta, e))
}

/// Per-site energies of a multi-site extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub sites: Vec<usize>,
    pub energies: Vec<f64>,
    pub e_a: f64,
    /// `E_A − Tr[Hρ]` after all operations.
    pub total_extracted: f64,
    pub warnings: Vec<String>,
}

impl NormalizedChain {
    pub(super) fn check_measurement(&self, site_a: usize, m: &PovmMeasurement) -> Result<()> {
        self.model.check_site(site_a)?;
        if m.site() != site_a {
            return Err(Error::InvalidSupport(format!(
                "measurement acts on site {}, expected {site_a}",
                m.site()
            )));
        }
        Ok(())
    }

    fn check_separation(&self, a: usize, b: usize, what: &str, warnings: &mut Vec<String>) -> Result<()> {
        let d = self.model.distance(a, b);
        if d < MIN_SEPARATION {
            return Err(Error::InvalidParameter(format!(
                "{what}: sites {a} and {b} are {d} apart; the local Hamiltonians overlap (need >= {MIN_SEPARATION})"
            )));
        }
        if d < WARN_SEPARATION {
            let msg = format!("{what}: sites {a} and {b} are {d} apart (< {WARN_SEPARATION})");
            warn!("{msg}");
            warnings.push(msg);
        }
        Ok(())
    }

    fn check_generator(&self, site: usize, g: &LocalOperator) -> Result<()> {
        self.model.check_site(site)?;
        if g.support() != [site] {
            return Err(Error::InvalidSupport(format!(
                "generator must act on site {site} only, got {:?}",
                g.support()
            )));
        }
        let deviation = g.hermiticity_defect();
        if deviation > crate::TOL_CONSTRUCT {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    /// Unnormalized branches `M(α)|g⟩` above the probability cutoff.
    pub(crate) fn branches(&self, m: &PovmMeasurement) -> Result<Vec<(f64, CVector)>> {
        Ok(m.branches(self.state().amplitudes(), self.n_sites())?
            .into_iter()
            .filter(|(_, v)| v.norm_squared() >= MIN_PROBABILITY)
            .collect())
    }

    fn expect(v: &CVector, op: &dyn Operator) -> f64 {
        v.dotc(&op.apply(v)).re
    }

    /// Energy injected at A: local route, total route, and the far-density check.
    pub(super) fn injected(&self, site_a: usize, branches: &[(f64, CVector)]) -> Result<(f64, f64, f64)> {
        let h_a = self.model.local_hamiltonian(site_a)?;
        let e_a: f64 = branches.iter().map(|(_, v)| Self::expect(v, &h_a)).sum();
        let e_a_total: f64 = branches.iter().map(|(_, v)| Self::expect(v, &self.hamiltonian)).sum();
        let scale = e_a.abs().max(1.0);
        if (e_a - e_a_total).abs() > TOL_IDENTITY * scale {
            return Err(Error::Invariant(format!(
                "injected energy not local: {e_a} around A versus {e_a_total} in total"
            )));
        }
        let mut far = 0.0_f64;
        for t in self.densities.iter().filter(|t| self.model.distance(t.site, site_a) >= 2) {
            let e: f64 = branches.iter().map(|(_, v)| Self::expect(v, &t.operator)).sum();
            far = far.max(e.abs());
        }
        if far > TOL_IDENTITY * scale {
            return Err(Error::Invariant(format!("measurement at A changed a distant density by {far:e}")));
        }
        Ok((e_a, e_a_total, far))
    }

    pub fn run_protocol(&self, spec: &ChainProtocolSpec) -> Result<ChainProtocolResult> {
        self.check_measurement(spec.site_a, &spec.measurement)?;
        self.check_generator(spec.site_b, &spec.g_b)?;
        let mut warnings = Vec::new();
        self.check_separation(spec.site_a, spec.site_b, "A-B", &mut warnings)?;

        let n = self.n_sites();
        let branches = self.branches(&spec.measurement)?;
        let (e_a, e_a_total, far) = self.injected(spec.site_a, &branches)?;
        let h_b = self.model.local_hamiltonian(spec.site_b)?;
        let g = self.state().amplitudes();

        let mut final_energy = 0.0;
        let mut bob_local = 0.0;
        let mut direct = 0.0;
        let mut outcomes = Vec::new();
        let effects = spec.measurement.effects();
        let paired = spec.measurement.branches(g, n)?.into_iter().zip(effects);
        for ((alpha, v), (_, pi)) in paired.filter(|((_, v), _)| v.norm_squared() >= MIN_PROBABILITY) {
            let u = spec.g_b.unitary_exp(alpha * spec.theta)?;
            let after = u.apply_to(&v, n)?;
            final_energy += Self::expect(&after, &self.hamiltonian);
            bob_local += Self::expect(&after, &h_b);
            outcomes.push(ChainOutcome { alpha, probability: v.norm_squared() });

            let ug = u.apply_to(g, n)?;
            let w = u.dagger().apply_to(&h_b.apply(&ug), n)?;
            direct -= pi.apply_to(g, n)?.dotc(&w).re;
        }
        let e_b = e_a_total - final_energy;
        let scale = e_a.abs().max(1.0);
        if (e_b - direct).abs() > TOL_IDENTITY * scale {
            return Err(Error::Invariant(format!(
                "output energy routes disagree: {e_b} from the total energy, {direct} from B"
            )));
        }
        Ok(ChainProtocolResult {
            e_a,
            e_a_total,
            e_b,
            e_b_direct: direct,
            bob_local_energy: bob_local,
            far_density_max: far,
            theta: spec.theta,
            outcomes,
            warnings,
        })
    }

    /// `η = ⟨g|σ_A i[H, σ_B]|g⟩` and `ξ = ⟨g|σ_B H σ_B|g⟩`.
    pub fn eta_xi(&self, sigma_a: &LocalOperator, sigma_b: &LocalOperator) -> Result<EtaXi> {
        for s in [sigma_a, sigma_b] {
            if s.support().len() != 1 {
                return Err(Error::InvalidSupport(format!("expected a one-site operator, got {:?}", s.support())));
            }
            self.model.check_site(s.support()[0])?;
            let deviation = s.involution_defect().max(s.hermiticity_defect());
            if deviation > TOL_IDENTITY {
                return Err(Error::NotInvolution { deviation });
            }
        }
        let n = self.n_sites();
        let g = self.state().amplitudes();
        let h_b = self.model.local_hamiltonian(sigma_b.support()[0])?;
        let sg = sigma_b.apply_to(g, n)?;
        let ag = sigma_a.apply_to(g, n)?;
        let dot = |h: &LocalSum| -> Result<crate::C64> {
            // i[H, σ]|g⟩ = i(Hσ|g⟩ − σH|g⟩)
            let comm = (h.apply(&sg) - sigma_b.apply_to(&h.apply(g), n)?) * crate::C64::new(0.0, 1.0);
            Ok(ag.dotc(&comm))
        };
        let full = dot(&self.hamiltonian)?;
        let local = dot(&h_b)?;
        let xi = Self::expect(&sg, &self.hamiltonian);
        Ok(EtaXi {
            eta: full.re,
            xi,
            locality_defect: (full - local).norm(),
            eta_imag: full.im,
        })
    }

    /// Simultaneous `exp(−iαθ_n G_n)` at several sites after one measurement at A.
    pub fn energy_distribution(
        &self,
        site_a: usize,
        measurement: &PovmMeasurement,
        operations: &[(usize, LocalOperator)],
        thetas: &[f64],
    ) -> Result<Distribution> {
        self.check_measurement(site_a, measurement)?;
        if operations.len() != thetas.len() || operations.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "{} operations but {} angles",
                operations.len(),
                thetas.len()
            )));
        }
        let mut warnings = Vec::new();
        for (i, (s, g)) in operations.iter().enumerate() {
            self.check_generator(*s, g)?;
            self.check_separation(site_a, *s, "A-extraction", &mut warnings)?;
            for (t, _) in &operations[..i] {
                self.check_separation(*t, *s, "extraction-extraction", &mut warnings)?;
            }
        }
        let n = self.n_sites();
        let branches = self.branches(measurement)?;
        let (e_a, e_a_total, _) = self.injected(site_a, &branches)?;
        let locals = operations
            .iter()
            .map(|(s, _)| self.model.local_hamiltonian(*s))
            .collect::<Result<Vec<_>>>()?;
        let mut energies = vec![0.0; operations.len()];
        let mut final_energy = 0.0;
        for (alpha, v) in &branches {
            let mut after = v.clone();
            for ((_, g), theta) in operations.iter().zip(thetas) {
                after = g.unitary_exp(alpha * theta)?.apply_to(&after, n)?;
            }
            final_energy += Self::expect(&after, &self.hamiltonian);
            for (e, h) in energies.iter_mut().zip(&locals) {
                *e -= Self::expect(&after, h);
            }
        }
        let total = e_a_total - final_energy;
        let sum: f64 = energies.iter().sum();
        let scale = e_a.abs().max(1.0);
        if (sum - total).abs() > TOL_IDENTITY * scale {
            return Err(Error::Invariant(format!(
                "per-site energies sum to {sum}, total extraction is {total}"
            )));
        }
        if sum > e_a + TOL_IDENTITY * scale {
            return Err(Error::Invariant(format!("extracted {sum} exceeds injected {e_a}")));
        }
        Ok(Distribution {
            sites: operations.iter().map(|(s, _)| *s).collect(),
            energies,
            e_a,
            total_extracted: total,
            warnings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_optimum() {
        let (t, e) = qubit_optimal(1.0, 1.0).unwrap();
        assert!((t - std::f64::consts::PI / 8.0).abs() < 1e-15);
        assert!((e - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert!((qubit_closed_form(1.0, 1.0, t) - e).abs() < 1e-15);
        assert_eq!(qubit_optimal(0.0, 2.0).unwrap().1, 0.0);
        let (t, e) = qubit_optimal(-0.3, 0.8).unwrap();
        assert!(t < 0.0 && e > 0.0);
        assert!(qubit_optimal(1.0, 0.0).is_err());
    }
}
