//! Nearest-neighbour chains built from energy densities
//! `T_n = X_n + ½Σ_j g_{n−½,j} Y Y + ½Σ_j g_{n+½,j} Y Y − ε_n`.

mod file;
mod protocol;
mod residual;

pub use file::{parse_model, parse_pauli_expr};
pub use protocol::{
    qubit_closed_form, qubit_optimal, ChainOutcome, ChainProtocolResult, ChainProtocolSpec,
    Distribution, EtaXi, MIN_SEPARATION, WARN_SEPARATION,
};
pub use residual::{CoolingOutcome, KrausKind, ResidualEnergy, ResidualOptions};

use crate::quantum::{
    c, ground_state_with, hermitize, local_offsets, pauli_x, pauli_y, pauli_z, CMatrix, CVector,
    EigenOptions, GroundState, LocalOperator, LocalSum, Operator, StateVector,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "open" => Ok(Self::Open),
            "periodic" => Ok(Self::Periodic),
            other => Err(Error::InvalidParameter(format!(
                "boundary must be `open` or `periodic`, got `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Open => "open",
            Self::Periodic => "periodic",
        })
    }
}

/// One coupling `g · L_n R_{n+1}` on a bond.
#[derive(Debug, Clone, PartialEq)]
pub struct BondTerm {
    pub coupling: f64,
    pub left: CMatrix,
    pub right: CMatrix,
}

impl BondTerm {
    pub fn new(coupling: f64, left: CMatrix, right: CMatrix) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling {coupling}")));
        }
        Ok(Self { coupling, left: single_site(left)?, right: single_site(right)? })
    }
}

fn single_site(m: CMatrix) -> Result<CMatrix> {
    if m.shape() != (2, 2) {
        return Err(Error::DimensionMismatch { expected: 2, found: m.nrows() });
    }
    hermitize(&m)
}

/// `T_n` as a sum of local terms.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDensityTerm {
    pub site: usize,
    pub operator: LocalSum,
}

impl EnergyDensityTerm {
    pub fn support(&self) -> Vec<usize> {
        self.operator.support()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    n_sites: usize,
    boundary: Boundary,
    onsite: Vec<CMatrix>,
    /// `bonds[b]` couples sites `b` and `(b + 1) mod n_sites`.
    bonds: Vec<Vec<BondTerm>>,
    shifts: Vec<f64>,
}

/// Largest register a chain may occupy.
pub const MAX_CHAIN_SITES: usize = 22;

impl ChainModel {
    pub fn new(
        n_sites: usize,
        boundary: Boundary,
        onsite: Vec<CMatrix>,
        bonds: Vec<Vec<BondTerm>>,
    ) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_CHAIN_SITES {
            return Err(Error::TooLarge { n_sites, max: MAX_CHAIN_SITES });
        }
        if boundary == Boundary::Periodic && n_sites < 3 {
            return Err(Error::InvalidParameter("a periodic chain needs at least 3 sites".into()));
        }
        if onsite.len() != n_sites {
            return Err(Error::DimensionMismatch { expected: n_sites, found: onsite.len() });
        }
        let n_bonds = match boundary {
            Boundary::Open => n_sites - 1,
            Boundary::Periodic => n_sites,
        };
        if bonds.len() != n_bonds {
            return Err(Error::DimensionMismatch { expected: n_bonds, found: bonds.len() });
        }
        let onsite = onsite.into_iter().map(single_site).collect::<Result<_>>()?;
        Ok(Self { n_sites, boundary, onsite, bonds, shifts: vec![0.0; n_sites] })
    }

    /// Same on-site operator and bond couplings everywhere.
    pub fn uniform(n_sites: usize, boundary: Boundary, onsite: CMatrix, bond: Vec<BondTerm>) -> Result<Self> {
        let n_bonds = match boundary {
            Boundary::Open => n_sites.saturating_sub(1),
            Boundary::Periodic => n_sites,
        };
        Self::new(n_sites, boundary, vec![onsite; n_sites], vec![bond; n_bonds])
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn onsite(&self, n: usize) -> &CMatrix {
        &self.onsite[n]
    }

    pub fn bonds(&self) -> &[Vec<BondTerm>] {
        &self.bonds
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn with_shifts(mut self, shifts: Vec<f64>) -> Result<Self> {
        if shifts.len() != self.n_sites {
            return Err(Error::DimensionMismatch { expected: self.n_sites, found: shifts.len() });
        }
        self.shifts = shifts;
        Ok(self)
    }

    fn check_site(&self, n: usize) -> Result<()> {
        if n >= self.n_sites {
            return Err(Error::SiteOutOfRange { site: n, n_sites: self.n_sites });
        }
        Ok(())
    }

    fn bond_sites(&self, b: usize) -> (usize, usize) {
        (b, (b + 1) % self.n_sites)
    }

    /// Bonds with `n` as an endpoint.
    fn bonds_at(&self, n: usize) -> Vec<usize> {
        let mut out = Vec::new();
        match self.boundary {
            Boundary::Open => {
                if n > 0 {
                    out.push(n - 1);
                }
                if n + 1 < self.n_sites {
                    out.push(n);
                }
            }
            Boundary::Periodic => {
                out.push((n + self.n_sites - 1) % self.n_sites);
                out.push(n);
            }
        }
        out
    }

    /// Chain distance, wrapping for periodic boundaries.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        match self.boundary {
            Boundary::Open => d,
            Boundary::Periodic => d.min(self.n_sites - d),
        }
    }

    pub fn density(&self, n: usize) -> Result<EnergyDensityTerm> {
        self.check_site(n)?;
        let mut op = LocalSum::from(LocalOperator::single(n, self.onsite[n].clone())?, self.n_sites);
        for b in self.bonds_at(n) {
            let (l, r) = self.bond_sites(b);
            for t in &self.bonds[b] {
                if t.coupling != 0.0 {
                    op.push(LocalOperator::two_site(l, &(&t.left * c(0.5 * t.coupling)), r, &t.right)?)?;
                }
            }
        }
        op.add_constant(-self.shifts[n]);
        Ok(EnergyDensityTerm { site: n, operator: op })
    }

    pub fn densities(&self) -> Result<Vec<EnergyDensityTerm>> {
        (0..self.n_sites).map(|n| self.density(n)).collect()
    }

    pub fn hamiltonian(&self) -> Result<LocalSum> {
        let mut h = LocalSum::new(self.n_sites);
        for t in self.densities()? {
            h.extend(&t.operator)?;
        }
        Ok(h)
    }

    /// Sites `n−1, n, n+1` that exist.
    pub fn window(&self, n: usize) -> Vec<usize> {
        let mut w = vec![n];
        match self.boundary {
            Boundary::Open => {
                if n > 0 {
                    w.push(n - 1);
                }
                if n + 1 < self.n_sites {
                    w.push(n + 1);
                }
            }
            Boundary::Periodic => {
                w.push((n + self.n_sites - 1) % self.n_sites);
                w.push((n + 1) % self.n_sites);
            }
        }
        w.sort_unstable();
        w.dedup();
        w
    }

    /// `Σ_{m ∈ window(n)} T_m`.
    pub fn local_hamiltonian(&self, n: usize) -> Result<LocalSum> {
        self.check_site(n)?;
        let mut h = LocalSum::new(self.n_sites);
        for m in self.window(n) {
            h.extend(&self.density(m)?.operator)?;
        }
        Ok(h)
    }

    /// Shifts every `T_n` so its ground-state expectation vanishes.
    pub fn normalize(&self, opts: &EigenOptions) -> Result<NormalizedChain> {
        let h = self.hamiltonian()?;
        let gs = ground_state_with(&h, opts)?;
        if gs.degenerate {
            return Err(Error::DegenerateGroundState { gap: gs.gap });
        }
        let mut shifts = self.shifts.clone();
        let mut applied = Vec::with_capacity(self.n_sites);
        for (n, t) in self.densities()?.iter().enumerate() {
            let e = gs.state.expectation_real(&t.operator)?;
            shifts[n] += e;
            applied.push(e);
        }
        let model = self.clone().with_shifts(shifts)?;
        NormalizedChain::new(model, gs, applied)
    }
}

/// A chain whose densities vanish on its (unique) ground state.
#[derive(Debug, Clone)]
pub struct NormalizedChain {
    model: ChainModel,
    ground: GroundState,
    densities: Vec<EnergyDensityTerm>,
    hamiltonian: LocalSum,
    applied_shifts: Vec<f64>,
}

/// Tolerance on the normalization conditions.
pub const TOL_NORMALIZED: f64 = 1e-9;

impl NormalizedChain {
    fn new(model: ChainModel, mut ground: GroundState, applied_shifts: Vec<f64>) -> Result<Self> {
        let densities = model.densities()?;
        let hamiltonian = model.hamiltonian()?;
        for t in &densities {
            let e = ground.state.expectation_real(&t.operator)?;
            if e.abs() > TOL_NORMALIZED {
                return Err(Error::Invariant(format!("<g|T_{}|g> = {e:e} after normalization", t.site)));
            }
        }
        ground.energy -= applied_shifts.iter().sum::<f64>();
        let e0 = ground.state.expectation_real(&hamiltonian)?;
        if e0.abs() > TOL_NORMALIZED || ground.energy < -TOL_NORMALIZED {
            return Err(Error::Invariant(format!(
                "ground energy {e0:e} (eigenvalue {:e}) after normalization",
                ground.energy
            )));
        }
        Ok(Self { model, ground, densities, hamiltonian, applied_shifts })
    }

    pub fn model(&self) -> &ChainModel {
        &self.model
    }

    pub fn n_sites(&self) -> usize {
        self.model.n_sites
    }

    pub fn ground(&self) -> &GroundState {
        &self.ground
    }

    pub fn state(&self) -> &StateVector {
        &self.ground.state
    }

    pub fn densities(&self) -> &[EnergyDensityTerm] {
        &self.densities
    }

    pub fn hamiltonian(&self) -> &LocalSum {
        &self.hamiltonian
    }

    /// `ε_n` subtracted by the last normalization.
    pub fn applied_shifts(&self) -> &[f64] {
        &self.applied_shifts
    }

    /// Lowest eigenvalue of `T_n` and an eigenvector, with entanglement diagnostics.
    pub fn negative_density_witness(&self, n: usize) -> Result<Witness> {
        self.model.check_site(n)?;
        let t = &self.densities[n];
        let sites = t.support();
        let local = t.operator.matrix_on(&sites)?;
        let (w, v) = crate::quantum::linalg::eigh(&local)?;
        let n_sites = self.n_sites();
        let mut amps = CVector::zeros(1 << n_sites);
        for (i, off) in local_offsets(&sites, n_sites).into_iter().enumerate() {
            amps[off] = v[(i, 0)];
        }
        let state = StateVector::new(n_sites, amps)?;
        let witness_energy = state.expectation_real(&t.operator)?;

        let g = self.ground.state.amplitudes();
        let tg = t.operator.apply(g);
        let mean = g.dotc(&tg).re;
        let eigen_defect = (&tg - g * c(mean)).norm();

        let mut factorization_defect: Option<f64> = None;
        for m in (0..n_sites).filter(|&m| self.model.distance(n, m) > 1) {
            for p in [pauli_x(), pauli_y(), pauli_z()] {
                let o = LocalOperator::single(m, p)?;
                let og = o.apply_to(g, n_sites)?;
                let d = (tg.dotc(&og) - c(mean) * g.dotc(&og)).norm();
                factorization_defect = Some(factorization_defect.map_or(d, |x: f64| x.max(d)));
            }
        }
        Ok(Witness {
            site: n,
            epsilon_minus: w[0],
            state,
            witness_energy,
            eigen_defect,
            factorization_defect,
        })
    }
}

#[derive(Debug, Clone)]
pub struct Witness {
    pub site: usize,
    /// Lowest eigenvalue of `T_n`.
    pub epsilon_minus: f64,
    pub state: StateVector,
    /// `⟨w|T_n|w⟩`.
    pub witness_energy: f64,
    /// `‖T_n|g⟩ − ⟨T_n⟩|g⟩‖`; zero iff `|g⟩` is an eigenstate of `T_n`.
    pub eigen_defect: f64,
    /// Largest `|⟨T_n O_m⟩ − ⟨T_n⟩⟨O_m⟩|` over Pauli probes with `|n − m| > 1`.
    pub factorization_defect: Option<f64>,
}

impl Witness {
    pub fn entangled(&self) -> bool {
        self.factorization_defect.is_some_and(|d| d > crate::TOL_IDENTITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::pauli_i;

    fn decoupled(n: usize) -> ChainModel {
        ChainModel::uniform(n, Boundary::Open, pauli_z() + pauli_i(), vec![]).unwrap()
    }

    #[test]
    fn densities_sum_to_hamiltonian() {
        let m = ChainModel::uniform(
            4,
            Boundary::Periodic,
            pauli_z() * c(-1.0),
            vec![BondTerm::new(-1.0, pauli_x(), pauli_x()).unwrap()],
        )
        .unwrap();
        let h = m.hamiltonian().unwrap().to_dense();
        let mut direct = CMatrix::zeros(16, 16);
        for n in 0..4 {
            direct -= crate::quantum::embed_local(&LocalOperator::single(n, pauli_z()).unwrap(), 4).unwrap();
            let b = LocalOperator::two_site(n, &pauli_x(), (n + 1) % 4, &pauli_x()).unwrap();
            direct -= crate::quantum::embed_local(&b, 4).unwrap();
        }
        assert!((h - direct).norm() < 1e-12);
    }

    #[test]
    fn windows_and_distance() {
        let m = decoupled(6);
        assert_eq!(m.window(0), vec![0, 1]);
        assert_eq!(m.window(3), vec![2, 3, 4]);
        assert_eq!(m.distance(0, 5), 5);
        let p = ChainModel::uniform(6, Boundary::Periodic, pauli_z(), vec![]).unwrap();
        assert_eq!(p.window(0), vec![0, 1, 5]);
        assert_eq!(p.distance(0, 5), 1);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ChainModel::new(3, Boundary::Open, vec![pauli_z(); 2], vec![vec![]; 2]).is_err());
        assert!(ChainModel::new(3, Boundary::Open, vec![pauli_z(); 3], vec![vec![]; 3]).is_err());
        assert!(ChainModel::new(2, Boundary::Periodic, vec![pauli_z(); 2], vec![vec![]; 2]).is_err());
        assert!(ChainModel::new(3, Boundary::Open, vec![pauli_y() * C64I; 3], vec![vec![]; 2]).is_err());
    }

    const C64I: crate::C64 = crate::C64::new(0.0, 1.0);

    #[test]
    fn decoupled_chain_needs_no_shift_and_has_no_negative_density() {
        let m = decoupled(5).normalize(&EigenOptions::default()).unwrap();
        assert!(m.applied_shifts().iter().all(|e| e.abs() < 1e-12));
        for n in 0..5 {
            let w = m.negative_density_witness(n).unwrap();
            assert!(w.epsilon_minus.abs() < 1e-12);
            assert!(!w.entangled());
        }
    }
}
