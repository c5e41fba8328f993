use super::{c, CMatrix, CVector, Operator, C64};
use crate::{Error, Result, TOL_CONSTRUCT};

/// Normalized pure state of `n_sites` qubits; site 0 is the most significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(n_sites: usize, amplitudes: CVector) -> Result<Self> {
        check_len(n_sites, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > TOL_CONSTRUCT {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { n_sites, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm; fails on a zero vector.
    pub fn normalized(n_sites: usize, amplitudes: CVector) -> Result<Self> {
        check_len(n_sites, amplitudes.len())?;
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            n_sites,
            amplitudes: amplitudes / c(norm),
        })
    }

    pub fn basis(n_sites: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_sites;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index,
            });
        }
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0);
        Ok(Self {
            n_sites,
            amplitudes: v,
        })
    }

    /// Tensor product of single-qubit states, first entry on site 0.
    pub fn product(factors: &[[C64; 2]]) -> Result<Self> {
        let mut v = CVector::from_element(1, c(1.0));
        for f in factors {
            v = v.kronecker(&CVector::from_column_slice(f));
        }
        Self::normalized(factors.len(), v)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// |⟨self|other⟩|, insensitive to global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    /// ⟨ψ|O|ψ⟩.
    pub fn expectation(&self, op: &dyn Operator) -> Result<C64> {
        check_len(op.n_sites(), self.dim())?;
        Ok(self.amplitudes.dotc(&op.apply(&self.amplitudes)))
    }

    /// ⟨ψ|O|ψ⟩ for Hermitian `O`; the imaginary rounding residue is dropped.
    pub fn expectation_real(&self, op: &dyn Operator) -> Result<f64> {
        let e = self.expectation(op)?;
        debug_assert!(e.im.abs() < 1e-8 * (1.0 + e.re.abs()), "complex energy {e}");
        Ok(e.re)
    }

    /// Reduced density matrix on `keep` (in the given order), traced over the
    /// complement.
    pub fn reduced_density_matrix(&self, keep: &[usize]) -> Result<CMatrix> {
        reduced_density_of(&self.amplitudes, self.n_sites, keep)
    }
}

pub(crate) fn check_len(n_sites: usize, len: usize) -> Result<()> {
    let dim = 1usize
        .checked_shl(n_sites as u32)
        .ok_or(Error::TooLarge { n_sites, max: 62 })?;
    if len != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: len,
        });
    }
    Ok(())
}

/// `Tr_rest |v⟩⟨v|` for a possibly unnormalized vector.
pub(crate) fn reduced_density_of(v: &CVector, n_sites: usize, keep: &[usize]) -> Result<CMatrix> {
    check_len(n_sites, v.len())?;
    if keep.is_empty() {
        return Err(Error::EmptySubsystem);
    }
    let keep_mask = super::operator::support_mask(keep, n_sites)?;
    let offsets = super::operator::local_offsets(keep, n_sites);
    let k = offsets.len();
    let mut rho = CMatrix::zeros(k, k);
    for base in (0..v.len()).filter(|b| b & keep_mask == 0) {
        for (i, &oi) in offsets.iter().enumerate() {
            let ai = v[base | oi];
            if ai == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, &oj) in offsets.iter().enumerate() {
                rho[(i, j)] += ai * v[base | oj].conj();
            }
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{pauli_z, LocalOperator, LocalSum};

    #[test]
    fn rejects_unnormalized_and_wrong_length() {
        let v = CVector::from_vec(vec![c(1.0), c(1.0)]);
        assert!(matches!(
            StateVector::new(1, v.clone()),
            Err(Error::NotNormalized { .. })
        ));
        assert!(StateVector::normalized(1, v).is_ok());
        assert!(matches!(
            StateVector::new(2, CVector::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn plus_state_has_unit_sigma_z_on_up() {
        // |+⟩ here is the σ_z = +1 eigenstate, index 0.
        let up = StateVector::basis(1, 0).unwrap();
        let z = LocalSum::from(LocalOperator::new(vec![0], pauli_z()).unwrap(), 1);
        assert!((up.expectation_real(&z).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn product_state_marginal() {
        let s = StateVector::product(&[[c(1.0), c(0.0)], [c(0.0), c(1.0)]]).unwrap();
        let rho = s.reduced_density_matrix(&[1]).unwrap();
        assert!((rho[(1, 1)].re - 1.0).abs() < 1e-15);
        assert!(rho[(0, 0)].norm() < 1e-15);
    }
}
