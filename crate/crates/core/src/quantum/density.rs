use super::operator::local_offsets;
use super::{hermiticity_defect, hermitize, CMatrix, LocalOperator, StateVector, C64};
use crate::{Error, Result, TOL_CONSTRUCT};

/// Lowest admissible eigenvalue of a density operator.
const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this carry no entropy.
const ENTROPY_CUTOFF: f64 = 1e-14;

/// Mixed state on an ordered subset of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    support: Vec<usize>,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(support: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySubsystem);
        }
        let dim = 1usize << support.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        let defect = hermiticity_defect(&matrix);
        if defect > TOL_CONSTRUCT {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let matrix = hermitize(&matrix)?;
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > TOL_CONSTRUCT {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let rho = Self { support, matrix };
        let min = rho.eigenvalues()[0];
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` on all sites of the register.
    pub fn from_pure(state: &StateVector) -> Self {
        let v = state.amplitudes();
        Self {
            support: (0..state.n_sites()).collect(),
            matrix: v * v.adjoint(),
        }
    }

    /// Reduced state of a pure state, without forming the full projector.
    pub fn reduced_from_pure(state: &StateVector, keep: &[usize]) -> Result<Self> {
        let m = state.reduced_density_matrix(keep)?;
        Self::new(keep.to_vec(), m)
    }

    /// Convex mixture `Σ w_i ρ_i` of states on the same support.
    pub fn mixture(parts: &[(f64, DensityOperator)]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptySubsystem)?;
        let mut m = CMatrix::zeros(first.1.matrix.nrows(), first.1.matrix.ncols());
        for (w, rho) in parts {
            if rho.support != first.1.support {
                return Err(Error::InvalidSupport("mixture of different supports".into()));
            }
            m += &rho.matrix * C64::new(*w, 0.0);
        }
        Self::new(first.1.support.clone(), m)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        super::linalg::eigh(&self.matrix)
            .map(|(w, _)| w)
            .expect("square Hermitian matrix")
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `Tr[ρ O]`; the support of `op` must lie inside this state's support.
    pub fn expectation(&self, op: &LocalOperator) -> Result<C64> {
        let m = op.embed_into(&self.support)?;
        Ok((&self.matrix * m).trace())
    }

    /// Trace out every site not in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        if keep.is_empty() {
            return Err(Error::EmptySubsystem);
        }
        let n = self.support.len();
        let mut keep_pos = Vec::with_capacity(keep.len());
        for s in keep {
            let p = self.support.iter().position(|x| x == s).ok_or_else(|| {
                Error::InvalidSupport(format!("site {s} not in support {:?}", self.support))
            })?;
            if keep_pos.contains(&p) {
                return Err(Error::InvalidSupport(format!("site {s} repeated")));
            }
            keep_pos.push(p);
        }
        let rest_pos: Vec<usize> = (0..n).filter(|p| !keep_pos.contains(p)).collect();
        let ko = local_offsets(&keep_pos, n);
        let ro = local_offsets(&rest_pos, n);
        let k = ko.len();
        let mut out = CMatrix::zeros(k, k);
        for (i, &oi) in ko.iter().enumerate() {
            for (j, &oj) in ko.iter().enumerate() {
                out[(i, j)] = ro.iter().map(|&r| self.matrix[(oi | r, oj | r)]).sum();
            }
        }
        Self::new(keep.to_vec(), out)
    }
}

/// `-Tr[ρ ln ρ]` in nats.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&p| p > ENTROPY_CUTOFF)
        .map(|p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}
