//! Ground states and unitary time evolution.
//!
//! Small registers are diagonalized densely. Larger ones use a Lanczos
//! iteration with full reorthogonalization and explicit restarts, driven only
//! by [`Operator::apply`].

use super::{c, hermitize, CMatrix, CVector, Operator, StateVector, C64};
use crate::{Error, Result, TOL_EIGEN_RESIDUAL, TOL_IDENTITY};
use super::linalg::{eigh, eigh_real};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Largest register accepted by [`time_evolve`].
pub const DENSE_EVOLUTION_MAX_SITES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Registers up to this many sites are diagonalized densely.
    pub dense_max_sites: usize,
    pub residual_tol: f64,
    /// Gap below which the ground state is flagged degenerate.
    pub degeneracy_gap: f64,
    pub krylov_max_dim: usize,
    pub max_restarts: usize,
    /// Seed of the Lanczos start vector.
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            dense_max_sites: 8,
            residual_tol: TOL_EIGEN_RESIDUAL,
            degeneracy_gap: 1e-8,
            krylov_max_dim: 300,
            max_restarts: 40,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    Dense,
    Krylov,
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// Distance to the next eigenvalue (infinite for a 1-dimensional space).
    pub gap: f64,
    pub degenerate: bool,
    /// `‖Hv − Ev‖`.
    pub residual: f64,
    pub method: EigenMethod,
}

pub fn ground_state(h: &dyn Operator) -> Result<GroundState> {
    ground_state_with(h, &EigenOptions::default())
}

pub fn ground_state_with(h: &dyn Operator, opts: &EigenOptions) -> Result<GroundState> {
    let defect = h.hermiticity_defect();
    if defect > TOL_IDENTITY {
        return Err(Error::NotHermitian { deviation: defect });
    }
    let n = h.n_sites();
    let (energy, vec, gap, method) = if n <= opts.dense_max_sites {
        let (ev, vecs) = lowest_eigenpairs_dense(&h.to_dense())?;
        let gap = ev.get(1).map_or(f64::INFINITY, |e1| e1 - ev[0]);
        (ev[0], vecs.column(0).into_owned(), gap, EigenMethod::Dense)
    } else {
        let dim = h.dim();
        let apply = |v: &CVector| h.apply(v);
        let start = random_start(dim, opts.seed);
        let (e0, v0, _) = lanczos_lowest(&apply, &start, &[], opts.residual_tol, opts)?;
        let gap = if dim > 1 {
            let start1 = random_start(dim, opts.seed.wrapping_add(1));
            let (e1, _, _) = lanczos_lowest(&apply, &start1, std::slice::from_ref(&v0), 1e-6, opts)?;
            e1 - e0
        } else {
            f64::INFINITY
        };
        (e0, v0, gap, EigenMethod::Krylov)
    };
    let residual = (h.apply(&vec) - &vec * c(energy)).norm();
    if residual > opts.residual_tol {
        return Err(Error::NoConvergence {
            residual,
            iterations: 0,
        });
    }
    if gap < opts.degeneracy_gap {
        log::warn!("ground state is degenerate to within {gap:.3e}");
    }
    Ok(GroundState {
        energy,
        state: StateVector::normalized(n, vec)?,
        gap,
        degenerate: gap < opts.degeneracy_gap,
        residual,
        method,
    })
}

/// Full Hermitian eigendecomposition, eigenvalues ascending and eigenvectors
/// as matching columns.
pub fn lowest_eigenpairs_dense(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    eigh(&hermitize(m)?)
}

fn random_start(dim: usize, seed: u64) -> CVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CVector::from_fn(dim, |_, _| {
        C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    })
}

fn project_out(w: &mut CVector, basis: &[CVector]) {
    for b in basis {
        let overlap = b.dotc(w);
        w.axpy(-overlap, b, c(1.0));
    }
}

/// Lowest eigenpair of `P A P`, `P` projecting out `deflate` (orthonormal).
/// Returns (eigenvalue, unit eigenvector, total Lanczos steps).
fn lanczos_lowest(
    apply: &dyn Fn(&CVector) -> CVector,
    start: &CVector,
    deflate: &[CVector],
    tol: f64,
    opts: &EigenOptions,
) -> Result<(f64, CVector, usize)> {
    let dim = start.len();
    let max_dim = opts.krylov_max_dim.min(dim - deflate.len()).max(1);
    let mut v = start.clone();
    project_out(&mut v, deflate);
    let mut steps = 0;
    let mut last_residual = f64::INFINITY;

    for _ in 0..=opts.max_restarts {
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::NoConvergence {
                residual: f64::NAN,
                iterations: steps,
            });
        }
        v /= c(norm);
        let mut basis: Vec<CVector> = vec![v.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut ritz: Option<(f64, Vec<f64>)> = None;

        for j in 0..max_dim {
            let mut w = apply(&basis[j]);
            project_out(&mut w, deflate);
            let alpha = basis[j].dotc(&w).re;
            alphas.push(alpha);
            // Full reorthogonalization, applied twice.
            project_out(&mut w, &basis);
            project_out(&mut w, &basis);
            project_out(&mut w, deflate);
            let beta = w.norm();
            steps += 1;

            let at_end = j + 1 == max_dim || beta < 1e-13;
            if at_end || (j + 1) % 20 == 0 {
                let (theta, s) = tridiagonal_lowest(&alphas, &betas);
                let estimate = beta * s.last().map_or(0.0, |x| x.abs());
                ritz = Some((theta, s));
                if estimate < 0.1 * tol || at_end {
                    break;
                }
            }
            betas.push(beta);
            basis.push(w / c(beta));
        }

        let (theta, s) = ritz.expect("at least one Ritz evaluation");
        let mut y = CVector::zeros(dim);
        for (coef, b) in s.iter().zip(&basis) {
            y.axpy(c(*coef), b, c(1.0));
        }
        project_out(&mut y, deflate);
        y /= c(y.norm());
        let mut ay = apply(&y);
        project_out(&mut ay, deflate);
        let residual = (ay - &y * c(theta)).norm();
        last_residual = residual;
        if residual < tol {
            return Ok((theta, y, steps));
        }
        v = y;
    }
    Err(Error::NoConvergence {
        residual: last_residual,
        iterations: steps,
    })
}

/// Lowest eigenpair of the real symmetric tridiagonal matrix (alphas, betas).
fn tridiagonal_lowest(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let m = alphas.len();
    let t = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let (w, v) = eigh_real(&t).expect("tridiagonal eigensolve");
    (w[0], v.column(0).iter().copied().collect())
}

/// Cached eigendecomposition of a Hermitian operator for repeated `e^{-iHt}`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    n_sites: usize,
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl SpectralPropagator {
    pub fn new(h: &dyn Operator) -> Result<Self> {
        let n = h.n_sites();
        if n > DENSE_EVOLUTION_MAX_SITES {
            return Err(Error::TooLarge {
                n_sites: n,
                max: DENSE_EVOLUTION_MAX_SITES,
            });
        }
        let defect = h.hermiticity_defect();
        if defect > TOL_IDENTITY {
            return Err(Error::NotHermitian { deviation: defect });
        }
        let (energies, vectors) = lowest_eigenpairs_dense(&h.to_dense())?;
        Ok(Self {
            n_sites: n,
            energies,
            vectors,
        })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// `e^{-iHt}|ψ⟩`.
    pub fn evolve(&self, state: &StateVector, t: f64) -> Result<StateVector> {
        if state.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: state.n_sites(),
            });
        }
        let mut coeffs = self.vectors.adjoint() * state.amplitudes();
        for (cf, e) in coeffs.iter_mut().zip(&self.energies) {
            *cf *= C64::from_polar(1.0, -e * t);
        }
        StateVector::normalized(self.n_sites, &self.vectors * coeffs)
    }
}

/// `e^{-iHt}|ψ⟩` via a dense spectral decomposition.
pub fn time_evolve(state: &StateVector, h: &dyn Operator, t: f64) -> Result<StateVector> {
    SpectralPropagator::new(h)?.evolve(state, t)
}
