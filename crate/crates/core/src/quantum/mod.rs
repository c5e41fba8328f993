//! Finite-dimensional quantum mechanics on qubit registers.

mod density;
mod eigen;
pub mod linalg;
mod measurement;
mod operator;
mod pauli;
pub mod random;
mod state;

pub use density::{von_neumann_entropy, DensityOperator};
pub use eigen::{
    ground_state, ground_state_with, lowest_eigenpairs_dense, time_evolve, EigenMethod,
    EigenOptions, GroundState, SpectralPropagator, DENSE_EVOLUTION_MAX_SITES,
};
pub use measurement::{
    apply_measurement, Branch, MeasurementRecord, PovmMeasurement, MAX_OUTCOMES, MIN_PROBABILITY,
};
pub use operator::{
    commutator_norm, embed_local, hermitize, DenseOperator, LocalOperator, LocalSum, Operator,
};
pub use pauli::{pauli_component, pauli_i, pauli_x, pauli_y, pauli_z, Pauli};
pub use state::StateVector;

pub(crate) use operator::local_offsets;
pub(crate) use state::reduced_density_of;

pub use num_complex::Complex64 as C64;

pub type CMatrix = nalgebra::DMatrix<C64>;
pub type CVector = nalgebra::DVector<C64>;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest absolute entry of `m - m†`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(m, &m.adjoint())
}

/// Largest absolute entry of `m†m - I`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    max_abs_diff(&(m.adjoint() * m), &CMatrix::identity(m.nrows(), m.ncols()))
}

/// Kronecker product with `a` as the more significant factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}
