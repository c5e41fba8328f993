use super::{c, CMatrix, LocalOperator, C64};
use crate::{Error, Result, TOL_CONSTRUCT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => pauli_i(),
            Pauli::X => pauli_x(),
            Pauli::Y => pauli_y(),
            Pauli::Z => pauli_z(),
        }
    }

    pub fn from_char(ch: char) -> Option<Self> {
        match ch.to_ascii_lowercase() {
            'i' => Some(Pauli::I),
            'x' => Some(Pauli::X),
            'y' => Some(Pauli::Y),
            'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

pub fn pauli_i() -> CMatrix {
    CMatrix::identity(2, 2)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[c(0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), c(0.0)],
    )
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

/// `u · σ` at `site` for a real unit vector `u`.
pub fn pauli_component(u: [f64; 3], site: usize) -> Result<LocalOperator> {
    let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > TOL_CONSTRUCT {
        return Err(Error::NonUnitVector { norm });
    }
    let m = pauli_x() * c(u[0]) + pauli_y() * c(u[1]) + pauli_z() * c(u[2]);
    LocalOperator::new(vec![site], m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{hermiticity_defect, max_abs_diff};

    #[test]
    fn axis_directions_give_pauli_matrices() {
        let z = pauli_component([0.0, 0.0, 1.0], 0).unwrap();
        assert!(max_abs_diff(z.matrix(), &pauli_z()) < 1e-15);
        let x = pauli_component([1.0, 0.0, 0.0], 3).unwrap();
        assert!(max_abs_diff(x.matrix(), &pauli_x()) < 1e-15);
        assert_eq!(x.support(), &[3]);
    }

    #[test]
    fn diagonal_direction_is_traceless_involution() {
        let s = 1.0 / 3f64.sqrt();
        let op = pauli_component([s, s, s], 0).unwrap();
        let m = op.matrix();
        assert!(hermiticity_defect(m) < 1e-15);
        assert!(m.trace().norm() < 1e-15);
        assert!(max_abs_diff(&(m * m), &pauli_i()) < 1e-12);
        let eig = crate::quantum::linalg::eigh(m).unwrap().0;
        let mut ev: Vec<f64> = eig.to_vec();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_unit_direction() {
        assert!(matches!(
            pauli_component([1.0, 1.0, 0.0], 0),
            Err(Error::NonUnitVector { .. })
        ));
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
        let ixy = &x * &y;
        assert!(max_abs_diff(&ixy, &(z * C64::new(0.0, 1.0))) < 1e-15);
    }
}
