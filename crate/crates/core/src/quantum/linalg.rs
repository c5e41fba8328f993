//! Hermitian eigendecomposition backed by LAPACK.

use super::{CMatrix, C64};
use crate::{Error, Result};
use nalgebra::DMatrix;

/// Ascending eigenvalues and matching orthonormal eigenvectors (columns) of
/// a Hermitian matrix. Only the lower triangle is read.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let mut a: Vec<C64> = m.as_slice().to_vec();
    let mut w = vec![0.0; n];
    let mut info = 0;
    let n32 = n as i32;
    let mut work = vec![C64::new(0.0, 0.0)];
    let mut rwork = vec![0.0];
    let mut iwork = vec![0];
    unsafe {
        lapack::zheevd(b'V', b'L', n32, &mut a, n32, &mut w, &mut work, -1, &mut rwork, -1, &mut iwork, -1, &mut info);
    }
    lapack_status("zheevd workspace query", info)?;
    let lwork = work[0].re as usize;
    let lrwork = rwork[0] as usize;
    let liwork = iwork[0] as usize;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1)];
    let mut rwork = vec![0.0; lrwork.max(1)];
    let mut iwork = vec![0; liwork.max(1)];
    unsafe {
        lapack::zheevd(
            b'V', b'L', n32, &mut a, n32, &mut w, &mut work, lwork as i32, &mut rwork, lrwork as i32,
            &mut iwork, liwork as i32, &mut info,
        );
    }
    lapack_status("zheevd", info)?;
    Ok((w, CMatrix::from_vec(n, n, a)))
}

/// Ascending eigenvalues and eigenvectors of a real symmetric matrix.
pub fn eigh_real(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.ncols() });
    }
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let mut a = m.as_slice().to_vec();
    let mut w = vec![0.0; n];
    let mut info = 0;
    let n32 = n as i32;
    let mut work = vec![0.0];
    let mut iwork = vec![0];
    unsafe {
        lapack::dsyevd(b'V', b'L', n32, &mut a, n32, &mut w, &mut work, -1, &mut iwork, -1, &mut info);
    }
    lapack_status("dsyevd workspace query", info)?;
    let lwork = work[0] as usize;
    let liwork = iwork[0] as usize;
    let mut work = vec![0.0; lwork.max(1)];
    let mut iwork = vec![0; liwork.max(1)];
    unsafe {
        lapack::dsyevd(b'V', b'L', n32, &mut a, n32, &mut w, &mut work, lwork as i32, &mut iwork, liwork as i32, &mut info);
    }
    lapack_status("dsyevd", info)?;
    Ok((w, DMatrix::from_vec(n, n, a)))
}

fn lapack_status(routine: &str, info: i32) -> Result<()> {
    if info == 0 {
        Ok(())
    } else {
        Err(Error::Invariant(format!("{routine} failed with info = {info}")))
    }
}
