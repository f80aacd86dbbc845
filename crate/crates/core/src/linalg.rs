//! Symmetric inverse square root used to decorrelate the candidate statistics.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

pub const DEFAULT_EIG_FLOOR: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-8;

/// `V diag(max(lambda, floor)^(-1/2)) V^T` for a symmetric matrix.
pub fn matrix_inv_sqrt(m: &DMatrix<f64>, eig_floor: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::Domain(format!("matrix is {}x{}, expected square", m.nrows(), m.ncols())));
    }
    if !(eig_floor.is_finite() && eig_floor > 0.0) {
        return Err(Error::Domain("eigenvalue floor must be positive".into()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL {
                return Err(Error::Domain(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    let eig = SymmetricEigen::new(m.clone());
    let inv_sqrt = eig.eigenvalues.map(|l| l.max(eig_floor).sqrt().recip());
    let v = &eig.eigenvectors;
    let r = v * DMatrix::from_diagonal(&inv_sqrt) * v.transpose();
    // exact symmetry of the result
    Ok((&r + r.transpose()) * 0.5)
}
