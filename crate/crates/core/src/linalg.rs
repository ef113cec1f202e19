//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Reciprocal condition numbers below this are treated as singular.
pub const RCOND_THRESHOLD: f64 = 1e-12;

/// Reciprocal 2-norm condition number of a symmetric matrix.
pub fn rcond_symmetric(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let eig = m.clone().symmetric_eigenvalues();
    let max = eig.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
    if max == 0.0 || !max.is_finite() {
        0.0
    } else {
        min / max
    }
}

/// Reciprocal 2-norm condition number of a general square matrix.
pub fn rcond_general(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if max == 0.0 || !max.is_finite() {
        0.0
    } else {
        min / max
    }
}

/// Errors unless `m` is symmetric and well conditioned.
pub fn check_symmetric_invertible(m: &DMatrix<f64>, what: &str) -> Result<()> {
    let rcond = rcond_symmetric(m);
    if !(rcond >= RCOND_THRESHOLD) {
        return Err(Error::Singular {
            what: what.to_string(),
            rcond,
            threshold: RCOND_THRESHOLD,
        });
    }
    Ok(())
}

/// Solves `m x = rhs` for symmetric positive definite `m`, after a
/// conditioning check.
pub fn spd_solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    check_symmetric_invertible(m, what)?;
    let chol = m.clone().cholesky().ok_or_else(|| Error::Singular {
        what: what.to_string(),
        rcond: 0.0,
        threshold: RCOND_THRESHOLD,
    })?;
    Ok(chol.solve(rhs))
}

/// `v' m^{-1} v` for symmetric positive definite `m`.
pub fn inverse_quadratic_form(m: &DMatrix<f64>, v: &DVector<f64>, what: &str) -> Result<f64> {
    check_symmetric_invertible(m, what)?;
    let chol = m.clone().cholesky().ok_or_else(|| Error::Singular {
        what: what.to_string(),
        rcond: 0.0,
        threshold: RCOND_THRESHOLD,
    })?;
    // ||L^{-1} v||^2 is nonnegative by construction
    let w = chol
        .l_dirty()
        .solve_lower_triangular(v)
        .ok_or_else(|| Error::Numerical(format!("triangular solve failed for {what}")))?;
    Ok(w.norm_squared())
}

/// `(m + m') / 2`.
pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Inverse symmetric square root `m^{-1/2}` of a symmetric positive definite
/// matrix.
pub fn inverse_sqrt_spd(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    check_symmetric_invertible(m, what)?;
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
        return Err(Error::NotPositiveDefinite(what.to_string()));
    }
    let scale = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    Ok(&eig.eigenvectors * scale * eig.eigenvectors.transpose())
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, z| acc.max(z.norm()))
}
