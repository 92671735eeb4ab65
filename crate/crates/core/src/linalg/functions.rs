//! Principal matrix logarithm of a unitary matrix and exponential of a
//! skew-Hermitian one, both through eigendecompositions.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::eig::{hermitian_eig, unitary_eig};
use super::matrix::ComplexMatrix;
use super::{require_square, LinalgError};

const SKEW_INPUT_TOLERANCE: f64 = 1e-9;

/// Maps any finite angle into `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    // rem_euclid can round up to exactly 2π for tiny negative inputs.
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// `X = V diag(jφ) V^H` with `φ ∈ (−π, π]`; the result is exactly skew-Hermitian.
pub fn matrix_log_unitary(u: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let eig = unitary_eig(u)?;
    let d: Vec<Complex64> = eig.phases.iter().map(|&p| Complex64::new(0.0, p)).collect();
    Ok(ComplexMatrix::congruence_diag(&eig.eigenvectors, &d).skew_hermitian_part())
}

/// `exp(X)` for skew-Hermitian `X`, computed from the Hermitian matrix `−jX`.
pub fn matrix_exp_skew(x: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    let n = require_square(x)?;
    let norm = x.frobenius_norm();
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let defect = x.skew_hermitian_defect();
    if defect > SKEW_INPUT_TOLERANCE * norm {
        return Err(LinalgError::NotSkewHermitian { defect });
    }
    let h = x.scale(Complex64::new(0.0, -1.0)).hermitian_part();
    let eig = hermitian_eig(&h)?;
    let d: Vec<Complex64> = eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, l)).collect();
    Ok(ComplexMatrix::congruence_diag(&eig.eigenvectors, &d))
}
