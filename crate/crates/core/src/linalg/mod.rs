//! Dense complex linear algebra used by the codec: Hermitian and unitary
//! eigendecompositions, the matrix logarithm/exponential pair, SVD,
//! nearest-unitary projection and Haar sampling.
//!
//! Everything here is self-contained and sized for desk-scale matrices
//! (N up to a few hundred).

mod eig;
mod functions;
mod matrix;
pub mod random;
mod svd;
pub mod text;

pub use eig::{
    hermitian_eig, unitary_eig, unitary_eig_with, HermitianEig, UnitaryEig, UnitaryEigOptions,
    DEFAULT_CLUSTER_TOLERANCE, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE,
};
pub use functions::{matrix_exp_skew, matrix_log_unitary, wrap_phase};
pub use matrix::ComplexMatrix;
pub use random::{haar_orthogonal, haar_unitary};
pub use svd::{nearest_unitary, svd, svd_full, SvdResult};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("data length mismatch: expected {expected}, got {got}")]
    DataLength { expected: usize, got: usize },
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not Hermitian: ||A - A^H||_F = {defect:.3e}")]
    NotHermitian { defect: f64 },
    #[error("matrix is not skew-Hermitian: ||X + X^H||_F = {defect:.3e}")]
    NotSkewHermitian { defect: f64 },
    #[error("matrix is not unitary: ||U^H U - I||_F = {defect:.3e} exceeds {tolerance:.3e}")]
    NotUnitary { defect: f64, tolerance: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:.3e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("rank-deficient input: smallest/largest singular value ratio {ratio:.3e}")]
    DegenerateProjection { ratio: f64 },
}

/// `‖A^H A − I‖_F`.
pub fn unitarity_defect(a: &ComplexMatrix) -> f64 {
    assert!(a.is_square(), "unitarity defect needs a square matrix");
    let mut gram = a.adjoint_mul(a).expect("square");
    for i in 0..a.rows() {
        gram[(i, i)] -= 1.0;
    }
    gram.frobenius_norm()
}

pub(crate) fn require_square(a: &ComplexMatrix) -> Result<usize, LinalgError> {
    if a.is_square() {
        Ok(a.rows())
    } else {
        Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        })
    }
}

/// Fails unless `‖U^H U − I‖_F ≤ tolerance`.
pub fn require_unitary(u: &ComplexMatrix, tolerance: f64) -> Result<(), LinalgError> {
    require_square(u)?;
    let defect = unitarity_defect(u);
    if defect <= tolerance {
        Ok(())
    } else {
        Err(LinalgError::NotUnitary { defect, tolerance })
    }
}
