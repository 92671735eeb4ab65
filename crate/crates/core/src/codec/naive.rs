//! Naive baseline: every entry as a real and an imaginary part.

use num_complex::Complex64;

use super::CodecError;
use crate::linalg::{nearest_unitary, ComplexMatrix};

/// Row-major, real and imaginary parts interleaved: `2N²` values.
pub fn naive_encode(u: &ComplexMatrix) -> Vec<f64> {
    u.as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Reshapes `2N²` values into an `N×N` matrix, optionally projecting onto the
/// nearest unitary.
pub fn naive_decode(values: &[f64], n: usize, project: bool) -> Result<ComplexMatrix, CodecError> {
    if values.len() != 2 * n * n {
        return Err(CodecError::Length {
            expected: 2 * n * n,
            got: values.len(),
        });
    }
    let data = values.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    let m = ComplexMatrix::new(n, n, data)?;
    if project {
        Ok(nearest_unitary(&m)?)
    } else {
        Ok(m)
    }
}
