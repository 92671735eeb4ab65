//! Givens-rotation baseline: a unitary matrix as `N(N−1)/2` rotation
//! amplitudes, `N(N−1)/2` rotation phases and `N` diagonal phases.
//!
//! Column by column, the entries on and below the diagonal are made real and
//! non-negative by row phase factors, then zeroed from the top down by real
//! plane rotations of rows `(c, r)`. Parameters are stored in that order, so
//! pair `(c, r)` follows the row-major upper-triangle enumeration.

use num_complex::Complex64;

use super::{CodecError, UNITARY_TOLERANCE};
use crate::linalg::{require_unitary, wrap_phase, ComplexMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct GivensParams {
    pub n: usize,
    /// `cos ψ` per rotation, in `[0, 1]`.
    pub amplitudes: Vec<f64>,
    /// Phase removed from row `r` before the rotations of column `c`, in `(−π, π]`.
    pub rotation_phases: Vec<f64>,
    /// Diagonal phases, in `(−π, π]`.
    pub diagonal_phases: Vec<f64>,
}

impl GivensParams {
    pub fn new(
        n: usize,
        amplitudes: Vec<f64>,
        rotation_phases: Vec<f64>,
        diagonal_phases: Vec<f64>,
    ) -> Result<Self, CodecError> {
        let pairs = n * n.saturating_sub(1) / 2;
        for (len, expected) in [
            (amplitudes.len(), pairs),
            (rotation_phases.len(), pairs),
            (diagonal_phases.len(), n),
        ] {
            if len != expected {
                return Err(CodecError::Length { expected, got: len });
            }
        }
        let all = amplitudes.iter().chain(&rotation_phases).chain(&diagonal_phases);
        if n == 0 || all.clone().any(|v| !v.is_finite()) {
            return Err(CodecError::NonFinite);
        }
        Ok(Self {
            n,
            amplitudes,
            rotation_phases,
            diagonal_phases,
        })
    }

    /// Amplitudes, rotation phases, then diagonal phases: `N²` values.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n * self.n);
        v.extend_from_slice(&self.amplitudes);
        v.extend_from_slice(&self.rotation_phases);
        v.extend_from_slice(&self.diagonal_phases);
        v
    }

    /// Inverse of [`GivensParams::to_vec`]; values are taken as-is.
    pub fn from_vec(n: usize, values: &[f64]) -> Result<Self, CodecError> {
        let pairs = n * n.saturating_sub(1) / 2;
        if values.len() != n * n {
            return Err(CodecError::Length {
                expected: n * n,
                got: values.len(),
            });
        }
        Self::new(
            n,
            values[..pairs].to_vec(),
            values[pairs..2 * pairs].to_vec(),
            values[2 * pairs..].to_vec(),
        )
    }

    /// Amplitudes clamped to `[0, 1]`, phases wrapped to `(−π, π]`.
    pub fn clamped(&self) -> Self {
        Self {
            n: self.n,
            amplitudes: self.amplitudes.iter().map(|a| a.clamp(0.0, 1.0)).collect(),
            rotation_phases: self.rotation_phases.iter().map(|&p| wrap_phase(p)).collect(),
            diagonal_phases: self.diagonal_phases.iter().map(|&p| wrap_phase(p)).collect(),
        }
    }
}

fn phase_of(z: Complex64) -> f64 {
    if z.norm() == 0.0 {
        0.0
    } else {
        wrap_phase(z.arg())
    }
}

fn scale_row(a: &mut ComplexMatrix, r: usize, s: Complex64) {
    for z in a.row_mut(r) {
        *z *= s;
    }
}

/// `row_c ← cos·row_c + sin·row_r`, `row_r ← −sin·row_c + cos·row_r`.
fn rotate_rows(a: &mut ComplexMatrix, c: usize, r: usize, cos: f64, sin: f64) {
    for j in 0..a.cols() {
        let x = a[(c, j)];
        let y = a[(r, j)];
        a[(c, j)] = x * cos + y * sin;
        a[(r, j)] = y * cos - x * sin;
    }
}

pub fn givens_encode(u: &ComplexMatrix) -> Result<GivensParams, CodecError> {
    let n = u.rows();
    require_unitary(u, UNITARY_TOLERANCE * n as f64)?;
    let pairs = n * (n - 1) / 2;
    let mut amplitudes = Vec::with_capacity(pairs);
    let mut rotation_phases = Vec::with_capacity(pairs);
    let mut diagonal_phases = vec![0.0; n];
    let mut a = u.clone();

    for c in 0..n.saturating_sub(1) {
        for r in c..n {
            let theta = phase_of(a[(r, c)]);
            scale_row(&mut a, r, Complex64::from_polar(1.0, -theta));
            if r == c {
                diagonal_phases[c] = theta;
            } else {
                rotation_phases.push(theta);
            }
        }
        for r in c + 1..n {
            let psi = a[(r, c)].re.max(0.0).atan2(a[(c, c)].re.max(0.0));
            let (sin, cos) = psi.sin_cos();
            amplitudes.push(cos);
            rotate_rows(&mut a, c, r, cos, sin);
        }
    }
    diagonal_phases[n - 1] = phase_of(a[(n - 1, n - 1)]);
    GivensParams::new(n, amplitudes, rotation_phases, diagonal_phases)
}

/// Rebuilds the unitary matrix; parameters are clamped and wrapped first.
pub fn givens_decode(params: &GivensParams) -> ComplexMatrix {
    let p = params.clamped();
    let n = p.n;
    let mut a = ComplexMatrix::identity(n);
    a[(n - 1, n - 1)] = Complex64::from_polar(1.0, p.diagonal_phases[n - 1]);

    // Parameter index of the first rotation in column c.
    let start = |c: usize| c * (2 * n - c - 1) / 2;
    for c in (0..n.saturating_sub(1)).rev() {
        let base = start(c);
        for r in (c + 1..n).rev() {
            let cos = p.amplitudes[base + r - c - 1];
            let sin = (1.0 - cos * cos).max(0.0).sqrt();
            // Inverse rotation: transpose of the forward one.
            rotate_rows(&mut a, c, r, cos, -sin);
        }
        scale_row(&mut a, c, Complex64::from_polar(1.0, p.diagonal_phases[c]));
        for r in c + 1..n {
            let theta = p.rotation_phases[base + r - c - 1];
            scale_row(&mut a, r, Complex64::from_polar(1.0, theta));
        }
    }
    a
}
