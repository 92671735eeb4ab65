//! Encoder and decoder between unitary matrices and bounded real coordinates,
//! plus the two baseline codecs used for comparison.
//!
//! `encode` takes the principal logarithm and reads off its basis coordinates;
//! `decode` rebuilds the skew-Hermitian matrix and exponentiates it, so its
//! output is unitary for any finite input.

mod givens;
mod naive;

pub use givens::{givens_decode, givens_encode, GivensParams};
pub use naive::{naive_decode, naive_encode};

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{coords_from_skew, skew_from_coords, CoordVector, Variant};
use crate::linalg::{matrix_exp_skew, require_unitary, unitary_eig, ComplexMatrix, LinalgError, UnitaryEig};

/// Unitarity tolerance of the encoders, multiplied by `N`.
pub const UNITARY_TOLERANCE: f64 = 1e-8;
const SYMMETRY_TOLERANCE: f64 = 1e-8;
const REAL_TOLERANCE: f64 = 1e-9;
/// A rotation eigenphase this close to `π` has no real principal logarithm.
const BRANCH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("structure violation: {0}")]
    Structure(String),
    #[error("invalid variant: {0}")]
    InvalidVariant(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("index {index} out of range 1..={count}")]
    Index { index: usize, count: usize },
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("rotation has an eigenvalue at -1 (phase {phase:.12}); its principal logarithm is not real")]
    BranchDegeneracy { phase: f64 },
}

impl CodecError {
    /// True for errors caused by the input not being unitary.
    pub fn is_not_unitary(&self) -> bool {
        matches!(self, CodecError::Linalg(LinalgError::NotUnitary { .. }))
    }
}

/// `√N·π`, the largest magnitude any Full coordinate can take.
pub fn coefficient_bound(n: usize) -> f64 {
    (n as f64).sqrt() * PI
}

fn log_from_eig(eig: &UnitaryEig) -> ComplexMatrix {
    let d: Vec<Complex64> = eig.phases.iter().map(|&p| Complex64::new(0.0, p)).collect();
    ComplexMatrix::congruence_diag(&eig.eigenvectors, &d).skew_hermitian_part()
}

/// Encodes a unitary matrix into the coordinates of `variant`.
pub fn encode(u: &ComplexMatrix, variant: &Variant) -> Result<CoordVector, CodecError> {
    let n = u.rows();
    if !u.is_square() {
        return Err(LinalgError::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        }
        .into());
    }
    variant.validate(n)?;
    require_unitary(u, UNITARY_TOLERANCE * n as f64)?;
    match variant {
        Variant::Full => {
            let x = log_from_eig(&unitary_eig(u)?);
            coords_from_skew(&x, variant)
        }
        Variant::SpecialUnitary => {
            let x = traceless_log(&remove_global_phase(u)?)?;
            coords_from_skew(&x, variant)
        }
        Variant::Symmetric => {
            let defect = u.symmetry_defect();
            if defect > SYMMETRY_TOLERANCE {
                return Err(CodecError::Structure(format!(
                    "matrix is not symmetric (defect {defect:.3e})"
                )));
            }
            let x = log_from_eig(&unitary_eig(u)?);
            // The log of a symmetric unitary is symmetric, hence purely imaginary.
            let x = ComplexMatrix::from_fn(n, n, |r, c| Complex64::new(0.0, 0.5 * (x[(r, c)].im + x[(c, r)].im)));
            coords_from_skew(&x, variant)
        }
        Variant::Rotation => {
            require_real(u)?;
            let eig = unitary_eig(u)?;
            if let Some(&phase) = eig.phases.iter().find(|p| PI - p.abs() <= BRANCH_TOLERANCE) {
                return Err(CodecError::BranchDegeneracy { phase });
            }
            let x = log_from_eig(&eig);
            coords_from_skew(&x.real_part(), variant)
        }
        Variant::BlockDiagonal(blocks) => {
            let x = block_log(u, blocks)?;
            coords_from_skew(&x, variant)
        }
    }
}

/// Rebuilds the unitary matrix from its coordinates.
pub fn decode(alpha: &CoordVector) -> Result<ComplexMatrix, CodecError> {
    let x = skew_from_coords(alpha);
    match alpha.variant() {
        Variant::BlockDiagonal(blocks) => {
            let mut parts = Vec::with_capacity(blocks.len());
            let mut offset = 0;
            for &size in blocks {
                parts.push(matrix_exp_skew(&x.diagonal_block(offset, size))?);
                offset += size;
            }
            Ok(ComplexMatrix::block_diagonal(&parts))
        }
        Variant::Rotation => Ok(matrix_exp_skew(&x)?.real_part()),
        _ => Ok(matrix_exp_skew(&x)?),
    }
}

fn require_real(u: &ComplexMatrix) -> Result<(), CodecError> {
    let imag = u.as_slice().iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    if imag > REAL_TOLERANCE {
        return Err(CodecError::Structure(format!(
            "matrix is not real (largest imaginary part {imag:.3e})"
        )));
    }
    Ok(())
}

/// `U · det(U)^{−1/N}` with the principal root.
fn remove_global_phase(u: &ComplexMatrix) -> Result<ComplexMatrix, CodecError> {
    let det = u.determinant()?;
    let n = u.rows() as f64;
    let root = Complex64::from_polar(1.0, -det.arg() / n);
    Ok(u.scale(root))
}

/// Logarithm of a determinant-one unitary with zero trace. The principal branch
/// can have trace `2πm·j`; the `m` largest (or smallest) phases are moved by `∓2π`.
fn traceless_log(u: &ComplexMatrix) -> Result<ComplexMatrix, CodecError> {
    let mut eig = unitary_eig(u)?;
    let total: f64 = eig.phases.iter().sum();
    let m = (total / (2.0 * PI)).round() as i64;
    if m != 0 {
        let mut order: Vec<usize> = (0..eig.phases.len()).collect();
        order.sort_by(|&a, &b| eig.phases[a].total_cmp(&eig.phases[b]));
        if m > 0 {
            for &i in order.iter().rev().take(m as usize) {
                eig.phases[i] -= 2.0 * PI;
            }
        } else {
            for &i in order.iter().take(m.unsigned_abs() as usize) {
                eig.phases[i] += 2.0 * PI;
            }
        }
    }
    Ok(log_from_eig(&eig))
}

fn block_log(u: &ComplexMatrix, blocks: &[usize]) -> Result<ComplexMatrix, CodecError> {
    let n = u.rows();
    let mut owner = Vec::with_capacity(n);
    for (b, &size) in blocks.iter().enumerate() {
        owner.extend(std::iter::repeat_n(b, size));
    }
    let mut off: f64 = 0.0;
    for r in 0..n {
        for (c, z) in u.row(r).iter().enumerate() {
            if owner[r] != owner[c] {
                off = off.max(z.norm());
            }
        }
    }
    if off > 1e-10 {
        return Err(CodecError::Structure(format!(
            "matrix has off-block entries (largest {off:.3e})"
        )));
    }
    let mut parts = Vec::with_capacity(blocks.len());
    let mut offset = 0;
    for &size in blocks {
        let block = u.diagonal_block(offset, size);
        parts.push(log_from_eig(&unitary_eig(&block)?));
        offset += size;
    }
    Ok(ComplexMatrix::block_diagonal(&parts))
}

/// A real orthogonal matrix as rotation coordinates plus its determinant sign.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationCode {
    pub coords: CoordVector,
    /// `+1` or `−1`.
    pub det_sign: i8,
}

/// Negates the last row when `det(O) = −1`, then encodes the rotation.
pub fn encode_rotation(o: &ComplexMatrix) -> Result<RotationCode, CodecError> {
    if !o.is_square() {
        return Err(LinalgError::NotSquare {
            rows: o.rows(),
            cols: o.cols(),
        }
        .into());
    }
    require_real(o)?;
    require_unitary(o, UNITARY_TOLERANCE * o.rows() as f64)?;
    let det = o.determinant()?.re;
    let det_sign: i8 = if det < 0.0 { -1 } else { 1 };
    let mut rotation = o.real_part();
    if det_sign < 0 {
        negate_last_row(&mut rotation);
    }
    Ok(RotationCode {
        coords: encode(&rotation, &Variant::Rotation)?,
        det_sign,
    })
}

pub fn decode_rotation(code: &RotationCode) -> Result<ComplexMatrix, CodecError> {
    if *code.coords.variant() != Variant::Rotation {
        return Err(CodecError::InvalidVariant(format!(
            "expected rotation coordinates, got {}",
            code.coords.variant()
        )));
    }
    let mut o = decode(&code.coords)?;
    if code.det_sign < 0 {
        negate_last_row(&mut o);
    }
    Ok(o)
}

fn negate_last_row(m: &mut ComplexMatrix) {
    let last = m.rows() - 1;
    for z in m.row_mut(last) {
        *z = -*z;
    }
}
