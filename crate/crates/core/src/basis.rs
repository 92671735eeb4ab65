//! Orthonormal basis of the skew-Hermitian matrices and coordinate maps.
//!
//! Basis order (1-based, part of the wire format):
//!
//! 1. `B_1 = (j/√N)·I`
//! 2. `B_n`, n = 2..N: `(j/√(n(n−1)))·(Σ_{i<n} E_ii − (n−1)·E_nn)`
//! 3. imaginary-symmetric `(j/√2)(E_kl + E_lk)` for each pair `k < l`
//! 4. real-antisymmetric `(1/√2)(E_kl − E_lk)` for each pair `k < l`
//!
//! Pairs are enumerated row by row over the upper triangle:
//! `(1,2), (1,3), …, (1,N), (2,3), …, (N−1,N)`.
//!
//! Coordinates are computed from closed forms in `O(N²)`; the `N²×N²`
//! change-of-basis matrix is never built.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::codec::CodecError;
use crate::linalg::ComplexMatrix;

const SKEW_TOLERANCE: f64 = 1e-9;
const STRUCTURE_TOLERANCE: f64 = 1e-8;
const OFF_BLOCK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Variant {
    Full,
    /// Determinant-one matrices; the `B_1` coefficient is dropped.
    SpecialUnitary,
    /// Symmetric unitaries (`U = U^T`): identity, diagonal and imaginary-symmetric positions.
    Symmetric,
    /// Real rotations: real-antisymmetric positions only.
    Rotation,
    /// Block-diagonal unitaries, one Full code per block.
    BlockDiagonal(Vec<usize>),
}

impl Variant {
    pub fn dims(&self, n: usize) -> usize {
        match self {
            Variant::Full => n * n,
            Variant::SpecialUnitary => n * n - 1,
            Variant::Symmetric => n * (n + 1) / 2,
            Variant::Rotation => n * (n - 1) / 2,
            Variant::BlockDiagonal(blocks) => blocks.iter().map(|b| b * b).sum(),
        }
    }

    /// Checks that the variant makes sense for an `n×n` matrix.
    pub fn validate(&self, n: usize) -> Result<(), CodecError> {
        if n == 0 {
            return Err(CodecError::InvalidVariant("matrix size must be positive".into()));
        }
        if let Variant::BlockDiagonal(blocks) = self {
            if blocks.is_empty() || blocks.contains(&0) {
                return Err(CodecError::InvalidVariant("block sizes must be positive".into()));
            }
            let total: usize = blocks.iter().sum();
            if total != n {
                return Err(CodecError::InvalidVariant(format!(
                    "block sizes sum to {total}, matrix size is {n}"
                )));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::SpecialUnitary => "special-unitary",
            Variant::Symmetric => "symmetric",
            Variant::Rotation => "rotation",
            Variant::BlockDiagonal(_) => "block-diagonal",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::BlockDiagonal(blocks) => {
                let sizes: Vec<String> = blocks.iter().map(|b| b.to_string()).collect();
                write!(f, "block-diagonal[{}]", sizes.join(","))
            }
            other => f.write_str(other.name()),
        }
    }
}

/// Number of real coordinates for `variant` at size `n`.
pub fn dims(variant: &Variant, n: usize) -> usize {
    variant.dims(n)
}

/// Real coordinates of a skew-Hermitian matrix in a given variant.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordVector {
    n: usize,
    variant: Variant,
    coords: Vec<f64>,
}

impl CoordVector {
    pub fn new(n: usize, variant: Variant, coords: Vec<f64>) -> Result<Self, CodecError> {
        variant.validate(n)?;
        let expected = variant.dims(n);
        if coords.len() != expected {
            return Err(CodecError::Length {
                expected,
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CodecError::NonFinite);
        }
        Ok(Self { n, variant, coords })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

/// 1-based pair `(k, l)`, `k < l`, for 1-based index `n` in row-major upper-triangle order.
pub fn pair_of_index(n: usize, size: usize) -> Result<(usize, usize), CodecError> {
    let count = size * size.saturating_sub(1) / 2;
    if n == 0 || n > count {
        return Err(CodecError::Index { index: n, count });
    }
    let mut remaining = n - 1;
    for k in 1..size {
        let row_len = size - k;
        if remaining < row_len {
            return Ok((k, k + 1 + remaining));
        }
        remaining -= row_len;
    }
    unreachable!("index checked against pair count")
}

/// The 1-based basis element `B_n` for size `size`.
pub fn basis_element(n: usize, size: usize) -> Result<ComplexMatrix, CodecError> {
    let count = size * size;
    if n == 0 || n > count {
        return Err(CodecError::Index { index: n, count });
    }
    let mut b = ComplexMatrix::zeros(size, size);
    let pairs = size * (size - 1) / 2;
    if n == 1 {
        let v = Complex64::new(0.0, 1.0 / (size as f64).sqrt());
        for i in 0..size {
            b[(i, i)] = v;
        }
    } else if n <= size {
        let s = 1.0 / ((n * (n - 1)) as f64).sqrt();
        for i in 0..n - 1 {
            b[(i, i)] = Complex64::new(0.0, s);
        }
        b[(n - 1, n - 1)] = Complex64::new(0.0, -((n - 1) as f64) * s);
    } else if n <= size + pairs {
        let (k, l) = pair_of_index(n - size, size)?;
        let v = Complex64::new(0.0, FRAC_1_SQRT_2);
        b[(k - 1, l - 1)] = v;
        b[(l - 1, k - 1)] = v;
    } else {
        let (k, l) = pair_of_index(n - size - pairs, size)?;
        b[(k - 1, l - 1)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        b[(l - 1, k - 1)] = Complex64::new(-FRAC_1_SQRT_2, 0.0);
    }
    Ok(b)
}

/// All `N²` coordinates of a skew-Hermitian matrix (no checks).
pub(crate) fn full_coords(x: &ComplexMatrix) -> Vec<f64> {
    let n = x.rows();
    let mut out = Vec::with_capacity(n * n);
    let im: Vec<f64> = (0..n).map(|i| x[(i, i)].im).collect();
    out.push(im.iter().sum::<f64>() / (n as f64).sqrt());
    let mut prefix = im[0];
    for m in 2..=n {
        let last = im[m - 1];
        let s = ((m * (m - 1)) as f64).sqrt();
        out.push((prefix - (m - 1) as f64 * last) / s);
        prefix += last;
    }
    for k in 0..n {
        for l in k + 1..n {
            out.push((x[(k, l)].im + x[(l, k)].im) * FRAC_1_SQRT_2);
        }
    }
    for k in 0..n {
        for l in k + 1..n {
            out.push((x[(k, l)].re - x[(l, k)].re) * FRAC_1_SQRT_2);
        }
    }
    out
}

/// Inverse of [`full_coords`]: `Σ α_n B_n`.
pub(crate) fn skew_from_full(alpha: &[f64], n: usize) -> ComplexMatrix {
    debug_assert_eq!(alpha.len(), n * n);
    let mut x = ComplexMatrix::zeros(n, n);
    // Im X_ii = α_1/√N − α_{i+1}·i/√((i+1)i) + Σ_{m>i+1} α_m/√(m(m−1)), suffix-summed.
    let base = alpha[0] / (n as f64).sqrt();
    let mut suffix = 0.0;
    for i in (0..n).rev() {
        let mut v = base + suffix;
        if i >= 1 {
            let m = i + 1;
            let s = ((m * (m - 1)) as f64).sqrt();
            v -= alpha[m - 1] * (m - 1) as f64 / s;
            suffix += alpha[m - 1] / s;
        }
        x[(i, i)] = Complex64::new(0.0, v);
    }
    let pairs = n * (n - 1) / 2;
    let mut idx = 0;
    for k in 0..n {
        for l in k + 1..n {
            let sym = alpha[n + idx] * FRAC_1_SQRT_2;
            let anti = alpha[n + pairs + idx] * FRAC_1_SQRT_2;
            x[(k, l)] = Complex64::new(anti, sym);
            x[(l, k)] = Complex64::new(-anti, sym);
            idx += 1;
        }
    }
    x
}

fn structure_error(what: &str, defect: f64) -> CodecError {
    CodecError::Structure(format!("{what} (defect {defect:.3e})"))
}

fn real_part_norm(x: &ComplexMatrix) -> f64 {
    x.as_slice().iter().map(|z| z.re * z.re).sum::<f64>().sqrt()
}

fn imag_part_norm(x: &ComplexMatrix) -> f64 {
    x.as_slice().iter().map(|z| z.im * z.im).sum::<f64>().sqrt()
}

fn off_block_max(x: &ComplexMatrix, blocks: &[usize]) -> f64 {
    let n = x.rows();
    let mut owner = Vec::with_capacity(n);
    for (b, &size) in blocks.iter().enumerate() {
        owner.extend(std::iter::repeat_n(b, size));
    }
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for (c, z) in x.row(r).iter().enumerate() {
            if owner[r] != owner[c] {
                worst = worst.max(z.norm());
            }
        }
    }
    worst
}

/// Coordinates of a skew-Hermitian `X` in the given variant.
pub fn coords_from_skew(x: &ComplexMatrix, variant: &Variant) -> Result<CoordVector, CodecError> {
    if !x.is_square() {
        return Err(CodecError::Shape(format!("{}x{} is not square", x.rows(), x.cols())));
    }
    let n = x.rows();
    variant.validate(n)?;
    let scale = x.frobenius_norm().max(1.0);
    let defect = x.skew_hermitian_defect();
    if defect > SKEW_TOLERANCE * scale {
        return Err(structure_error("input is not skew-Hermitian", defect));
    }
    let coords = match variant {
        Variant::Full => full_coords(x),
        Variant::SpecialUnitary => {
            let trace = x.trace().im.abs() / (n as f64).sqrt();
            if trace > STRUCTURE_TOLERANCE * scale {
                return Err(structure_error("input is not traceless", trace));
            }
            full_coords(x).split_off(1)
        }
        Variant::Symmetric => {
            let d = real_part_norm(x);
            if d > STRUCTURE_TOLERANCE * scale {
                return Err(structure_error("input is not purely imaginary", d));
            }
            let mut c = full_coords(x);
            c.truncate(n * (n + 1) / 2);
            c
        }
        Variant::Rotation => {
            let d = imag_part_norm(x);
            if d > STRUCTURE_TOLERANCE * scale {
                return Err(structure_error("input is not real", d));
            }
            full_coords(x).split_off(n * (n + 1) / 2)
        }
        Variant::BlockDiagonal(blocks) => {
            let d = off_block_max(x, blocks);
            if d > OFF_BLOCK_TOLERANCE {
                return Err(structure_error("input has off-block entries", d));
            }
            let mut out = Vec::with_capacity(variant.dims(n));
            let mut offset = 0;
            for &size in blocks {
                out.extend(full_coords(&x.diagonal_block(offset, size)));
                offset += size;
            }
            out
        }
    };
    CoordVector::new(n, variant.clone(), coords)
}

/// `Σ α_n B_n` over the variant's active basis positions.
pub fn skew_from_coords(alpha: &CoordVector) -> ComplexMatrix {
    let n = alpha.n();
    let c = alpha.coords();
    match alpha.variant() {
        Variant::Full => skew_from_full(c, n),
        Variant::SpecialUnitary => {
            let mut full = Vec::with_capacity(n * n);
            full.push(0.0);
            full.extend_from_slice(c);
            skew_from_full(&full, n)
        }
        Variant::Symmetric => {
            let mut full = c.to_vec();
            full.resize(n * n, 0.0);
            skew_from_full(&full, n)
        }
        Variant::Rotation => {
            let mut full = vec![0.0; n * (n + 1) / 2];
            full.extend_from_slice(c);
            skew_from_full(&full, n)
        }
        Variant::BlockDiagonal(blocks) => {
            let mut parts = Vec::with_capacity(blocks.len());
            let mut offset = 0;
            for &size in blocks {
                let len = size * size;
                parts.push(skew_from_full(&c[offset..offset + len], size));
                offset += len;
            }
            ComplexMatrix::block_diagonal(&parts)
        }
    }
}
