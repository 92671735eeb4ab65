//! Singular value decomposition through the Gramian `A^H A`, and the
//! nearest-unitary projection built on it.

use super::eig::hermitian_eig;
use super::matrix::{ComplexMatrix, ZERO};
use super::{require_square, LinalgError};

const RANK_TOLERANCE: f64 = 1e-12;

/// `A ≈ left · diag(singulars) · right^H`, singular values non-increasing.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left: ComplexMatrix,
    pub singulars: Vec<f64>,
    pub right: ComplexMatrix,
}

impl SvdResult {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.singulars.len();
        let scaled = ComplexMatrix::from_fn(self.left.rows(), k, |r, c| self.left[(r, c)] * self.singulars[c]);
        let right = ComplexMatrix::from_fn(self.right.rows(), k, |r, c| self.right[(r, c)]);
        scaled.matmul(&right.adjoint()).expect("shapes agree")
    }
}

/// Thin SVD: for an `m×n` input, `k = min(m, n)` singular values and `m×k`, `n×k` factors.
pub fn svd(a: &ComplexMatrix) -> Result<SvdResult, LinalgError> {
    if a.rows() < a.cols() {
        let t = tall_svd(&a.adjoint(), false)?;
        return Ok(SvdResult {
            left: t.right,
            singulars: t.singulars,
            right: t.left,
        });
    }
    tall_svd(a, false)
}

/// Full SVD: both factors square (`m×m` and `n×n`).
pub fn svd_full(a: &ComplexMatrix) -> Result<SvdResult, LinalgError> {
    if a.rows() < a.cols() {
        let t = tall_svd(&a.adjoint(), true)?;
        return Ok(SvdResult {
            left: t.right,
            singulars: t.singulars,
            right: t.left,
        });
    }
    tall_svd(a, true)
}

fn tall_svd(a: &ComplexMatrix, complete: bool) -> Result<SvdResult, LinalgError> {
    let (m, n) = a.shape();
    let gram = a.adjoint_mul(a)?.hermitian_part();
    let eig = hermitian_eig(&gram)?;

    // Ascending eigenvalues -> descending singular values.
    let order: Vec<usize> = (0..n).rev().collect();
    let singulars: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0).sqrt()).collect();
    let right = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);

    let av = a.matmul(&right)?;
    let sigma_max = singulars[0];
    let width = if complete { m } else { n };
    let mut left = ComplexMatrix::zeros(m, width);
    let mut accepted = 0;
    for (c, &s) in singulars.iter().enumerate() {
        if s > RANK_TOLERANCE * sigma_max && s > 0.0 {
            for r in 0..m {
                left[(r, c)] = av[(r, c)] / s;
            }
            accepted += 1;
        } else {
            break;
        }
    }
    complete_orthonormal(&mut left, accepted);
    Ok(SvdResult { left, singulars, right })
}

/// Fills columns `filled..` of `q` with an orthonormal completion of its first `filled`
/// columns, by modified Gram-Schmidt on the best-conditioned standard basis vectors.
fn complete_orthonormal(q: &mut ComplexMatrix, filled: usize) {
    let (m, width) = q.shape();
    for target in filled..width {
        let mut best: Option<(f64, Vec<num_complex::Complex64>)> = None;
        for e in 0..m {
            let mut v = vec![ZERO; m];
            v[e] = num_complex::Complex64::new(1.0, 0.0);
            for _pass in 0..2 {
                for j in 0..target {
                    let proj: num_complex::Complex64 = (0..m).map(|r| q[(r, j)].conj() * v[r]).sum();
                    for (r, vr) in v.iter_mut().enumerate() {
                        *vr -= q[(r, j)] * proj;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, v));
            }
            if norm > 0.7 {
                break;
            }
        }
        let (norm, v) = best.expect("m >= 1");
        for (r, vr) in v.iter().enumerate() {
            q[(r, target)] = vr / norm;
        }
    }
}

/// The unitary factor of the polar decomposition, `U_svd · V_svd^H`.
pub fn nearest_unitary(a: &ComplexMatrix) -> Result<ComplexMatrix, LinalgError> {
    require_square(a)?;
    let s = svd(a)?;
    let max = s.singulars[0];
    let min = *s.singulars.last().expect("non-empty");
    if max == 0.0 || min < RANK_TOLERANCE * max {
        let ratio = if max == 0.0 { 0.0 } else { min / max };
        return Err(LinalgError::DegenerateProjection { ratio });
    }
    s.left.matmul(&s.right.adjoint())
}
