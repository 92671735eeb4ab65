//! Eigendecompositions for Hermitian and unitary matrices.
//!
//! Hermitian input goes through cyclic complex Jacobi. Unitary input is
//! reduced to the commuting Hermitian pair `H = (U + U^H)/2`,
//! `K = (U − U^H)/(2j)`: `H` is diagonalized first, then `K` is diagonalized
//! inside every cluster of (nearly) repeated `H` eigenvalues. A few sweeps of
//! two-sided Schur rotations on `V^H U V` then remove whatever coupling is
//! left between close but unclustered eigenvalues.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ZERO};
use super::{require_square, require_unitary, LinalgError};

/// Jacobi stops once the off-diagonal Frobenius norm is at most this fraction of `‖A‖_F`.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 40;
/// Relative gap under which eigenvalues of `(U + U^H)/2` are treated as one cluster.
pub const DEFAULT_CLUSTER_TOLERANCE: f64 = 1e-8;

const HERMITIAN_INPUT_TOLERANCE: f64 = 1e-10;
const UNITARY_INPUT_TOLERANCE: f64 = 1e-8;
const POLISH_MAX_SWEEPS: usize = 12;
const POLISH_TOLERANCE: f64 = 1e-15;

#[derive(Debug, Clone)]
pub struct HermitianEig {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, in the order of `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEig {
    /// `V diag(λ) V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d: Vec<Complex64> = self.eigenvalues.iter().map(|&l| Complex64::new(l, 0.0)).collect();
        ComplexMatrix::congruence_diag(&self.eigenvectors, &d)
    }
}

#[derive(Debug, Clone)]
pub struct UnitaryEig {
    /// Eigenphases in `(−π, π]`.
    pub phases: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl UnitaryEig {
    /// `V diag(e^{jφ}) V^H`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d: Vec<Complex64> = self.phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        ComplexMatrix::congruence_diag(&self.eigenvectors, &d)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UnitaryEigOptions {
    pub cluster_tolerance: f64,
}

impl Default for UnitaryEigOptions {
    fn default() -> Self {
        Self {
            cluster_tolerance: DEFAULT_CLUSTER_TOLERANCE,
        }
    }
}

/// Full spectral decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEig, LinalgError> {
    let n = require_square(a)?;
    let norm = a.frobenius_norm();
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_INPUT_TOLERANCE * norm {
        return Err(LinalgError::NotHermitian { defect });
    }
    let mut work = a.hermitian_part();
    let mut vt = ComplexMatrix::identity(n);
    jacobi_in_place(&mut work, &mut vt, norm)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work[(i, i)].re.total_cmp(&work[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| work[(i, i)].re).collect();
    // Row i of `vt` is eigenvector i.
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| vt[(order[c], r)]);
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for (j, z) in a.row(i).iter().enumerate() {
            if i != j {
                acc += z.norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi on an exactly Hermitian `a`; accumulates eigenvectors as rows of `vt`.
fn jacobi_in_place(a: &mut ComplexMatrix, vt: &mut ComplexMatrix, norm: f64) -> Result<(), LinalgError> {
    let n = a.rows();
    if n == 1 || norm == 0.0 {
        return Ok(());
    }
    let target = JACOBI_TOLERANCE * norm;
    let skip_below = 1e-18 * norm;
    let mut row_p = vec![ZERO; n];
    let mut row_q = vec![ZERO; n];

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(a) <= target {
            return Ok(());
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= skip_below {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let w = apq / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                let sw = w * s;
                let sw_conj = sw.conj();

                // Rows p and q of G^H A G; columns follow by Hermitian symmetry.
                row_p.copy_from_slice(a.row(p));
                row_q.copy_from_slice(a.row(q));
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let new_p = row_p[k] * c - sw * row_q[k];
                    let new_q = sw_conj * row_p[k] + row_q[k] * c;
                    a[(p, k)] = new_p;
                    a[(k, p)] = new_p.conj();
                    a[(q, k)] = new_q;
                    a[(k, q)] = new_q.conj();
                }
                a[(p, p)] = Complex64::new(app - t * r, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * r, 0.0);
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;

                // V <- V G, stored transposed so eigenvectors are contiguous rows.
                row_p.copy_from_slice(vt.row(p));
                row_q.copy_from_slice(vt.row(q));
                for (k, (vp, vq)) in row_p.iter().zip(&row_q).enumerate() {
                    vt[(p, k)] = vp * c - sw_conj * vq;
                    vt[(q, k)] = sw * vp + vq * c;
                }
            }
        }
    }
    let off = off_diagonal_norm(a);
    if off <= target {
        Ok(())
    } else {
        Err(LinalgError::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
            off_diagonal: off,
        })
    }
}

/// Eigendecomposition of a unitary matrix with principal-branch eigenphases.
pub fn unitary_eig(u: &ComplexMatrix) -> Result<UnitaryEig, LinalgError> {
    unitary_eig_with(u, &UnitaryEigOptions::default())
}

pub fn unitary_eig_with(u: &ComplexMatrix, options: &UnitaryEigOptions) -> Result<UnitaryEig, LinalgError> {
    let n = require_square(u)?;
    require_unitary(u, UNITARY_INPUT_TOLERANCE * n as f64)?;

    let h = u.hermitian_part();
    // (U − U^H)/(2j)
    let k = u
        .skew_hermitian_part()
        .scale(Complex64::new(0.0, -1.0))
        .hermitian_part();

    let h_eig = hermitian_eig(&h)?;
    let mut v = h_eig.eigenvectors;
    let values = &h_eig.eigenvalues;

    let scale = values.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= options.cluster_tolerance * scale {
            end += 1;
        }
        if end - start > 1 {
            refine_cluster(&mut v, &k, start, end)?;
        }
        start = end;
    }

    let mut m = v.adjoint_mul(&u.matmul(&v)?)?;
    polish_normal(&mut m, &mut v);

    let phases = (0..n).map(|i| wrap_arg(m[(i, i)])).collect();
    Ok(UnitaryEig {
        phases,
        eigenvectors: v,
    })
}

/// Rotates columns `start..end` of `v` onto eigenvectors of `K` restricted to their span.
fn refine_cluster(v: &mut ComplexMatrix, k: &ComplexMatrix, start: usize, end: usize) -> Result<(), LinalgError> {
    let n = v.rows();
    let width = end - start;
    let basis = ComplexMatrix::from_fn(n, width, |r, c| v[(r, start + c)]);
    let projected = basis.adjoint_mul(&k.matmul(&basis)?)?.hermitian_part();
    let inner = hermitian_eig(&projected)?;
    let rotated = basis.matmul(&inner.eigenvectors)?;
    for r in 0..n {
        for c in 0..width {
            v[(r, start + c)] = rotated[(r, c)];
        }
    }
    Ok(())
}

/// Drives the nearly diagonal normal matrix `m` to diagonal form with 2x2 Schur
/// rotations, accumulating them into `v`.
fn polish_normal(m: &mut ComplexMatrix, v: &mut ComplexMatrix) {
    let n = m.rows();
    if n < 2 {
        return;
    }
    for _ in 0..POLISH_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let b = m[(p, q)];
                let c = m[(q, p)];
                if b.norm() + c.norm() <= POLISH_TOLERANCE {
                    continue;
                }
                let a = m[(p, p)];
                let d = m[(q, q)];
                let half = (a - d) * 0.5;
                let disc = (half * half + b * c).sqrt();
                let plus = half + disc;
                let minus = half - disc;
                let mu = if plus.norm() >= minus.norm() { plus } else { minus };
                let nrm = (mu.norm_sqr() + c.norm_sqr()).sqrt();
                if nrm == 0.0 {
                    continue;
                }
                let x1 = mu / nrm;
                let x2 = c / nrm;
                rotate_two_sided(m, v, p, q, x1, x2);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Applies `Q = [[x1, −x̄2], [x2, x̄1]]` on indices `(p, q)`: `m ← Q^H m Q`, `v ← v Q`.
fn rotate_two_sided(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, x1: Complex64, x2: Complex64) {
    let n = m.rows();
    for r in 0..n {
        let mp = m[(r, p)];
        let mq = m[(r, q)];
        m[(r, p)] = x1 * mp + x2 * mq;
        m[(r, q)] = -x2.conj() * mp + x1.conj() * mq;
        let vp = v[(r, p)];
        let vq = v[(r, q)];
        v[(r, p)] = x1 * vp + x2 * vq;
        v[(r, q)] = -x2.conj() * vp + x1.conj() * vq;
    }
    for col in 0..n {
        let mp = m[(p, col)];
        let mq = m[(q, col)];
        m[(p, col)] = x1.conj() * mp + x2.conj() * mq;
        m[(q, col)] = -x2 * mp + x1 * mq;
    }
}

/// Argument in `(−π, π]`; the negative real axis maps to `+π`.
fn wrap_arg(z: Complex64) -> f64 {
    let phi = z.im.atan2(z.re);
    if phi <= -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        phi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{haar_unitary, stream};
    use crate::linalg::unitarity_defect;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn diagonal_input_sorts_and_permutes() {
        let a = ComplexMatrix::from_real_rows(&[&[3.0, 0.0], &[0.0, 1.0]]);
        let e = hermitian_eig(&a).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 3.0]);
        let perm = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(e.eigenvectors.distance(&perm) < 1e-15);
    }

    #[test]
    fn pauli_x_matches_closed_form() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = hermitian_eig(&a).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-15);
        // Columns of (1/√2)[[−1, 1], [1, 1]], each up to a phase.
        let expected = [[-FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, FRAC_1_SQRT_2]];
        for (col, want) in expected.iter().enumerate() {
            let got = e.eigenvectors.column(col);
            let overlap: Complex64 = got.iter().zip(want).map(|(g, x)| g.conj() * x).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn identity_is_fixed() {
        let e = hermitian_eig(&ComplexMatrix::identity(4)).unwrap();
        assert!(e.eigenvalues.iter().all(|&l| l == 1.0));
        assert_eq!(e.eigenvectors, ComplexMatrix::identity(4));
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eig(&a), Err(LinalgError::NotHermitian { .. })));
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(LinalgError::NotSquare { .. })));
    }

    #[test]
    fn random_hermitian_contract() {
        let mut rng = stream(11);
        for n in [2, 5, 12, 30] {
            let g = crate::linalg::random::complex_gaussian_matrix(n, n, &mut rng);
            let a = g.hermitian_part();
            let e = hermitian_eig(&a).unwrap();
            let nf = n as f64;
            assert!(unitarity_defect(&e.eigenvectors) <= 1e-10 * nf);
            assert!(e.reconstruct().distance(&a) <= 1e-10 * nf * a.frobenius_norm());
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn unitary_examples() {
        let e = unitary_eig(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(e.phases, vec![0.0, 0.0]);

        let d = ComplexMatrix::from_diag(&[c(0.0, 1.0), c(0.0, -1.0)]);
        let mut phases = unitary_eig(&d).unwrap().phases;
        phases.sort_by(f64::total_cmp);
        assert!((phases[0] + FRAC_PI_2).abs() < 1e-15);
        assert!((phases[1] - FRAC_PI_2).abs() < 1e-15);

        let minus = ComplexMatrix::identity(2).scale_real(-1.0);
        assert_eq!(unitary_eig(&minus).unwrap().phases, vec![PI, PI]);
    }

    #[test]
    fn unitary_rejects_non_unitary() {
        let a = ComplexMatrix::identity(3).scale_real(1.1);
        assert!(matches!(unitary_eig(&a), Err(LinalgError::NotUnitary { .. })));
    }

    #[test]
    fn unitary_haar_contract() {
        let mut rng = stream(5);
        for n in [1, 2, 3, 8, 20] {
            for _ in 0..10 {
                let u = haar_unitary(n, &mut rng);
                let e = unitary_eig(&u).unwrap();
                assert!(e.reconstruct().distance(&u) <= 1e-9 * n as f64);
                assert!(e.phases.iter().all(|p| p.is_finite() && *p > -PI && *p <= PI));
            }
        }
    }

    #[test]
    fn degenerate_and_conjugate_pairs() {
        // Eigenphases ±φ share a cosine, so they collide in the Hermitian part.
        let mut rng = stream(8);
        let q = haar_unitary(6, &mut rng);
        let phases = [0.7, -0.7, 0.7, PI, PI, -2.0];
        let d: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        let u = ComplexMatrix::congruence_diag(&q, &d);
        let e = unitary_eig(&u).unwrap();
        assert!(e.reconstruct().distance(&u) <= 1e-12 * 6.0);
        let mut got = e.phases.clone();
        got.sort_by(f64::total_cmp);
        let mut want = phases.to_vec();
        want.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn near_degenerate_unclustered_phases() {
        // Hermitian-part eigenvalues 1e-7 apart: outside the cluster tolerance, so
        // only the final polishing keeps the decomposition accurate.
        let mut rng = stream(21);
        let q = haar_unitary(5, &mut rng);
        let phases = [1.0, -1.0 - 1e-7, 0.3, 0.3 + 1e-9, -2.5];
        let d: Vec<Complex64> = phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect();
        let u = ComplexMatrix::congruence_diag(&q, &d);
        let e = unitary_eig(&u).unwrap();
        assert!(e.reconstruct().distance(&u) <= 1e-12 * 5.0);
    }
}
