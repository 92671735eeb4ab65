//! Seeded random streams, Gaussian draws and Haar sampling.
//!
//! Streams are ChaCha8 generators. Gaussian variates come from Box-Muller, so
//! sequences are reproducible for a given seed within this crate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::ComplexMatrix;

pub type Stream = ChaCha8Rng;

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for trial `index` of a run seeded with `seed`.
pub fn trial_stream(seed: u64, index: u64) -> Stream {
    stream(splitmix64(seed ^ index))
}

/// Two independent standard normals.
pub fn normal_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    // 1 - U in (0, 1] keeps the log finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let (s, c) = (2.0 * PI * u2).sin_cos();
    (r * c, r * s)
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    normal_pair(rng).0
}

/// Circularly-symmetric complex normal with `E|z|² = 1`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let (a, b) = normal_pair(rng);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary: Householder QR of a complex Gaussian matrix with the
/// diagonal of R rotated to the positive real axis.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    assert!(n >= 1, "matrix size must be positive");
    let a = complex_gaussian_matrix(n, n, rng);
    qr_haar(a)
}

/// Haar-distributed real orthogonal matrix (both determinant signs).
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    assert!(n >= 1, "matrix size must be positive");
    let a = ComplexMatrix::from_fn(n, n, |_, _| Complex64::new(standard_normal(rng), 0.0));
    qr_haar(a)
}

fn qr_haar(mut r: ComplexMatrix) -> ComplexMatrix {
    let n = r.rows();
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let len = n - k;
        let x_norm = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if x_norm == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * x_norm;
        for i in 0..len {
            v[i] = r[(k + i, k)];
        }
        v[0] -= alpha;
        let v_norm_sqr: f64 = v[..len].iter().map(|z| z.norm_sqr()).sum();
        if v_norm_sqr == 0.0 {
            continue;
        }
        let beta = 2.0 / v_norm_sqr;
        // R <- H R on rows k.., H = I - beta v v^H.
        for j in k..n {
            let s: Complex64 = (0..len).map(|i| v[i].conj() * r[(k + i, j)]).sum();
            let s = s * beta;
            for i in 0..len {
                let delta = v[i] * s;
                r[(k + i, j)] -= delta;
            }
        }
        // Q <- Q H on columns k...
        for row in 0..n {
            let s: Complex64 = (0..len).map(|i| q[(row, k + i)] * v[i]).sum();
            let s = s * beta;
            for i in 0..len {
                let delta = s * v[i].conj();
                q[(row, k + i)] -= delta;
            }
        }
    }
    for c in 0..n {
        let d = r[(c, c)];
        let ph = if d.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            d / d.norm()
        };
        for row in 0..n {
            q[(row, c)] *= ph;
        }
    }
    q
}
