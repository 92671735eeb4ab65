//! Reconstruction and link metrics.

use thiserror::Error;

use crate::linalg::{require_unitary, svd, ComplexMatrix, LinalgError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("shape mismatch: {left:?} vs {right:?}")]
    Shape {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid argument: {0}")]
    Argument(String),
}

fn same_shape(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<(), MetricError> {
    if a.shape() == b.shape() {
        Ok(())
    } else {
        Err(MetricError::Shape {
            left: a.shape(),
            right: b.shape(),
        })
    }
}

/// `‖U − Û‖_F² / N²` (entries count for non-square inputs).
pub fn mse(u: &ComplexMatrix, u_hat: &ComplexMatrix) -> Result<f64, MetricError> {
    same_shape(u, u_hat)?;
    let d = u.distance(u_hat);
    Ok(d * d / (u.rows() * u.cols()) as f64)
}

/// `|tr(U^H Û)| / N`, insensitive to a global phase.
pub fn fidelity(u: &ComplexMatrix, u_hat: &ComplexMatrix) -> Result<f64, MetricError> {
    same_shape(u, u_hat)?;
    let n = u.rows();
    let tol = 1e-8 * n as f64;
    require_unitary(u, tol)?;
    require_unitary(u_hat, tol)?;
    let tr: num_complex::Complex64 = u
        .as_slice()
        .iter()
        .zip(u_hat.as_slice())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok((tr.norm() / n as f64).min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub powers: Vec<f64>,
    pub total: f64,
}

impl PowerAllocation {
    /// `μ` such that every active stream has `1/g_i + p_i = μ`.
    pub fn water_level(&self, gains: &[f64]) -> Option<f64> {
        self.powers
            .iter()
            .zip(gains)
            .find(|(p, _)| **p > 0.0)
            .map(|(p, g)| p + 1.0 / g)
    }
}

/// Capacity-maximizing powers for parallel channels with gains `σ_i²` and unit noise.
pub fn waterfilling(gains: &[f64], total_power: f64) -> Result<PowerAllocation, MetricError> {
    if gains.is_empty() {
        return Err(MetricError::Argument("no channel gains".into()));
    }
    if gains.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
        return Err(MetricError::Argument("gains must be positive".into()));
    }
    if !(total_power.is_finite() && total_power > 0.0) {
        return Err(MetricError::Argument("total power must be positive".into()));
    }
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    let inv: Vec<f64> = order.iter().map(|&i| 1.0 / gains[i]).collect();

    // Drop the weakest stream while it would get negative power.
    let mut active = inv.len();
    let mut level = 0.0;
    while active > 0 {
        let sum: f64 = inv[..active].iter().sum();
        level = (total_power + sum) / active as f64;
        if level - inv[active - 1] >= 0.0 {
            break;
        }
        active -= 1;
    }
    let mut powers = vec![0.0; gains.len()];
    for (rank, &i) in order.iter().enumerate().take(active) {
        powers[i] = (level - inv[rank]).max(0.0);
    }
    Ok(PowerAllocation {
        powers,
        total: total_power,
    })
}

/// `Σ log₂(1 + snr·σ_i²)` over the singular values of `h`.
pub fn logdet_capacity(h: &ComplexMatrix, snr: f64) -> Result<f64, MetricError> {
    if h.as_slice().iter().all(|z| z.norm() == 0.0) {
        return Ok(0.0);
    }
    let s = svd(h)?;
    Ok(s.singulars.iter().map(|x| (1.0 + snr * x * x).log2()).sum())
}

/// Sum rate with equalizer `U^H`, precoder `V̂·diag(√p̂)` and unit noise, treating
/// cross-stream leakage as interference.
pub fn stream_sinr_rate(
    h: &ComplexMatrix,
    u: &ComplexMatrix,
    v_hat: &ComplexMatrix,
    powers: &[f64],
) -> Result<f64, MetricError> {
    let g = u.adjoint_mul(&h.matmul(v_hat)?)?;
    if g.cols() != powers.len() {
        return Err(MetricError::Argument(format!(
            "{} powers for {} streams",
            powers.len(),
            g.cols()
        )));
    }
    let streams = g.rows().min(g.cols());
    let mut rate = 0.0;
    for i in 0..streams {
        let row = g.row(i);
        let mut signal = 0.0;
        let mut interference = 0.0;
        for (j, z) in row.iter().enumerate() {
            let e = z.norm_sqr() * powers[j].max(0.0);
            if i == j {
                signal = e;
            } else {
                interference += e;
            }
        }
        rate += (1.0 + signal / (1.0 + interference)).log2();
    }
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use crate::linalg::random::{complex_gaussian_matrix, stream};
    use num_complex::Complex64;

    #[test]
    fn mse_examples() {
        let mut rng = stream(1);
        let u = haar_unitary(5, &mut rng);
        assert_eq!(mse(&u, &u).unwrap(), 0.0);
        assert!((mse(&u, &u.scale_real(-1.0)).unwrap() - 4.0 / 5.0).abs() < 1e-14);
        let d = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(mse(&ComplexMatrix::identity(2), &d).unwrap(), 1.0);
        assert!(mse(&u, &ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let mut rng = stream(2);
        let u = haar_unitary(4, &mut rng);
        assert!((fidelity(&u, &u).unwrap() - 1.0).abs() < 1e-14);
        let rotated = u.scale(Complex64::from_polar(1.0, 1.2));
        assert!((fidelity(&u, &rotated).unwrap() - 1.0).abs() < 1e-14);
        let d = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
        assert_eq!(fidelity(&ComplexMatrix::identity(2), &d).unwrap(), 0.0);
        assert!(fidelity(&ComplexMatrix::identity(2), &d.scale_real(2.0)).is_err());
    }

    #[test]
    fn waterfilling_examples() {
        assert_eq!(waterfilling(&[1.0, 1.0], 2.0).unwrap().powers, vec![1.0, 1.0]);
        let p = waterfilling(&[2.0, 1.0], 0.5).unwrap();
        assert!((p.powers[0] - 0.5).abs() < 1e-15 && p.powers[1] == 0.0);
        let p = waterfilling(&[4.0, 1.0], 0.1).unwrap();
        assert!((p.powers[0] - 0.1).abs() < 1e-15 && p.powers[1] == 0.0);
        assert!(waterfilling(&[], 1.0).is_err());
        assert!(waterfilling(&[1.0], 0.0).is_err());
    }

    #[test]
    fn capacity_examples() {
        assert!((logdet_capacity(&ComplexMatrix::identity(2), 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(logdet_capacity(&ComplexMatrix::zeros(3, 2), 1.0).unwrap(), 0.0);
        let h = ComplexMatrix::from_real_rows(&[&[3.0, 0.0], &[0.0, 0.0]]);
        assert!((logdet_capacity(&h, 1.0).unwrap() - 10f64.log2()).abs() < 1e-14);
    }

    #[test]
    fn sinr_rate_with_exact_feedback_is_capacity() {
        let mut rng = stream(3);
        let h = complex_gaussian_matrix(8, 3, &mut rng);
        let s = svd(&h).unwrap();
        let gains: Vec<f64> = s.singulars.iter().map(|x| x * x).collect();
        let p = waterfilling(&gains, 10.0).unwrap();
        let cap: f64 = gains.iter().zip(&p.powers).map(|(g, q)| (1.0 + g * q).log2()).sum();
        let rate = stream_sinr_rate(&h, &s.left, &s.right, &p.powers).unwrap();
        assert!((rate - cap).abs() < 1e-9);
        assert_eq!(stream_sinr_rate(&h, &s.left, &s.right, &[0.0; 3]).unwrap(), 0.0);
    }

    #[test]
    fn scalar_rate_ignores_precoder_phase() {
        let h = ComplexMatrix::from_diag(&[Complex64::new(0.0, 2.0)]);
        let u = ComplexMatrix::from_diag(&[Complex64::new(0.0, 1.0)]);
        let v = ComplexMatrix::from_diag(&[Complex64::from_polar(1.0, 0.7)]);
        let rate = stream_sinr_rate(&h, &u, &v, &[1.5]).unwrap();
        assert!((rate - (1.0 + 4.0 * 1.5f64).log2()).abs() < 1e-14);
    }
}
