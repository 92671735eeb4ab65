//! Uniform midrise quantization and the per-dimension AWGN channel.

use rand::Rng;
use thiserror::Error;

use crate::linalg::random::standard_normal;

pub const MAX_BITS: u8 = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantError {
    #[error("bit depth {0} outside 1..=16")]
    InvalidBits(u8),
    #[error("invalid range [{lo}, {hi}]")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("index {index} does not fit in {bits} bits")]
    IndexOverflow { index: u32, bits: u8 },
    #[error("overrange factor must be finite and at least 1, got {0}")]
    InvalidOverrange(f64),
    #[error("capacity must be positive, got {0}")]
    InvalidCapacity(f64),
}

/// `2^bits` equal cells over `[lo, hi]`, reconstructed at cell midpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    bits: u8,
    lo: f64,
    hi: f64,
}

impl QuantizerSpec {
    pub fn new(bits: u8, lo: f64, hi: f64) -> Result<Self, QuantError> {
        if bits == 0 || bits > MAX_BITS {
            return Err(QuantError::InvalidBits(bits));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(hi - lo).is_finite() {
            return Err(QuantError::InvalidRange { lo, hi });
        }
        Ok(Self { bits, lo, hi })
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn levels(&self) -> u32 {
        1 << self.bits
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / self.levels() as f64
    }

    /// Out-of-range values clip to the end cells; NaN maps to cell 0.
    pub fn index_of(&self, v: f64) -> u32 {
        let cell = ((v - self.lo) / self.step()).floor();
        let top = (self.levels() - 1) as f64;
        // `as` saturates and sends NaN to 0.
        cell.clamp(0.0, top) as u32
    }

    pub fn value_of(&self, index: u32) -> Result<f64, QuantError> {
        if index >= self.levels() {
            return Err(QuantError::IndexOverflow { index, bits: self.bits });
        }
        Ok(self.lo + self.step() * (index as f64 + 0.5))
    }
}

pub fn quantize(values: &[f64], spec: &QuantizerSpec) -> Vec<u32> {
    values.iter().map(|&v| spec.index_of(v)).collect()
}

pub fn dequantize(indices: &[u32], spec: &QuantizerSpec) -> Result<Vec<f64>, QuantError> {
    indices.iter().map(|&i| spec.value_of(i)).collect()
}

/// Symmetric range `[−bound/o, bound/o]`.
pub fn overrange_spec(bound: f64, overrange: f64, bits: u8) -> Result<QuantizerSpec, QuantError> {
    check_overrange(overrange)?;
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(QuantError::InvalidRange { lo: -bound, hi: bound });
    }
    let half = bound / overrange;
    QuantizerSpec::new(bits, -half, half)
}

/// `[lo, hi]` shrunk by `o` about its center.
pub fn shrink_spec(lo: f64, hi: f64, overrange: f64, bits: u8) -> Result<QuantizerSpec, QuantError> {
    check_overrange(overrange)?;
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo) / overrange;
    QuantizerSpec::new(bits, center - half, center + half)
}

/// Symmetric range `±min(bound, 4·std)`, where `std` is the root mean square of `values`.
pub fn four_sigma_spec(values: &[f64], bound: f64, bits: u8) -> Result<QuantizerSpec, QuantError> {
    let rms = if values.is_empty() {
        0.0
    } else {
        (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
    };
    let half = if rms > 0.0 { bound.min(4.0 * rms) } else { bound };
    QuantizerSpec::new(bits, -half, half)
}

fn check_overrange(o: f64) -> Result<(), QuantError> {
    if o.is_finite() && o >= 1.0 {
        Ok(())
    } else {
        Err(QuantError::InvalidOverrange(o))
    }
}

/// `2^C − 1`.
pub fn snr_from_capacity(capacity: f64) -> f64 {
    capacity.exp2() - 1.0
}

/// Adds white Gaussian noise at the SNR whose capacity per real dimension is
/// `capacity` bits, relative to the vector's mean power. Infinite capacity and
/// all-zero vectors pass through unchanged.
pub fn awgn_transmit<R: Rng + ?Sized>(values: &[f64], capacity: f64, rng: &mut R) -> Result<Vec<f64>, QuantError> {
    if capacity.is_nan() || capacity <= 0.0 {
        return Err(QuantError::InvalidCapacity(capacity));
    }
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let power = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
    if capacity.is_infinite() || power == 0.0 {
        return Ok(values.to_vec());
    }
    let sigma = (power / snr_from_capacity(capacity)).sqrt();
    Ok(values.iter().map(|&v| v + sigma * standard_normal(rng)).collect())
}
