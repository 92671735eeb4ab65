//! Feedback links and per-method transport of unitary matrices over them.

use std::f64::consts::PI;

use rand::Rng;

use super::{BenchError, Method, Overrange};
use crate::basis::{CoordVector, Variant};
use crate::codec::{
    coefficient_bound, decode, encode, givens_decode, givens_encode, naive_decode, naive_encode, GivensParams,
};
use crate::linalg::ComplexMatrix;
use crate::quant::{awgn_transmit, dequantize, quantize, QuantizerSpec};

/// How a real vector reaches the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Link {
    Perfect,
    /// Per-dimension AWGN with the given capacity in bits per channel use.
    Awgn {
        capacity: f64,
    },
    /// Uniform quantization with `bits` per coordinate.
    Quantized {
        bits: u8,
        overrange: Overrange,
    },
}

/// Nominal value range of a run of coordinates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub len: usize,
}

fn quantize_segment(values: &[f64], lo: f64, hi: f64, bits: u8, overrange: Overrange) -> Result<Vec<f64>, BenchError> {
    let center = 0.5 * (lo + hi);
    if bits == 0 {
        return Ok(vec![center; values.len()]);
    }
    let half = match overrange {
        Overrange::Factor(o) => {
            if !(o.is_finite() && o >= 1.0) {
                return Err(BenchError::Config(format!("overrange must be at least 1, got {o}")));
            }
            0.5 * (hi - lo) / o
        }
        Overrange::FourSigma => {
            let full = 0.5 * (hi - lo);
            let rms = if values.is_empty() {
                0.0
            } else {
                (values.iter().map(|v| (v - center).powi(2)).sum::<f64>() / values.len() as f64).sqrt()
            };
            if rms > 0.0 {
                full.min(4.0 * rms)
            } else {
                full
            }
        }
    };
    let spec = QuantizerSpec::new(bits, center - half, center + half)?;
    Ok(dequantize(&quantize(values, &spec), &spec)?)
}

/// Sends `values` over `link`. AWGN normalizes power over the whole vector;
/// quantization uses each segment's own range.
pub(crate) fn transmit<R: Rng + ?Sized>(
    values: &[f64],
    segments: &[Segment],
    link: &Link,
    rng: &mut R,
) -> Result<Vec<f64>, BenchError> {
    debug_assert_eq!(segments.iter().map(|s| s.len).sum::<usize>(), values.len());
    match *link {
        Link::Perfect => Ok(values.to_vec()),
        Link::Awgn { capacity } => Ok(awgn_transmit(values, capacity, rng)?),
        Link::Quantized { bits, overrange } => {
            let mut out = Vec::with_capacity(values.len());
            let mut offset = 0;
            for s in segments {
                let part = &values[offset..offset + s.len];
                out.extend(quantize_segment(part, s.lo, s.hi, bits, overrange)?);
                offset += s.len;
            }
            Ok(out)
        }
    }
}

/// The naive layout carries twice as many values: AWGN at half the capacity,
/// or the bit budget split between real (`⌈b/2⌉`) and imaginary (`⌊b/2⌋`) parts.
fn transmit_naive<R: Rng + ?Sized>(values: &[f64], link: &Link, rng: &mut R) -> Result<Vec<f64>, BenchError> {
    match *link {
        Link::Perfect => Ok(values.to_vec()),
        Link::Awgn { capacity } => Ok(awgn_transmit(values, capacity / 2.0, rng)?),
        Link::Quantized { bits, overrange } => {
            let re: Vec<f64> = values.iter().step_by(2).copied().collect();
            let im: Vec<f64> = values.iter().skip(1).step_by(2).copied().collect();
            let re = quantize_segment(&re, -1.0, 1.0, bits.div_ceil(2), overrange)?;
            let im = quantize_segment(&im, -1.0, 1.0, bits / 2, overrange)?;
            Ok(re.iter().zip(&im).flat_map(|(a, b)| [*a, *b]).collect())
        }
    }
}

/// Number of real values `method` sends for the given block sizes.
pub fn payload_dims(method: Method, blocks: &[usize]) -> usize {
    let squares: usize = blocks.iter().map(|b| b * b).sum();
    match method {
        Method::Dep | Method::Givens => squares,
        Method::Naive | Method::NaiveProj => 2 * squares,
    }
}

/// Feeds the diagonal blocks of a block-diagonal unitary through `method` and
/// `link` as one vector, returning the reconstructed blocks.
pub(crate) fn transport_blocks<R: Rng + ?Sized>(
    method: Method,
    blocks: &[ComplexMatrix],
    link: &Link,
    rng: &mut R,
) -> Result<Vec<ComplexMatrix>, BenchError> {
    let sizes: Vec<usize> = blocks.iter().map(|b| b.rows()).collect();
    match method {
        Method::Dep => {
            let (w, variant) = if blocks.len() == 1 {
                (blocks[0].clone(), Variant::Full)
            } else {
                (
                    ComplexMatrix::block_diagonal(blocks),
                    Variant::BlockDiagonal(sizes.clone()),
                )
            };
            let alpha = encode(&w, &variant)?;
            let bound = sizes.iter().map(|&s| coefficient_bound(s)).fold(0.0, f64::max);
            let seg = [Segment {
                lo: -bound,
                hi: bound,
                len: alpha.coords().len(),
            }];
            let received = transmit(alpha.coords(), &seg, link, rng)?;
            let w_hat = decode(&CoordVector::new(w.rows(), variant, received)?)?;
            let mut out = Vec::with_capacity(blocks.len());
            let mut offset = 0;
            for &s in &sizes {
                out.push(w_hat.diagonal_block(offset, s));
                offset += s;
            }
            Ok(out)
        }
        Method::Givens => {
            let mut values = Vec::new();
            let mut segments = Vec::new();
            for b in blocks {
                let p = givens_encode(b)?;
                let n = b.rows();
                let pairs = n * (n - 1) / 2;
                values.extend(p.to_vec());
                segments.push(Segment {
                    lo: 0.0,
                    hi: 1.0,
                    len: pairs,
                });
                segments.push(Segment {
                    lo: -PI,
                    hi: PI,
                    len: pairs + n,
                });
            }
            let received = transmit(&values, &segments, link, rng)?;
            let mut out = Vec::with_capacity(blocks.len());
            let mut offset = 0;
            for &n in &sizes {
                let p = GivensParams::from_vec(n, &received[offset..offset + n * n])?;
                out.push(givens_decode(&p));
                offset += n * n;
            }
            Ok(out)
        }
        Method::Naive | Method::NaiveProj => {
            let values: Vec<f64> = blocks.iter().flat_map(naive_encode).collect();
            let received = transmit_naive(&values, link, rng)?;
            let mut out = Vec::with_capacity(blocks.len());
            let mut offset = 0;
            for &n in &sizes {
                let len = 2 * n * n;
                out.push(naive_decode(
                    &received[offset..offset + len],
                    n,
                    method == Method::NaiveProj,
                )?);
                offset += len;
            }
            Ok(out)
        }
    }
}

pub(crate) fn transport<R: Rng + ?Sized>(
    method: Method,
    u: &ComplexMatrix,
    link: &Link,
    rng: &mut R,
) -> Result<ComplexMatrix, BenchError> {
    let mut out = transport_blocks(method, std::slice::from_ref(u), link, rng)?;
    Ok(out.pop().expect("one block"))
}
