//! The UDEP binary payload.
//!
//! All integers and floats are little-endian.
//!
//! | offset | size | field |
//! |-------:|-----:|-------|
//! | 0  | 4 | magic `UDEP` |
//! | 4  | 1 | version (1) |
//! | 5  | 1 | variant: 0 full, 1 special-unitary, 2 symmetric, 3 rotation, 4 block-diagonal |
//! | 6  | 1 | flags: bit 0 quantized, bit 1 determinant sign present, bit 2 determinant sign is −1 |
//! | 7  | 1 | reserved, 0 |
//! | 8  | 4 | N (u32) |
//! | 12 | 4 | CRC-32 of every other byte of the payload |
//!
//! Block-diagonal payloads continue with a u32 block count and one u32 size
//! per block. A raw body is `dims` f64 values. A quantized body is a u8
//! segment count, then per segment u8 bits, f64 lo, f64 hi, u32 length, then
//! all indices bit-packed LSB-first in segment order.
//!
//! The determinant-sign bit is present exactly for rotation payloads.

use thiserror::Error;

use crate::basis::{CoordVector, Variant};
use crate::codec::RotationCode;
use crate::quant::{QuantError, QuantizerSpec, MAX_BITS};

pub const MAGIC: [u8; 4] = *b"UDEP";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 16;
/// Bytes per segment descriptor in a quantized body.
pub const SEGMENT_HEADER_LEN: usize = 1 + 8 + 8 + 4;

const FLAG_QUANTIZED: u8 = 1;
const FLAG_DET_PRESENT: u8 = 1 << 1;
const FLAG_DET_NEGATIVE: u8 = 1 << 2;
const CRC_RANGE: std::ops::Range<usize> = 12..16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated payload: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("index {index} does not fit in {bits} bits")]
    IndexOverflow { index: u32, bits: u8 },
    #[error("checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    ChecksumMismatch { stored: u32, computed: u32 },
    #[error("unknown variant code {0}")]
    UnknownVariant(u8),
    #[error("invalid flags {0:#04x}")]
    InvalidFlags(u8),
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("invalid segment: {0}")]
    InvalidSegment(String),
    #[error("body holds {got} values, variant needs {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("non-finite coordinate value")]
    InvalidValue,
}

impl FormatError {
    /// Stable numeric code per error kind.
    pub fn code(&self) -> u8 {
        match self {
            FormatError::BadMagic => 1,
            FormatError::UnsupportedVersion(_) => 2,
            FormatError::Truncated { .. } => 3,
            FormatError::IndexOverflow { .. } => 4,
            FormatError::ChecksumMismatch { .. } => 5,
            FormatError::UnknownVariant(_) => 6,
            FormatError::InvalidFlags(_) => 7,
            FormatError::InvalidHeader(_) => 8,
            FormatError::InvalidSegment(_) => 9,
            FormatError::LengthMismatch { .. } => 10,
            FormatError::TrailingBytes(_) => 11,
            FormatError::InvalidValue => 12,
        }
    }
}

/// A run of coordinates quantized with one spec.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedSegment {
    pub spec: QuantizerSpec,
    pub indices: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PayloadBody {
    Raw(Vec<f64>),
    Quantized(Vec<QuantizedSegment>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPayload {
    pub n: usize,
    pub variant: Variant,
    /// `Some(±1)` exactly for rotation payloads.
    pub det_sign: Option<i8>,
    pub body: PayloadBody,
}

impl EncodedPayload {
    pub fn raw(coords: &CoordVector) -> Self {
        Self {
            n: coords.n(),
            variant: coords.variant().clone(),
            det_sign: default_det_sign(coords.variant()),
            body: PayloadBody::Raw(coords.coords().to_vec()),
        }
    }

    /// Quantizes consecutive runs of `coords`, one `(spec, length)` per segment.
    pub fn quantized(coords: &CoordVector, segments: &[(QuantizerSpec, usize)]) -> Result<Self, FormatError> {
        let values = coords.coords();
        let total: usize = segments.iter().map(|s| s.1).sum();
        if total != values.len() {
            return Err(FormatError::LengthMismatch {
                expected: values.len(),
                got: total,
            });
        }
        let mut offset = 0;
        let mut out = Vec::with_capacity(segments.len());
        for (spec, len) in segments {
            out.push(QuantizedSegment {
                spec: *spec,
                indices: crate::quant::quantize(&values[offset..offset + len], spec),
            });
            offset += len;
        }
        Ok(Self {
            n: coords.n(),
            variant: coords.variant().clone(),
            det_sign: default_det_sign(coords.variant()),
            body: PayloadBody::Quantized(out),
        })
    }

    /// Quantizes all coordinates with a single spec.
    pub fn quantized_uniform(coords: &CoordVector, spec: QuantizerSpec) -> Self {
        Self::quantized(coords, &[(spec, coords.coords().len())]).expect("one segment covers all")
    }

    pub fn from_rotation(code: &RotationCode, spec: Option<QuantizerSpec>) -> Self {
        let mut p = match spec {
            Some(s) => Self::quantized_uniform(&code.coords, s),
            None => Self::raw(&code.coords),
        };
        p.det_sign = Some(if code.det_sign < 0 { -1 } else { 1 });
        p
    }

    pub fn dims(&self) -> usize {
        self.variant.dims(self.n)
    }

    pub fn is_quantized(&self) -> bool {
        matches!(self.body, PayloadBody::Quantized(_))
    }

    /// Coordinates as received: raw values, or quantizer reconstructions.
    pub fn to_coords(&self) -> Result<CoordVector, FormatError> {
        let values = match &self.body {
            PayloadBody::Raw(v) => v.clone(),
            PayloadBody::Quantized(segments) => {
                let mut v = Vec::with_capacity(self.dims());
                for seg in segments {
                    v.extend(crate::quant::dequantize(&seg.indices, &seg.spec).map_err(quant_to_format)?);
                }
                v
            }
        };
        CoordVector::new(self.n, self.variant.clone(), values).map_err(|e| match e {
            crate::codec::CodecError::Length { expected, got } => FormatError::LengthMismatch { expected, got },
            crate::codec::CodecError::NonFinite => FormatError::InvalidValue,
            other => FormatError::InvalidHeader(other.to_string()),
        })
    }

    pub fn to_rotation_code(&self) -> Result<RotationCode, FormatError> {
        let sign = self
            .det_sign
            .ok_or_else(|| FormatError::InvalidHeader("payload carries no determinant sign".into()))?;
        Ok(RotationCode {
            coords: self.to_coords()?,
            det_sign: sign,
        })
    }
}

fn default_det_sign(variant: &Variant) -> Option<i8> {
    matches!(variant, Variant::Rotation).then_some(1)
}

fn quant_to_format(e: QuantError) -> FormatError {
    match e {
        QuantError::IndexOverflow { index, bits } => FormatError::IndexOverflow { index, bits },
        other => FormatError::InvalidSegment(other.to_string()),
    }
}

fn variant_code(v: &Variant) -> u8 {
    match v {
        Variant::Full => 0,
        Variant::SpecialUnitary => 1,
        Variant::Symmetric => 2,
        Variant::Rotation => 3,
        Variant::BlockDiagonal(_) => 4,
    }
}

/// Size in bytes of a quantized body: count byte, descriptors, packed indices.
pub fn quantized_body_len(segments: &[(u8, usize)]) -> usize {
    let bits: usize = segments.iter().map(|&(b, len)| b as usize * len).sum();
    1 + SEGMENT_HEADER_LEN * segments.len() + bits.div_ceil(8)
}

fn checksum(bytes: &[u8]) -> u32 {
    let mut h = crc32fast::Hasher::new();
    h.update(&bytes[..CRC_RANGE.start]);
    h.update(&bytes[CRC_RANGE.end..]);
    h.finalize()
}

pub fn serialize(p: &EncodedPayload) -> Result<Vec<u8>, FormatError> {
    let n = u32::try_from(p.n)
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| FormatError::InvalidHeader(format!("matrix size {} out of range", p.n)))?;
    p.variant
        .validate(p.n)
        .map_err(|e| FormatError::InvalidHeader(e.to_string()))?;
    let is_rotation = matches!(p.variant, Variant::Rotation);
    let mut flags = 0u8;
    match (is_rotation, p.det_sign) {
        (true, Some(s)) if s == 1 || s == -1 => {
            flags |= FLAG_DET_PRESENT;
            if s < 0 {
                flags |= FLAG_DET_NEGATIVE;
            }
        }
        (false, None) => {}
        _ => return Err(FormatError::InvalidFlags(0)),
    }
    let dims = p.dims();

    let mut out = Vec::with_capacity(HEADER_LEN + dims * 8);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(variant_code(&p.variant));
    if p.is_quantized() {
        flags |= FLAG_QUANTIZED;
    }
    out.push(flags);
    out.push(0);
    out.extend_from_slice(&n.to_le_bytes());
    out.extend_from_slice(&[0; 4]);
    if let Variant::BlockDiagonal(blocks) = &p.variant {
        let count = u32::try_from(blocks.len()).map_err(|_| FormatError::InvalidHeader("too many blocks".into()))?;
        out.extend_from_slice(&count.to_le_bytes());
        for &b in blocks {
            // Each block is at most N, which fits in u32.
            out.extend_from_slice(&(b as u32).to_le_bytes());
        }
    }

    match &p.body {
        PayloadBody::Raw(values) => {
            if values.len() != dims {
                return Err(FormatError::LengthMismatch {
                    expected: dims,
                    got: values.len(),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(FormatError::InvalidValue);
            }
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        PayloadBody::Quantized(segments) => {
            let count = u8::try_from(segments.len())
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| FormatError::InvalidSegment(format!("{} segments", segments.len())))?;
            let total: usize = segments.iter().map(|s| s.indices.len()).sum();
            if total != dims {
                return Err(FormatError::LengthMismatch {
                    expected: dims,
                    got: total,
                });
            }
            out.push(count);
            for seg in segments {
                let len = u32::try_from(seg.indices.len())
                    .map_err(|_| FormatError::InvalidSegment("segment too long".into()))?;
                out.push(seg.spec.bits());
                out.extend_from_slice(&seg.spec.lo().to_le_bytes());
                out.extend_from_slice(&seg.spec.hi().to_le_bytes());
                out.extend_from_slice(&len.to_le_bytes());
            }
            let mut packer = BitWriter::default();
            for seg in segments {
                let bits = seg.spec.bits();
                for &index in &seg.indices {
                    if index >= seg.spec.levels() {
                        return Err(FormatError::IndexOverflow { index, bits });
                    }
                    packer.push(index, bits);
                }
            }
            out.extend(packer.finish());
        }
    }
    let crc = checksum(&out);
    out[CRC_RANGE].copy_from_slice(&crc.to_le_bytes());
    Ok(out)
}

#[derive(Default)]
struct BitWriter {
    bytes: Vec<u8>,
    acc: u64,
    filled: u32,
}

impl BitWriter {
    fn push(&mut self, value: u32, bits: u8) {
        self.acc |= (value as u64) << self.filled;
        self.filled += bits as u32;
        while self.filled >= 8 {
            self.bytes.push(self.acc as u8);
            self.acc >>= 8;
            self.filled -= 8;
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.bytes.push(self.acc as u8);
        }
        self.bytes
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    acc: u64,
    filled: u32,
}

impl BitReader<'_> {
    fn pull(&mut self, bits: u8) -> u32 {
        while self.filled < bits as u32 {
            let byte = self.bytes.get(self.pos).copied().unwrap_or(0);
            self.pos += 1;
            self.acc |= (byte as u64) << self.filled;
            self.filled += 8;
        }
        let v = (self.acc & ((1u64 << bits) - 1)) as u32;
        self.acc >>= bits;
        self.filled -= bits as u32;
        v
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], FormatError> {
        let end = self
            .pos
            .checked_add(len)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(FormatError::Truncated {
                needed: self.pos.saturating_add(len),
                available: self.bytes.len(),
            })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<EncodedPayload, FormatError> {
    let mut cur = Cursor { bytes, pos: 0 };
    if bytes.len() >= 4 && bytes[..4] != MAGIC {
        return Err(FormatError::BadMagic);
    }
    cur.take(HEADER_LEN)?;
    let version = bytes[4];
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let code = bytes[5];
    let flags = bytes[6];
    if bytes[7] != 0 {
        return Err(FormatError::InvalidHeader(format!("reserved byte is {}", bytes[7])));
    }
    let n = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let stored_crc = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes"));
    if n == 0 {
        return Err(FormatError::InvalidHeader("matrix size is zero".into()));
    }

    let variant = match code {
        0 => Variant::Full,
        1 => Variant::SpecialUnitary,
        2 => Variant::Symmetric,
        3 => Variant::Rotation,
        4 => {
            let count = cur.u32()? as usize;
            if count == 0 || count > n {
                return Err(FormatError::InvalidHeader(format!("{count} blocks for size {n}")));
            }
            let mut blocks = Vec::with_capacity(count);
            let mut total = 0usize;
            for _ in 0..count {
                let b = cur.u32()? as usize;
                if b == 0 {
                    return Err(FormatError::InvalidHeader("empty block".into()));
                }
                total = total.saturating_add(b);
                blocks.push(b);
            }
            if total != n {
                return Err(FormatError::InvalidHeader(format!(
                    "block sizes sum to {total}, matrix size is {n}"
                )));
            }
            Variant::BlockDiagonal(blocks)
        }
        other => return Err(FormatError::UnknownVariant(other)),
    };

    let known = FLAG_QUANTIZED | FLAG_DET_PRESENT | FLAG_DET_NEGATIVE;
    let det_present = flags & FLAG_DET_PRESENT != 0;
    let is_rotation = matches!(variant, Variant::Rotation);
    if flags & !known != 0 || det_present != is_rotation || (!det_present && flags & FLAG_DET_NEGATIVE != 0) {
        return Err(FormatError::InvalidFlags(flags));
    }
    let det_sign = det_present.then_some(if flags & FLAG_DET_NEGATIVE != 0 { -1 } else { 1 });

    let dims = match &variant {
        Variant::BlockDiagonal(blocks) => blocks
            .iter()
            .try_fold(0usize, |acc, &b| b.checked_mul(b).and_then(|sq| acc.checked_add(sq))),
        Variant::Full => n.checked_mul(n),
        Variant::SpecialUnitary => n.checked_mul(n).map(|d| d - 1),
        Variant::Symmetric => n.checked_mul(n + 1).map(|d| d / 2),
        Variant::Rotation => n.checked_mul(n - 1).map(|d| d / 2),
    }
    .ok_or_else(|| FormatError::InvalidHeader(format!("matrix size {n} too large")))?;

    let body = if flags & FLAG_QUANTIZED == 0 {
        let needed = dims
            .checked_mul(8)
            .ok_or_else(|| FormatError::InvalidHeader(format!("matrix size {n} too large")))?;
        if cur.remaining() < needed {
            return Err(FormatError::Truncated {
                needed: cur.pos.saturating_add(needed),
                available: bytes.len(),
            });
        }
        let mut values = Vec::with_capacity(dims);
        for _ in 0..dims {
            values.push(cur.f64()?);
        }
        PayloadBody::Raw(values)
    } else {
        let count = cur.u8()? as usize;
        if count == 0 {
            return Err(FormatError::InvalidSegment("no segments".into()));
        }
        let mut descriptors = Vec::with_capacity(count);
        let mut total = 0usize;
        let mut total_bits = 0usize;
        for _ in 0..count {
            let bits = cur.u8()?;
            let lo = cur.f64()?;
            let hi = cur.f64()?;
            let len = cur.u32()? as usize;
            if bits == 0 || bits > MAX_BITS {
                return Err(FormatError::InvalidSegment(format!("bit depth {bits}")));
            }
            let spec = QuantizerSpec::new(bits, lo, hi).map_err(quant_to_format)?;
            total = total.saturating_add(len);
            total_bits = total_bits.saturating_add(len.saturating_mul(bits as usize));
            descriptors.push((spec, len));
        }
        if total != dims {
            return Err(FormatError::LengthMismatch {
                expected: dims,
                got: total,
            });
        }
        let packed_len = total_bits.div_ceil(8);
        let packed = cur.take(packed_len)?;
        let mut reader = BitReader {
            bytes: packed,
            pos: 0,
            acc: 0,
            filled: 0,
        };
        let segments = descriptors
            .into_iter()
            .map(|(spec, len)| QuantizedSegment {
                spec,
                indices: (0..len).map(|_| reader.pull(spec.bits())).collect(),
            })
            .collect();
        PayloadBody::Quantized(segments)
    };

    if cur.remaining() > 0 {
        return Err(FormatError::TrailingBytes(cur.remaining()));
    }
    let computed = checksum(bytes);
    if computed != stored_crc {
        return Err(FormatError::ChecksumMismatch {
            stored: stored_crc,
            computed,
        });
    }
    if let PayloadBody::Raw(values) = &body {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(FormatError::InvalidValue);
        }
    }
    Ok(EncodedPayload {
        n,
        variant,
        det_sign,
        body,
    })
}
