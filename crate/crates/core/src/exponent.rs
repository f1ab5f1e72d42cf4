//! Statistical exponent quantization.
//!
//! The model-wide span of unbiased exponents `[min, max]` of nonzero
//! parameters is re-encoded as offsets `e - min + 1`, reserving code 0 for
//! zero. The code length is the smallest `len` with `2^len >= span + 2`.
//! The transform is lossless on mantissa-quantized values.

use crate::error::{Error, Result};
use crate::float_codec::{EXPONENT_BIAS, EXPONENT_MASK, MANTISSA_BITS, MANTISSA_MASK};

/// Exponent statistics of a whole model, plus the resulting code length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExponentRange {
    pub max: i32,
    pub min: i32,
    pub len: u32,
}

impl ExponentRange {
    pub fn from_extremes(min: i32, max: i32) -> Result<Self> {
        if min > max {
            return Err(Error::InvalidHeader(format!("exponent min {min} > max {max}")));
        }
        Ok(ExponentRange { max, min, len: code_length(min, max) })
    }

    /// Number of distinct nonzero exponents, `max - min + 1`.
    pub fn span(&self) -> u32 {
        (self.max - self.min + 1) as u32
    }

    /// Bits per parameter: sign, exponent code and the kept mantissa bits.
    pub fn packed_width(&self, n: u32) -> u32 {
        1 + self.len + (MANTISSA_BITS - n)
    }

    pub fn contains(&self, exponent: i32) -> bool {
        (self.min..=self.max).contains(&exponent)
    }
}

/// `ceil(log2((max - min + 1) + 1))`, evaluated in integers.
pub fn code_length(min: i32, max: i32) -> u32 {
    let symbols = (max as i64 - min as i64 + 2) as u64;
    symbols.next_power_of_two().trailing_zeros()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PackedCode {
    pub sign: u32,
    pub exp_code: u32,
    pub residual: u32,
}

/// Extreme exponents over every nonzero parameter of every tensor.
pub fn scan_range<'a, I>(tensors: I) -> Result<ExponentRange>
where
    I: IntoIterator<Item = &'a [f32]>,
{
    let mut extremes: Option<(i32, i32)> = None;
    let mut offset = 0usize;
    for tensor in tensors {
        for (i, v) in tensor.iter().enumerate() {
            let bits = v.to_bits();
            let biased = (bits & EXPONENT_MASK) >> MANTISSA_BITS;
            if biased == 0xFF {
                return Err(Error::NonFinite { index: offset + i });
            }
            if biased == 0 {
                if bits & MANTISSA_MASK != 0 {
                    return Err(Error::Subnormal { index: offset + i });
                }
                continue;
            }
            let e = biased as i32 - EXPONENT_BIAS;
            extremes = Some(match extremes {
                None => (e, e),
                Some((lo, hi)) => (lo.min(e), hi.max(e)),
            });
        }
        offset += tensor.len();
    }
    let (min, max) = extremes.ok_or(Error::AllZero)?;
    ExponentRange::from_extremes(min, max)
}

pub fn encode_param(x: f32, range: &ExponentRange, n: u32) -> Result<PackedCode> {
    if n > MANTISSA_BITS {
        return Err(Error::InvalidChopCount(n));
    }
    let bits = x.to_bits();
    let sign = bits >> 31;
    let biased = (bits & EXPONENT_MASK) >> MANTISSA_BITS;
    let mantissa = bits & MANTISSA_MASK;
    if biased == 0xFF {
        return Err(Error::NonFinite { index: 0 });
    }
    if mantissa & !(u32::MAX << n) != 0 {
        return Err(Error::MantissaResidue { n });
    }
    if biased == 0 {
        if mantissa != 0 {
            return Err(Error::Subnormal { index: 0 });
        }
        return Ok(PackedCode { sign, exp_code: 0, residual: 0 });
    }
    let exponent = biased as i32 - EXPONENT_BIAS;
    if !range.contains(exponent) {
        return Err(Error::ExponentOutOfRange { exponent, min: range.min, max: range.max });
    }
    Ok(PackedCode { sign, exp_code: (exponent - range.min + 1) as u32, residual: mantissa.checked_shr(n).unwrap_or(0) })
}

/// Inverse of [`encode_param`]. Only `range.min` and `range.len` are consulted.
pub fn decode_param(code: PackedCode, range: &ExponentRange, n: u32) -> Result<f32> {
    check_code_widths(code, range.len, n)?;
    if code.exp_code == 0 {
        return Ok(f32::from_bits(code.sign << 31));
    }
    let biased = code.exp_code as i32 - 1 + range.min + EXPONENT_BIAS;
    if !(1..=254).contains(&biased) {
        return Err(Error::DecodedExponent(biased));
    }
    let mantissa = code.residual << n;
    Ok(f32::from_bits((code.sign << 31) | ((biased as u32) << MANTISSA_BITS) | mantissa))
}

pub(crate) fn check_code_widths(code: PackedCode, len: u32, n: u32) -> Result<()> {
    if n > MANTISSA_BITS {
        return Err(Error::InvalidChopCount(n));
    }
    if code.sign > 1 {
        return Err(Error::CodeOutOfRange { field: "sign", value: code.sign, width: 1 });
    }
    if len < 32 && code.exp_code >> len != 0 {
        return Err(Error::CodeOutOfRange { field: "exp_code", value: code.exp_code, width: len });
    }
    let residual_width = MANTISSA_BITS - n;
    if code.residual >> residual_width != 0 {
        return Err(Error::CodeOutOfRange { field: "residual", value: code.residual, width: residual_width });
    }
    Ok(())
}

/// Scans the model, then encodes each tensor in order.
pub fn quantize_model(tensors: &[&[f32]], n: u32) -> Result<(ExponentRange, Vec<Vec<PackedCode>>)> {
    let range = scan_range(tensors.iter().copied())?;
    let mut offset = 0;
    let mut out = Vec::with_capacity(tensors.len());
    for tensor in tensors {
        let codes = tensor
            .iter()
            .enumerate()
            .map(|(i, &v)| encode_param(v, &range, n).map_err(|e| reindex(e, offset + i)))
            .collect::<Result<Vec<_>>>()?;
        offset += tensor.len();
        out.push(codes);
    }
    Ok((range, out))
}

pub fn dequantize_codes(codes: &[PackedCode], range: &ExponentRange, n: u32) -> Result<Vec<f32>> {
    codes.iter().map(|&c| decode_param(c, range, n)).collect()
}

fn reindex(e: Error, index: usize) -> Error {
    match e {
        Error::NonFinite { .. } => Error::NonFinite { index },
        Error::Subnormal { .. } => Error::Subnormal { index },
        other => other,
    }
}
