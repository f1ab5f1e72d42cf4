//! Mantissa quantization: conditional rounding and the direct-chopping baseline.
//!
//! With chop count `n`, the last `n` bits of the 32-bit pattern are cleared.
//! Conditional rounding first ORs the first dropped bit into the last kept
//! bit (`0 < n < 23`), or, when the whole mantissa is dropped (`n == 23`),
//! adds the leading mantissa bit to the exponent field so the value rounds
//! to the nearer power of two at the 1.5 boundary.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::float_codec::{EXPONENT_MASK, MANTISSA_BITS, SIGN_MASK, SPECIAL_EXPONENT};

pub const MAX_CHOP: u32 = MANTISSA_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundingMode {
    ConditionalRound,
    Chop,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 2] = [RoundingMode::ConditionalRound, RoundingMode::Chop];

    pub fn as_str(&self) -> &'static str {
        match self {
            RoundingMode::ConditionalRound => "round",
            RoundingMode::Chop => "chop",
        }
    }
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoundingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "round" | "conditional" | "conditionalround" | "conditional_round" => Ok(RoundingMode::ConditionalRound),
            "chop" => Ok(RoundingMode::Chop),
            other => Err(Error::Config(format!("unknown rounding mode `{other}`"))),
        }
    }
}

/// Chop count plus rounding mode. `n == 0` is the identity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantSpec {
    n: u32,
    mode: RoundingMode,
}

impl QuantSpec {
    pub fn new(n: u32, mode: RoundingMode) -> Result<Self> {
        if n > MAX_CHOP {
            return Err(Error::InvalidChopCount(n));
        }
        Ok(QuantSpec { n, mode })
    }

    /// Builds a spec from the number of bits kept per parameter (32 - n).
    pub fn from_bit_width(bit_width: u32, mode: RoundingMode) -> Result<Self> {
        if !(32 - MAX_CHOP..=32).contains(&bit_width) {
            return Err(Error::Config(format!("bit width {bit_width} outside [9, 32]")));
        }
        Self::new(32 - bit_width, mode)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn mode(&self) -> RoundingMode {
        self.mode
    }

    pub fn bit_width(&self) -> u32 {
        32 - self.n
    }

    /// Keeps bit positions 0..=31-n (MSB-first), clears the rest.
    pub fn mask(&self) -> u32 {
        if self.n == 0 {
            u32::MAX
        } else {
            u32::MAX << self.n
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fault {
    NonFinite,
    Overflow,
}

impl Fault {
    fn at(self, index: usize) -> Error {
        match self {
            Fault::NonFinite => Error::NonFinite { index },
            Fault::Overflow => Error::ExponentOverflow { index },
        }
    }
}

fn quantize_bits(bits: u32, spec: QuantSpec) -> std::result::Result<u32, Fault> {
    let exponent = (bits & EXPONENT_MASK) >> MANTISSA_BITS;
    if exponent == SPECIAL_EXPONENT {
        return Err(Fault::NonFinite);
    }
    let n = spec.n;
    if n == 0 {
        return Ok(bits);
    }
    // subnormals flush to signed zero
    if exponent == 0 {
        return Ok(bits & SIGN_MASK);
    }
    let mut bits = bits;
    if spec.mode == RoundingMode::ConditionalRound {
        if n < MAX_CHOP {
            // last kept bit sits at LSB offset n, first dropped bit at n - 1
            bits |= ((bits >> (n - 1)) & 1) << n;
        } else {
            let carry = (bits >> (MANTISSA_BITS - 1)) & 1;
            let raised = exponent + carry;
            if raised == SPECIAL_EXPONENT {
                return Err(Fault::Overflow);
            }
            bits = (bits & !EXPONENT_MASK) | (raised << MANTISSA_BITS);
        }
    }
    Ok(bits & spec.mask())
}

pub fn quantize_value(x: f32, spec: QuantSpec) -> Result<f32> {
    quantize_bits(x.to_bits(), spec).map(f32::from_bits).map_err(|fault| fault.at(0))
}

/// Element-wise [`quantize_value`]; errors carry the offending index.
pub fn quantize_tensor(values: &[f32], spec: QuantSpec) -> Result<Vec<f32>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| quantize_bits(v.to_bits(), spec).map(f32::from_bits).map_err(|f| f.at(i)))
        .collect()
}

/// In-place variant used by the training loop.
pub fn quantize_in_place(values: &mut [f32], spec: QuantSpec) -> Result<()> {
    if spec.n == 0 {
        return match values.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite { index: i }),
            None => Ok(()),
        };
    }
    for (i, v) in values.iter_mut().enumerate() {
        *v = f32::from_bits(quantize_bits(v.to_bits(), spec).map_err(|f| f.at(i))?);
    }
    Ok(())
}

/// True when the last `n` bits of `x` are zero (the whole mantissa for n = 23).
pub fn low_bits_cleared(x: f32, n: u32) -> bool {
    let low = if n == 0 { 0 } else { !(u32::MAX << n.min(MAX_CHOP)) };
    x.to_bits() & low == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::float_codec::MANTISSA_MASK;

    fn spec(n: u32, mode: RoundingMode) -> QuantSpec {
        QuantSpec::new(n, mode).unwrap()
    }

    const TABLE_VALUE: f32 = 0.01234;

    #[test]
    fn chop_reproduces_masked_decimals() {
        let six = quantize_value(TABLE_VALUE, spec(6, RoundingMode::Chop)).unwrap();
        let twelve = quantize_value(TABLE_VALUE, spec(12, RoundingMode::Chop)).unwrap();
        assert!((six as f64 - 0.012339949).abs() < 1e-8);
        assert!((twelve as f64 - 0.012336730).abs() < 1e-8);
        assert_eq!(twelve.to_bits() & 0xFFF, 0);
        assert_eq!(six.to_bits() & 0xFFF, 0b1101_1000_0000);
    }

    #[test]
    fn n_zero_is_identity() {
        for mode in RoundingMode::ALL {
            for x in [TABLE_VALUE, -3.7, 1e-40, 0.0, -0.0, f32::MAX] {
                assert_eq!(quantize_value(x, spec(0, mode)).unwrap().to_bits(), x.to_bits());
            }
        }
    }

    #[test]
    fn power_of_two_rounding() {
        let r = RoundingMode::ConditionalRound;
        assert_eq!(quantize_value(1.75, spec(23, r)).unwrap(), 2.0);
        assert_eq!(quantize_value(1.25, spec(23, r)).unwrap(), 1.0);
        assert_eq!(quantize_value(1.5, spec(23, r)).unwrap(), 2.0);
        assert_eq!(quantize_value(-0.7, spec(23, r)).unwrap(), -0.5);
        assert_eq!(quantize_value(1.75, spec(23, RoundingMode::Chop)).unwrap(), 1.0);
    }

    #[test]
    fn or_rounding_sets_last_kept_bit() {
        // 1 + 2^-23: only the final mantissa bit set; n = 1 drops it into bit 22 offset 1
        let x = f32::from_bits(1.0f32.to_bits() | 1);
        let q = quantize_value(x, spec(1, RoundingMode::ConditionalRound)).unwrap();
        assert_eq!(q.to_bits(), 1.0f32.to_bits() | 0b10);
        let c = quantize_value(x, spec(1, RoundingMode::Chop)).unwrap();
        assert_eq!(c, 1.0);
        // an all-ones mantissa stays inside the binade
        let ones = f32::from_bits(1.0f32.to_bits() | MANTISSA_MASK);
        let q = quantize_value(ones, spec(5, RoundingMode::ConditionalRound)).unwrap();
        assert_eq!(q.to_bits() >> MANTISSA_BITS, 127);
    }

    #[test]
    fn zero_and_signed_zero() {
        for mode in RoundingMode::ALL {
            for n in 0..=23 {
                assert_eq!(quantize_value(0.0, spec(n, mode)).unwrap().to_bits(), 0);
                assert_eq!(quantize_value(-0.0, spec(n, mode)).unwrap().to_bits(), SIGN_MASK);
            }
        }
    }

    #[test]
    fn subnormals_flush_to_signed_zero() {
        let tiny = f32::from_bits(0x0040_0001);
        assert_eq!(quantize_value(tiny, spec(3, RoundingMode::Chop)).unwrap().to_bits(), 0);
        assert_eq!(quantize_value(-tiny, spec(23, RoundingMode::ConditionalRound)).unwrap().to_bits(), SIGN_MASK);
    }

    #[test]
    fn errors() {
        let r = RoundingMode::ConditionalRound;
        assert_eq!(quantize_value(f32::NAN, spec(4, r)), Err(Error::NonFinite { index: 0 }));
        assert_eq!(quantize_value(f32::INFINITY, spec(0, r)), Err(Error::NonFinite { index: 0 }));
        assert_eq!(quantize_value(f32::MAX, spec(23, r)), Err(Error::ExponentOverflow { index: 0 }));
        // chop never overflows
        assert_eq!(quantize_value(f32::MAX, spec(23, RoundingMode::Chop)).unwrap(), 2f32.powi(127));
        assert_eq!(quantize_tensor(&[1.0, 2.0, f32::MAX], spec(23, r)), Err(Error::ExponentOverflow { index: 2 }));
        assert_eq!(QuantSpec::new(24, r), Err(Error::InvalidChopCount(24)));
        assert!(QuantSpec::from_bit_width(8, r).is_err());
        assert_eq!(QuantSpec::from_bit_width(9, r).unwrap().n(), 23);
    }

    #[test]
    fn tensor_examples() {
        let r = RoundingMode::ConditionalRound;
        assert_eq!(quantize_tensor(&[1.0, -1.0], spec(23, r)).unwrap(), vec![1.0, -1.0]);
        let out = quantize_tensor(&[TABLE_VALUE], spec(12, RoundingMode::Chop)).unwrap();
        assert!((out[0] as f64 - 0.012336730).abs() < 1e-8);
        let mut v = vec![1.75f32, -1.25, 0.0];
        quantize_in_place(&mut v, spec(23, r)).unwrap();
        assert_eq!(v, vec![2.0, -1.0, 0.0]);
    }

    #[test]
    fn dropped_bits_helper() {
        assert!(low_bits_cleared(2.0, 23));
        assert!(!low_bits_cleared(1.5, 23));
        assert!(low_bits_cleared(1.5, 22));
        assert!(low_bits_cleared(1.5 + f32::EPSILON, 0));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("chop".parse::<RoundingMode>().unwrap(), RoundingMode::Chop);
        assert_eq!("Round".parse::<RoundingMode>().unwrap(), RoundingMode::ConditionalRound);
        assert!("nearest".parse::<RoundingMode>().is_err());
    }
}
