//! Bit-level view of IEEE 754 single-precision values.
//!
//! Bit positions follow the MSB-first convention used throughout the crate:
//! position 0 is the sign, positions 1..=8 the biased exponent and positions
//! 9..=31 the mantissa. [`msb_bit`] converts a position into a value.

use crate::error::{Error, Result};

pub const EXPONENT_BIAS: i32 = 127;
pub const MANTISSA_BITS: u32 = 23;
pub const MANTISSA_MASK: u32 = (1 << MANTISSA_BITS) - 1;
pub const EXPONENT_MASK: u32 = 0xFF << MANTISSA_BITS;
pub const SIGN_MASK: u32 = 1 << 31;
/// Biased exponent reserved for NaN and infinity.
pub const SPECIAL_EXPONENT: u32 = 0xFF;

/// Sign, biased exponent and mantissa of one `f32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloatFields {
    pub sign: u32,
    pub exponent: u32,
    pub mantissa: u32,
}

/// Value of the bit at MSB-first position `pos` (0 = sign, 31 = last mantissa bit).
#[inline]
pub fn msb_bit(bits: u32, pos: u32) -> u32 {
    debug_assert!(pos < 32);
    (bits >> (31 - pos)) & 1
}

pub fn decompose(x: f32) -> FloatFields {
    FloatFields::from_bits(x.to_bits())
}

pub fn compose(f: FloatFields) -> Result<f32> {
    f.to_bits().map(f32::from_bits)
}

impl FloatFields {
    pub fn from_bits(bits: u32) -> Self {
        FloatFields {
            sign: bits >> 31,
            exponent: (bits & EXPONENT_MASK) >> MANTISSA_BITS,
            mantissa: bits & MANTISSA_MASK,
        }
    }

    pub fn to_bits(self) -> Result<u32> {
        if self.sign > 1 {
            return Err(Error::FieldOutOfRange { field: "sign", value: self.sign });
        }
        if self.exponent > 0xFF {
            return Err(Error::FieldOutOfRange { field: "exponent", value: self.exponent });
        }
        if self.mantissa > MANTISSA_MASK {
            return Err(Error::FieldOutOfRange { field: "mantissa", value: self.mantissa });
        }
        Ok((self.sign << 31) | (self.exponent << MANTISSA_BITS) | self.mantissa)
    }

    pub fn is_zero(&self) -> bool {
        self.exponent == 0 && self.mantissa == 0
    }

    pub fn is_subnormal(&self) -> bool {
        self.exponent == 0 && self.mantissa != 0
    }

    pub fn is_special(&self) -> bool {
        self.exponent == SPECIAL_EXPONENT
    }

    pub fn is_normal(&self) -> bool {
        self.exponent != 0 && !self.is_special()
    }

    fn require_normal(&self) -> Result<()> {
        if self.is_normal() {
            Ok(())
        } else {
            Err(Error::NotNormal { exponent: self.exponent })
        }
    }
}

/// Stored exponent minus the bias, for normal numbers only.
pub fn unbiased_exponent(f: FloatFields) -> Result<i32> {
    f.require_normal()?;
    Ok(f.exponent as i32 - EXPONENT_BIAS)
}

/// Evaluates `(-1)^sign * (1 + sum_i b_i 2^-i) * 2^(exponent - bias)` bit by bit.
///
/// Reference semantics only; the quantizers work on raw bit patterns.
pub fn decimal_value(f: FloatFields) -> Result<f64> {
    f.require_normal()?;
    if f.mantissa > MANTISSA_MASK {
        return Err(Error::FieldOutOfRange { field: "mantissa", value: f.mantissa });
    }
    let mut significand = 1.0f64;
    for i in 1..=MANTISSA_BITS {
        let bit = (f.mantissa >> (MANTISSA_BITS - i)) & 1;
        if bit == 1 {
            significand += 2f64.powi(-(i as i32));
        }
    }
    let sign = if f.sign == 1 { -1.0 } else { 1.0 };
    Ok(sign * significand * 2f64.powi(f.exponent as i32 - EXPONENT_BIAS))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decompose_basic_values() {
        assert_eq!(decompose(1.0), FloatFields { sign: 0, exponent: 127, mantissa: 0 });
        assert_eq!(decompose(0.0), FloatFields { sign: 0, exponent: 0, mantissa: 0 });
        assert_eq!(decompose(-0.0), FloatFields { sign: 1, exponent: 0, mantissa: 0 });
    }

    #[test]
    fn table_value_tail_bits() {
        let f = decompose(0.01234f32);
        assert_eq!(f.mantissa & 0xFFF, 0b1101_1011_0110);
    }

    #[test]
    fn compose_examples() {
        assert_eq!(compose(FloatFields { sign: 0, exponent: 127, mantissa: 0 }).unwrap(), 1.0);
        assert_eq!(compose(FloatFields { sign: 1, exponent: 127, mantissa: 0 }).unwrap(), -1.0);
        // 1.5 * 2^-1
        assert_eq!(compose(FloatFields { sign: 0, exponent: 126, mantissa: 1 << 22 }).unwrap(), 0.75);
    }

    #[test]
    fn compose_rejects_out_of_range_fields() {
        assert!(matches!(
            compose(FloatFields { sign: 2, exponent: 0, mantissa: 0 }),
            Err(Error::FieldOutOfRange { field: "sign", .. })
        ));
        assert!(matches!(
            compose(FloatFields { sign: 0, exponent: 256, mantissa: 0 }),
            Err(Error::FieldOutOfRange { field: "exponent", .. })
        ));
        assert!(matches!(
            compose(FloatFields { sign: 0, exponent: 1, mantissa: 1 << 23 }),
            Err(Error::FieldOutOfRange { field: "mantissa", .. })
        ));
    }

    #[test]
    fn decimal_value_examples() {
        assert_eq!(decimal_value(decompose(1.0)).unwrap(), 1.0);
        // 2^-7 * (1 + 2^-1)
        let v = decimal_value(FloatFields { sign: 0, exponent: 120, mantissa: 1 << 22 }).unwrap();
        assert_eq!(v, 0.01171875);
        let t = decimal_value(decompose(0.01234f32)).unwrap();
        assert!((t - 0.012339999).abs() < 1e-9);
    }

    #[test]
    fn decimal_value_rejects_non_normal() {
        assert!(decimal_value(decompose(0.0)).is_err());
        assert!(decimal_value(decompose(f32::INFINITY)).is_err());
        assert!(decimal_value(decompose(f32::from_bits(1))).is_err());
    }

    #[test]
    fn unbiased_exponent_examples() {
        assert_eq!(unbiased_exponent(decompose(1.0)).unwrap(), 0);
        assert_eq!(unbiased_exponent(decompose(2f32.powi(-29))).unwrap(), -29);
        assert_eq!(unbiased_exponent(decompose(0.75)).unwrap(), -1);
        assert!(unbiased_exponent(decompose(f32::NAN)).is_err());
        for k in -126..=127 {
            assert_eq!(unbiased_exponent(decompose(2f32.powi(k))).unwrap(), k);
        }
    }

    #[test]
    fn msb_bit_positions() {
        let bits = (-1.0f32).to_bits();
        assert_eq!(msb_bit(bits, 0), 1);
        assert_eq!(msb_bit(1.5f32.to_bits(), 9), 1);
        assert_eq!(msb_bit(1.25f32.to_bits(), 9), 0);
        assert_eq!(msb_bit(1.25f32.to_bits(), 10), 1);
    }
}
