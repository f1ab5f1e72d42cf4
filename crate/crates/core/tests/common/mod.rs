//! Test-only reference implementations and generators.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 32 ASCII '0'/'1' characters, index 0 = sign bit.
pub type BitString = [u8; 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleFault {
    NonFinite,
    Overflow,
}

pub fn to_bit_string(x: f32) -> BitString {
    let text = format!("{:032b}", x.to_bits());
    let mut s = [b'0'; 32];
    s.copy_from_slice(text.as_bytes());
    s
}

pub fn from_bit_string(s: &BitString) -> f32 {
    let text = std::str::from_utf8(s).unwrap();
    f32::from_bits(u32::from_str_radix(text, 2).unwrap())
}

/// Mantissa quantization written straight from the pseudocode, on characters.
///
/// Policies shared with the production code: NaN/Inf rejected, `n == 0` is the
/// identity, subnormals flush to signed zero, exponent overflow at n = 23 is a fault.
pub fn oracle_quantize(x: f32, n: usize, chop: bool) -> Result<f32, OracleFault> {
    let mut bits = to_bit_string(x);
    if bits[1..=8].iter().all(|&c| c == b'1') {
        return Err(OracleFault::NonFinite);
    }
    if n == 0 {
        return Ok(x);
    }
    if bits[1..=8].iter().all(|&c| c == b'0') {
        for c in bits[1..].iter_mut() {
            *c = b'0';
        }
        return Ok(from_bit_string(&bits));
    }

    let mut mask = [b'0'; 32];
    for c in mask[..=31 - n].iter_mut() {
        *c = b'1';
    }

    if !chop {
        if n > 0 && n < 23 {
            let or = bits[31 - n] == b'1' || bits[31 - n + 1] == b'1';
            bits[31 - n] = if or { b'1' } else { b'0' };
        } else if n == 23 {
            // bits[1:8] = bits[1:8] (+) bits[9], ripple-carry from the low end
            let mut carry = bits[9] == b'1';
            let mut i = 8;
            while carry && i >= 1 {
                if bits[i] == b'1' {
                    bits[i] = b'0';
                } else {
                    bits[i] = b'1';
                    carry = false;
                }
                i -= 1;
            }
            if carry || bits[1..=8].iter().all(|&c| c == b'1') {
                return Err(OracleFault::Overflow);
            }
        }
    }

    for (b, m) in bits.iter_mut().zip(mask.iter()) {
        *b = if *b == b'1' && *m == b'1' { b'1' } else { b'0' };
    }
    Ok(from_bit_string(&bits))
}

/// Faster bit-string construction for the million-sample loops: same characters,
/// no heap formatting.
pub fn oracle_quantize_fast(x: f32, n: usize, chop: bool) -> Result<f32, OracleFault> {
    let raw = x.to_bits();
    let mut bits: BitString = [b'0'; 32];
    for (i, c) in bits.iter_mut().enumerate() {
        if (raw >> (31 - i)) & 1 == 1 {
            *c = b'1';
        }
    }
    if bits[1..=8].iter().all(|&c| c == b'1') {
        return Err(OracleFault::NonFinite);
    }
    if n == 0 {
        return Ok(x);
    }
    if bits[1..=8].iter().all(|&c| c == b'0') {
        return Ok(if bits[0] == b'1' { -0.0 } else { 0.0 });
    }
    if !chop {
        if n < 23 {
            if bits[31 - n + 1] == b'1' {
                bits[31 - n] = b'1';
            }
        } else {
            let mut carry = bits[9] == b'1';
            let mut i = 8;
            while carry && i >= 1 {
                carry = bits[i] == b'1';
                bits[i] = if carry { b'0' } else { b'1' };
                i -= 1;
            }
            if bits[1..=8].iter().all(|&c| c == b'1') {
                return Err(OracleFault::Overflow);
            }
        }
    }
    for c in bits[32 - n..].iter_mut() {
        *c = b'0';
    }
    let mut out = 0u32;
    for &c in bits.iter() {
        out = (out << 1) | (c == b'1') as u32;
    }
    Ok(f32::from_bits(out))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform over all finite bit patterns (every exponent except 255, including subnormals).
pub fn random_finite<R: Rng>(rng: &mut R) -> f32 {
    loop {
        let x = f32::from_bits(rng.random());
        if x.is_finite() {
            return x;
        }
    }
}

pub fn random_normal<R: Rng>(rng: &mut R) -> f32 {
    loop {
        let x = f32::from_bits(rng.random());
        if x.is_normal() {
            return x;
        }
    }
}

/// Values shaped like trained weights: log-uniform magnitude in [2^lo, 2^hi), random sign,
/// with a sprinkling of exact zeros.
pub fn weight_like<R: Rng>(rng: &mut R, lo: i32, hi: i32) -> f32 {
    if rng.random_ratio(1, 20) {
        return if rng.random() { 0.0 } else { -0.0 };
    }
    let e = rng.random_range(lo..hi);
    let m: f32 = rng.random_range(1.0..2.0);
    let v = m * 2f32.powi(e);
    if rng.random() {
        -v
    } else {
        v
    }
}
