//! Splits a few `f32` values into sign, biased exponent and mantissa, then
//! rebuilds each one bit by bit.
//!
//! ```text
//! cargo run --example float_fields
//! ```

use eofp::float_codec::{compose, decimal_value, decompose, unbiased_exponent};

fn main() -> eofp::Result<()> {
    for x in [0.01234f32, 1.0, -2.5, 0.0, -0.0, f32::MIN_POSITIVE, f32::from_bits(1), f32::INFINITY] {
        let f = decompose(x);
        print!("{x:>14e}  sign {}  exponent {:08b}  mantissa {:023b}", f.sign, f.exponent, f.mantissa);
        if f.is_normal() {
            println!(
                "  = 2^{} x {:.12}",
                unbiased_exponent(f)?,
                decimal_value(f)?.abs() / 2f64.powi(unbiased_exponent(f)?)
            );
        } else if f.is_zero() {
            println!("  zero");
        } else if f.is_subnormal() {
            println!("  subnormal");
        } else {
            println!("  special");
        }
        assert_eq!(compose(f)?.to_bits(), x.to_bits());
    }
    Ok(())
}
