//! Drops mantissa bits from one value with both rounding modes and prints
//! the result at each chop count.
//!
//! ```text
//! cargo run --example mantissa_quantization [value]
//! ```

use eofp::{quantize_value, QuantSpec, RoundingMode};

fn main() -> eofp::Result<()> {
    let x: f32 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.01234);
    println!("input {x:.12}  bits {:032b}", x.to_bits());
    println!("{:>3} {:>5}  {:>16} {:>16}", "n", "width", "round", "chop");
    for n in [0, 6, 9, 12, 18, 20, 22, 23] {
        let round = quantize_value(x, QuantSpec::new(n, RoundingMode::ConditionalRound)?)?;
        let chop = quantize_value(x, QuantSpec::new(n, RoundingMode::Chop)?)?;
        println!("{n:>3} {:>5}  {round:>16.12} {chop:>16.12}", 32 - n);
    }

    // at n = 23 everything becomes a signed power of two
    let weights = [0.3f32, -0.74, 0.0051, 1.49, 1.51];
    let spec = QuantSpec::new(23, RoundingMode::ConditionalRound)?;
    let rounded = eofp::quantize_tensor(&weights, spec)?;
    println!("\n{weights:?}\n-> {rounded:?}");
    Ok(())
}
