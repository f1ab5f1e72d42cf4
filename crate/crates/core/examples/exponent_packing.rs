//! Exponent-codes a tensor of signed powers of two and shows each code.
//!
//! ```text
//! cargo run --example exponent_packing
//! ```

use eofp::{decode_param, encode_param, scan_range};

fn main() -> eofp::Result<()> {
    let mut values = vec![0.0f32, -0.0];
    for k in -29..=0 {
        values.push(2f32.powi(k));
        values.push(-(2f32.powi(k)));
    }
    let range = scan_range([values.as_slice()])?;
    println!(
        "exponent range {{max, min, len}} = {{{}, {}, {}}}, {} bits per parameter",
        range.max,
        range.min,
        range.len,
        range.packed_width(23)
    );
    for &x in values.iter().step_by(10) {
        let code = encode_param(x, &range, 23)?;
        let back = decode_param(code, &range, 23)?;
        println!("{x:>14e} -> sign {} exp_code {:0w$b} -> {back:e}", code.sign, code.exp_code, w = range.len as usize);
    }
    Ok(())
}
