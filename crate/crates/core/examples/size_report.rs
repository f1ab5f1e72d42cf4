//! Storage accounting at each stage for a given parameter count.
//!
//! ```text
//! cargo run --example size_report [parameters n len]
//! ```

use eofp::size_report;

fn main() {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let cases: Vec<(u64, u32, u32)> = match args.as_slice() {
        [p, n, len] => vec![(*p, *n as u32, *len as u32)],
        _ => vec![(2_877_929, 23, 5), (450_301, 23, 6)],
    };
    for (p, n, len) in cases {
        let r = size_report(p, n, len);
        println!("{p} parameters, n = {n}, len = {len}");
        println!("  full precision      {:>8} KB", r.full_precision_kb_rounded());
        println!(
            "  mantissa-quantized  {:>8} KB  {:>6.2}%  ratio {:.2}",
            r.mantissa_quantized_kb_rounded(),
            r.mantissa_percent(),
            r.compression_ratio
        );
        println!(
            "  exponent-quantized  {:>8} KB  {:>6.2}%  ratio {:.2}",
            r.exponent_quantized_kb_rounded(),
            r.exponent_percent(),
            r.total_ratio()
        );
    }
}
