//! Trains the toy denoiser at every bit width of the comparison table, with
//! conditional rounding and with direct chopping, and prints the grid.
//!
//! ```text
//! cargo run --release --example bit_width_sweep [seeds]
//! ```

use std::time::Instant;

use eofp::qat::{sweep, SweepConfig, TrainConfig, TABLE_BIT_WIDTHS};
use eofp::RoundingMode;

fn main() -> eofp::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let config = SweepConfig {
        base: TrainConfig::default(),
        bit_widths: TABLE_BIT_WIDTHS.to_vec(),
        modes: RoundingMode::ALL.to_vec(),
        seeds: (1..=seeds).collect(),
    };
    let start = Instant::now();
    let table = sweep(&config)?;
    println!("{}", table.to_text());
    for bw in [14, 12, 11, 10, 9] {
        println!(
            "bit width {bw:>2}: degradation round {:+.3} dB, chop {:+.3} dB",
            table.degradation_db(bw, RoundingMode::ConditionalRound).unwrap_or(f64::NAN),
            table.degradation_db(bw, RoundingMode::Chop).unwrap_or(f64::NAN),
        );
    }
    println!("{} runs in {:.1?}", table.cells.len() * config.seeds.len(), start.elapsed());
    Ok(())
}
