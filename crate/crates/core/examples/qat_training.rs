//! Trains the toy denoiser twice, once in full precision and once with every
//! parameter rounded to a signed power of two at each epoch boundary.
//!
//! ```text
//! cargo run --release --example qat_training [seed]
//! ```

use eofp::qat::{history_csv, train, TrainConfig};
use eofp::{QuantSpec, RoundingMode};

fn main() -> eofp::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let baseline = TrainConfig { seed, ..Default::default() };
    let pow2 = TrainConfig { quant: Some(QuantSpec::new(23, RoundingMode::ConditionalRound)?), ..baseline.clone() };

    for (label, cfg) in [("full precision", &baseline), ("powers of two", &pow2)] {
        let run = train(cfg)?;
        let eval = run.final_evaluation()?;
        println!("{label}: {} parameters", run.network.parameter_count());
        print!("{}", history_csv(&run.history));
        println!(
            "validation mse {:.6}, SNR {:.3} dB, improvement {:.3} dB\n",
            eval.mse, eval.output_snr_db, eval.snr_improvement_db
        );
    }
    Ok(())
}
