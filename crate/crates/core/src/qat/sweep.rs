//! Bit-width x rounding-mode grid of training runs.

use super::train::{train, Evaluation, TrainConfig};
use crate::error::{Error, Result};
use crate::mantissa::{QuantSpec, RoundingMode};

pub const TABLE_BIT_WIDTHS: [u32; 8] = [32, 26, 20, 14, 12, 11, 10, 9];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: TrainConfig,
    pub bit_widths: Vec<u32>,
    pub modes: Vec<RoundingMode>,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub bit_width: u32,
    pub mode: RoundingMode,
    /// One evaluation per seed, in seed order.
    pub evaluations: Vec<Evaluation>,
}

impl SweepCell {
    pub fn mean_mse(&self) -> f64 {
        mean(self.evaluations.iter().map(|e| e.mse))
    }

    pub fn mean_improvement_db(&self) -> f64 {
        mean(self.evaluations.iter().map(|e| e.snr_improvement_db))
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = it.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub bit_widths: Vec<u32>,
    pub modes: Vec<RoundingMode>,
    pub cells: Vec<SweepCell>,
}

impl SweepTable {
    pub fn cell(&self, bit_width: u32, mode: RoundingMode) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.bit_width == bit_width && c.mode == mode)
    }

    /// Loss of mean SNR improvement relative to the 32-bit cell of the same mode.
    pub fn degradation_db(&self, bit_width: u32, mode: RoundingMode) -> Option<f64> {
        let reference = self.cell(32, mode)?.mean_improvement_db();
        Some(reference - self.cell(bit_width, mode)?.mean_improvement_db())
    }

    /// One row per (bit width, mode).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bit_width,mode,mean_val_mse,mean_snr_improvement_db,degradation_db\n");
        for c in &self.cells {
            let degradation = self.degradation_db(c.bit_width, c.mode).map_or("nan".to_string(), |d| format!("{d:.6}"));
            out.push_str(&format!(
                "{},{},{:.9},{:.6},{}\n",
                c.bit_width,
                c.mode,
                c.mean_mse(),
                c.mean_improvement_db(),
                degradation
            ));
        }
        out
    }

    /// Bit widths down the side, modes across the top, MSE and SNR gain per mode.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:>9}", "bit-width");
        for m in &self.modes {
            out.push_str(&format!(" | {:>12} {:>10}", format!("{m} mse"), format!("{m} dB")));
        }
        out.push('\n');
        for &bw in &self.bit_widths {
            out.push_str(&format!("{bw:>9}"));
            for &m in &self.modes {
                match self.cell(bw, m) {
                    Some(c) => out.push_str(&format!(" | {:>12.6} {:>10.3}", c.mean_mse(), c.mean_improvement_db())),
                    None => out.push_str(&format!(" | {:>12} {:>10}", "-", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn sweep(config: &SweepConfig) -> Result<SweepTable> {
    if config.seeds.is_empty() {
        return Err(Error::Config("sweep needs at least one seed".into()));
    }
    let mut cells = Vec::with_capacity(config.bit_widths.len() * config.modes.len());
    for &bit_width in &config.bit_widths {
        for &mode in &config.modes {
            let spec = QuantSpec::from_bit_width(bit_width, mode)?;
            let evaluations = config
                .seeds
                .iter()
                .map(|&seed| {
                    let run = train(&TrainConfig { seed, quant: Some(spec), ..config.base.clone() })?;
                    run.final_evaluation()
                })
                .collect::<Result<Vec<_>>>()?;
            cells.push(SweepCell { bit_width, mode, evaluations });
        }
    }
    Ok(SweepTable { bit_widths: config.bit_widths.clone(), modes: config.modes.clone(), cells })
}
