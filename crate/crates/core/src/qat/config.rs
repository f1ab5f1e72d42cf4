//! `key = value` run configuration files.
//!
//! Recognized keys:
//!
//! | key            | meaning                                          | default |
//! |----------------|--------------------------------------------------|---------|
//! | `seed`         | dataset, init and shuffle seed                   | 1       |
//! | `epochs`       | training epochs                                  | 10      |
//! | `lr`           | SGD learning rate                                | 0.3     |
//! | `frames`       | frames generated before the 80/20 split          | 6000    |
//! | `frame_len`    | samples per frame (network input/output width)   | 32      |
//! | `input_snr_db` | per-frame input SNR, `inf` for clean inputs      | 0       |
//! | `n`            | chop count; absent means no quantization         | -       |
//! | `bits`         | alternative to `n`: remaining bit width (32 - n) | -       |
//! | `mode`         | `round` (conditional rounding) or `chop`         | round   |
//! | `batch_size`   | minibatch size                                   | 4       |
//! | `hidden`       | comma-separated hidden widths                    | 64,64   |
//! | `seeds`        | sweep only: number of seeds, starting at `seed`  | 5       |
//! | `bit_widths`   | sweep only: comma-separated bit widths           | 32,26,20,14,12,11,10,9 |
//! | `modes`        | sweep only: comma-separated modes                | round,chop |
//!
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::str::FromStr;

use super::sweep::{SweepConfig, TABLE_BIT_WIDTHS};
use super::train::TrainConfig;
use crate::error::{Error, Result};
use crate::mantissa::{QuantSpec, RoundingMode};

const KNOWN_KEYS: &[&str] = &[
    "seed",
    "epochs",
    "lr",
    "frames",
    "frame_len",
    "input_snr_db",
    "n",
    "bits",
    "mode",
    "batch_size",
    "hidden",
    "seeds",
    "bit_widths",
    "modes",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(ConfigFile { entries })
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.entries
            .get(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("invalid value `{v}` for `{key}`"))))
            .transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.entries
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim().parse::<T>().map_err(|_| Error::Config(format!("invalid list item `{s}` for `{key}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let mut c = TrainConfig::default();
        if let Some(v) = self.get("seed")? {
            c.seed = v;
        }
        if let Some(v) = self.get("epochs")? {
            c.epochs = v;
        }
        if let Some(v) = self.get("lr")? {
            c.learning_rate = v;
        }
        if let Some(v) = self.get("frames")? {
            c.dataset.frames = v;
        }
        if let Some(v) = self.get("frame_len")? {
            c.dataset.frame_len = v;
        }
        if let Some(v) = self.get::<f64>("input_snr_db")? {
            c.dataset.input_snr_db = v;
        }
        if let Some(v) = self.get("batch_size")? {
            c.batch_size = v;
        }
        if let Some(v) = self.list("hidden")? {
            c.hidden = v;
        }
        let mode = self.get::<RoundingMode>("mode")?.unwrap_or(RoundingMode::ConditionalRound);
        c.quant = match (self.get::<u32>("n")?, self.get::<u32>("bits")?) {
            (Some(_), Some(_)) => return Err(Error::Config("give either `n` or `bits`, not both".into())),
            (Some(n), None) => Some(QuantSpec::new(n, mode)?),
            (None, Some(bits)) => Some(QuantSpec::from_bit_width(bits, mode)?),
            (None, None) => None,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let base = TrainConfig { quant: None, ..self.train_config()? };
        let seed_count: u64 = self.get("seeds")?.unwrap_or(5);
        if seed_count == 0 {
            return Err(Error::Config("`seeds` must be positive".into()));
        }
        let seeds = (0..seed_count).map(|i| base.seed.wrapping_add(i)).collect();
        let bit_widths = self.list("bit_widths")?.unwrap_or_else(|| TABLE_BIT_WIDTHS.to_vec());
        for &bw in &bit_widths {
            QuantSpec::from_bit_width(bw, RoundingMode::Chop)?;
        }
        let modes = self.list("modes")?.unwrap_or_else(|| RoundingMode::ALL.to_vec());
        Ok(SweepConfig { base, bit_widths, modes, seeds })
    }
}
