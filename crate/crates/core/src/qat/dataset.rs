//! Synthetic frame-denoising data: windowed sinusoid mixtures plus white noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetConfig {
    pub frame_len: usize,
    /// Total number of frames before the train/validation split.
    pub frames: usize,
    /// Per-frame input SNR; `f64::INFINITY` means no noise at all.
    pub input_snr_db: f64,
    /// Sinusoids mixed into each clean frame.
    pub components: usize,
    /// Highest sinusoid frequency, in cycles per frame.
    pub max_cycles: f64,
    /// Fraction of frames held out for validation.
    pub validation_fraction: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            frame_len: 32,
            frames: 6000,
            input_snr_db: 0.0,
            components: 2,
            max_cycles: 3.0,
            validation_fraction: 0.2,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frame_len == 0 {
            return Err(Error::Config("frame_len must be positive".into()));
        }
        if self.frames < 2 {
            return Err(Error::Config("need at least two frames".into()));
        }
        if self.components == 0 {
            return Err(Error::Config("components must be positive".into()));
        }
        if self.input_snr_db.is_nan() || self.input_snr_db == f64::NEG_INFINITY {
            return Err(Error::Config("input_snr_db must be a number or +inf".into()));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::Config("validation_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Noisy inputs and clean targets, both `frames x frame_len`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSet {
    pub frame_len: usize,
    pub noisy: Vec<f32>,
    pub clean: Vec<f32>,
}

impl FrameSet {
    pub fn len(&self) -> usize {
        self.clean.len() / self.frame_len
    }

    pub fn is_empty(&self) -> bool {
        self.clean.is_empty()
    }

    pub fn noisy_frame(&self, i: usize) -> &[f32] {
        &self.noisy[i * self.frame_len..(i + 1) * self.frame_len]
    }

    pub fn clean_frame(&self, i: usize) -> &[f32] {
        &self.clean[i * self.frame_len..(i + 1) * self.frame_len]
    }

    /// Set-level SNR of the noisy inputs against the clean frames.
    pub fn input_snr_db(&self) -> f64 {
        snr_db(&self.clean, &self.noisy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: FrameSet,
    pub validation: FrameSet,
}

/// Output SNRs are capped here when the error is exactly zero.
pub const SNR_CAP_DB: f64 = 200.0;

/// `10 log10(sum clean^2 / sum (estimate - clean)^2)`, capped at [`SNR_CAP_DB`].
pub fn snr_db(clean: &[f32], estimate: &[f32]) -> f64 {
    let signal: f64 = clean.iter().map(|&c| (c as f64).powi(2)).sum();
    let noise: f64 = clean.iter().zip(estimate).map(|(&c, &e)| (e as f64 - c as f64).powi(2)).sum();
    if noise == 0.0 {
        return SNR_CAP_DB;
    }
    (10.0 * (signal / noise).log10()).min(SNR_CAP_DB)
}

fn hann(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len).map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * (i as f64 + 0.5) / len as f64).cos()).collect()
}

pub fn synth_dataset(seed: u64, config: &DatasetConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = config.frame_len;
    let window = hann(len);
    let noise_gain = if config.input_snr_db.is_infinite() && config.input_snr_db > 0.0 {
        0.0
    } else {
        10f64.powf(-config.input_snr_db / 20.0)
    };

    let mut noisy = Vec::with_capacity(config.frames * len);
    let mut clean = Vec::with_capacity(config.frames * len);
    let mut frame = vec![0f64; len];
    let mut noise = vec![0f64; len];
    for _ in 0..config.frames {
        frame.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..config.components {
            let amplitude: f64 = rng.random_range(0.2..1.0);
            let cycles: f64 = rng.random_range(0.5..config.max_cycles.max(0.5 + f64::EPSILON));
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            for (i, v) in frame.iter_mut().enumerate() {
                let t = i as f64 / len as f64;
                *v += amplitude * (std::f64::consts::TAU * cycles * t + phase).sin();
            }
        }
        for (v, w) in frame.iter_mut().zip(&window) {
            *v *= w;
        }
        for z in noise.iter_mut() {
            *z = StandardNormal.sample(&mut rng);
        }
        let signal_power: f64 = frame.iter().map(|v| v * v).sum();
        let noise_power: f64 = noise.iter().map(|v| v * v).sum();
        let scale = if noise_power > 0.0 { noise_gain * (signal_power / noise_power).sqrt() } else { 0.0 };
        for (c, z) in frame.iter().zip(&noise) {
            clean.push(*c as f32);
            noisy.push((c + scale * z) as f32);
        }
    }

    let val_frames = ((config.frames as f64 * config.validation_fraction).round() as usize).clamp(1, config.frames - 1);
    let split = (config.frames - val_frames) * len;
    let validation = FrameSet { frame_len: len, noisy: noisy.split_off(split), clean: clean.split_off(split) };
    let train = FrameSet { frame_len: len, noisy, clean };
    Ok(Dataset { train, validation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_free_inputs_equal_targets() {
        let cfg = DatasetConfig { input_snr_db: f64::INFINITY, frames: 50, ..Default::default() };
        let d = synth_dataset(3, &cfg).unwrap();
        assert_eq!(d.train.noisy, d.train.clean);
        assert_eq!(d.validation.noisy, d.validation.clean);
        assert_eq!(d.validation.input_snr_db(), SNR_CAP_DB);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = DatasetConfig { frames: 40, ..Default::default() };
        assert_eq!(synth_dataset(9, &cfg).unwrap(), synth_dataset(9, &cfg).unwrap());
        assert_ne!(synth_dataset(9, &cfg).unwrap(), synth_dataset(10, &cfg).unwrap());
    }

    #[test]
    fn split_sizes() {
        let cfg = DatasetConfig { frames: 100, ..Default::default() };
        let d = synth_dataset(1, &cfg).unwrap();
        assert_eq!(d.train.len(), 80);
        assert_eq!(d.validation.len(), 20);
        assert_eq!(d.train.noisy_frame(3).len(), 32);
    }

    #[test]
    fn measured_snr_matches_target() {
        let cfg = DatasetConfig { input_snr_db: 6.0, frames: 300, ..Default::default() };
        let d = synth_dataset(5, &cfg).unwrap();
        for set in [&d.train, &d.validation] {
            assert!((set.input_snr_db() - 6.0).abs() <= 0.5, "{}", set.input_snr_db());
        }
    }

    #[test]
    fn rejects_degenerate_configs() {
        assert!(synth_dataset(0, &DatasetConfig { frame_len: 0, ..Default::default() }).is_err());
        assert!(synth_dataset(0, &DatasetConfig { frames: 1, ..Default::default() }).is_err());
        assert!(synth_dataset(0, &DatasetConfig { input_snr_db: f64::NAN, ..Default::default() }).is_err());
    }
}
