//! Epoch loop with parameter quantization at every epoch boundary.
//!
//! Within an epoch, plain minibatch SGD runs in full precision starting from
//! whatever the previous boundary left behind. At the end of the epoch every
//! weight and bias is quantized in place, and those quantized values are
//! both the ones measured and the ones the next epoch continues from. No
//! full-precision shadow copy is kept.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dataset::{snr_db, synth_dataset, Dataset, DatasetConfig, FrameSet};
use super::network::ToyNetwork;
use crate::error::{Error, Result};
use crate::mantissa::QuantSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f32,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
    pub dataset: DatasetConfig,
    pub quant: Option<QuantSpec>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 1,
            epochs: 10,
            learning_rate: 0.3,
            batch_size: 4,
            hidden: vec![64, 64],
            dataset: DatasetConfig::default(),
            quant: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive and finite".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let f = self.dataset.frame_len;
        std::iter::once(f).chain(self.hidden.iter().copied()).chain(std::iter::once(f)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_mse: f64,
    pub val_mse: f64,
    pub val_snr_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub mse: f64,
    pub output_snr_db: f64,
    pub snr_improvement_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainRun {
    pub config: TrainConfig,
    pub network: ToyNetwork,
    pub dataset: Dataset,
    pub history: Vec<EpochMetrics>,
}

impl TrainRun {
    pub fn final_evaluation(&self) -> Result<Evaluation> {
        evaluate(&self.network, &self.dataset.validation)
    }
}

/// Validation-style metrics of `network` on a frame set.
pub fn evaluate(network: &ToyNetwork, set: &FrameSet) -> Result<Evaluation> {
    if network.input_len() != set.frame_len || network.output_len() != set.frame_len {
        return Err(Error::Config(format!(
            "network maps {} -> {} but frames have length {}",
            network.input_len(),
            network.output_len(),
            set.frame_len
        )));
    }
    let mut outputs = Vec::with_capacity(set.clean.len());
    for i in 0..set.len() {
        outputs.extend(network.forward(set.noisy_frame(i)));
    }
    let sq: f64 = outputs.iter().zip(&set.clean).map(|(&y, &c)| (y as f64 - c as f64).powi(2)).sum();
    let mse = if set.clean.is_empty() { 0.0 } else { sq / set.clean.len() as f64 };
    let output_snr_db = snr_db(&set.clean, &outputs);
    Ok(Evaluation { mse, output_snr_db, snr_improvement_db: output_snr_db - set.input_snr_db() })
}

pub fn train(config: &TrainConfig) -> Result<TrainRun> {
    train_with_observer(config, |_, _| {})
}

/// Like [`train`], calling `observer` with each epoch's post-quantization network.
pub fn train_with_observer<F>(config: &TrainConfig, mut observer: F) -> Result<TrainRun>
where
    F: FnMut(usize, &ToyNetwork),
{
    config.validate()?;
    let dataset = synth_dataset(config.seed, &config.dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x005E_ED0F_EF0F);
    let mut network = ToyNetwork::new(&config.layer_sizes(), &mut rng);
    let train_set = &dataset.train;
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            let inputs: Vec<&[f32]> = batch.iter().map(|&i| train_set.noisy_frame(i)).collect();
            let targets: Vec<&[f32]> = batch.iter().map(|&i| train_set.clean_frame(i)).collect();
            let loss = network.sgd_step(&inputs, &targets, config.learning_rate);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
        }
        if !network.all_finite() {
            return Err(Error::Diverged { epoch });
        }
        if let Some(spec) = config.quant {
            network.quantize(spec).map_err(|e| Error::EpochQuantization { epoch, source: Box::new(e) })?;
        }
        observer(epoch, &network);
        let train_eval = evaluate(&network, train_set)?;
        let val_eval = evaluate(&network, &dataset.validation)?;
        if !(train_eval.mse.is_finite() && val_eval.mse.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        history.push(EpochMetrics {
            epoch,
            train_mse: train_eval.mse,
            val_mse: val_eval.mse,
            val_snr_db: val_eval.output_snr_db,
        });
    }
    Ok(TrainRun { config: config.clone(), network, dataset, history })
}

/// Training history as comma-separated rows with a header line.
pub fn history_csv(history: &[EpochMetrics]) -> String {
    let mut out = String::from("epoch,train_mse,val_mse,val_snr_db\n");
    for m in history {
        out.push_str(&format!("{},{:.9},{:.9},{:.6}\n", m.epoch, m.train_mse, m.val_mse, m.val_snr_db));
    }
    out
}
