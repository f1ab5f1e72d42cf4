//! Quantization-aware training on a synthetic denoising regression.

pub mod config;
pub mod dataset;
pub mod network;
pub mod sweep;
pub mod train;

pub use config::ConfigFile;
pub use dataset::{snr_db, synth_dataset, Dataset, DatasetConfig, FrameSet, SNR_CAP_DB};
pub use network::{Activation, Dense, ToyNetwork};
pub use sweep::{sweep, SweepCell, SweepConfig, SweepTable, TABLE_BIT_WIDTHS};
pub use train::{evaluate, history_csv, train, train_with_observer, EpochMetrics, Evaluation, TrainConfig, TrainRun};
