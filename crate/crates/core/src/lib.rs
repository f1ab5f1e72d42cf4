//! Exponent-only floating-point (EOFP) quantization for neural-network parameters.
//!
//! The pipeline has two stages:
//!
//! - [`mantissa`] drops the last `n` bits of every `f32` parameter, either by
//!   direct chopping or with conditional rounding. At `n = 23` every
//!   parameter becomes zero or a signed power of two.
//! - [`exponent`] scans the model-wide exponent span and re-codes each
//!   exponent as a small offset, reserving code 0 for zero. This stage is
//!   lossless.
//!
//! [`model_store`] packs the result into a compact container and accounts
//! for sizes at each stage; [`qat`] trains a small denoising network that
//! quantizes all of its parameters at the end of every epoch; [`cli`] backs
//! the `eofp` binary.

pub mod bitstream;
pub mod cli;
pub mod error;
pub mod exponent;
pub mod float_codec;
pub mod mantissa;
pub mod model_store;
pub mod qat;

pub use error::{Error, Result};
pub use exponent::{decode_param, encode_param, quantize_model, scan_range, ExponentRange, PackedCode};
pub use float_codec::{compose, decimal_value, decompose, unbiased_exponent, FloatFields};
pub use mantissa::{quantize_tensor, quantize_value, QuantSpec, RoundingMode};
pub use model_store::{read_model, size_report, Model, ModelFile, PackedModel, PackedTensor, SizeReport, Tensor};
