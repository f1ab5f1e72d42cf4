//! Builds a two-tensor model, quantizes it, writes the packed container and
//! reads it back.
//!
//! ```text
//! cargo run --example model_file [path]
//! ```

use eofp::model_store::{packed_to_bytes, raw_to_bytes};
use eofp::{read_model, Model, ModelFile, QuantSpec, RoundingMode, Tensor};

fn main() -> eofp::Result<()> {
    let weights: Vec<f32> = (0..48).map(|i| ((i as f32) * 0.37).sin() * 0.5).collect();
    let biases: Vec<f32> = (0..8).map(|i| (i as f32 - 4.0) * 0.01).collect();
    let model = Model::new(vec![Tensor::new(vec![8, 6], weights)?, Tensor::vector(biases)]);

    let n = 21;
    let quantized = model.quantize_mantissa(QuantSpec::new(n, RoundingMode::ConditionalRound)?)?;
    let packed = quantized.pack(n)?;
    let bytes = packed_to_bytes(&packed)?;
    println!(
        "{} parameters: raw file {} bytes, packed file {} bytes ({} bits each)",
        model.parameter_count(),
        raw_to_bytes(&model)?.len(),
        bytes.len(),
        packed.packed_width()
    );
    println!("header: {:02x?}", &bytes[..11]);

    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, &bytes)?;
        println!("wrote {path}");
    }

    match read_model(&bytes)? {
        ModelFile::Packed(p) => assert_eq!(p.unpack()?, quantized),
        ModelFile::Raw(_) => unreachable!("packed bytes parse as packed"),
    }
    println!("read back: identical to the mantissa-quantized model");
    Ok(())
}
