//! On-disk model container and size accounting.
//!
//! Layout (all multi-byte integers little-endian):
//!
//! ```text
//! magic    4 bytes  "EOFP"
//! version  u8       1
//! n        u8       mantissa chop count
//! len      u8       exponent code length (0 marks a raw full-precision file)
//! min      i16      smallest coded unbiased exponent
//! count    u16      number of tensors
//! per tensor: rank u8, then rank x u32 dimensions
//! payloads, in tensor order
//! ```
//!
//! A packed payload stores each parameter as `[sign][exp_code][residual]`,
//! MSB first, `1 + len + (23 - n)` bits per parameter, and is zero-padded
//! to a byte boundary per tensor. A raw payload is `f32` little-endian.

use std::io::Write;

use crate::bitstream::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::exponent::{self, check_code_widths, ExponentRange, PackedCode};
use crate::float_codec::MANTISSA_BITS;
use crate::mantissa::{quantize_tensor, QuantSpec};

pub const MAGIC: &[u8; 4] = b"EOFP";
pub const VERSION: u8 = 1;
/// Size of the fixed part of the header, before tensor descriptors.
pub const FIXED_HEADER_LEN: usize = 11;
/// Longest code any valid exponent span can need (254 normal exponents plus zero).
pub const MAX_CODE_LEN: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<u32>,
    pub values: Vec<f32>,
}

impl Tensor {
    pub fn new(shape: Vec<u32>, values: Vec<f32>) -> Result<Self> {
        check_shape(&shape, values.len())?;
        Ok(Tensor { shape, values })
    }

    pub fn vector(values: Vec<f32>) -> Self {
        Tensor { shape: vec![values.len() as u32], values }
    }
}

/// Full-precision tensors in order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    pub tensors: Vec<Tensor>,
}

impl Model {
    pub fn new(tensors: Vec<Tensor>) -> Self {
        Model { tensors }
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(|t| t.values.len()).sum()
    }

    pub fn slices(&self) -> Vec<&[f32]> {
        self.tensors.iter().map(|t| t.values.as_slice()).collect()
    }

    /// Mantissa-quantizes every tensor.
    pub fn quantize_mantissa(&self, spec: QuantSpec) -> Result<Model> {
        let mut offset = 0;
        let mut out = Vec::with_capacity(self.tensors.len());
        for t in &self.tensors {
            let values = quantize_tensor(&t.values, spec).map_err(|e| shift_index(e, offset))?;
            offset += t.values.len();
            out.push(Tensor { shape: t.shape.clone(), values });
        }
        Ok(Model { tensors: out })
    }

    /// Exponent-codes an already mantissa-quantized model.
    pub fn pack(&self, n: u32) -> Result<PackedModel> {
        let (range, codes) = exponent::quantize_model(&self.slices(), n)?;
        let tensors =
            self.tensors.iter().zip(codes).map(|(t, codes)| PackedTensor { shape: t.shape.clone(), codes }).collect();
        Ok(PackedModel { n, len: range.len, min: range.min, tensors })
    }
}

fn shift_index(e: Error, offset: usize) -> Error {
    match e {
        Error::NonFinite { index } => Error::NonFinite { index: index + offset },
        Error::ExponentOverflow { index } => Error::ExponentOverflow { index: index + offset },
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackedTensor {
    pub shape: Vec<u32>,
    pub codes: Vec<PackedCode>,
}

/// Exponent-coded model: what the header records plus every code.
#[derive(Debug, Clone, PartialEq)]
pub struct PackedModel {
    pub n: u32,
    pub len: u32,
    pub min: i32,
    pub tensors: Vec<PackedTensor>,
}

impl PackedModel {
    pub fn parameter_count(&self) -> usize {
        self.tensors.iter().map(|t| t.codes.len()).sum()
    }

    pub fn packed_width(&self) -> u32 {
        1 + self.len + (MANTISSA_BITS - self.n)
    }

    /// Range implied by the codes actually present; `max == min` when every code is zero.
    pub fn observed_range(&self) -> ExponentRange {
        let top = self.tensors.iter().flat_map(|t| t.codes.iter()).map(|c| c.exp_code).max().unwrap_or(0);
        let max = if top == 0 { self.min } else { self.min + top as i32 - 1 };
        ExponentRange { max, min: self.min, len: self.len }
    }

    fn decode_range(&self) -> ExponentRange {
        ExponentRange { max: self.min + (1i32 << self.len.min(MAX_CODE_LEN)) - 2, min: self.min, len: self.len }
    }

    pub fn unpack(&self) -> Result<Model> {
        let range = self.decode_range();
        let tensors = self
            .tensors
            .iter()
            .map(|t| {
                let values = exponent::dequantize_codes(&t.codes, &range, self.n)?;
                Ok(Tensor { shape: t.shape.clone(), values })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Model { tensors })
    }
}

/// Either container flavor, as found on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile {
    Raw(Model),
    Packed(PackedModel),
}

fn element_count(shape: &[u32]) -> Option<usize> {
    shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
}

fn check_shape(shape: &[u32], len: usize) -> Result<()> {
    if shape.len() > u8::MAX as usize || element_count(shape) != Some(len) {
        return Err(Error::ShapeMismatch { shape: shape.to_vec(), len });
    }
    Ok(())
}

struct Header<'a> {
    n: u32,
    len: u32,
    min: i32,
    shapes: Vec<&'a [u32]>,
}

fn write_header(out: &mut Vec<u8>, h: &Header<'_>) -> Result<()> {
    if h.shapes.len() > u16::MAX as usize {
        return Err(Error::InvalidHeader(format!("{} tensors exceed the u16 count", h.shapes.len())));
    }
    let min = i16::try_from(h.min).map_err(|_| Error::InvalidHeader(format!("min {} exceeds i16", h.min)))?;
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(h.n as u8);
    out.push(h.len as u8);
    out.extend_from_slice(&min.to_le_bytes());
    out.extend_from_slice(&(h.shapes.len() as u16).to_le_bytes());
    for shape in &h.shapes {
        out.push(shape.len() as u8);
        for d in shape.iter() {
            out.extend_from_slice(&d.to_le_bytes());
        }
    }
    Ok(())
}

pub fn packed_to_bytes(model: &PackedModel) -> Result<Vec<u8>> {
    if model.n > MANTISSA_BITS {
        return Err(Error::InvalidChopCount(model.n));
    }
    if !(1..=MAX_CODE_LEN).contains(&model.len) {
        return Err(Error::InvalidHeader(format!("code length {} outside [1, {MAX_CODE_LEN}]", model.len)));
    }
    for t in &model.tensors {
        check_shape(&t.shape, t.codes.len())?;
    }
    let mut out = Vec::new();
    write_header(
        &mut out,
        &Header {
            n: model.n,
            len: model.len,
            min: model.min,
            shapes: model.tensors.iter().map(|t| t.shape.as_slice()).collect(),
        },
    )?;
    let residual_width = MANTISSA_BITS - model.n;
    for t in &model.tensors {
        let mut w = BitWriter::new();
        for &code in &t.codes {
            check_code_widths(code, model.len, model.n)?;
            w.write_bits(code.sign, 1);
            w.write_bits(code.exp_code, model.len);
            w.write_bits(code.residual, residual_width);
        }
        out.extend_from_slice(&w.finish());
    }
    Ok(out)
}

pub fn raw_to_bytes(model: &Model) -> Result<Vec<u8>> {
    for t in &model.tensors {
        check_shape(&t.shape, t.values.len())?;
    }
    let mut out = Vec::with_capacity(FIXED_HEADER_LEN + 4 * model.parameter_count());
    write_header(
        &mut out,
        &Header { n: 0, len: 0, min: 0, shapes: model.tensors.iter().map(|t| t.shape.as_slice()).collect() },
    )?;
    for t in &model.tensors {
        for v in &t.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn write_packed<W: Write>(model: &PackedModel, mut sink: W) -> Result<()> {
    sink.write_all(&packed_to_bytes(model)?)?;
    Ok(())
}

pub fn write_raw<W: Write>(model: &Model, mut sink: W) -> Result<()> {
    sink.write_all(&raw_to_bytes(model)?)?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, count: usize) -> Result<&'a [u8]> {
        let available = self.data.len() - self.pos;
        if count > available {
            return Err(Error::Truncated { offset: self.pos, needed: count, available });
        }
        let s = &self.data[self.pos..self.pos + count];
        self.pos += count;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn i16(&mut self) -> Result<i16> {
        let b = self.take(2)?;
        Ok(i16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Parses either container flavor. Never panics on malformed input.
pub fn read_model(bytes: &[u8]) -> Result<ModelFile> {
    let mut cur = Cursor { data: bytes, pos: 0 };
    if bytes.len() < MAGIC.len() {
        return Err(Error::Truncated { offset: 0, needed: MAGIC.len(), available: bytes.len() });
    }
    if cur.take(4)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = cur.u8()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let n = cur.u8()? as u32;
    let len = cur.u8()? as u32;
    let min = cur.i16()? as i32;
    let count = cur.u16()? as usize;
    let raw = len == 0;
    if n > MANTISSA_BITS {
        return Err(Error::InvalidChopCount(n));
    }
    if len > MAX_CODE_LEN {
        return Err(Error::InvalidHeader(format!("code length {len} exceeds {MAX_CODE_LEN}")));
    }
    if raw && (n != 0 || min != 0) {
        return Err(Error::InvalidHeader("raw file must carry n = 0 and min = 0".into()));
    }

    let mut shapes = Vec::with_capacity(count);
    let mut counts = Vec::with_capacity(count);
    for _ in 0..count {
        let rank = cur.u8()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(cur.u32()?);
        }
        let elements =
            element_count(&shape).ok_or_else(|| Error::InvalidHeader(format!("tensor shape {shape:?} overflows")))?;
        shapes.push(shape);
        counts.push(elements);
    }

    let width = if raw { 32 } else { 1 + len + (MANTISSA_BITS - n) } as usize;
    let mut expected = 0usize;
    let mut payload_sizes = Vec::with_capacity(count);
    for &c in &counts {
        let bytes = c
            .checked_mul(width)
            .map(|bits| bits.div_ceil(8))
            .ok_or_else(|| Error::InvalidHeader("payload size overflows".into()))?;
        expected = expected.checked_add(bytes).ok_or_else(|| Error::InvalidHeader("payload size overflows".into()))?;
        payload_sizes.push(bytes);
    }
    let available = bytes.len() - cur.pos;
    if expected > available {
        return Err(Error::Truncated { offset: cur.pos, needed: expected, available });
    }
    if expected < available {
        return Err(Error::LengthMismatch { expected, found: available });
    }

    if raw {
        let mut tensors = Vec::with_capacity(count);
        for (shape, size) in shapes.into_iter().zip(payload_sizes) {
            let values =
                cur.take(size)?.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
            tensors.push(Tensor { shape, values });
        }
        return Ok(ModelFile::Raw(Model { tensors }));
    }

    let residual_width = MANTISSA_BITS - n;
    let mut tensors = Vec::with_capacity(count);
    for ((shape, size), elements) in shapes.into_iter().zip(payload_sizes).zip(counts) {
        let mut r = BitReader::new(cur.take(size)?);
        let mut codes = Vec::with_capacity(elements);
        for _ in 0..elements {
            let truncated = || Error::Truncated { offset: cur.pos, needed: size, available: size };
            let sign = r.read_bits(1).ok_or_else(truncated)?;
            let exp_code = r.read_bits(len).ok_or_else(truncated)?;
            let residual = r.read_bits(residual_width).ok_or_else(truncated)?;
            codes.push(PackedCode { sign, exp_code, residual });
        }
        tensors.push(PackedTensor { shape, codes });
    }
    Ok(ModelFile::Packed(PackedModel { n, len, min, tensors }))
}

pub fn read_packed(bytes: &[u8]) -> Result<PackedModel> {
    match read_model(bytes)? {
        ModelFile::Packed(m) => Ok(m),
        ModelFile::Raw(_) => Err(Error::InvalidHeader("expected a packed model, found a raw one".into())),
    }
}

pub fn read_raw(bytes: &[u8]) -> Result<Model> {
    match read_model(bytes)? {
        ModelFile::Raw(m) => Ok(m),
        ModelFile::Packed(_) => Err(Error::InvalidHeader("expected a raw model, found a packed one".into())),
    }
}

/// Rounds half away from zero at `decimals` places; matches how published sizes were rounded.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale + 0.5).floor() / scale
}

/// Byte accounting for one model at each compression stage. KB = 1024 bytes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeReport {
    pub parameter_count: u64,
    pub n: u32,
    pub len: u32,
    pub full_precision_kb: f64,
    pub mantissa_quantized_kb: f64,
    pub exponent_quantized_kb: f64,
    /// Full precision over mantissa-quantized size, `32 / (32 - n)`.
    pub compression_ratio: f64,
}

pub fn size_report(parameter_count: u64, n: u32, len: u32) -> SizeReport {
    let p = parameter_count as f64;
    let kb = |bits: u32| p * bits as f64 / 8.0 / 1024.0;
    SizeReport {
        parameter_count,
        n,
        len,
        full_precision_kb: kb(32),
        mantissa_quantized_kb: kb(32 - n),
        exponent_quantized_kb: kb(1 + len + (MANTISSA_BITS - n)),
        compression_ratio: 32.0 / (32 - n) as f64,
    }
}

impl SizeReport {
    pub fn full_precision_kb_rounded(&self) -> u64 {
        round_half_up(self.full_precision_kb, 0) as u64
    }

    pub fn mantissa_quantized_kb_rounded(&self) -> u64 {
        round_half_up(self.mantissa_quantized_kb, 0) as u64
    }

    pub fn exponent_quantized_kb_rounded(&self) -> u64 {
        round_half_up(self.exponent_quantized_kb, 0) as u64
    }

    /// Mantissa-stage size as a percentage of full precision, from integer KB.
    pub fn mantissa_percent(&self) -> f64 {
        percent(self.mantissa_quantized_kb_rounded(), self.full_precision_kb_rounded())
    }

    /// Final size as a percentage of full precision, from integer KB.
    pub fn exponent_percent(&self) -> f64 {
        percent(self.exponent_quantized_kb_rounded(), self.full_precision_kb_rounded())
    }

    /// Full precision over exponent-quantized size.
    pub fn total_ratio(&self) -> f64 {
        32.0 / (1 + self.len + (MANTISSA_BITS - self.n)) as f64
    }

    pub fn key_values(&self) -> Vec<(&'static str, String)> {
        vec![
            ("parameters", self.parameter_count.to_string()),
            ("n", self.n.to_string()),
            ("bit_width", (32 - self.n).to_string()),
            ("len", self.len.to_string()),
            ("full_precision_kb", format!("{:.1}", self.full_precision_kb)),
            ("mantissa_quantized_kb", format!("{:.1}", self.mantissa_quantized_kb)),
            ("exponent_quantized_kb", format!("{:.1}", self.exponent_quantized_kb)),
            ("full_precision_kb_int", self.full_precision_kb_rounded().to_string()),
            ("mantissa_quantized_kb_int", self.mantissa_quantized_kb_rounded().to_string()),
            ("exponent_quantized_kb_int", self.exponent_quantized_kb_rounded().to_string()),
            ("mantissa_percent", format!("{:.2}", round_half_up(self.mantissa_percent(), 2))),
            ("exponent_percent", format!("{:.2}", round_half_up(self.exponent_percent(), 2))),
            ("compression_ratio", format!("{:.2}", round_half_up(self.compression_ratio, 2))),
            ("total_ratio", format!("{:.2}", round_half_up(self.total_ratio(), 2))),
        ]
    }
}

fn percent(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mantissa::RoundingMode;

    fn worked_model() -> Model {
        let mut v = vec![0.0, -0.0];
        for k in -29..=0 {
            v.push(2f32.powi(k));
            v.push(-(2f32.powi(k)));
        }
        Model::new(vec![Tensor::vector(v)])
    }

    #[test]
    fn empty_model_is_header_only() {
        let m = PackedModel { n: 23, len: 5, min: -29, tensors: vec![] };
        let bytes = packed_to_bytes(&m).unwrap();
        assert_eq!(bytes, b"EOFP\x01\x17\x05\xe3\xff\x00\x00");
        assert_eq!(bytes.len(), FIXED_HEADER_LEN);
        assert_eq!(read_packed(&bytes).unwrap(), m);
    }

    #[test]
    fn worked_example_payload_size() {
        let packed = worked_model().pack(23).unwrap();
        assert_eq!((packed.len, packed.min), (5, -29));
        let bytes = packed_to_bytes(&packed).unwrap();
        let count = 62usize;
        assert_eq!(bytes.len(), FIXED_HEADER_LEN + 1 + 4 + (count * 6).div_ceil(8));
        // first two params are +0 and -0: 000000 100000
        let payload = &bytes[FIXED_HEADER_LEN + 5..];
        assert_eq!(payload[0], 0b0000_0010);
        assert_eq!(read_packed(&bytes).unwrap(), packed);
        assert_eq!(packed.observed_range(), ExponentRange { max: 0, min: -29, len: 5 });
    }

    #[test]
    fn packed_roundtrip_with_residual() {
        let spec = QuantSpec::new(17, RoundingMode::ConditionalRound).unwrap();
        let m = Model::new(vec![
            Tensor::new(vec![2, 3], vec![0.3, -1.7, 0.0, 12.5, -0.001, 7.0]).unwrap(),
            Tensor::new(vec![], vec![-3.25]).unwrap(),
        ]);
        let q = m.quantize_mantissa(spec).unwrap();
        let packed = q.pack(17).unwrap();
        let bytes = packed_to_bytes(&packed).unwrap();
        assert_eq!(read_packed(&bytes).unwrap(), packed);
        assert_eq!(packed.unpack().unwrap(), q);
    }

    #[test]
    fn raw_roundtrip() {
        let m = Model::new(vec![Tensor::new(vec![2, 2], vec![1.0, -2.5, 1e-40, 0.0]).unwrap()]);
        let bytes = raw_to_bytes(&m).unwrap();
        assert_eq!(&bytes[..FIXED_HEADER_LEN], b"EOFP\x01\x00\x00\x00\x00\x01\x00");
        assert_eq!(bytes.len(), FIXED_HEADER_LEN + 1 + 8 + 16);
        assert_eq!(read_raw(&bytes).unwrap(), m);
    }

    #[test]
    fn reader_errors_are_distinguished() {
        let good = packed_to_bytes(&worked_model().pack(23).unwrap()).unwrap();
        let mut bad = good.clone();
        bad[0] = b'X';
        assert_eq!(read_model(&bad), Err(Error::BadMagic));
        let mut bad = good.clone();
        bad[4] = 2;
        assert_eq!(read_model(&bad), Err(Error::UnsupportedVersion(2)));
        assert!(matches!(read_model(&good[..good.len() - 1]), Err(Error::Truncated { .. })));
        assert!(matches!(read_model(&good[..7]), Err(Error::Truncated { .. })));
        let mut long = good.clone();
        long.push(0);
        assert!(matches!(read_model(&long), Err(Error::LengthMismatch { expected: 47, found: 48 })));
        let mut bad = good.clone();
        bad[6] = 9;
        assert!(matches!(read_model(&bad), Err(Error::InvalidHeader(_))));
        let mut bad = good;
        bad[5] = 24;
        assert_eq!(read_model(&bad), Err(Error::InvalidChopCount(24)));
        assert!(matches!(read_model(b"EO"), Err(Error::Truncated { .. })));
    }

    #[test]
    fn writer_rejects_inconsistent_models() {
        let bad_shape = PackedModel {
            n: 23,
            len: 2,
            min: 0,
            tensors: vec![PackedTensor { shape: vec![3], codes: vec![PackedCode::default(); 2] }],
        };
        assert!(matches!(packed_to_bytes(&bad_shape), Err(Error::ShapeMismatch { .. })));
        let wide = PackedModel {
            n: 23,
            len: 2,
            min: 0,
            tensors: vec![PackedTensor {
                shape: vec![1],
                codes: vec![PackedCode { sign: 0, exp_code: 4, residual: 0 }],
            }],
        };
        assert!(matches!(packed_to_bytes(&wide), Err(Error::CodeOutOfRange { .. })));
        let zero_len = PackedModel { n: 0, len: 0, min: 0, tensors: vec![] };
        assert!(packed_to_bytes(&zero_len).is_err());
    }

    #[test]
    fn size_report_table_figures() {
        let large = size_report(2_877_929, 23, 5);
        assert_eq!(
            (
                large.full_precision_kb_rounded(),
                large.mantissa_quantized_kb_rounded(),
                large.exponent_quantized_kb_rounded()
            ),
            (11_242, 3_162, 2_108)
        );
        assert_eq!(format!("{:.2}", round_half_up(large.exponent_percent(), 2)), "18.75");
        assert_eq!(format!("{:.2}", round_half_up(large.mantissa_percent(), 2)), "28.13");
        let small = size_report(450_301, 23, 6);
        assert_eq!(
            (
                small.full_precision_kb_rounded(),
                small.mantissa_quantized_kb_rounded(),
                small.exponent_quantized_kb_rounded()
            ),
            (1_759, 495, 385)
        );
        assert_eq!(format!("{:.2}", round_half_up(small.exponent_percent(), 2)), "21.89");
        assert_eq!(format!("{:.2}", round_half_up(small.mantissa_percent(), 2)), "28.14");
        assert_eq!(format!("{:.2}", round_half_up(small.compression_ratio, 2)), "3.56");
        assert!((small.mantissa_quantized_kb - 494.7).abs() < 0.05);
    }

    #[test]
    fn round_half_up_ties() {
        assert_eq!(round_half_up(494.5, 0), 495.0);
        assert_eq!(round_half_up(2.5, 0), 3.0);
        assert_eq!(round_half_up(0.125, 2), 0.13);
    }

    #[test]
    fn mantissa_errors_carry_global_index() {
        let m = Model::new(vec![Tensor::vector(vec![1.0, 2.0]), Tensor::vector(vec![3.0, f32::MAX])]);
        let spec = QuantSpec::new(23, RoundingMode::ConditionalRound).unwrap();
        assert_eq!(m.quantize_mantissa(spec), Err(Error::ExponentOverflow { index: 3 }));
    }
}
