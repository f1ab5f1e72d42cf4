//! Command implementations behind the `eofp` binary.
//!
//! Every command returns a [`CommandOutcome`] instead of exiting, so the
//! whole surface is testable in-process. Exit codes:
//!
//! | code | meaning                                               |
//! |------|-------------------------------------------------------|
//! | 0    | success                                               |
//! | 1    | usage error (bad flags or arguments)                  |
//! | 2    | data or format error (unreadable, malformed, config)  |
//! | 3    | numeric error (overflow, non-finite, divergence, ...) |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::exponent::ExponentRange;
use crate::float_codec::{EXPONENT_BIAS, EXPONENT_MASK, MANTISSA_BITS, MANTISSA_MASK};
use crate::mantissa::{QuantSpec, RoundingMode};
use crate::model_store::{self, read_model, round_half_up, size_report, Model, ModelFile};
use crate::qat::{self, ConfigFile};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CommandOutcome {
    fn ok(stdout: String) -> Self {
        CommandOutcome { exit_code: EXIT_SUCCESS, stdout, stderr: String::new() }
    }

    fn failure(err: &Error) -> Self {
        CommandOutcome { exit_code: exit_code_for(err), stdout: String::new(), stderr: format!("error: {err}\n") }
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::NonFinite { .. }
        | Error::ExponentOverflow { .. }
        | Error::AllZero
        | Error::Subnormal { .. }
        | Error::ExponentOutOfRange { .. }
        | Error::NotNormal { .. }
        | Error::Diverged { .. }
        | Error::EpochQuantization { .. } => EXIT_NUMERIC,
        Error::FieldOutOfRange { .. }
        | Error::InvalidChopCount(_)
        | Error::MantissaResidue { .. }
        | Error::CodeOutOfRange { .. }
        | Error::DecodedExponent(_)
        | Error::BadMagic
        | Error::UnsupportedVersion(_)
        | Error::Truncated { .. }
        | Error::LengthMismatch { .. }
        | Error::InvalidHeader(_)
        | Error::ShapeMismatch { .. }
        | Error::Io(_)
        | Error::Config(_) => EXIT_DATA,
    }
}

#[derive(Debug, Parser)]
#[command(name = "eofp", version, about = "Exponent-only floating-point model quantization")]
pub struct Cli {
    /// Print line-oriented key=value output instead of the human report
    #[arg(long, global = true)]
    pub machine: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quantize a raw full-precision model file
    Quantize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Bits kept per parameter (32 - n)
        #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u32).range(9..=32))]
        bits: u32,
        /// Chop the dropped bits instead of conditional rounding
        #[arg(long)]
        chop: bool,
        /// Write mantissa-quantized values as a raw file, skipping exponent coding
        #[arg(long)]
        no_exponent_stage: bool,
    },
    /// Decode a packed model back to a raw full-precision file
    Dequantize {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print header fields, exponent statistics and a log2 magnitude histogram
    Inspect { input: PathBuf },
    /// Train the toy denoiser with epoch-boundary quantization
    Train {
        config: PathBuf,
        /// Where to write the per-epoch history CSV (stdout report only if absent)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the bit-width x rounding-mode grid
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli),
        Err(e) => {
            let text = e.render().to_string();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CommandOutcome::ok(text)
                }
                _ => CommandOutcome { exit_code: EXIT_USAGE, stdout: String::new(), stderr: text },
            }
        }
    }
}

pub fn execute(cli: &Cli) -> CommandOutcome {
    let result = match &cli.command {
        Command::Quantize { input, output, bits, chop, no_exponent_stage } => {
            let mode = if *chop { RoundingMode::Chop } else { RoundingMode::ConditionalRound };
            QuantSpec::from_bit_width(*bits, mode)
                .and_then(|spec| cmd_quantize(input, output, spec, !no_exponent_stage, cli.machine))
        }
        Command::Dequantize { input, output } => cmd_dequantize(input, output, cli.machine),
        Command::Inspect { input } => cmd_inspect(input, cli.machine),
        Command::Train { config, output } => cmd_train(config, output.as_deref(), cli.machine),
        Command::Sweep { config, output } => cmd_sweep(config, output.as_deref(), cli.machine),
    };
    match result {
        Ok(stdout) => CommandOutcome::ok(stdout),
        Err(e) => CommandOutcome::failure(&e),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn render(machine: bool, pairs: &[(String, String)], human: String) -> String {
    if machine {
        pairs.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    } else {
        human
    }
}

fn kv(k: impl Into<String>, v: impl ToString) -> (String, String) {
    (k.into(), v.to_string())
}

pub fn cmd_quantize(
    input: &Path,
    output: &Path,
    spec: QuantSpec,
    exponent_stage: bool,
    machine: bool,
) -> Result<String> {
    let model = model_store::read_raw(&read_file(input)?)?;
    let quantized = model.quantize_mantissa(spec)?;
    let count = quantized.parameter_count() as u64;
    let mut pairs = vec![kv("command", "quantize"), kv("mode", spec.mode()), kv("exponent_stage", exponent_stage)];
    let mut human = format!(
        "quantized {count} parameters to bit width {} (n = {}, {})\n",
        spec.bit_width(),
        spec.n(),
        match spec.mode() {
            RoundingMode::ConditionalRound => "conditional rounding",
            RoundingMode::Chop => "direct chopping",
        }
    );
    if exponent_stage {
        let packed = quantized.pack(spec.n())?;
        let range = packed.observed_range();
        let bytes = model_store::packed_to_bytes(&packed)?;
        write_file(output, &bytes)?;
        let report = size_report(count, spec.n(), range.len);
        pairs.push(kv("max", range.max));
        pairs.push(kv("min", range.min));
        pairs.extend(report.key_values().into_iter().map(|(k, v)| (k.to_string(), v)));
        pairs.push(kv("file_bytes", bytes.len()));
        let _ = writeln!(human, "exponent range {{max, min, len}} = {{{}, {}, {}}}", range.max, range.min, range.len);
        let _ = writeln!(human, "bits per parameter: {}", range.packed_width(spec.n()));
        let _ = writeln!(
            human,
            "size: {:.1} KB full precision, {:.1} KB mantissa-quantized, {:.1} KB exponent-quantized",
            report.full_precision_kb, report.mantissa_quantized_kb, report.exponent_quantized_kb
        );
        let _ = writeln!(
            human,
            "mantissa-quantized model is {:.2}% of full precision (ratio {:.2})",
            round_half_up(report.mantissa_percent(), 2),
            round_half_up(report.compression_ratio, 2)
        );
        let _ = writeln!(
            human,
            "exponent-quantized model is {:.2}% of full precision (ratio {:.2})",
            round_half_up(report.exponent_percent(), 2),
            round_half_up(report.total_ratio(), 2)
        );
        let _ = writeln!(human, "wrote {} bytes to {}", bytes.len(), output.display());
    } else {
        let bytes = model_store::raw_to_bytes(&quantized)?;
        write_file(output, &bytes)?;
        let report = size_report(count, spec.n(), 0);
        pairs.push(kv("parameters", count));
        pairs.push(kv("n", spec.n()));
        pairs.push(kv("bit_width", spec.bit_width()));
        pairs.push(kv("full_precision_kb", format!("{:.1}", report.full_precision_kb)));
        pairs.push(kv("mantissa_quantized_kb", format!("{:.1}", report.mantissa_quantized_kb)));
        pairs.push(kv("mantissa_percent", format!("{:.2}", round_half_up(report.mantissa_percent(), 2))));
        pairs.push(kv("compression_ratio", format!("{:.2}", round_half_up(report.compression_ratio, 2))));
        pairs.push(kv("file_bytes", bytes.len()));
        let _ = writeln!(
            human,
            "size: {:.1} KB full precision, {:.1} KB at {} bits per parameter ({:.2}%, ratio {:.2})",
            report.full_precision_kb,
            report.mantissa_quantized_kb,
            spec.bit_width(),
            round_half_up(report.mantissa_percent(), 2),
            round_half_up(report.compression_ratio, 2)
        );
        let _ = writeln!(human, "wrote raw values ({} bytes) to {}", bytes.len(), output.display());
    }
    Ok(render(machine, &pairs, human))
}

pub fn cmd_dequantize(input: &Path, output: &Path, machine: bool) -> Result<String> {
    let packed = model_store::read_packed(&read_file(input)?)?;
    let model = packed.unpack()?;
    let bytes = model_store::raw_to_bytes(&model)?;
    write_file(output, &bytes)?;
    let pairs = vec![
        kv("command", "dequantize"),
        kv("parameters", model.parameter_count()),
        kv("n", packed.n),
        kv("file_bytes", bytes.len()),
    ];
    let human = format!(
        "decoded {} parameters (n = {}) into {} raw bytes at {}\n",
        model.parameter_count(),
        packed.n,
        bytes.len(),
        output.display()
    );
    Ok(render(machine, &pairs, human))
}

/// Magnitude statistics of a model, tolerant of every bit pattern.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Log2Histogram {
    /// `(unbiased exponent, count)` for every exponent between the extremes.
    pub buckets: Vec<(i32, u64)>,
    pub zeros: u64,
    pub subnormals: u64,
    pub non_finite: u64,
}

impl Log2Histogram {
    pub fn from_values<'a>(values: impl IntoIterator<Item = &'a f32>) -> Self {
        let mut counts = std::collections::BTreeMap::new();
        let mut h = Log2Histogram::default();
        for v in values {
            let bits = v.to_bits();
            let biased = (bits & EXPONENT_MASK) >> MANTISSA_BITS;
            match biased {
                0 if bits & MANTISSA_MASK == 0 => h.zeros += 1,
                0 => h.subnormals += 1,
                0xFF => h.non_finite += 1,
                e => *counts.entry(e as i32 - EXPONENT_BIAS).or_insert(0u64) += 1,
            }
        }
        if let (Some(&lo), Some(&hi)) = (counts.keys().next(), counts.keys().next_back()) {
            h.buckets = (lo..=hi).map(|e| (e, counts.get(&e).copied().unwrap_or(0))).collect();
        }
        h
    }

    pub fn total(&self) -> u64 {
        self.buckets.iter().map(|(_, c)| c).sum::<u64>() + self.zeros + self.subnormals + self.non_finite
    }

    /// Range over the normal, nonzero values, if any.
    pub fn range(&self) -> Option<ExponentRange> {
        let lo = self.buckets.first()?.0;
        let hi = self.buckets.last()?.0;
        ExponentRange::from_extremes(lo, hi).ok()
    }
}

pub fn cmd_inspect(input: &Path, machine: bool) -> Result<String> {
    let file = read_model(&read_file(input)?)?;
    let mut pairs = vec![kv("command", "inspect")];
    let mut human = String::new();
    let (model, shapes): (Model, Vec<Vec<u32>>) = match &file {
        ModelFile::Raw(m) => {
            pairs.push(kv("format", "raw"));
            pairs.push(kv("n", 0));
            let _ = writeln!(human, "format: raw (unquantized, n=0)");
            (m.clone(), m.tensors.iter().map(|t| t.shape.clone()).collect())
        }
        ModelFile::Packed(p) => {
            pairs.push(kv("format", "packed"));
            pairs.push(kv("n", p.n));
            pairs.push(kv("bit_width", 32 - p.n));
            pairs.push(kv("header_len", p.len));
            pairs.push(kv("header_min", p.min));
            pairs.push(kv("bits_per_parameter", p.packed_width()));
            let _ = writeln!(
                human,
                "format: packed (n={}, bit width {}, header len={}, min={}, {} bits per parameter)",
                p.n,
                32 - p.n,
                p.len,
                p.min,
                p.packed_width()
            );
            (p.unpack()?, p.tensors.iter().map(|t| t.shape.clone()).collect())
        }
    };
    pairs.push(kv("version", model_store::VERSION));
    pairs.push(kv("tensors", shapes.len()));
    let _ = writeln!(human, "version: {}", model_store::VERSION);
    let _ = writeln!(human, "tensors: {}", shapes.len());
    for (i, s) in shapes.iter().enumerate() {
        let dims: Vec<String> = s.iter().map(|d| d.to_string()).collect();
        pairs.push(kv(format!("tensor.{i}.shape"), dims.join("x")));
        let _ = writeln!(human, "  tensor {i}: [{}]", dims.join(", "));
    }
    let count = model.parameter_count();
    pairs.push(kv("parameters", count));
    let _ = writeln!(human, "parameters: {count}");

    let hist = Log2Histogram::from_values(model.tensors.iter().flat_map(|t| t.values.iter()));
    match hist.range() {
        Some(r) => {
            pairs.push(kv("max", r.max));
            pairs.push(kv("min", r.min));
            pairs.push(kv("len", r.len));
            let _ = writeln!(human, "exponent range {{max, min, len}} = {{{}, {}, {}}}", r.max, r.min, r.len);
        }
        None => {
            let _ = writeln!(human, "exponent range: none (no normal nonzero values)");
        }
    }
    let peak = hist.buckets.iter().map(|(_, c)| *c).max().unwrap_or(0).max(1);
    let _ = writeln!(human, "log2 |value| histogram:");
    for &(e, c) in &hist.buckets {
        pairs.push(kv(format!("hist.{e}"), c));
        let bar = "#".repeat(((c * 50).div_ceil(peak)) as usize);
        let _ = writeln!(human, "  {e:>5} {c:>10} {bar}");
    }
    for (name, c) in [("zero", hist.zeros), ("subnormal", hist.subnormals), ("non_finite", hist.non_finite)] {
        pairs.push(kv(format!("hist.{name}"), c));
        if c > 0 || name == "zero" {
            let _ = writeln!(human, "  {name:>5} {c:>10}");
        }
    }
    Ok(render(machine, &pairs, human))
}

fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = String::from_utf8(read_file(path)?).map_err(|_| Error::Config("config is not UTF-8".into()))?;
    ConfigFile::parse(&text)
}

pub fn cmd_train(config: &Path, output: Option<&Path>, machine: bool) -> Result<String> {
    let cfg = load_config(config)?.train_config()?;
    let run = qat::train(&cfg)?;
    let eval = run.final_evaluation()?;
    let csv = qat::history_csv(&run.history);
    if let Some(path) = output {
        write_file(path, csv.as_bytes())?;
    }
    let quant =
        cfg.quant.map_or("none".to_string(), |q| format!("bits={} n={} mode={}", q.bit_width(), q.n(), q.mode()));
    let pairs = vec![
        kv("command", "train"),
        kv("seed", cfg.seed),
        kv("epochs", cfg.epochs),
        kv("quantization", &quant),
        kv("parameters", run.network.parameter_count()),
        kv("val_mse", format!("{:.9}", eval.mse)),
        kv("val_snr_db", format!("{:.6}", eval.output_snr_db)),
        kv("snr_improvement_db", format!("{:.6}", eval.snr_improvement_db)),
    ];
    let mut human = format!(
        "trained {} parameters for {} epochs (seed {}, quantization {quant})\n",
        run.network.parameter_count(),
        cfg.epochs,
        cfg.seed
    );
    let _ = writeln!(
        human,
        "validation: mse {:.6}, output SNR {:.3} dB, improvement {:.3} dB",
        eval.mse, eval.output_snr_db, eval.snr_improvement_db
    );
    if output.is_none() {
        human.push_str(&csv);
    }
    let mut out = render(machine, &pairs, human);
    if machine && output.is_none() {
        out.push_str(&csv);
    }
    Ok(out)
}

pub fn cmd_sweep(config: &Path, output: Option<&Path>, machine: bool) -> Result<String> {
    let cfg = load_config(config)?.sweep_config()?;
    let table = qat::sweep(&cfg)?;
    let csv = table.to_csv();
    if let Some(path) = output {
        write_file(path, csv.as_bytes())?;
    }
    if machine {
        return Ok(csv);
    }
    let mut human = format!("sweep over {} seeds; mean validation MSE and SNR improvement\n", cfg.seeds.len());
    human.push_str(&table.to_text());
    Ok(human)
}
